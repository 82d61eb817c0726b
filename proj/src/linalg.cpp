#include "mtop/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace mtop {

double frobenius_norm(const Matrix& a, int n) {
  double s = 0.0;
  for (int i = 0; i < n * n; ++i) s += a[i] * a[i];
  return std::sqrt(s);
}

std::vector<double> jacobi_eigenvalues(Matrix a, int n, double tol) {
  double scale = frobenius_norm(a, n);
  double thresh = tol * (scale > 0.0 ? scale : 1.0);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (std::sqrt(2.0 * off) <= thresh) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a[p * n + q];
        if (std::fabs(apq) <= thresh * 1e-3) continue;
        double app = a[p * n + p], aqq = a[q * n + q];
        double theta = (aqq - app) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a[i * n + i];
  std::sort(eig.begin(), eig.end());
  return eig;
}

bool cholesky(const Matrix& a, int n, Matrix& lower, double tol) {
  lower.assign(n * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= lower[i * n + k] * lower[j * n + k];
      if (i == j) {
        if (s <= tol) return false;
        lower[i * n + i] = std::sqrt(s);
      } else {
        lower[i * n + j] = s / lower[j * n + j];
      }
    }
  }
  return true;
}

bool invert(const Matrix& a, int n, Matrix& inv, double& det) {
  Matrix lu = a;
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  det = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(lu[r * n + col]) > std::fabs(lu[piv * n + col])) piv = r;
    if (piv != col) {
      for (int k = 0; k < n; ++k) std::swap(lu[col * n + k], lu[piv * n + k]);
      std::swap(perm[col], perm[piv]);
      det = -det;
    }
    double d = lu[col * n + col];
    det *= d;
    if (d == 0.0) {
      det = 0.0;
      return false;
    }
    for (int r = col + 1; r < n; ++r) {
      double f = lu[r * n + col] / d;
      lu[r * n + col] = f;
      for (int k = col + 1; k < n; ++k) lu[r * n + k] -= f * lu[col * n + k];
    }
  }
  inv.assign(n * n, 0.0);
  std::vector<double> x(n), b(n);
  for (int rhs = 0; rhs < n; ++rhs) {
    for (int i = 0; i < n; ++i) b[i] = perm[i] == rhs ? 1.0 : 0.0;
    for (int i = 0; i < n; ++i) {
      double s = b[i];
      for (int k = 0; k < i; ++k) s -= lu[i * n + k] * x[k];
      x[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = x[i];
      for (int k = i + 1; k < n; ++k) s -= lu[i * n + k] * x[k];
      x[i] = s / lu[i * n + i];
    }
    for (int i = 0; i < n; ++i) inv[i * n + rhs] = x[i];
  }
  return true;
}

NuclearFrobenius nuclear_frobenius_bounds(const Matrix& a, int n) {
  NuclearFrobenius out;
  out.frobenius = frobenius_norm(a, n);
  Matrix ata(n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += a[k * n + i] * a[k * n + j];
      ata[i * n + j] = s;
    }
  std::vector<double> eig = jacobi_eigenvalues(std::move(ata), n);
  double smax = 0.0;
  std::vector<double> sv;
  for (double l : eig) {
    double s = std::sqrt(std::max(0.0, l));
    sv.push_back(s);
    smax = std::max(smax, s);
  }
  for (double s : sv) {
    out.nuclear += s;
    if (s > 1e-10 * smax) ++out.rank;
  }
  return out;
}

}  // namespace mtop
