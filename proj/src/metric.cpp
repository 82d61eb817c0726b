#include "mtop/metric.hpp"

#include <cmath>
#include <map>

namespace mtop {

const char* to_string(Signature s) {
  return s == Signature::Lorentzian ? "lorentzian" : "riemannian";
}

const char* to_string(PointSignature s) {
  switch (s) {
    case PointSignature::Lorentzian: return "lorentzian";
    case PointSignature::Riemannian: return "riemannian";
    case PointSignature::Degenerate: return "degenerate";
    default: return "other";
  }
}

// --- symbolic determinant / inverse --------------------------------------

namespace {

// Expansion along the first remaining row; minors keyed by column mask so
// shared submatrices become shared subtrees.
Expr det_minor(const std::vector<Expr>& m, int n, int row, unsigned colmask,
               std::map<unsigned, Expr>& memo) {
  auto it = memo.find(colmask);
  if (it != memo.end()) return it->second;
  Expr result;
  int sign = 1;
  bool first = true;
  for (int c = 0; c < n; ++c) {
    if (!(colmask & (1u << c))) continue;
    Expr entry = m[row * n + c];
    Expr term;
    unsigned rest = colmask & ~(1u << c);
    if (rest == 0) {
      term = entry;
    } else {
      term = mul(entry, det_minor(m, n, row + 1, rest, memo));
    }
    if (sign < 0) term = neg(term);
    result = first ? term : add(result, term);
    first = false;
    sign = -sign;
  }
  memo[colmask] = result;
  return result;
}

}  // namespace

Expr symbolic_det(const std::vector<Expr>& m, int n) {
  if (n > 6) throw GeometryError("symbolic inverse limited to n <= 6");
  std::map<unsigned, Expr> memo;
  return det_minor(m, n, 0, (1u << n) - 1, memo);
}

std::vector<Expr> symbolic_inverse(const std::vector<Expr>& m, int n) {
  Expr det = symbolic_det(m, n);
  std::vector<Expr> inv(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // cofactor C_ji / det (adjugate transpose)
      std::vector<Expr> sub;
      sub.reserve((n - 1) * (n - 1));
      for (int r = 0; r < n; ++r) {
        if (r == j) continue;
        for (int c = 0; c < n; ++c) {
          if (c == i) continue;
          sub.push_back(m[r * n + c]);
        }
      }
      Expr cof = n == 1 ? constant(1.0) : symbolic_det(sub, n - 1);
      if ((i + j) % 2 == 1) cof = neg(cof);
      inv[i * n + j] = div(cof, det);
    }
  }
  return inv;
}

// --- MetricField ----------------------------------------------------------

static void require_symmetric_storage(std::vector<Expr>& matrix, int n) {
  // store one Expr per unordered pair so symmetry is structural
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) matrix[j * n + i] = matrix[i * n + j];
}

MetricField MetricField::from_covariant(std::shared_ptr<const Chart> chart,
                                        std::vector<Expr> matrix, Signature sig,
                                        std::string name) {
  int n = chart->dim();
  if (static_cast<int>(matrix.size()) != n * n)
    throw GeometryError("metric component matrix must be n x n");
  require_symmetric_storage(matrix, n);
  MetricField m;
  m.det_ = symbolic_det(matrix, n);
  std::vector<Expr> inv = symbolic_inverse(matrix, n);
  require_symmetric_storage(inv, n);
  m.cov_ = TensorField(chart, 0, 2, std::move(matrix));
  m.inv_ = TensorField(chart, 2, 0, std::move(inv));
  m.sig_ = sig;
  m.name_ = std::move(name);
  return m;
}

MetricField MetricField::from_contravariant(std::shared_ptr<const Chart> chart,
                                            std::vector<Expr> matrix, Signature sig,
                                            std::string name) {
  int n = chart->dim();
  if (static_cast<int>(matrix.size()) != n * n)
    throw GeometryError("metric component matrix must be n x n");
  require_symmetric_storage(matrix, n);
  std::vector<Expr> cov = symbolic_inverse(matrix, n);
  require_symmetric_storage(cov, n);
  MetricField m;
  m.det_ = symbolic_det(cov, n);
  m.cov_ = TensorField(chart, 0, 2, std::move(cov));
  m.inv_ = TensorField(chart, 2, 0, std::move(matrix));
  m.sig_ = sig;
  m.name_ = std::move(name);
  return m;
}

void MetricField::validate(const std::vector<Point>& points,
                           const ParamBinding& params) const {
  int n = dim();
  for (const Point& p : points) {
    std::vector<double> g = cov_.evaluate(p, params);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (std::fabs(g[i * n + j] - g[j * n + i]) > 1e-10)
          throw GeometryError("metric '" + name_ + "' not symmetric at " +
                              format_point(chart(), p));
    PointSignature s = signature_at(*this, p, params);
    bool ok = (sig_ == Signature::Lorentzian && s == PointSignature::Lorentzian) ||
              (sig_ == Signature::Riemannian && s == PointSignature::Riemannian);
    if (!ok)
      throw GeometryError("metric '" + name_ + "' signature is " +
                          std::string(to_string(s)) + ", tagged " +
                          to_string(sig_) + ", at " + format_point(chart(), p));
    std::vector<double> gi = inv_.evaluate(p, params);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double s2 = 0.0;
        for (int k = 0; k < n; ++k) s2 += gi[i * n + k] * g[k * n + j];
        if (std::fabs(s2 - (i == j ? 1.0 : 0.0)) > 1e-9)
          throw GeometryError("metric '" + name_ +
                              "' inverse check failed at " + format_point(chart(), p));
      }
    }
  }
}

PointSignature signature_at(const MetricField& m, const Point& p,
                            const ParamBinding& params) {
  int n = m.dim();
  Matrix g = m.covariant().evaluate(p, params);
  std::vector<double> eig = jacobi_eigenvalues(g, n, 1e-10);
  double scale = frobenius_norm(g, n);
  int pos = 0, neg = 0;
  for (double l : eig) {
    if (std::fabs(l) < 1e-10 * (scale > 0.0 ? scale : 1.0)) return PointSignature::Degenerate;
    (l > 0.0 ? pos : neg)++;
  }
  if (pos == n) return PointSignature::Riemannian;
  if (pos == 1 && neg == n - 1) return PointSignature::Lorentzian;
  return PointSignature::Other;
}

SignatureVerdict signature_check(const MetricField& m, const std::vector<Point>& points,
                                 const ParamBinding& params) {
  SignatureVerdict v;
  for (const Point& p : points) v.per_point.push_back(signature_at(m, p, params));
  if (!v.per_point.empty()) {
    v.common = v.per_point.front();
    for (PointSignature s : v.per_point)
      if (s != v.common) {
        v.mixed = true;
        v.common = PointSignature::Other;
        break;
      }
  }
  return v;
}

// --- connection -----------------------------------------------------------

Connection::Connection(std::shared_ptr<const Chart> chart, std::vector<Expr> gamma)
    : chart_(std::move(chart)), gamma_(std::move(gamma)) {}

bool Connection::flat() const {
  for (const Expr& e : gamma_)
    if (!is_zero(e)) return false;
  return true;
}

Connection christoffel(const MetricField& m) {
  int n = m.dim();
  const Chart& chart = m.chart();
  const TensorField& g = m.covariant();
  const TensorField& gi = m.inverse();
  // partials[d][i][j] = d_d g_{ij}, with symmetric sharing preserved
  std::vector<Expr> partials(n * n * n);
  std::map<const ExprNode*, std::vector<Expr>> memo;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Expr& e = g.comp(std::size_t(i) * n + j);
      auto it = memo.find(e.get());
      if (it == memo.end()) {
        std::vector<Expr> d(n);
        for (int c = 0; c < n; ++c) d[c] = differentiate(e, chart.coords[c]);
        it = memo.emplace(e.get(), std::move(d)).first;
      }
      for (int d = 0; d < n; ++d) partials[(d * n + i) * n + j] = it->second[d];
    }
  }
  auto dg = [&](int d, int i, int j) -> const Expr& {
    return partials[(d * n + i) * n + j];
  };
  std::vector<Expr> gamma(n * n * n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = b; c < n; ++c) {
        Expr sum = constant(0.0);
        for (int d = 0; d < n; ++d) {
          Expr inner = sub(add(dg(b, d, c), dg(c, b, d)), dg(d, b, c));
          sum = add(sum, mul(gi.comp(std::size_t(a) * n + d), inner));
        }
        Expr out = mul(constant(0.5), sum);
        gamma[(a * n + b) * n + c] = out;
        gamma[(a * n + c) * n + b] = out;
      }
    }
  }
  return Connection(m.chart_ptr(), std::move(gamma));
}

TensorField covariant_derivative(const TensorField& K, const Connection& conn) {
  int n = K.dim();
  int r = K.rank_contra(), s = K.rank_cov();
  const Chart& chart = K.chart();
  bool flat = conn.flat();

  std::size_t count = K.comp_count() * n;
  std::vector<Expr> out(count);
  std::vector<int> idx(r + s + 1, 0);
  for (std::size_t flat_out = 0; flat_out < count; ++flat_out) {
    std::size_t rest = flat_out;
    for (int i = r + s; i >= 0; --i) {
      idx[i] = static_cast<int>(rest % n);
      rest /= n;
    }
    // slot layout of the result: [contra a_1..a_r, new index c, cov b_1..b_s]
    int c = idx[r];
    std::vector<int> kidx(r + s);
    for (int i = 0; i < r; ++i) kidx[i] = idx[i];
    for (int j = 0; j < s; ++j) kidx[r + j] = idx[r + 1 + j];
    Expr term = differentiate(K.comp(kidx), chart.coords[c]);
    if (!flat) {
      for (int i = 0; i < r; ++i) {
        for (int d = 0; d < n; ++d) {
          std::vector<int> swapped = kidx;
          swapped[i] = d;
          term = add(term, mul(conn.gamma(kidx[i], c, d), K.comp(swapped)));
        }
      }
      for (int j = 0; j < s; ++j) {
        for (int d = 0; d < n; ++d) {
          std::vector<int> swapped = kidx;
          swapped[r + j] = d;
          term = sub(term, mul(conn.gamma(d, c, kidx[r + j]), K.comp(swapped)));
        }
      }
    }
    out[flat_out] = term;
  }
  return TensorField(K.chart_ptr(), r, s + 1, std::move(out));
}

MetricField conformal_rescale(const MetricField& m, const Expr& omega) {
  int n = m.dim();
  std::vector<Expr> comps(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Expr e = mul(omega, m.covariant().comp(std::size_t(i) * n + j));
      comps[i * n + j] = e;
      comps[j * n + i] = e;
    }
  return MetricField::from_covariant(m.chart_ptr(), std::move(comps), m.signature(),
                                     m.name().empty() ? "" : m.name() + "*omega");
}

void validate_positive(const Expr& omega, const Chart& chart,
                       const std::vector<Point>& points, const ParamBinding& params) {
  for (const Point& p : points) {
    std::map<std::string, double> env(params.begin(), params.end());
    for (int i = 0; i < chart.dim(); ++i) env[chart.coords[i]] = p[i];
    double v = evaluate(omega, env);
    if (v <= 0.0)
      throw GeometryError("conformal factor is not positive at " +
                          format_point(chart, p));
  }
}

// --- diffeomorphisms --------------------------------------------------------

Diffeo::Diffeo(std::shared_ptr<const Chart> chart, std::vector<Expr> forward,
               std::vector<Expr> inverse)
    : chart_(std::move(chart)), fwd_(std::move(forward)), inv_(std::move(inverse)) {
  if (static_cast<int>(fwd_.size()) != chart_->dim() ||
      static_cast<int>(inv_.size()) != chart_->dim())
    throw GeometryError("diffeomorphism needs one expression per coordinate");
}

Diffeo Diffeo::identity(std::shared_ptr<const Chart> chart) {
  std::vector<Expr> id;
  for (const std::string& c : chart->coords) id.push_back(symbol(c));
  return Diffeo(chart, id, id);
}

static Point apply_map(const Chart& chart, const std::vector<Expr>& map,
                       const Point& p, const ParamBinding& params) {
  std::map<std::string, double> env(params.begin(), params.end());
  for (int i = 0; i < chart.dim(); ++i) env[chart.coords[i]] = p[i];
  Point out(chart.dim());
  for (int i = 0; i < chart.dim(); ++i) out[i] = evaluate(map[i], env);
  return out;
}

Point Diffeo::apply(const Point& p, const ParamBinding& params) const {
  return apply_map(*chart_, fwd_, p, params);
}

Point Diffeo::apply_inverse(const Point& p, const ParamBinding& params) const {
  return apply_map(*chart_, inv_, p, params);
}

void Diffeo::validate(const std::vector<Point>& points, const ParamBinding& params) const {
  int n = chart_->dim();
  for (const Point& p : points) {
    Point q = apply(p, params);
    Point back = apply_inverse(q, params);
    for (int i = 0; i < n; ++i)
      if (std::fabs(back[i] - p[i]) > 1e-9)
        throw GeometryError("inverse map does not invert the forward map at " +
                            format_point(*chart_, p));
    // Jacobian determinant at p
    Matrix J(n * n);
    std::map<std::string, double> env(params.begin(), params.end());
    for (int i = 0; i < n; ++i) env[chart_->coords[i]] = p[i];
    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        J[c * n + a] = evaluate(differentiate(fwd_[c], chart_->coords[a]), env);
    Matrix Jinv;
    double det;
    if (!invert(J, n, Jinv, det) || std::fabs(det) < 1e-12)
      throw GeometryError("Jacobian is singular at " + format_point(*chart_, p));
  }
}

TensorField pullback(const TensorField& K, const Diffeo& psi) {
  int n = K.dim();
  int r = K.rank_contra(), s = K.rank_cov();
  const Chart& chart = K.chart();

  std::map<std::string, Expr> fwd_map;
  for (int i = 0; i < n; ++i) fwd_map[chart.coords[i]] = psi.forward()[i];

  // J[c][a] = d forward^c / d x^a
  std::vector<Expr> J(n * n);
  for (int c = 0; c < n; ++c)
    for (int a = 0; a < n; ++a)
      J[c * n + a] = differentiate(psi.forward()[c], chart.coords[a]);

  // Jinv[a][c] = (d inverse^a / d y^c) evaluated at y = forward(x)
  std::vector<Expr> Jinv(n * n);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c)
      Jinv[a * n + c] =
          substitute(differentiate(psi.inverse()[a], chart.coords[c]), fwd_map);

  std::size_t count = K.comp_count();
  std::vector<Expr> pulled(count);
  // K components composed with the forward map, shared across output slots
  std::vector<Expr> composed(count);
  std::map<const ExprNode*, Expr> memo;
  for (std::size_t i = 0; i < count; ++i) {
    const Expr& e = K.comp(i);
    auto it = memo.find(e.get());
    if (it == memo.end()) it = memo.emplace(e.get(), substitute(e, fwd_map)).first;
    composed[i] = it->second;
  }

  std::vector<int> out_idx(r + s, 0), in_idx(r + s, 0);
  for (std::size_t flat_out = 0; flat_out < count; ++flat_out) {
    std::size_t rest = flat_out;
    for (int i = r + s - 1; i >= 0; --i) {
      out_idx[i] = static_cast<int>(rest % n);
      rest /= n;
    }
    Expr total = constant(0.0);
    std::size_t inner = count;
    for (std::size_t flat_in = 0; flat_in < inner; ++flat_in) {
      std::size_t rest2 = flat_in;
      for (int i = r + s - 1; i >= 0; --i) {
        in_idx[i] = static_cast<int>(rest2 % n);
        rest2 /= n;
      }
      Expr factor = composed[flat_in];
      bool zero = is_zero(factor);
      for (int i = 0; i < r && !zero; ++i) {
        factor = mul(factor, Jinv[out_idx[i] * n + in_idx[i]]);
        zero = is_zero(factor);
      }
      for (int j = 0; j < s && !zero; ++j) {
        factor = mul(factor, J[in_idx[r + j] * n + out_idx[r + j]]);
        zero = is_zero(factor);
      }
      if (!zero) total = add(total, factor);
    }
    pulled[flat_out] = total;
  }
  return TensorField(K.chart_ptr(), r, s, std::move(pulled));
}

MetricField pullback_metric(const MetricField& m, const Diffeo& psi) {
  TensorField pulled = pullback(m.covariant(), psi);
  std::vector<Expr> comps(pulled.components());
  return MetricField::from_covariant(m.chart_ptr(), std::move(comps), m.signature(),
                                     m.name().empty() ? "" : "pullback " + m.name());
}

}  // namespace mtop
