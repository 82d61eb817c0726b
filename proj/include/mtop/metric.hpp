#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mtop/geometry.hpp"
#include "mtop/linalg.hpp"

namespace mtop {

enum class Signature { Lorentzian, Riemannian };

enum class PointSignature { Lorentzian, Riemannian, Degenerate, Other };

const char* to_string(Signature s);
const char* to_string(PointSignature s);

/// Symbolic determinant of an n x n expression matrix (Laplace expansion
/// with minor memoization; intended for n <= 6).
Expr symbolic_det(const std::vector<Expr>& m, int n);

/// Symbolic inverse via adjugate over determinant.
std::vector<Expr> symbolic_inverse(const std::vector<Expr>& m, int n);

/// A (0,2) metric: symmetric covariant components, a signature tag, and the
/// cached symbolic (2,0) inverse. `name` is only for reporting.
class MetricField {
 public:
  MetricField() = default;

  static MetricField from_covariant(std::shared_ptr<const Chart> chart,
                                    std::vector<Expr> matrix, Signature sig,
                                    std::string name = "");
  /// The paper-style h^{ab} form: stored covariantly after symbolic inversion,
  /// the given components become the cached inverse.
  static MetricField from_contravariant(std::shared_ptr<const Chart> chart,
                                        std::vector<Expr> matrix, Signature sig,
                                        std::string name = "");

  const TensorField& covariant() const { return cov_; }
  const TensorField& inverse() const { return inv_; }
  Signature signature() const { return sig_; }
  const std::string& name() const { return name_; }
  const Chart& chart() const { return cov_.chart(); }
  std::shared_ptr<const Chart> chart_ptr() const { return cov_.chart_ptr(); }
  int dim() const { return cov_.dim(); }
  const Expr& det() const { return det_; }

  /// Checks symmetry (1e-10), the signature tag, and inverse*cov = id (1e-9)
  /// at the given points; throws GeometryError naming the first bad point.
  void validate(const std::vector<Point>& points, const ParamBinding& params = {}) const;

 private:
  TensorField cov_;   // (0,2)
  TensorField inv_;   // (2,0)
  Signature sig_ = Signature::Riemannian;
  Expr det_;
  std::string name_;
};

/// Eigenvalue-sign classification of the evaluated component matrix.
PointSignature signature_at(const MetricField& m, const Point& p,
                            const ParamBinding& params = {});

struct SignatureVerdict {
  PointSignature common = PointSignature::Other;
  bool mixed = false;
  std::vector<PointSignature> per_point;
};

SignatureVerdict signature_check(const MetricField& m, const std::vector<Point>& points,
                                 const ParamBinding& params = {});

/// Levi-Civita Christoffel symbols Gamma^a_{bc}, symmetric in (b,c).
class Connection {
 public:
  Connection() = default;
  Connection(std::shared_ptr<const Chart> chart, std::vector<Expr> gamma);

  const Expr& gamma(int a, int b, int c) const {
    int n = chart_->dim();
    return gamma_[(a * n + b) * n + c];
  }
  const Chart& chart() const { return *chart_; }
  std::shared_ptr<const Chart> chart_ptr() const { return chart_; }
  bool flat() const;

 private:
  std::shared_ptr<const Chart> chart_;
  std::vector<Expr> gamma_;
};

Connection christoffel(const MetricField& m);

/// One covariant derivative; the new covariant slot comes first, so iterating
/// builds nabla_{c1} ... nabla_{ck} K with c1 outermost.
TensorField covariant_derivative(const TensorField& K, const Connection& conn);

/// Omega * m componentwise; the signature tag carries over. Positivity of
/// Omega is the caller's contract (validate_positive checks it on samples).
MetricField conformal_rescale(const MetricField& m, const Expr& omega);

void validate_positive(const Expr& omega, const Chart& chart,
                       const std::vector<Point>& points, const ParamBinding& params = {});

/// A diffeomorphism given by its forward coordinate map and a supplied inverse.
class Diffeo {
 public:
  Diffeo(std::shared_ptr<const Chart> chart, std::vector<Expr> forward,
         std::vector<Expr> inverse);

  static Diffeo identity(std::shared_ptr<const Chart> chart);

  const std::vector<Expr>& forward() const { return fwd_; }
  const std::vector<Expr>& inverse() const { return inv_; }
  const Chart& chart() const { return *chart_; }

  Point apply(const Point& p, const ParamBinding& params = {}) const;
  Point apply_inverse(const Point& p, const ParamBinding& params = {}) const;

  /// forward(inverse) = id to 1e-9 and det J != 0 at the given points.
  void validate(const std::vector<Point>& points, const ParamBinding& params = {}) const;

 private:
  std::shared_ptr<const Chart> chart_;
  std::vector<Expr> fwd_, inv_;
};

/// Pullback of K along psi: covariant slots pick up the forward Jacobian,
/// contravariant slots the inverse map's Jacobian composed with the forward map.
TensorField pullback(const TensorField& K, const Diffeo& psi);

MetricField pullback_metric(const MetricField& m, const Diffeo& psi);

}  // namespace mtop
