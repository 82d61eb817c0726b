#pragma once

#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mtop/expr.hpp"

namespace mtop {

using Point = std::vector<double>;
using ParamBinding = std::map<std::string, double>;

/// One global coordinate chart; every scenario lives on a single chart.
struct Chart {
  std::vector<std::string> coords;

  int dim() const { return static_cast<int>(coords.size()); }
  int index(const std::string& name) const;

  static Chart txyz();  // the default t,x,y,z chart on R^4

  SlotLayout layout(const ParamBinding& params = {}) const;
};

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_point(const Chart& chart, const Point& p);

/// A rank-(r,s) tensor field with expression components, immutable once built.
/// Component storage is row-major over [contravariant slots..., covariant slots...].
class TensorField {
 public:
  TensorField() = default;
  TensorField(std::shared_ptr<const Chart> chart, int r, int s,
              std::vector<Expr> comps);

  static TensorField zero(std::shared_ptr<const Chart> chart, int r, int s);
  static TensorField scalar(std::shared_ptr<const Chart> chart, Expr e);

  const Chart& chart() const { return *chart_; }
  std::shared_ptr<const Chart> chart_ptr() const { return chart_; }
  int rank_contra() const { return r_; }
  int rank_cov() const { return s_; }
  int slots() const { return r_ + s_; }
  int dim() const { return chart_->dim(); }
  std::size_t comp_count() const { return comps_.size(); }

  const Expr& comp(std::size_t flat) const { return comps_[flat]; }
  const Expr& comp(const std::vector<int>& idx) const { return comps_[flatten(idx)]; }
  const std::vector<Expr>& components() const { return comps_; }

  std::size_t flatten(const std::vector<int>& idx) const;

  TensorField map(const std::function<Expr(const Expr&)>& f) const;

  /// Evaluates every component; domain failures carry the offending point.
  std::vector<double> evaluate(const Point& p, const ParamBinding& params = {}) const;

  bool same_shape(const TensorField& o) const {
    return r_ == o.r_ && s_ == o.s_ && dim() == o.dim();
  }

 private:
  std::shared_ptr<const Chart> chart_;
  int r_ = 0, s_ = 0;
  std::vector<Expr> comps_;
};

TensorField operator+(const TensorField& a, const TensorField& b);
TensorField operator-(const TensorField& a, const TensorField& b);
TensorField scale(const TensorField& a, const Expr& factor);
TensorField scale(const TensorField& a, double factor);

/// Substitutes a parameter by a constant in every component.
TensorField bind_parameter(const TensorField& a, const std::string& name, double value);

/// Full contraction of K (rank r,s) with psi (rank s,r): sum over all slots.
Expr full_contraction(const TensorField& K, const TensorField& psi);

/// Deterministic sample points, uniform in [-radius, radius]^n.
std::vector<Point> random_points(const Chart& chart, int count, double radius,
                                 std::uint64_t seed);

// Compiled components for hot loops: duplicate expressions (e.g. the symmetric
// half of a metric) are compiled once. Thread-safe to evaluate.
class CompiledTensor {
 public:
  CompiledTensor() = default;
  CompiledTensor(const TensorField& field, const SlotLayout& layout);

  void evaluate(const double* slots, double* out) const;
  std::size_t comp_count() const { return which_.size(); }
  bool all_zero() const;

 private:
  std::vector<Program> programs_;
  std::vector<int> which_;
};

}  // namespace mtop
