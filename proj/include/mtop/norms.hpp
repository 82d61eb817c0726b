#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mtop/exhaustion.hpp"
#include "mtop/geometry.hpp"
#include "mtop/metric.hpp"
#include "mtop/scan.hpp"

namespace mtop {

// --- pointwise fiber norms -----------------------------------------------

/// Compiled evaluator for |K|_f at a point: one covariant copy of f per
/// contravariant slot pair, one inverse copy per covariant slot pair, then
/// |...|^(1/2). The reference matrix is evaluated and inverted numerically
/// per point (|det| < 1e-12 raises the degeneracy error).
class FiberNormFn {
 public:
  FiberNormFn(const TensorField& K, const MetricField& f,
              const ParamBinding& params = {});

  double operator()(const double* coords) const;
  double max_abs_component(const double* coords) const;
  bool identically_zero() const { return k_.all_zero(); }
  int dim() const { return n_; }

 private:
  CompiledTensor k_, fcov_;
  int n_ = 0, r_ = 0, s_ = 0;
  std::size_t comp_count_ = 1;
  std::vector<int> digits_;  // comp_count x (r+s)
  std::vector<double> param_values_;
  bool scalar_ = false;
};

double fiber_norm_at(const TensorField& K, const MetricField& f, const Point& p,
                     const ParamBinding& params = {});

/// Independent route: Cholesky frame in which h is the identity, transform
/// components, take the Frobenius norm. Requires h Riemannian.
double frobenius_cross_check(const TensorField& K, const MetricField& h,
                             const Point& p, const ParamBinding& params = {});

struct KernelVerdict {
  Point point;
  bool in_kernel = false;
  double norm = 0.0;
};

KernelVerdict in_kernel(const TensorField& K, const MetricField& f, const Point& p,
                        const ParamBinding& params = {});

// --- supremum estimation ---------------------------------------------------

enum class SupStatus { Bounded, Unbounded, Inconclusive };

const char* to_string(SupStatus s);

struct SupEstimate {
  double value = 0.0;  // +inf when Unbounded
  SupStatus status = SupStatus::Inconclusive;
  std::vector<double> levels;  // cumulative per-level maxima, nondecreasing
  Point argmax;
  double argmax_value = 0.0;

  bool bounded() const { return status == SupStatus::Bounded; }
};

struct ScanScope {
  bool full = true;
  int level = 0;

  static ScanScope full_space() { return ScanScope{true, 0}; }
  static ScanScope single_level(int i) { return ScanScope{false, i}; }
};

using PointFn = std::function<double(const double*)>;

/// Skip marker a functor may return for points that contribute nothing
/// (e.g. 0/0 ratio points).
inline double scan_skip() { return -std::numeric_limits<double>::infinity(); }

/// Grid max per level (plus probes, plus one 10x-finer refinement pass in the
/// half-spacing window around the running argmax), cumulative across nested
/// levels, classified by the boundedness protocol.
SupEstimate sup_scan(const PointFn& f, int dim, const CompactExhaustion& X,
                     ScanScope scope, ScanMode mode = ScanMode::Parallel);

SupEstimate uniform_norm(const TensorField& K, const MetricField& f,
                         const CompactExhaustion& X, ScanScope scope,
                         const ParamBinding& params = {},
                         ScanMode mode = ScanMode::Parallel);

/// Max of f over the level-i samples outside the level-(i-1) box.
double ring_max(const PointFn& f, int dim, const CompactExhaustion& X, int level,
                ScanMode mode = ScanMode::Parallel);

/// Supremum of exp(sum of squared coordinates) * |K|_f, tracked in log space
/// so astronomically large weights classify instead of overflowing.
/// Exact zeros of the field contribute nothing at any weight.
SupEstimate weighted_sup(const TensorField& K, const MetricField& f,
                         const CompactExhaustion& X,
                         const ParamBinding& params = {},
                         ScanMode mode = ScanMode::Parallel);

/// The boundedness protocol on a cumulative trace of per-level maxima.
SupStatus classify_levels(const std::vector<double>& s, bool full_scope);

}  // namespace mtop
