#include "mtop/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace mtop {

int Chart::index(const std::string& name) const {
  for (std::size_t i = 0; i < coords.size(); ++i)
    if (coords[i] == name) return static_cast<int>(i);
  return -1;
}

Chart Chart::txyz() { return Chart{{"t", "x", "y", "z"}}; }

SlotLayout Chart::layout(const ParamBinding& params) const {
  std::vector<std::string> names = coords;
  for (const auto& [k, v] : params) names.push_back(k);
  return SlotLayout::make(std::move(names));
}

std::string format_point(const Chart& chart, const Point& p) {
  std::string out = "(";
  char buf[40];
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%g", p[i]);
    if (i) out += ", ";
    out += chart.coords[i];
    out += "=";
    out += buf;
  }
  return out + ")";
}

TensorField::TensorField(std::shared_ptr<const Chart> chart, int r, int s,
                         std::vector<Expr> comps)
    : chart_(std::move(chart)), r_(r), s_(s), comps_(std::move(comps)) {
  std::size_t expect = 1;
  for (int i = 0; i < r_ + s_; ++i) expect *= chart_->dim();
  if (comps_.size() != expect)
    throw GeometryError("component count does not match rank and dimension");
  for (const Expr& e : comps_)
    if (!e) throw GeometryError("null component expression");
}

TensorField TensorField::zero(std::shared_ptr<const Chart> chart, int r, int s) {
  std::size_t count = 1;
  for (int i = 0; i < r + s; ++i) count *= chart->dim();
  std::vector<Expr> comps(count, constant(0.0));
  return TensorField(std::move(chart), r, s, std::move(comps));
}

TensorField TensorField::scalar(std::shared_ptr<const Chart> chart, Expr e) {
  return TensorField(std::move(chart), 0, 0, {std::move(e)});
}

std::size_t TensorField::flatten(const std::vector<int>& idx) const {
  std::size_t flat = 0;
  for (int i : idx) flat = flat * dim() + static_cast<std::size_t>(i);
  return flat;
}

TensorField TensorField::map(const std::function<Expr(const Expr&)>& f) const {
  std::vector<Expr> out;
  out.reserve(comps_.size());
  // preserve sharing so symmetric pairs stay pointer-equal
  std::map<const ExprNode*, Expr> memo;
  for (const Expr& e : comps_) {
    auto it = memo.find(e.get());
    if (it == memo.end()) it = memo.emplace(e.get(), f(e)).first;
    out.push_back(it->second);
  }
  return TensorField(chart_, r_, s_, std::move(out));
}

std::vector<double> TensorField::evaluate(const Point& p,
                                          const ParamBinding& params) const {
  std::map<std::string, double> env(params.begin(), params.end());
  for (int i = 0; i < dim(); ++i) env[chart_->coords[i]] = p[i];
  std::vector<double> out(comps_.size());
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    try {
      out[i] = mtop::evaluate(comps_[i], env);
    } catch (const EvalError& e) {
      throw EvalError(std::string(e.what()) + " at " + format_point(*chart_, p));
    }
  }
  return out;
}

static void check_shapes(const TensorField& a, const TensorField& b) {
  if (!a.same_shape(b)) throw GeometryError("tensor rank/dimension mismatch");
}

TensorField operator+(const TensorField& a, const TensorField& b) {
  check_shapes(a, b);
  std::vector<Expr> comps;
  comps.reserve(a.comp_count());
  for (std::size_t i = 0; i < a.comp_count(); ++i)
    comps.push_back(add(a.comp(i), b.comp(i)));
  return TensorField(a.chart_ptr(), a.rank_contra(), a.rank_cov(), std::move(comps));
}

TensorField operator-(const TensorField& a, const TensorField& b) {
  check_shapes(a, b);
  std::vector<Expr> comps;
  comps.reserve(a.comp_count());
  for (std::size_t i = 0; i < a.comp_count(); ++i)
    comps.push_back(sub(a.comp(i), b.comp(i)));
  return TensorField(a.chart_ptr(), a.rank_contra(), a.rank_cov(), std::move(comps));
}

TensorField scale(const TensorField& a, const Expr& factor) {
  return a.map([&](const Expr& e) { return mul(factor, e); });
}

TensorField scale(const TensorField& a, double factor) {
  return scale(a, constant(factor));
}

TensorField bind_parameter(const TensorField& a, const std::string& name,
                           double value) {
  std::map<std::string, Expr> m{{name, constant(value)}};
  return a.map([&](const Expr& e) { return substitute(e, m); });
}

Expr full_contraction(const TensorField& K, const TensorField& psi) {
  if (K.rank_contra() != psi.rank_cov() || K.rank_cov() != psi.rank_contra() ||
      K.dim() != psi.dim())
    throw GeometryError("contraction rank mismatch");
  // psi's covariant slots pair with K's contravariant slots in order, and
  // vice versa; with psi stored [contra..., cov...] the multi-index of the
  // matching psi component is K's covariant block followed by K's
  // contravariant block.
  int r = K.rank_contra(), s = K.rank_cov(), n = K.dim();
  std::size_t count = K.comp_count();
  Expr total = constant(0.0);
  std::vector<int> idx(r + s, 0);
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t rest = flat;
    for (int i = r + s - 1; i >= 0; --i) {
      idx[i] = static_cast<int>(rest % n);
      rest /= n;
    }
    std::vector<int> pidx(r + s);
    for (int j = 0; j < s; ++j) pidx[j] = idx[r + j];
    for (int i = 0; i < r; ++i) pidx[s + i] = idx[i];
    total = add(total, mul(K.comp(flat), psi.comp(pidx)));
  }
  return total;
}

std::vector<Point> random_points(const Chart& chart, int count, double radius,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-radius, radius);
  std::vector<Point> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Point p(chart.dim());
    for (double& c : p) c = dist(rng);
    out.push_back(std::move(p));
  }
  return out;
}

CompiledTensor::CompiledTensor(const TensorField& field, const SlotLayout& layout) {
  std::map<const ExprNode*, int> seen;
  which_.reserve(field.comp_count());
  for (std::size_t i = 0; i < field.comp_count(); ++i) {
    const Expr& e = field.comp(i);
    auto it = seen.find(e.get());
    if (it == seen.end()) {
      it = seen.emplace(e.get(), static_cast<int>(programs_.size())).first;
      programs_.push_back(compile(e, layout));
    }
    which_.push_back(it->second);
  }
}

void CompiledTensor::evaluate(const double* slots, double* out) const {
  double vals[64];
  std::vector<double> heap;
  double* v = vals;
  if (programs_.size() > 64) {
    heap.resize(programs_.size());
    v = heap.data();
  }
  for (std::size_t i = 0; i < programs_.size(); ++i) v[i] = programs_[i].eval(slots);
  for (std::size_t i = 0; i < which_.size(); ++i) out[i] = v[which_[i]];
}

bool CompiledTensor::all_zero() const {
  for (const Program& p : programs_)
    if (!p.constant_zero()) return false;
  return true;
}

}  // namespace mtop
