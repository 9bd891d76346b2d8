#include "splyne/splinecore.hpp"

#include <algorithm>
#include <span>

namespace splyne {

LocalKnotVector::LocalKnotVector(std::vector<double> knots) : t(std::move(knots)) {
  if (t.size() < 2) throw config_error("LocalKnotVector: need at least 2 knots");
  if (!std::is_sorted(t.begin(), t.end()))
    throw config_error("LocalKnotVector: knots must be nondecreasing");
  if (!(t.front() < t.back()))
    throw config_error("LocalKnotVector: first knot must be strictly below last");
}

int LocalKnotVector::multiplicity(double x) const {
  return static_cast<int>(std::count(t.begin(), t.end(), x));
}

namespace {

// Recursion on a knot window [first, first+p+2). Degree-0 base case carries
// the edge convention; every interior knot tie is handled by the vanishing
// denominator rule (whole term drops).
double eval_span(std::span<const double> k, double x, bool from_right) {
  const int p = static_cast<int>(k.size()) - 2;
  if (p == 0) {
    if (from_right) return (k[0] <= x && x < k[1]) ? 1.0 : 0.0;
    return (k[0] < x && x <= k[1]) ? 1.0 : 0.0;
  }
  double value = 0.0;
  const double d1 = k[p] - k[0];
  if (d1 > 0.0) value += (x - k[0]) / d1 * eval_span(k.first(k.size() - 1), x, from_right);
  const double d2 = k[p + 1] - k[1];
  if (d2 > 0.0) value += (k[p + 1] - x) / d2 * eval_span(k.last(k.size() - 1), x, from_right);
  return value;
}

}  // namespace

double eval_univariate(const LocalKnotVector& kv, double x, bool from_right) {
  return eval_span(std::span<const double>(kv.t), x, from_right);
}

double eval_univariate_deriv(const LocalKnotVector& kv, double x, bool from_right) {
  const int p = kv.degree();
  if (p == 0) return 0.0;
  const std::span<const double> k(kv.t);
  double value = 0.0;
  const double d1 = k[p] - k[0];
  if (d1 > 0.0) value += p / d1 * eval_span(k.first(k.size() - 1), x, from_right);
  const double d2 = k[p + 1] - k[1];
  if (d2 > 0.0) value -= p / d2 * eval_span(k.last(k.size() - 1), x, from_right);
  return value;
}

SplitResult split_univariate(const LocalKnotVector& kv, double t) {
  if (!(kv.front() < t && t < kv.back()))
    throw config_error("split_univariate: insertion point must be strictly inside the support");
  const int p = kv.degree();
  std::vector<double> merged = kv.t;
  merged.insert(std::upper_bound(merged.begin(), merged.end(), t), t);

  SplitResult r;
  r.left = LocalKnotVector(std::vector<double>(merged.begin(), merged.end() - 1));
  r.right = LocalKnotVector(std::vector<double>(merged.begin() + 1, merged.end()));
  r.alpha_left = t >= kv.t[p] ? 1.0 : (t - kv.t[0]) / (kv.t[p] - kv.t[0]);
  r.alpha_right = t <= kv.t[1] ? 1.0 : (kv.t[p + 1] - t) / (kv.t[p + 1] - kv.t[1]);
  return r;
}

double eval_tensor(const TensorBSpline& b, double x, double y,
                   bool from_right_x, bool from_right_y) {
  const double bu = eval_univariate(b.u, x, from_right_x);
  if (bu == 0.0) return 0.0;
  return b.weight * bu * eval_univariate(b.v, y, from_right_y);
}

std::pair<double, double> grad_tensor(const TensorBSpline& b, double x, double y,
                                      bool from_right_x, bool from_right_y) {
  const double bu = eval_univariate(b.u, x, from_right_x);
  const double bv = eval_univariate(b.v, y, from_right_y);
  const double du = eval_univariate_deriv(b.u, x, from_right_x);
  const double dv = eval_univariate_deriv(b.v, y, from_right_y);
  return {b.weight * du * bv, b.weight * bu * dv};
}

}  // namespace splyne
