#pragma once

#include <utility>
#include <vector>

#include "splyne/errors.hpp"

namespace splyne {

/// Local knot vector of a single univariate B-spline: p+2 nondecreasing
/// parameter values, first < last. Degree is implicit in the length.
struct LocalKnotVector {
  std::vector<double> t;

  LocalKnotVector() = default;
  explicit LocalKnotVector(std::vector<double> knots);

  int degree() const { return static_cast<int>(t.size()) - 2; }
  double front() const { return t.front(); }
  double back() const { return t.back(); }

  /// Multiplicity of value x among the knots (exact comparison; all mesh
  /// coordinates are dyadic, so no tolerance is involved).
  int multiplicity(double x) const;

  friend bool operator==(const LocalKnotVector& a, const LocalKnotVector& b) { return a.t == b.t; }
  friend auto operator<=>(const LocalKnotVector& a, const LocalKnotVector& b) { return a.t <=> b.t; }
};

/// B-spline value at x by the two-term knot recursion. Intervals are
/// half-open on the right; pass from_right = false to take the limit from
/// the left instead, which is how a space closes the global right edge of
/// its domain.
double eval_univariate(const LocalKnotVector& kv, double x, bool from_right = true);

/// First derivative, same edge convention. Terms with vanishing knot-span
/// denominators drop out.
double eval_univariate_deriv(const LocalKnotVector& kv, double x, bool from_right = true);

struct SplitResult {
  LocalKnotVector left;
  LocalKnotVector right;
  double alpha_left = 0.0;
  double alpha_right = 0.0;
};

/// Single knot insertion of t into kv: B = alpha_left * B_left + alpha_right * B_right.
/// t must lie strictly between the first and last knot; inserting at an
/// existing interior knot raises its multiplicity.
SplitResult split_univariate(const LocalKnotVector& kv, double t);

/// Weighted bivariate tensor-product B-spline.
struct TensorBSpline {
  LocalKnotVector u;
  LocalKnotVector v;
  double weight = 1.0;

  double x0() const { return u.front(); }
  double x1() const { return u.back(); }
  double y0() const { return v.front(); }
  double y1() const { return v.back(); }
};

/// weight * B_u(x) * B_v(y).
double eval_tensor(const TensorBSpline& b, double x, double y,
                   bool from_right_x = true, bool from_right_y = true);

/// Gradient (d/dx, d/dy) of the weighted tensor product.
std::pair<double, double> grad_tensor(const TensorBSpline& b, double x, double y,
                                      bool from_right_x = true, bool from_right_y = true);

}  // namespace splyne
