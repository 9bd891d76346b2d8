#pragma once

#include <map>
#include <utility>
#include <vector>

#include "splyne/boxmesh.hpp"
#include "splyne/lrspace.hpp"
#include "splyne/splinecore.hpp"

namespace splyne {

/// Truncated hierarchical basis function. `mother` is the tensor B-spline of
/// `origin_level` the function descends from; `rep` expresses the (possibly
/// truncated) function in the tensor basis of `rep_level`, keyed by window
/// index per direction. The rep is advanced lazily: it only moves to a finer
/// level once its support meets that level's region, so untouched functions
/// keep a single-term rep.
struct THBFunction {
  int origin_level = 1;
  KnotKey mother;
  int rep_level = 1;
  std::map<std::pair<int, int>, double> rep;
};

/// Truncated hierarchical spline space over a dyadically refined hierarchy.
/// knots_u[l] / knots_v[l] hold the global knot vector of level l + 1; the
/// mesh is the hierarchy's box mesh (extended for the ghost variant).
struct THBSpace {
  BoxMesh mesh;
  int p1 = 3, p2 = 3;
  Boundary boundary = Boundary::open;
  Box core_box;
  std::vector<std::vector<double>> knots_u, knots_v;
  std::vector<THBFunction> basis;

  const Box& core() const { return core_box; }
  int levels() const { return static_cast<int>(knots_u.size()); }
};

/// Expands one basis function of the coarse global knot vector in the fine
/// one by repeated single knot insertion. Returns (fine window index, coeff)
/// pairs; the identity sum_k c_k B_k = B holds exactly.
std::vector<std::pair<int, double>> two_scale_univariate(const std::vector<double>& coarse,
                                                         const std::vector<double>& fine, int p,
                                                         int index);

/// Bivariate two-scale coefficients: outer product of the univariate ones.
std::map<std::pair<int, int>, double> two_scale_bivariate(const std::vector<double>& cu,
                                                          const std::vector<double>& fu, int p1,
                                                          const std::vector<double>& cv,
                                                          const std::vector<double>& fv, int p2,
                                                          int i, int j);

/// Truncation at one level: drops every term whose support lies inside the
/// region union, leaving the remaining coefficients untouched.
std::map<std::pair<int, int>, double> truncate_terms(std::map<std::pair<int, int>, double> terms,
                                                     const std::vector<double>& fu, int p1,
                                                     const std::vector<double>& fv, int p2,
                                                     const std::vector<Box>& region);

/// The hierarchical construction: level by level, keep the truncations of
/// functions whose mother support is not swallowed by the next region, and
/// add the next level's functions living inside it. Ghost builds on the
/// extended domain and finally retains functions whose (truncated) support
/// meets the core interior.
THBSpace thb_construct(const HierarchicalSpec& spec, int p1, int p2,
                       Boundary boundary = Boundary::open);

/// Value of one basis function, summed from its rep terms.
double thb_eval(const THBSpace& space, const THBFunction& f, double x, double y);

/// Gradient of one basis function in index coordinates.
std::pair<double, double> thb_grad(const THBSpace& space, const THBFunction& f, double x, double y);

/// Union bounding box of the rep terms' supports: the true support.
Box thb_support(const THBSpace& space, const THBFunction& f);

/// True iff some rep term is nonzero on the element's interior.
bool thb_supported_on(const THBSpace& space, const THBFunction& f, const Box& element);

/// Sum of all basis functions; 1 on the core domain up to rounding.
double thb_partition_sum(const THBSpace& space, double x, double y);

/// Same record format as the locally refined space dump, each function
/// preceded by a "#level l" metadata line naming its origin level.
std::string write_space(const THBSpace& space);

}  // namespace splyne
