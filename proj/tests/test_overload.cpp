#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "splyne/overload.hpp"
#include "splyne/thbspace.hpp"

using namespace splyne;

namespace {

LRSpace central(int n, int levels) {
  const Box dom{Dyadic{0}, Dyadic{n}, Dyadic{0}, Dyadic{n}};
  LRSpace s = lr_tensor(BoxMesh::tensor(dom, n, n, 4, 4, PhysMap{}), 3, 3);
  double lo = n / 4.0, hi = 3.0 * n / 4.0;
  for (int l = 2; l <= levels; ++l) {
    refine_region(s, {Box{dyadic_from_double(lo), dyadic_from_double(hi),
                          dyadic_from_double(lo), dyadic_from_double(hi)}});
    const double w = (hi - lo) / 4.0;
    lo += w;
    hi -= w;
  }
  return s;
}

// Staircase band: per level, the cells of the previous level's size whose
// indices satisfy |i - j| <= 1.
LRSpace diagonal(int n, int levels) {
  const Box dom{Dyadic{0}, Dyadic{n}, Dyadic{0}, Dyadic{n}};
  LRSpace s = lr_tensor(BoxMesh::tensor(dom, n, n, 4, 4, PhysMap{}), 3, 3);
  for (int l = 2; l <= levels; ++l) {
    const Dyadic cell = level_cell(l - 1);
    const int m = static_cast<int>((dom.x1 - dom.x0).to_double() / cell.to_double());
    std::vector<Box> region;
    for (int i = 0; i < m; ++i)
      for (int j = std::max(0, i - 1); j <= std::min(m - 1, i + 1); ++j)
        region.push_back(Box{i * cell, (i + 1) * cell, j * cell, (j + 1) * cell});
    refine_region(s, region);
  }
  return s;
}

// The limit is a hard floor: refinement can only add functions on top of the
// tensor count, never remove them.
void check_floor(const OverloadReport& r) {
  for (int c : r.counts) CHECK(c >= r.limit);
}

// A cleared space has the tensor count exactly, everywhere.
void check_cleared(const LRSpace& s, std::size_t dof) {
  const OverloadReport r = overload_report(s);
  CHECK(r.overloaded.empty());
  CHECK(r.excess_histogram.empty());
  for (int c : r.counts) CHECK(c == r.limit);
  CHECK(active_functions(s).size() == dof);
}

std::vector<std::pair<double, double>> probe_points(const BoxMesh& mesh, int p) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& e : mesh.elements()) {
    const double x0 = e.box.x0.to_double(), x1 = e.box.x1.to_double();
    const double y0 = e.box.y0.to_double(), y1 = e.box.y1.to_double();
    for (int i = 0; i <= p; ++i)
      for (int j = 0; j <= p; ++j)
        pts.emplace_back(x0 + (x1 - x0) * (2 * i + 1) / (2.0 * (p + 1)),
                         y0 + (y1 - y0) * (2 * j + 1) / (2.0 * (p + 1)));
  }
  return pts;
}

Eigen::MatrixXd collocation(const std::vector<TensorBSpline>& funcs,
                            const std::vector<std::pair<double, double>>& pts) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(funcs.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = eval_tensor(funcs[static_cast<std::size_t>(j)], pts[static_cast<std::size_t>(i)].first,
                            pts[static_cast<std::size_t>(i)].second);
  return m;
}

}  // namespace

TEST_CASE("tensor meshes carry the tensor count everywhere") {
  const auto s = lr_tensor(BoxMesh::tensor(Box{0, 6, 0, 6}, 6, 6, 4, 4, PhysMap{}), 3, 3);
  const auto r = overload_report(s);
  CHECK(r.limit == 16);
  CHECK(r.elements.size() == 36);
  CHECK(r.overloaded.empty());
  for (int c : r.counts) CHECK(c == 16);
}

TEST_CASE("the limit follows the degree") {
  const auto s = lr_tensor(BoxMesh::tensor(Box{0, 5, 0, 5}, 5, 5, 3, 2, PhysMap{}), 2, 1);
  const auto r = overload_report(s);
  CHECK(r.limit == 6);
  CHECK(r.overloaded.empty());
  for (int c : r.counts) CHECK(c == 6);
}

TEST_CASE("central refinement overloads blocks at the region corners") {
  const auto s = central(16, 2);
  CHECK(active_functions(s).size() == 505);
  const auto r = overload_report(s);
  check_floor(r);
  CHECK(r.overloaded.size() == 100);
  CHECK(r.excess_histogram == std::map<int, int>{{1, 64}, {2, 32}, {4, 4}});
  // Every overloaded element sits in a block around one of the four corners
  // of the refined square [4,12]^2.
  for (std::size_t idx : r.overloaded) {
    const Box& b = r.elements[idx].box;
    const double cx = (b.x0.to_double() + b.x1.to_double()) / 2;
    const double cy = (b.y0.to_double() + b.y1.to_double()) / 2;
    double best = 1e30;
    for (double px : {4.0, 12.0})
      for (double py : {4.0, 12.0})
        best = std::min(best, std::max(std::abs(cx - px), std::abs(cy - py)));
    CHECK(best < 3.0);
  }
}

TEST_CASE("corner extensions clear the central families") {
  check_cleared(lrbno_modify(central(16, 2)), 537);
  check_cleared(lrbno_modify(central(16, 3)), 713);
}

TEST_CASE("border extensions clear the central families") {
  check_cleared(tlrbno_modify(central(16, 2)), 553);
  check_cleared(tlrbno_modify(central(16, 3)), 745);
}

TEST_CASE("one-directional extensions clear the staircase") {
  check_cleared(diagonal_modify(diagonal(8, 2)), 241);
  check_cleared(diagonal_modify(diagonal(8, 3)), 517);
}

TEST_CASE("the staircase admits no border-extension form") {
  const auto s = diagonal(8, 2);
  CHECK_THROWS_WITH_AS(tlrbno_modify(s), doctest::Contains("T-mesh incompatible"), config_error);
}

TEST_CASE("modifiers reject degrees other than bicubic") {
  const auto s = lr_tensor(BoxMesh::tensor(Box{0, 6, 0, 6}, 6, 6, 3, 3, PhysMap{}), 2, 2);
  CHECK_THROWS_AS(lrbno_modify(s), config_error);
  CHECK_THROWS_AS(tlrbno_modify(s), config_error);
  CHECK_THROWS_AS(diagonal_modify(s), config_error);
}

TEST_CASE("modification only ever adds to the space") {
  const auto before = diagonal(8, 2);
  const auto after = diagonal_modify(before);

  // Both bases are plain polynomials on every element of the modified mesh,
  // so interior probes pin them exactly: a least-squares fit of each old
  // function against the new basis must come back with zero residual.
  const auto pts = probe_points(after.mesh, 3);
  const Eigen::MatrixXd B = collocation(active_functions(after), pts);
  const Eigen::MatrixXd V = collocation(active_functions(before), pts);
  const Eigen::MatrixXd C = B.colPivHouseholderQr().solve(V);
  CHECK((B * C - V).colwise().norm().maxCoeff() < 1e-10);

  // And the enlarged basis stays independent.
  Eigen::BDCSVD<Eigen::MatrixXd> svd(B);
  const double tol = static_cast<double>(std::max(B.rows(), B.cols())) *
                     std::numeric_limits<double>::epsilon() * svd.singularValues()(0);
  CHECK((svd.singularValues().array() > tol).count() == B.cols());
}

TEST_CASE("truncated spaces overload in bands along the region boundary") {
  HierarchicalSpec spec;
  spec.domain = Box{Dyadic{0}, Dyadic{8}, Dyadic{0}, Dyadic{8}};
  spec.nx = 8;
  spec.ny = 8;
  spec.mult_x = 4;
  spec.mult_y = 4;
  spec.regions = {{Box{Dyadic{2}, Dyadic{6}, Dyadic{2}, Dyadic{6}}}};
  const THBSpace t = thb_construct(spec, 3, 3);

  const auto r = overload_report(t);
  check_floor(r);
  CHECK(r.elements.size() == 112);
  CHECK(r.overloaded.size() == 48);
  CHECK(r.excess_histogram == std::map<int, int>{{1, 16}, {3, 4}, {4, 24}, {5, 4}});
  for (std::size_t idx : r.overloaded) {
    const Box& b = r.elements[idx].box;
    // Overloading is confined to fine cells inside the region; the coarse
    // surroundings and the innermost fine block stay at the tensor count.
    CHECK((b.x1 - b.x0).to_double() == 0.5);
    CHECK(b.x0.to_double() >= 2.0);
    CHECK(b.x1.to_double() <= 6.0);
    const double cx = (b.x0.to_double() + b.x1.to_double()) / 2;
    const double cy = (b.y0.to_double() + b.y1.to_double()) / 2;
    const double edge = std::min(std::min(cx - 2, 6 - cx), std::min(cy - 2, 6 - cy));
    CHECK(edge < 1.5);
  }
}

TEST_CASE("the report serializes one row per element") {
  const auto s = lr_tensor(BoxMesh::tensor(Box{0, 4, 0, 4}, 4, 4, 4, 4, PhysMap{}), 3, 3);
  const std::string csv = write_report_csv(overload_report(s));
  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "element_id,x0,x1,y0,y1,count,excess");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (rows == 0) CHECK(line == "0,0,1,0,1,16,0");
    ++rows;
  }
  CHECK(rows == 16);
}
