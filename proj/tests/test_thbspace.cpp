#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <vector>

#include "splyne/thbspace.hpp"

using namespace splyne;

namespace {

std::vector<double> uniform_knots(double lo, double hi, double step, int mult) {
  std::vector<double> t;
  for (int i = 0; i < mult; ++i) t.push_back(lo);
  for (double v = lo + step; v < hi - step / 2; v += step) t.push_back(v);
  for (int i = 0; i < mult; ++i) t.push_back(hi);
  return t;
}

double eval_window(const std::vector<double>& kv, int p, int i, double x) {
  return eval_univariate(LocalKnotVector({kv.begin() + i, kv.begin() + i + p + 2}), x);
}

HierarchicalSpec central(int n, std::vector<Box> regions) {
  HierarchicalSpec s;
  s.domain = Box{0, n, 0, n};
  s.nx = s.ny = n;
  s.mult_x = s.mult_y = 4;
  s.regions.clear();
  for (auto& r : regions) s.regions.push_back({r});
  return s;
}

void check_unity(const THBSpace& s, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ux(s.core().x0.to_double(), s.core().x1.to_double());
  std::uniform_real_distribution<double> uy(s.core().y0.to_double(), s.core().y1.to_double());
  double worst = 0;
  for (int i = 0; i < 500; ++i)
    worst = std::max(worst, std::abs(thb_partition_sum(s, ux(rng), uy(rng)) - 1.0));
  CHECK(worst < 1e-12);
}

}  // namespace

TEST_CASE("two-scale of the interval indicator") {
  const std::vector<double> coarse{0, 1}, fine{0, 0.5, 1};
  const auto c = two_scale_univariate(coarse, fine, 0, 0);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == std::pair{0, 1.0});
  CHECK(c[1] == std::pair{1, 1.0});
}

TEST_CASE("two-scale of the uniform cubic is the classic mask") {
  const auto coarse = uniform_knots(0, 8, 1, 1);
  const auto fine = uniform_knots(0, 8, 0.5, 1);
  const auto c = two_scale_univariate(coarse, fine, 3, 1);  // window [1..5]
  REQUIRE(c.size() == 5);
  const double expect[]{0.125, 0.5, 0.75, 0.5, 0.125};
  for (int k = 0; k < 5; ++k) {
    CHECK(c[static_cast<std::size_t>(k)].first == 2 * 1 + k);
    CHECK(c[static_cast<std::size_t>(k)].second == doctest::Approx(expect[k]).epsilon(1e-14));
  }
}

TEST_CASE("two-scale reproduces the coarse function pointwise") {
  for (int p = 0; p <= 3; ++p) {
    const auto coarse = uniform_knots(0, 6, 1, p + 1);
    const auto fine = uniform_knots(0, 6, 0.5, p + 1);
    const int nw = static_cast<int>(coarse.size()) - p - 1;
    for (int i = 0; i < nw; ++i) {
      const auto c = two_scale_univariate(coarse, fine, p, i);
      for (auto& [k, a] : c) {
        CHECK(a > 0.0);
        CHECK(a <= 1.0 + 1e-15);
      }
      for (int g = 0; g <= 50; ++g) {
        const double x = 6.0 * g / 50.0 - 1e-9;
        double sum = 0;
        for (const auto& [k, a] : c) sum += a * eval_window(fine, p, k, x);
        CHECK(sum == doctest::Approx(eval_window(coarse, p, i, x)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("bivariate two-scale is the outer product") {
  const auto cu = uniform_knots(0, 6, 1, 4);
  const auto fu = uniform_knots(0, 6, 0.5, 4);
  const auto cv = uniform_knots(0, 4, 1, 3);
  const auto fv = uniform_knots(0, 4, 0.5, 3);
  const auto m = two_scale_bivariate(cu, fu, 3, cv, fv, 2, 2, 1);
  const auto au = two_scale_univariate(cu, fu, 3, 2);
  const auto av = two_scale_univariate(cv, fv, 2, 1);
  CHECK(m.size() == au.size() * av.size());
  for (const auto& [iu, a] : au)
    for (const auto& [jv, b] : av) {
      const auto it = m.find({iu, jv});
      REQUIRE(it != m.end());
      CHECK(it->second == a * b);
    }
}

TEST_CASE("truncation removes exactly the swallowed terms") {
  const auto cu = uniform_knots(0, 8, 1, 4);
  const auto fu = uniform_knots(0, 8, 0.5, 4);
  const std::vector<Box> region{Box{2, 6, 2, 6}};
  const int iw = 4, jw = 4;  // mother [1..5] x [1..5] (offset by boundary mult)
  auto rep = two_scale_bivariate(cu, fu, 3, cu, fu, 3, iw, jw);

  const auto kept = truncate_terms(rep, fu, 3, fu, 3, region);
  CHECK(kept.size() < rep.size());
  CHECK(!kept.empty());
  const auto kept2 = truncate_terms(kept, fu, 3, fu, 3, region);
  CHECK(kept2 == kept);  // idempotent
  for (const auto& [ij, c] : kept) {
    const auto it = rep.find(ij);
    REQUIRE(it != rep.end());
    CHECK(it->second == c);  // retained coefficients untouched
  }

  // Additive form equals the subtractive one: kept = mother - dropped.
  std::mt19937 rng(31337);
  std::uniform_real_distribution<double> u(0.0, 8.0);
  for (int k = 0; k < 100; ++k) {
    const double x = u(rng), y = u(rng);
    double kept_sum = 0, dropped_sum = 0;
    for (const auto& [ij, c] : rep) {
      const double v = c * eval_window(fu, 3, ij.first, x) * eval_window(fu, 3, ij.second, y);
      if (kept.count(ij))
        kept_sum += v;
      else
        dropped_sum += v;
    }
    const double mother = eval_window(cu, 3, iw, x) * eval_window(cu, 3, jw, y);
    CHECK(std::abs(kept_sum - (mother - dropped_sum)) < 1e-13);
  }

  // Disjoint region: identity. Swallowing region: complete removal.
  CHECK(truncate_terms(rep, fu, 3, fu, 3, {Box{6, 8, 6, 8}}) == rep);
  CHECK(truncate_terms(rep, fu, 3, fu, 3, {Box{0, 8, 0, 8}}).empty());
}

TEST_CASE("single level is the tensor basis") {
  const auto s = thb_construct(central(6, {}), 3, 3);
  CHECK(s.basis.size() == 81);
  for (const auto& f : s.basis) {
    CHECK(f.origin_level == 1);
    CHECK(f.rep_level == 1);
    CHECK(f.rep.size() == 1);
  }
  check_unity(s, 201);
}

TEST_CASE("two-level central hierarchy has the counted dimension") {
  const auto s = thb_construct(central(8, {Box{2, 6, 2, 6}}), 3, 3);
  CHECK(s.basis.size() == 145);  // 121 - 1 swallowed + 25 new
  check_unity(s, 202);
  int level2 = 0;
  for (const auto& f : s.basis) level2 += f.origin_level == 2 ? 1 : 0;
  CHECK(level2 == 25);

  // Coefficients stay in (0, 1]; functions are nonnegative on the domain.
  std::mt19937 rng(203);
  std::uniform_real_distribution<double> u(0.0, 8.0);
  for (const auto& f : s.basis) {
    CHECK(!f.rep.empty());
    for (const auto& [ij, c] : f.rep) {
      CHECK(c > 0.0);
      CHECK(c <= 1.0 + 1e-15);
    }
    for (int k = 0; k < 20; ++k) CHECK(thb_eval(s, f, u(rng), u(rng)) >= 0.0);
  }
}

TEST_CASE("three-level central hierarchy: dimension, unity, supports") {
  const auto s = thb_construct(central(16, {Box{4, 12, 4, 12}, Box{6, 10, 6, 10}}), 3, 3);
  CHECK(s.basis.size() == 649);  // 361 - 25 + 169, then -25 + 169
  check_unity(s, 204);

  // A function evaluates to zero strictly inside elements it is not
  // supported on.
  std::mt19937 rng(205);
  std::uniform_int_distribution<std::size_t> pick(0, s.basis.size() - 1);
  const auto& elems = s.mesh.elements();
  std::uniform_int_distribution<std::size_t> epick(0, elems.size() - 1);
  for (int k = 0; k < 400; ++k) {
    const auto& f = s.basis[pick(rng)];
    const auto& e = elems[epick(rng)];
    const double x = (e.box.x0.to_double() + e.box.x1.to_double()) / 2;
    const double y = (e.box.y0.to_double() + e.box.y1.to_double()) / 2;
    if (!thb_supported_on(s, f, e.box)) CHECK(thb_eval(s, f, x, y) == 0.0);
  }
}

TEST_CASE("ghost hierarchy matches the open dimension on the tensor level") {
  const auto open = thb_construct(central(8, {}), 3, 3);
  const auto ghost = thb_construct(central(8, {}), 3, 3, Boundary::ghost);
  CHECK(open.basis.size() == 121);
  CHECK(ghost.basis.size() == 121);
  CHECK(ghost.core() == Box{0, 8, 0, 8});
  check_unity(ghost, 206);
  const std::vector<double> corner{-3, -2, -1, 0, 1};
  bool found = false;
  for (const auto& f : ghost.basis)
    found = found || (f.mother.first == corner && f.mother.second == corner);
  CHECK(found);
}

TEST_CASE("ghost hierarchy with refinement keeps unity") {
  const auto s = thb_construct(central(8, {Box{2, 6, 2, 6}}), 3, 3, Boundary::ghost);
  check_unity(s, 207);
  for (const auto& f : s.basis)
    for (const auto& [ij, c] : f.rep) {
      CHECK(c > 0.0);
      CHECK(c <= 1.0 + 1e-15);
    }
}

TEST_CASE("hierarchical mesh equals the refined LR mesh on the shared substrate") {
  const auto spec = central(8, {Box{2, 6, 2, 6}});
  const auto thb = thb_construct(spec, 3, 3);

  const auto seed = BoxMesh::tensor(spec.domain, 8, 8, 4, 4, PhysMap{});
  auto lr = lr_tensor(seed, 3, 3);
  refine_region(lr, {Box{2, 6, 2, 6}});
  REQUIRE(thb.mesh.elements().size() == lr.mesh.elements().size());
  for (std::size_t i = 0; i < lr.mesh.elements().size(); ++i)
    CHECK(thb.mesh.elements()[i].box == lr.mesh.elements()[i].box);

  // THB is a subspace of LRB there: every THB function is representable in
  // the LR basis, and dim(THB) <= dim(LRB).
  const auto lrf = active_functions(lr);
  CHECK(thb.basis.size() <= lrf.size());

  std::vector<std::pair<double, double>> pts;
  for (const auto& e : lr.mesh.elements()) {
    const double x0 = e.box.x0.to_double(), x1 = e.box.x1.to_double();
    const double y0 = e.box.y0.to_double(), y1 = e.box.y1.to_double();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        pts.emplace_back(x0 + (x1 - x0) * (2 * i + 1) / 8.0, y0 + (y1 - y0) * (2 * j + 1) / 8.0);
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(lrf.size()));
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      a(r, c) = eval_tensor(lrf[static_cast<std::size_t>(c)], pts[static_cast<std::size_t>(r)].first,
                            pts[static_cast<std::size_t>(r)].second);
  const auto qr = a.colPivHouseholderQr();
  for (const auto& f : thb.basis) {
    Eigen::VectorXd rhs(a.rows());
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      rhs(r) = thb_eval(thb, f, pts[static_cast<std::size_t>(r)].first,
                        pts[static_cast<std::size_t>(r)].second);
    CHECK((a * qr.solve(rhs) - rhs).norm() < 1e-9);
  }
}

TEST_CASE("dump carries origin levels") {
  const auto s = thb_construct(central(8, {Box{2, 6, 2, 6}}), 3, 3);
  const std::string dump = write_space(s);
  CHECK(dump.find("# splyne space v1\n") == 0);
  CHECK(dump.find("# funcs 145\n") != std::string::npos);
  CHECK(dump.find("#level 1\n") != std::string::npos);
  CHECK(dump.find("#level 2\n") != std::string::npos);
  CHECK(dump.find(" | 1\n") != std::string::npos);
}
