#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <vector>

#include "splyne/lrspace.hpp"

using namespace splyne;

namespace {

LRSpace open_tensor(int n, int p) {
  const auto seed = BoxMesh::tensor(Box{0, n, 0, n}, n, n, p + 1, p + 1, PhysMap{});
  return lr_tensor(seed, p, p);
}

// Interior probe grid: (p+1)x(p+1) points per element. Values on it pin the
// polynomial piece of any function of the space exactly, so the collocation
// matrix has full row rank iff the basis is linearly independent.
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
  Eigen::MatrixXd m(static_cast<Eigen::Index>(funcs.size()), static_cast<Eigen::Index>(pts.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = eval_tensor(funcs[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)].first,
                            pts[static_cast<std::size_t>(j)].second);
  return m;
}

Eigen::Index svd_rank(const Eigen::MatrixXd& m) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const double tol = static_cast<double>(std::max(m.rows(), m.cols())) *
                     std::numeric_limits<double>::epsilon() * svd.singularValues()(0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    r += svd.singularValues()(i) > tol ? 1 : 0;
  return r;
}

void check_all_minimal(const LRSpace& s) {
  for (const auto& [key, w] : s.funcs) {
    CHECK(w > 0.0);
    CHECK(has_minimal_support(s.mesh, key));
  }
}

void check_partition_of_unity(const LRSpace& s, std::uint32_t seed) {
  std::mt19937 rng(seed);
  const Box c = s.core();
  std::uniform_real_distribution<double> ux(c.x0.to_double(), c.x1.to_double());
  std::uniform_real_distribution<double> uy(c.y0.to_double(), c.y1.to_double());
  double worst = 0;
  for (int i = 0; i < 500; ++i)
    worst = std::max(worst, std::abs(partition_sum(s, ux(rng), uy(rng)) - 1.0));
  CHECK(worst < 1e-12);
}

}  // namespace

TEST_CASE("tensor space has the tensor count with unit weights") {
  const auto s = open_tensor(5, 3);
  CHECK(s.funcs.size() == 64);
  for (const auto& [key, w] : s.funcs) CHECK(w == 1.0);
  check_all_minimal(s);
  check_partition_of_unity(s, 101);
}

TEST_CASE("full-span insertion is tensor knot insertion") {
  auto s = open_tensor(5, 3);
  const int n = insert_local_line(s, {Dir::vertical, Dyadic{5, 1}, Dyadic{0}, Dyadic{5}, 1});
  CHECK(n > 0);
  CHECK(s.funcs.size() == 64 + 8);  // one more column of v-windows
  check_all_minimal(s);
  check_partition_of_unity(s, 102);
}

TEST_CASE("a line splitting nothing is inadmissible") {
  auto s = open_tensor(8, 3);
  CHECK_THROWS_WITH_AS(insert_local_line(s, {Dir::vertical, Dyadic{7, 1}, Dyadic{3}, Dyadic{4}, 1}),
                       doctest::Contains("inadmissible"), config_error);
  CHECK(s.funcs.size() == 121);
  CHECK(s.mesh.history().empty());
}

TEST_CASE("local insertions keep minimal support and unity") {
  auto s = open_tensor(6, 2);
  insert_local_line(s, {Dir::vertical, Dyadic{5, 1}, Dyadic{0}, Dyadic{4}, 1});
  insert_local_line(s, {Dir::horizontal, Dyadic{3, 1}, Dyadic{1}, Dyadic{5}, 1});
  insert_local_line(s, {Dir::vertical, Dyadic{5, 1}, Dyadic{4}, Dyadic{6}, 1});
  check_all_minimal(s);
  check_partition_of_unity(s, 103);
  const auto funcs = active_functions(s);
  CHECK(svd_rank(collocation(funcs, probe_points(s.mesh, 2))) ==
        static_cast<Eigen::Index>(funcs.size()));
}

TEST_CASE("replaying a mesh history reproduces the space") {
  auto s = open_tensor(6, 2);
  insert_local_line(s, {Dir::vertical, Dyadic{5, 1}, Dyadic{0}, Dyadic{4}, 1});
  insert_local_line(s, {Dir::horizontal, Dyadic{3, 1}, Dyadic{1}, Dyadic{5}, 1});
  const auto r = lr_construct(s.mesh, 2, 2);
  CHECK(r.funcs == s.funcs);
  const auto back = read_mesh(write_mesh(s.mesh));
  CHECK(lr_construct(back, 2, 2).funcs == s.funcs);
}

TEST_CASE("cascade order does not change the result") {
  // Same final space when the non-minimal functions are processed LIFO
  // instead of FIFO: re-run the construction by hand with a stack.
  auto fifo = open_tensor(5, 2);
  const MeshRectangle line{Dir::vertical, Dyadic{5, 1}, Dyadic{1}, Dyadic{4}, 1};
  insert_local_line(fifo, line);

  auto mesh = BoxMesh::tensor(Box{0, 5, 0, 5}, 5, 5, 3, 3, PhysMap{});
  mesh.insert(line);
  std::map<KnotKey, double> funcs = open_tensor(5, 2).funcs;

  // Brute-force witness: scan v-direction before u, coordinates descending,
  // the reverse of the library's order.
  const auto witness = [&](const KnotKey& key) -> std::optional<std::pair<bool, double>> {
    for (const Dir dir : {Dir::horizontal, Dir::vertical}) {
      const auto& own = dir == Dir::vertical ? key.first : key.second;
      const auto& other = dir == Dir::vertical ? key.second : key.first;
      const auto& lines = mesh.lines(dir);
      for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        const double cd = it->first.to_double();
        if (!(own.front() < cd && cd < own.back())) continue;
        int mult = 0;
        for (double t : own) mult += t == cd ? 1 : 0;
        if (mesh.traversal_mult(dir, it->first, dyadic_from_double(other.front()),
                                dyadic_from_double(other.back())) > mult)
          return std::pair{dir == Dir::vertical, cd};
      }
    }
    return std::nullopt;
  };

  std::vector<KnotKey> stack;
  for (const auto& [key, w] : funcs) stack.push_back(key);
  while (!stack.empty()) {
    const KnotKey key = stack.back();
    stack.pop_back();
    const auto it = funcs.find(key);
    if (it == funcs.end()) continue;
    const auto wit = witness(key);
    if (!wit) continue;
    const auto [in_u, cd] = *wit;
    const auto r = split_univariate(LocalKnotVector(in_u ? key.first : key.second), cd);
    const double w = it->second;
    funcs.erase(it);
    for (const auto& [child, alpha] :
         {std::pair{r.left, r.alpha_left}, std::pair{r.right, r.alpha_right}}) {
      KnotKey ck = in_u ? KnotKey{child.t, key.second} : KnotKey{key.first, child.t};
      auto [cit, fresh] = funcs.emplace(ck, w * alpha);
      if (!fresh) cit->second += w * alpha;
      stack.push_back(std::move(ck));
    }
  }
  CHECK(funcs.size() == fifo.funcs.size());
  for (const auto& [key, w] : fifo.funcs) {
    auto it = funcs.find(key);
    REQUIRE(it != funcs.end());
    CHECK(it->second == doctest::Approx(w).epsilon(1e-14));
  }
}

TEST_CASE("refining the whole domain doubles the tensor grid") {
  auto s = open_tensor(4, 3);
  CHECK(s.funcs.size() == 49);
  refine_region(s, {Box{0, 4, 0, 4}});
  CHECK(s.funcs.size() == 121);  // (2*4+3)^2
  check_all_minimal(s);
  check_partition_of_unity(s, 104);
}

TEST_CASE("refine_region rejects a region cutting through elements") {
  auto s = open_tensor(4, 2);
  CHECK_THROWS_AS(refine_region(s, {Box{Dyadic{1, 1}, Dyadic{3}, Dyadic{1}, Dyadic{3}}}),
                  config_error);
}

TEST_CASE("short midlines extend symmetrically, boundary side on ties") {
  auto s = open_tensor(8, 3);
  const auto lines = refine_region(s, {Box{3, 4, 3, 4}});
  REQUIRE(lines.size() == 2);
  CHECK(lines[0].dir == Dir::vertical);
  CHECK(lines[0].fixed == Dyadic{7, 1});
  CHECK(lines[0].lo == Dyadic{1});
  CHECK(lines[0].hi == Dyadic{5});
  // The vertical insertion shortened some x-extents, so the horizontal
  // midline gets away with a smaller, symmetric extension.
  CHECK(lines[1].dir == Dir::horizontal);
  CHECK(lines[1].fixed == Dyadic{7, 1});
  CHECK(lines[1].lo == Dyadic{2});
  CHECK(lines[1].hi == Dyadic{5});
  check_all_minimal(s);
  check_partition_of_unity(s, 105);
  const auto funcs = active_functions(s);
  CHECK(svd_rank(collocation(funcs, probe_points(s.mesh, 3))) ==
        static_cast<Eigen::Index>(funcs.size()));
}

TEST_CASE("central refinement keeps nesting, independence and unity") {
  auto s = open_tensor(8, 3);
  const auto before = active_functions(s);
  refine_region(s, {Box{2, 6, 2, 6}});
  check_all_minimal(s);
  check_partition_of_unity(s, 106);

  const auto after = active_functions(s);
  const auto pts = probe_points(s.mesh, 3);
  const auto mnew = collocation(after, pts);
  CHECK(svd_rank(mnew) == static_cast<Eigen::Index>(after.size()));

  // Every coarse function must be exactly representable in the refined basis.
  const auto mold = collocation(before, pts);
  const Eigen::MatrixXd at = mnew.transpose();
  const auto qr = at.colPivHouseholderQr();
  for (Eigen::Index i = 0; i < mold.rows(); ++i) {
    const Eigen::VectorXd rhs = mold.row(i).transpose();
    const Eigen::VectorXd c = qr.solve(rhs);
    CHECK((at * c - rhs).norm() < 1e-10);
  }

  refine_region(s, {Box{3, 5, 3, 5}});
  check_all_minimal(s);
  check_partition_of_unity(s, 107);
}

TEST_CASE("ghost and open spaces span the same functions on the core") {
  // Degree (3,0): the v direction is a single constant, so this is the
  // univariate cubic comparison on [0,5].
  const auto open_seed = BoxMesh::tensor(Box{0, 5, 0, 1}, 5, 1, 4, 1, PhysMap{});
  const auto open = lr_tensor(open_seed, 3, 0);
  const auto ghost = lr_ghost_tensor(Box{0, 5, 0, 1}, 5, 1, PhysMap{}, 3, 0);
  CHECK(ghost.core() == Box{0, 5, 0, 1});

  const auto fo = active_functions(open);
  const auto fg = active_functions(ghost);
  CHECK(fo.size() == 8);
  CHECK(fg.size() == 8);

  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 200; ++i) pts.emplace_back(5.0 * (i + 0.5) / 200.0, 0.5);
  const auto mo = collocation(fo, pts);
  const auto mg = collocation(fg, pts);
  CHECK(svd_rank(mo) == 8);
  CHECK(svd_rank(mg) == 8);
  // Mutual representability on the core.
  const Eigen::MatrixXd got = mg.transpose();
  const Eigen::MatrixXd ot = mo.transpose();
  const auto qg = got.colPivHouseholderQr();
  const auto qo = ot.colPivHouseholderQr();
  for (Eigen::Index i = 0; i < 8; ++i) {
    CHECK((got * qg.solve(Eigen::VectorXd(mo.row(i).transpose())) -
           mo.row(i).transpose()).norm() < 1e-10);
    CHECK((ot * qo.solve(Eigen::VectorXd(mg.row(i).transpose())) -
           mg.row(i).transpose()).norm() < 1e-10);
  }
}

TEST_CASE("ghost corner function carries the uniform corner knots") {
  const auto ghost = lr_ghost_tensor(Box{0, 8, 0, 8}, 8, 8, PhysMap{}, 3, 3);
  const std::vector<double> corner{-3, -2, -1, 0, 1};
  CHECK(ghost.funcs.count(KnotKey{corner, corner}) == 1);
  // Unity on the core only: the uniform basis is not a partition of unity
  // outside [0, 8]^2.
  check_partition_of_unity(ghost, 108);
  const auto funcs = active_functions(ghost);
  CHECK(funcs.size() == 11 * 11);  // same dimension as the open variant
}

TEST_CASE("ghost refinement stays consistent") {
  auto s = lr_ghost_tensor(Box{0, 8, 0, 8}, 8, 8, PhysMap{}, 3, 3);
  refine_region(s, {Box{2, 6, 2, 6}});
  check_all_minimal(s);
  check_partition_of_unity(s, 109);
}

TEST_CASE("space dump lists retained functions with dyadic knots") {
  auto s = open_tensor(2, 1);
  const std::string dump = write_space(s);
  CHECK(dump.find("# splyne space v1\n") == 0);
  CHECK(dump.find("# degree 1 1\n") != std::string::npos);
  CHECK(dump.find("# boundary open\n") != std::string::npos);
  CHECK(dump.find("# funcs 9\n") != std::string::npos);
  CHECK(dump.find("0/2^0 0/2^0 1/2^0 | 0/2^0 0/2^0 1/2^0 | 1\n") != std::string::npos);
}
