#include "splyne/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <thread>

#include "splyne/errors.hpp"

namespace splyne {

std::vector<std::pair<double, double>> gauss_legendre(int n) {
  // Newton on P_n from the usual cosine initial guesses; the derivative comes
  // from the three-term recurrence. Converges to machine precision in a
  // handful of steps for the small n used here.
  std::vector<std::pair<double, double>> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dpn = 1.0;
    for (int it = 0; it < 64; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dpn = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
      const double step = (n == 1 ? x : p1 / dpn);
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    out[static_cast<std::size_t>(i)] = {x, 2.0 / ((1.0 - x * x) * dpn * dpn)};
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

int thread_budget() {
  if (const char* s = std::getenv("SPLYNE_THREADS")) {
    const int n = std::atoi(s);
    if (n >= 1) return std::min(n, 64);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// The two space kinds behind one assembly loop: index-space evaluation plus a
// supported-on-element predicate. Support boxes give the cheap prefilter; the
// THB predicate still consults the truncated rep, which can vanish on parts
// of the mother support.
struct LRView {
  const LRSpace& s;
  std::vector<TensorBSpline> funcs;

  explicit LRView(const LRSpace& space) : s(space), funcs(active_functions(space)) {}

  std::size_t size() const { return funcs.size(); }
  bool supported(std::size_t i, const Box& b) const {
    const TensorBSpline& f = funcs[i];
    return f.x0() < b.x1.to_double() && b.x0.to_double() < f.x1() &&
           f.y0() < b.y1.to_double() && b.y0.to_double() < f.y1();
  }
  double value(std::size_t i, double x, double y) const { return eval_tensor(funcs[i], x, y); }
  std::pair<double, double> grad(std::size_t i, double x, double y) const {
    return grad_tensor(funcs[i], x, y);
  }
};

struct THBView {
  const THBSpace& s;
  std::vector<Box> boxes;

  explicit THBView(const THBSpace& space) : s(space) {
    boxes.reserve(s.basis.size());
    for (const THBFunction& f : s.basis) boxes.push_back(thb_support(s, f));
  }

  std::size_t size() const { return s.basis.size(); }
  bool supported(std::size_t i, const Box& b) const {
    return boxes[i].overlaps_interior(b) && thb_supported_on(s, s.basis[i], b);
  }
  double value(std::size_t i, double x, double y) const {
    return thb_eval(s, s.basis[i], x, y);
  }
  std::pair<double, double> grad(std::size_t i, double x, double y) const {
    return thb_grad(s, s.basis[i], x, y);
  }
};

std::vector<Box> core_element_boxes(const BoxMesh& mesh, const Box& core) {
  std::vector<Box> out;
  for (const Element& e : mesh.elements())
    if (core.contains(e.box)) out.push_back(e.box);
  return out;
}

struct LocalBlock {
  std::vector<std::size_t> idx;
  Eigen::MatrixXd m;
};

// Element loop: local blocks are computed in parallel, then scattered in
// element order, so the sum is independent of the thread count.
template <class View>
Eigen::MatrixXd assemble_matrix(const View& view, const std::vector<Box>& els,
                                const PhysMap& phys, int p1, int p2, OperatorKind kind) {
  const auto n = static_cast<Eigen::Index>(view.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  const auto gu = gauss_legendre(p1 + 1);
  const auto gv = gauss_legendre(p2 + 1);

  const std::size_t batch = 256;
  const int threads = std::max(1, thread_budget());
  std::vector<LocalBlock> blocks(std::min(batch, els.size()));

  for (std::size_t start = 0; start < els.size(); start += batch) {
    const std::size_t stop = std::min(start + batch, els.size());
    auto worker = [&](std::size_t tid) {
      for (std::size_t k = start + tid; k < stop; k += static_cast<std::size_t>(threads)) {
        const Box& b = els[k];
        LocalBlock& loc = blocks[k - start];
        loc.idx.clear();
        for (std::size_t i = 0; i < view.size(); ++i)
          if (view.supported(i, b)) loc.idx.push_back(i);
        const auto nl = static_cast<Eigen::Index>(loc.idx.size());
        loc.m = Eigen::MatrixXd::Zero(nl, nl);

        const double x0 = b.x0.to_double(), x1 = b.x1.to_double();
        const double y0 = b.y0.to_double(), y1 = b.y1.to_double();
        const double su = (x1 - x0) / 2, sv = (y1 - y0) / 2;
        const double scale = su * sv * phys.hx * phys.hy;

        Eigen::VectorXd val(nl), gx(nl), gy(nl);
        for (const auto& [xu, wu] : gu)
          for (const auto& [xv, wv] : gv) {
            const double x = (x0 + x1) / 2 + su * xu;
            const double y = (y0 + y1) / 2 + sv * xv;
            if (kind == OperatorKind::mass) {
              for (Eigen::Index a = 0; a < nl; ++a) val(a) = view.value(loc.idx[a], x, y);
              loc.m.noalias() += (wu * wv * scale) * (val * val.transpose());
            } else {
              for (Eigen::Index a = 0; a < nl; ++a) {
                const auto [du, dv] = view.grad(loc.idx[a], x, y);
                gx(a) = du / phys.hx;
                gy(a) = dv / phys.hy;
              }
              loc.m.noalias() +=
                  (wu * wv * scale) * (gx * gx.transpose() + gy * gy.transpose());
            }
          }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker, static_cast<std::size_t>(t));
    worker(0);
    for (std::thread& t : pool) t.join();

    for (std::size_t k = start; k < stop; ++k) {
      const LocalBlock& loc = blocks[k - start];
      const auto nl = static_cast<Eigen::Index>(loc.idx.size());
      for (Eigen::Index a = 0; a < nl; ++a)
        for (Eigen::Index c = 0; c < nl; ++c)
          m(static_cast<Eigen::Index>(loc.idx[static_cast<std::size_t>(a)]),
            static_cast<Eigen::Index>(loc.idx[static_cast<std::size_t>(c)])) += loc.m(a, c);
    }
  }
  return m;
}

template <class View>
Eigen::VectorXd assemble_rhs(const View& view, const std::vector<Box>& els, const PhysMap& phys,
                             int p1, int p2, const std::function<double(double, double)>& f) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(view.size()));
  const auto gu = gauss_legendre(p1 + 1);
  const auto gv = gauss_legendre(p2 + 1);
  std::vector<std::size_t> idx;
  for (const Box& b : els) {
    idx.clear();
    for (std::size_t i = 0; i < view.size(); ++i)
      if (view.supported(i, b)) idx.push_back(i);
    const double x0 = b.x0.to_double(), x1 = b.x1.to_double();
    const double y0 = b.y0.to_double(), y1 = b.y1.to_double();
    const double su = (x1 - x0) / 2, sv = (y1 - y0) / 2;
    const double scale = su * sv * phys.hx * phys.hy;
    for (const auto& [xu, wu] : gu)
      for (const auto& [xv, wv] : gv) {
        const double x = (x0 + x1) / 2 + su * xu;
        const double y = (y0 + y1) / 2 + sv * xv;
        const double fv = f(phys.x(x), phys.y(y));
        for (std::size_t i : idx)
          rhs(static_cast<Eigen::Index>(i)) += wu * wv * scale * fv * view.value(i, x, y);
      }
  }
  return rhs;
}

template <class View>
Eigen::VectorXd project_impl(const View& view, const std::vector<Box>& els, const PhysMap& phys,
                             int p1, int p2, const Eigen::MatrixXd& mass,
                             const std::function<double(double, double)>& f) {
  const Eigen::VectorXd rhs = assemble_rhs(view, els, phys, p1, p2, f);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(mass);
  const Eigen::VectorXd d = ldlt.vectorD();
  if (d.size() == 0 || d.minCoeff() <= d.maxCoeff() * 1e-14)
    throw numerical_error("mass matrix is singular");
  const Eigen::VectorXd c = ldlt.solve(rhs);
  const double scale = std::max(rhs.norm(), 1.0);
  if ((mass * c - rhs).norm() > 1e-8 * scale)
    throw numerical_error("mass solve failed to converge");
  return c;
}

std::string space_tag(const char* kind, int p1, int p2, Boundary b, std::size_t n) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s %s p=(%d,%d) n=%zu", kind,
                b == Boundary::ghost ? "ghost" : "open", p1, p2, n);
  return buf;
}

template <class View>
Heatmap heatmap_impl(const View& view, const std::vector<Element>& els,
                     const Eigen::VectorXd& coeffs) {
  Heatmap h;
  h.elements = els;
  h.intensity.assign(els.size(), 0.0);
  for (std::size_t k = 0; k < els.size(); ++k)
    for (std::size_t i = 0; i < view.size(); ++i)
      if (view.supported(i, els[k].box))
        h.intensity[k] = std::max(h.intensity[k], std::abs(coeffs(static_cast<Eigen::Index>(i))));
  const double top = h.intensity.empty()
                         ? 0.0
                         : *std::max_element(h.intensity.begin(), h.intensity.end());
  if (top > 0.0)
    for (double& v : h.intensity) v /= top;
  return h;
}

std::vector<Element> core_elements(const BoxMesh& mesh, const Box& core) {
  std::vector<Element> out;
  for (const Element& e : mesh.elements())
    if (core.contains(e.box)) out.push_back(e);
  return out;
}

}  // namespace

SymmetricOperator assemble(const LRSpace& space, OperatorKind kind) {
  const LRView view(space);
  SymmetricOperator op;
  op.kind = kind;
  op.matrix = assemble_matrix(view, core_element_boxes(space.mesh, space.core()),
                              space.mesh.phys(), space.p1, space.p2, kind);
  op.basis_tag = space_tag("lrb", space.p1, space.p2, space.boundary, view.size());
  return op;
}

SymmetricOperator assemble(const THBSpace& space, OperatorKind kind) {
  const THBView view(space);
  SymmetricOperator op;
  op.kind = kind;
  op.matrix = assemble_matrix(view, core_element_boxes(space.mesh, space.core()),
                              space.mesh.phys(), space.p1, space.p2, kind);
  op.basis_tag = space_tag("thb", space.p1, space.p2, space.boundary, view.size());
  return op;
}

Eigen::VectorXd l2_project(const LRSpace& space, const std::function<double(double, double)>& f) {
  const LRView view(space);
  const auto els = core_element_boxes(space.mesh, space.core());
  const Eigen::MatrixXd mass =
      assemble_matrix(view, els, space.mesh.phys(), space.p1, space.p2, OperatorKind::mass);
  return project_impl(view, els, space.mesh.phys(), space.p1, space.p2, mass, f);
}

Eigen::VectorXd l2_project(const THBSpace& space, const std::function<double(double, double)>& f) {
  const THBView view(space);
  const auto els = core_element_boxes(space.mesh, space.core());
  const Eigen::MatrixXd mass =
      assemble_matrix(view, els, space.mesh.phys(), space.p1, space.p2, OperatorKind::mass);
  return project_impl(view, els, space.mesh.phys(), space.p1, space.p2, mass, f);
}

EigenSummary eigensolve(const SymmetricOperator& op) {
  const Eigen::MatrixXd& a = op.matrix;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale)
    throw numerical_error("matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) throw numerical_error("eigendecomposition failed");

  const Eigen::Index n = a.rows();
  EigenSummary s;
  s.eigenvalues = solver.eigenvalues().reverse();
  s.eigvec_min = solver.eigenvectors().col(0);
  s.eigvec_max = solver.eigenvectors().col(n - 1);

  const auto residual = [&](const Eigen::VectorXd& v, double lambda) {
    return (a * v - lambda * v).norm() / v.norm();
  };
  if (residual(s.eigvec_min, s.eigenvalues(n - 1)) > 1e-9 ||
      residual(s.eigvec_max, s.eigenvalues(0)) > 1e-9)
    throw numerical_error("eigenpair residual out of tolerance");
  return s;
}

double condition_estimate(const SymmetricOperator& op, const EigenSummary& summary) {
  const Eigen::Index n = summary.eigenvalues.size();
  const double top = std::abs(summary.eigenvalues(0));
  if (op.kind == OperatorKind::mass) {
    const double bottom = std::abs(summary.eigenvalues(n - 1));
    return bottom > 0 ? top / bottom : std::numeric_limits<double>::infinity();
  }
  if (n < 2) return std::numeric_limits<double>::infinity();
  const double bottom = std::abs(summary.eigenvalues(n - 2));
  return bottom > 0 ? top / bottom : std::numeric_limits<double>::infinity();
}

double condition_estimate(const SymmetricOperator& op) {
  return condition_estimate(op, eigensolve(op));
}

Heatmap eigvec_heatmap(const LRSpace& space, const EigenSummary& summary, Extreme which) {
  return heatmap_impl(LRView(space), core_elements(space.mesh, space.core()),
                      which == Extreme::min ? summary.eigvec_min : summary.eigvec_max);
}

Heatmap eigvec_heatmap(const THBSpace& space, const EigenSummary& summary, Extreme which) {
  return heatmap_impl(THBView(space), core_elements(space.mesh, space.core()),
                      which == Extreme::min ? summary.eigvec_min : summary.eigvec_max);
}

std::string write_matrix_market(const SymmetricOperator& op) {
  const Eigen::MatrixXd& a = op.matrix;
  std::size_t nnz = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = j; i < a.rows(); ++i)
      if (a(i, j) != 0.0) ++nnz;

  std::string out = "%%MatrixMarket matrix coordinate real symmetric\n";
  char buf[96];
  std::snprintf(buf, sizeof buf, "%ld %ld %zu\n", static_cast<long>(a.rows()),
                static_cast<long>(a.cols()), nnz);
  out += buf;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = j; i < a.rows(); ++i)
      if (a(i, j) != 0.0) {
        std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", static_cast<long>(i + 1),
                      static_cast<long>(j + 1), a(i, j));
        out += buf;
      }
  return out;
}

std::string write_eigen_csv(const EigenSummary& summary) {
  std::string out = "index,lambda\n";
  char buf[64];
  for (Eigen::Index i = 0; i < summary.eigenvalues.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g\n", static_cast<long>(i + 1),
                  summary.eigenvalues(i));
    out += buf;
  }
  return out;
}

}  // namespace splyne
