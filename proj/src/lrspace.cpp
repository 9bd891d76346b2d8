#include "splyne/lrspace.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <optional>

namespace splyne {

namespace {

Dyadic dfd(double x) { return dyadic_from_double(x); }

int mult_in(const std::vector<double>& t, double c) {
  int n = 0;
  for (double v : t) n += v == c ? 1 : 0;
  return n;
}

struct SupportExt {
  Dyadic x0, x1, y0, y1;
};

SupportExt support(const KnotKey& k) {
  return {dfd(k.first.front()), dfd(k.first.back()), dfd(k.second.front()), dfd(k.second.back())};
}

struct Witness {
  Dir dir;
  double coord;
};

// First mesh line splitting the function: u-direction before v, coordinates
// ascending. A line splits iff it traverses the whole support at a fixed
// coordinate strictly inside it, with multiplicity exceeding the local knot
// multiplicity there.
std::optional<Witness> find_witness(const BoxMesh& mesh, const KnotKey& key) {
  const SupportExt s = support(key);
  for (const auto& [c, runs] : mesh.lines(Dir::vertical)) {
    if (c <= s.x0) continue;
    if (c >= s.x1) break;
    const double cd = c.to_double();
    if (mesh.traversal_mult(Dir::vertical, c, s.y0, s.y1) > mult_in(key.first, cd))
      return Witness{Dir::vertical, cd};
  }
  for (const auto& [c, runs] : mesh.lines(Dir::horizontal)) {
    if (c <= s.y0) continue;
    if (c >= s.y1) break;
    const double cd = c.to_double();
    if (mesh.traversal_mult(Dir::horizontal, c, s.x0, s.x1) > mult_in(key.second, cd))
      return Witness{Dir::horizontal, cd};
  }
  return std::nullopt;
}

// FIFO minimal-support restoration. Children merging into an existing
// function just add weight; only fresh keys join the queue.
int cascade(LRSpace& s, std::deque<KnotKey> queue) {
  int splits = 0;
  while (!queue.empty()) {
    const KnotKey key = std::move(queue.front());
    queue.pop_front();
    const auto it = s.funcs.find(key);
    if (it == s.funcs.end()) continue;
    const auto wit = find_witness(s.mesh, key);
    if (!wit) continue;
    const double w = it->second;
    s.funcs.erase(it);
    const SplitResult r = wit->dir == Dir::vertical
                              ? split_univariate(LocalKnotVector(key.first), wit->coord)
                              : split_univariate(LocalKnotVector(key.second), wit->coord);
    for (const auto& [child, alpha] :
         {std::pair{r.left, r.alpha_left}, std::pair{r.right, r.alpha_right}}) {
      KnotKey ck = wit->dir == Dir::vertical ? KnotKey{child.t, key.second}
                                             : KnotKey{key.first, child.t};
      const auto [cit, fresh] = s.funcs.emplace(std::move(ck), w * alpha);
      if (!fresh)
        cit->second += w * alpha;
      else
        queue.push_back(cit->first);
    }
    ++splits;
  }
  return splits;
}

// Functions the freshly inserted line now splits; checked against the merged
// runs so that a segment completing older partial coverage counts too.
std::deque<KnotKey> affected(const LRSpace& s, const MeshRectangle& r) {
  std::deque<KnotKey> q;
  for (const auto& [key, w] : s.funcs) {
    const SupportExt sup = support(key);
    if (r.dir == Dir::vertical) {
      if (sup.x0 < r.fixed && r.fixed < sup.x1 &&
          s.mesh.traversal_mult(Dir::vertical, r.fixed, sup.y0, sup.y1) >
              mult_in(key.first, r.fixed.to_double()))
        q.push_back(key);
    } else {
      if (sup.y0 < r.fixed && r.fixed < sup.y1 &&
          s.mesh.traversal_mult(Dir::horizontal, r.fixed, sup.x0, sup.x1) >
              mult_in(key.second, r.fixed.to_double()))
        q.push_back(key);
    }
  }
  return q;
}

bool would_split(const LRSpace& s, const MeshRectangle& r) {
  BoxMesh probe = s.mesh;
  probe.insert(r);
  for (const auto& [key, w] : s.funcs) {
    const SupportExt sup = support(key);
    if (r.dir == Dir::vertical) {
      if (sup.x0 < r.fixed && r.fixed < sup.x1 &&
          probe.traversal_mult(Dir::vertical, r.fixed, sup.y0, sup.y1) >
              mult_in(key.first, r.fixed.to_double()))
        return true;
    } else {
      if (sup.y0 < r.fixed && r.fixed < sup.y1 &&
          probe.traversal_mult(Dir::horizontal, r.fixed, sup.x0, sup.x1) >
              mult_in(key.second, r.fixed.to_double()))
        return true;
    }
  }
  return false;
}

int apply_line(LRSpace& s, const MeshRectangle& r) {
  s.mesh.insert(r);
  return cascade(s, affected(s, r));
}

// Midline placement for refine_region: take the bare span if it splits a
// function, otherwise lengthen by whole neighboring elements, symmetrically,
// preferring the side toward the nearer domain edge on ties.
MeshRectangle fit_midline(const LRSpace& s, Dir dir, Dyadic fixed, Dyadic lo, Dyadic hi) {
  const auto admissible = [&](Dyadic a, Dyadic b) {
    const MeshRectangle r{dir, fixed, a, b, 1};
    try {
      return would_split(s, r);
    } catch (const config_error&) {
      return false;
    }
  };
  if (admissible(lo, hi)) return {dir, fixed, lo, hi, 1};

  const auto step = [&](Dyadic cur, bool down) -> std::optional<Dyadic> {
    for (const auto& e : s.mesh.elements()) {
      const Dyadic t0 = dir == Dir::vertical ? e.box.x0 : e.box.y0;
      const Dyadic t1 = dir == Dir::vertical ? e.box.x1 : e.box.y1;
      const Dyadic s0 = dir == Dir::vertical ? e.box.y0 : e.box.x0;
      const Dyadic s1 = dir == Dir::vertical ? e.box.y1 : e.box.x1;
      if (!(t0 < fixed && fixed < t1)) continue;
      if (down && s1 == cur) return s0;
      if (!down && s0 == cur) return s1;
    }
    return std::nullopt;
  };
  std::vector<Dyadic> downs{lo}, ups{hi};
  for (int k = 0; k < 8; ++k) {
    if (const auto nv = step(downs.back(), true)) downs.push_back(*nv);
    if (const auto nv = step(ups.back(), false)) ups.push_back(*nv);
  }

  const Box dom = s.mesh.domain();
  const double dist_lo =
      dir == Dir::vertical ? (lo - dom.y0).to_double() : (lo - dom.x0).to_double();
  const double dist_hi =
      dir == Dir::vertical ? (dom.y1 - hi).to_double() : (dom.x1 - hi).to_double();
  const bool prefer_down = dist_lo <= dist_hi;

  for (int total = 1; total <= 14; ++total) {
    std::vector<std::pair<int, int>> order;
    for (int a = 0; a <= total; ++a) order.emplace_back(a, total - a);
    std::stable_sort(order.begin(), order.end(), [&](const auto& u, const auto& v) {
      const int du = std::abs(u.first - u.second), dv = std::abs(v.first - v.second);
      if (du != dv) return du < dv;
      return prefer_down ? u.first > v.first : u.first < v.first;
    });
    for (const auto& [a, b] : order) {
      if (a >= static_cast<int>(downs.size()) || b >= static_cast<int>(ups.size())) continue;
      if (admissible(downs[a], ups[b])) return {dir, fixed, downs[a], ups[b], 1};
    }
  }
  throw config_error("refine_region: no admissible extension for a midline");
}

std::string fmt_weight(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Box LRSpace::core() const {
  const Box d = mesh.domain();
  if (boundary == Boundary::open) return d;
  return Box{d.x0 + Dyadic{p1}, d.x1 - Dyadic{p1}, d.y0 + Dyadic{p2}, d.y1 - Dyadic{p2}};
}

LRSpace lr_tensor(const BoxMesh& seed, int p1, int p2, Boundary boundary) {
  if (p1 < 0 || p2 < 0) throw config_error("lr_tensor: negative degree");
  const int mx = seed.boundary_mult_x(), my = seed.boundary_mult_y();
  if (mx > p1 + 1 || my > p2 + 1)
    throw config_error("lr_tensor: boundary multiplicity exceeds degree + 1");
  const auto global = [](Dyadic lo, Dyadic hi, int n, int mult) {
    std::vector<double> t;
    for (int i = 0; i < mult; ++i) t.push_back(lo.to_double());
    for (int i = 1; i < n; ++i) t.push_back((lo + Dyadic{i}).to_double());
    for (int i = 0; i < mult; ++i) t.push_back(hi.to_double());
    return t;
  };
  const auto tu = global(seed.domain().x0, seed.domain().x1, seed.init_nx(), mx);
  const auto tv = global(seed.domain().y0, seed.domain().y1, seed.init_ny(), my);
  if (static_cast<int>(tu.size()) < p1 + 2 || static_cast<int>(tv.size()) < p2 + 2)
    throw config_error("lr_tensor: seed grid too small for the degree");
  LRSpace s{seed, p1, p2, boundary, {}};
  for (std::size_t i = 0; i + p1 + 1 < tu.size(); ++i)
    for (std::size_t j = 0; j + p2 + 1 < tv.size(); ++j) {
      std::vector<double> u(tu.begin() + i, tu.begin() + i + p1 + 2);
      std::vector<double> v(tv.begin() + j, tv.begin() + j + p2 + 2);
      s.funcs.emplace(KnotKey{std::move(u), std::move(v)}, 1.0);
    }
  return s;
}

LRSpace lr_ghost_tensor(Box core_domain, int nx, int ny, PhysMap phys, int p1, int p2) {
  const Box ext{core_domain.x0 - Dyadic{p1}, core_domain.x1 + Dyadic{p1},
                core_domain.y0 - Dyadic{p2}, core_domain.y1 + Dyadic{p2}};
  const BoxMesh seed = BoxMesh::tensor(ext, nx + 2 * p1, ny + 2 * p2, 1, 1, phys);
  return lr_tensor(seed, p1, p2, Boundary::ghost);
}

int insert_local_line(LRSpace& space, const MeshRectangle& line) {
  if (!would_split(space, line))
    throw config_error("inadmissible insertion: meshline splits no function");
  return apply_line(space, line);
}

LRSpace lr_construct(const BoxMesh& mesh, int p1, int p2, Boundary boundary) {
  const BoxMesh seed = BoxMesh::tensor(mesh.domain(), mesh.init_nx(), mesh.init_ny(),
                                       mesh.boundary_mult_x(), mesh.boundary_mult_y(), mesh.phys());
  LRSpace s = lr_tensor(seed, p1, p2, boundary);
  for (const auto& r : mesh.history())
    if (apply_line(s, r) == 0)
      throw config_error("inadmissible insertion in mesh history: splits no function");
  return s;
}

std::vector<MeshRectangle> refine_region(LRSpace& space, const std::vector<Box>& region) {
  for (const auto& e : space.mesh.elements()) {
    bool touches = false;
    for (const auto& b : region) touches = touches || b.overlaps_interior(e.box);
    if (touches && !union_contains_box(region, e.box))
      throw config_error("refine_region: region boundary not aligned with the mesh");
  }

  // Midlines of the elements as they are now, merged into maximal spans.
  std::map<Dyadic, std::vector<std::pair<Dyadic, Dyadic>>> cands[2];
  for (const auto& e : space.mesh.elements())
    if (union_contains_box(region, e.box)) {
      cands[0][midpoint(e.box.x0, e.box.x1)].emplace_back(e.box.y0, e.box.y1);
      cands[1][midpoint(e.box.y0, e.box.y1)].emplace_back(e.box.x0, e.box.x1);
    }
  const auto merge = [](std::vector<std::pair<Dyadic, Dyadic>>& iv) {
    std::sort(iv.begin(), iv.end());
    std::vector<std::pair<Dyadic, Dyadic>> out;
    for (const auto& [lo, hi] : iv) {
      if (!out.empty() && lo <= out.back().second)
        out.back().second = std::max(out.back().second, hi);
      else
        out.emplace_back(lo, hi);
    }
    iv = std::move(out);
  };

  std::vector<MeshRectangle> inserted;
  for (int d = 0; d < 2; ++d) {
    const Dir dir = d == 0 ? Dir::vertical : Dir::horizontal;
    for (auto& [fixed, iv] : cands[d]) {
      merge(iv);
      for (const auto& [lo, hi] : iv) {
        const MeshRectangle line = fit_midline(space, dir, fixed, lo, hi);
        if (apply_line(space, line) == 0)
          throw config_error("refine_region: fitted midline split nothing");
        inserted.push_back(line);
      }
    }
  }
  return inserted;
}

bool has_minimal_support(const BoxMesh& mesh, const KnotKey& key) {
  const SupportExt s = support(key);
  for (std::size_t i = 0; i < key.first.size();) {
    std::size_t j = i;
    while (j < key.first.size() && key.first[j] == key.first[i]) ++j;
    if (!mesh.covered(Dir::vertical, dfd(key.first[i]), s.y0, s.y1, static_cast<int>(j - i)))
      return false;
    i = j;
  }
  for (std::size_t i = 0; i < key.second.size();) {
    std::size_t j = i;
    while (j < key.second.size() && key.second[j] == key.second[i]) ++j;
    if (!mesh.covered(Dir::horizontal, dfd(key.second[i]), s.x0, s.x1, static_cast<int>(j - i)))
      return false;
    i = j;
  }
  return !find_witness(mesh, key).has_value();
}

std::vector<TensorBSpline> active_functions(const LRSpace& space) {
  const Box c = space.core();
  std::vector<TensorBSpline> out;
  for (const auto& [key, w] : space.funcs) {
    const SupportExt s = support(key);
    if (s.x0 < c.x1 && c.x0 < s.x1 && s.y0 < c.y1 && c.y0 < s.y1)
      out.push_back({LocalKnotVector(key.first), LocalKnotVector(key.second), w});
  }
  return out;
}

double partition_sum(const LRSpace& space, double x, double y) {
  const bool frx = x < space.mesh.xmax();
  const bool fry = y < space.mesh.ymax();
  double sum = 0;
  for (const auto& [key, w] : space.funcs)
    sum += w * eval_univariate(LocalKnotVector(key.first), x, frx) *
           eval_univariate(LocalKnotVector(key.second), y, fry);
  return sum;
}

std::string write_space(const LRSpace& space) {
  const auto funcs = active_functions(space);
  std::string out = "# splyne space v1\n# degree " + std::to_string(space.p1) + " " +
                    std::to_string(space.p2) + "\n# boundary " +
                    (space.boundary == Boundary::open ? "open" : "ghost") + "\n# funcs " +
                    std::to_string(funcs.size()) + "\n";
  for (const auto& f : funcs) {
    std::string line;
    for (double t : f.u.t) line += to_string(dfd(t)) + " ";
    line += "| ";
    for (double t : f.v.t) line += to_string(dfd(t)) + " ";
    line += "| " + fmt_weight(f.weight);
    out += line + "\n";
  }
  return out;
}

}  // namespace splyne
