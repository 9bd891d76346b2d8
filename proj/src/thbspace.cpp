#include "splyne/thbspace.hpp"

#include <algorithm>
#include <cstdio>

namespace splyne {

namespace {

Dyadic dfd(double x) { return dyadic_from_double(x); }

int count_in(const std::vector<double>& t, double v) {
  int n = 0;
  for (double x : t) n += x == v ? 1 : 0;
  return n;
}

int window_count(const std::vector<double>& kv, int p) {
  return static_cast<int>(kv.size()) - p - 1;
}

std::vector<double> window(const std::vector<double>& kv, int p, int i) {
  return {kv.begin() + i, kv.begin() + i + p + 2};
}

int window_index(const std::vector<double>& kv, int p, const std::vector<double>& w) {
  for (int i = 0; i + p + 1 < static_cast<int>(kv.size()); ++i) {
    bool ok = true;
    for (int k = 0; ok && k <= p + 1; ++k) ok = kv[i + k] == w[static_cast<std::size_t>(k)];
    if (ok) return i;
  }
  return -1;
}

std::vector<double> level_knots(Dyadic lo, Dyadic hi, int level, int mult) {
  const Dyadic cell = level_cell(level);
  std::vector<double> t;
  for (int i = 0; i < mult; ++i) t.push_back(lo.to_double());
  for (Dyadic c = lo + cell; c < hi; c = c + cell) t.push_back(c.to_double());
  for (int i = 0; i < mult; ++i) t.push_back(hi.to_double());
  return t;
}

Box window_box(const std::vector<double>& fu, int p1, const std::vector<double>& fv, int p2, int i,
               int j) {
  return Box{dfd(fu[static_cast<std::size_t>(i)]), dfd(fu[static_cast<std::size_t>(i + p1 + 1)]),
             dfd(fv[static_cast<std::size_t>(j)]), dfd(fv[static_cast<std::size_t>(j + p2 + 1)])};
}

bool overlaps_union_interior(const std::vector<Box>& region, const Box& b) {
  for (const auto& r : region)
    if (r.overlaps_interior(b)) return true;
  return false;
}

std::string fmt_weight(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<std::pair<int, double>> two_scale_univariate(const std::vector<double>& coarse,
                                                         const std::vector<double>& fine, int p,
                                                         int index) {
  if (index < 0 || index >= window_count(coarse, p))
    throw config_error("two_scale: window index out of range");
  std::vector<std::pair<std::vector<double>, double>> parts{{window(coarse, p, index), 1.0}};
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k < parts.size() && !changed; ++k) {
      const auto& t = parts[k].first;
      for (double v : fine) {
        if (v <= t.front()) continue;
        if (v >= t.back()) break;
        if (count_in(t, v) >= count_in(fine, v)) continue;
        const auto r = split_univariate(LocalKnotVector(t), v);
        const double c = parts[k].second;
        parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(k));
        for (const auto& [child, alpha] :
             {std::pair{r.left, r.alpha_left}, std::pair{r.right, r.alpha_right}}) {
          bool merged = false;
          for (auto& [pk, pc] : parts)
            if (pk == child.t) {
              pc += c * alpha;
              merged = true;
            }
          if (!merged) parts.emplace_back(child.t, c * alpha);
        }
        changed = true;
        break;
      }
    }
  }
  std::vector<std::pair<int, double>> out;
  for (const auto& [t, c] : parts) {
    const int i = window_index(fine, p, t);
    if (i < 0) throw config_error("two_scale: knot vectors are not nested");
    out.emplace_back(i, c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::map<std::pair<int, int>, double> two_scale_bivariate(const std::vector<double>& cu,
                                                          const std::vector<double>& fu, int p1,
                                                          const std::vector<double>& cv,
                                                          const std::vector<double>& fv, int p2,
                                                          int i, int j) {
  const auto au = two_scale_univariate(cu, fu, p1, i);
  const auto av = two_scale_univariate(cv, fv, p2, j);
  std::map<std::pair<int, int>, double> out;
  for (const auto& [iu, a] : au)
    for (const auto& [jv, b] : av) out[{iu, jv}] = a * b;
  return out;
}

std::map<std::pair<int, int>, double> truncate_terms(std::map<std::pair<int, int>, double> terms,
                                                     const std::vector<double>& fu, int p1,
                                                     const std::vector<double>& fv, int p2,
                                                     const std::vector<Box>& region) {
  for (auto it = terms.begin(); it != terms.end();) {
    if (union_contains_box(region, window_box(fu, p1, fv, p2, it->first.first, it->first.second)))
      it = terms.erase(it);
    else
      ++it;
  }
  return terms;
}

THBSpace thb_construct(const HierarchicalSpec& core_spec, int p1, int p2, Boundary boundary) {
  if (p1 < 0 || p2 < 0) throw config_error("thb_construct: negative degree");
  HierarchicalSpec spec = core_spec;
  if (boundary == Boundary::ghost) {
    spec.domain = Box{spec.domain.x0 - Dyadic{p1}, spec.domain.x1 + Dyadic{p1},
                      spec.domain.y0 - Dyadic{p2}, spec.domain.y1 + Dyadic{p2}};
    spec.nx += 2 * p1;
    spec.ny += 2 * p2;
    spec.mult_x = spec.mult_y = 1;
  }
  if (spec.mult_x > p1 + 1 || spec.mult_y > p2 + 1)
    throw config_error("thb_construct: boundary multiplicity exceeds degree + 1");

  THBSpace s;
  s.mesh = build_hierarchical(spec);
  s.p1 = p1;
  s.p2 = p2;
  s.boundary = boundary;
  s.core_box = core_spec.domain;
  const int N = spec.levels();
  for (int l = 1; l <= N; ++l) {
    s.knots_u.push_back(level_knots(spec.domain.x0, spec.domain.x1, l, spec.mult_x));
    s.knots_v.push_back(level_knots(spec.domain.y0, spec.domain.y1, l, spec.mult_y));
  }
  if (window_count(s.knots_u[0], p1) < 1 || window_count(s.knots_v[0], p2) < 1)
    throw config_error("thb_construct: grid too small for the degree");

  // Memoized univariate two-scale tables, keyed by (level, window).
  std::map<std::pair<int, int>, std::vector<std::pair<int, double>>> memo_u, memo_v;
  const auto scale_u = [&](int l, int i) -> const std::vector<std::pair<int, double>>& {
    const auto [it, fresh] = memo_u.try_emplace({l, i});
    if (fresh) it->second = two_scale_univariate(s.knots_u[l - 1], s.knots_u[l], p1, i);
    return it->second;
  };
  const auto scale_v = [&](int l, int j) -> const std::vector<std::pair<int, double>>& {
    const auto [it, fresh] = memo_v.try_emplace({l, j});
    if (fresh) it->second = two_scale_univariate(s.knots_v[l - 1], s.knots_v[l], p2, j);
    return it->second;
  };

  const auto advance = [&](THBFunction& f, int target) {
    while (f.rep_level < target) {
      const int r = f.rep_level;
      std::map<std::pair<int, int>, double> out;
      for (const auto& [ij, c] : f.rep)
        for (const auto& [iu, a] : scale_u(r, ij.first))
          for (const auto& [jv, b] : scale_v(r, ij.second)) out[{iu, jv}] += c * a * b;
      f.rep_level = r + 1;
      f.rep = truncate_terms(std::move(out), s.knots_u[static_cast<std::size_t>(r)], p1,
                             s.knots_v[static_cast<std::size_t>(r)], p2,
                             core_spec.regions[static_cast<std::size_t>(r - 1)]);
    }
  };

  std::vector<THBFunction> H;
  for (int i = 0; i < window_count(s.knots_u[0], p1); ++i)
    for (int j = 0; j < window_count(s.knots_v[0], p2); ++j)
      H.push_back({1, {window(s.knots_u[0], p1, i), window(s.knots_v[0], p2, j)}, 1, {{{i, j}, 1.0}}});

  for (int l = 1; l < N; ++l) {
    const auto& region = core_spec.regions[static_cast<std::size_t>(l - 1)];
    std::vector<THBFunction> next;
    for (auto& f : H) {
      const Box msup{dfd(f.mother.first.front()), dfd(f.mother.first.back()),
                     dfd(f.mother.second.front()), dfd(f.mother.second.back())};
      if (union_contains_box(region, msup)) continue;
      if (overlaps_union_interior(region, thb_support(s, f))) {
        advance(f, l + 1);
        if (f.rep.empty()) continue;
      }
      next.push_back(std::move(f));
    }
    const auto& fu = s.knots_u[static_cast<std::size_t>(l)];
    const auto& fv = s.knots_v[static_cast<std::size_t>(l)];
    for (int i = 0; i < window_count(fu, p1); ++i)
      for (int j = 0; j < window_count(fv, p2); ++j)
        if (union_contains_box(region, window_box(fu, p1, fv, p2, i, j)))
          next.push_back({l + 1, {window(fu, p1, i), window(fv, p2, j)}, l + 1, {{{i, j}, 1.0}}});
    H = std::move(next);
  }

  if (boundary == Boundary::ghost) {
    std::erase_if(H, [&](const THBFunction& f) {
      const Box sup = thb_support(s, f);
      return !(sup.x0 < s.core_box.x1 && s.core_box.x0 < sup.x1 && sup.y0 < s.core_box.y1 &&
               s.core_box.y0 < sup.y1);
    });
  }
  s.basis = std::move(H);
  return s;
}

double thb_eval(const THBSpace& space, const THBFunction& f, double x, double y) {
  const bool frx = x < space.mesh.xmax();
  const bool fry = y < space.mesh.ymax();
  const auto& fu = space.knots_u[static_cast<std::size_t>(f.rep_level - 1)];
  const auto& fv = space.knots_v[static_cast<std::size_t>(f.rep_level - 1)];
  double sum = 0;
  for (const auto& [ij, c] : f.rep)
    sum += c * eval_univariate(LocalKnotVector(window(fu, space.p1, ij.first)), x, frx) *
           eval_univariate(LocalKnotVector(window(fv, space.p2, ij.second)), y, fry);
  return sum;
}

std::pair<double, double> thb_grad(const THBSpace& space, const THBFunction& f, double x,
                                   double y) {
  const bool frx = x < space.mesh.xmax();
  const bool fry = y < space.mesh.ymax();
  const auto& fu = space.knots_u[static_cast<std::size_t>(f.rep_level - 1)];
  const auto& fv = space.knots_v[static_cast<std::size_t>(f.rep_level - 1)];
  double gx = 0, gy = 0;
  for (const auto& [ij, c] : f.rep) {
    const LocalKnotVector u(window(fu, space.p1, ij.first));
    const LocalKnotVector v(window(fv, space.p2, ij.second));
    gx += c * eval_univariate_deriv(u, x, frx) * eval_univariate(v, y, fry);
    gy += c * eval_univariate(u, x, frx) * eval_univariate_deriv(v, y, fry);
  }
  return {gx, gy};
}

Box thb_support(const THBSpace& space, const THBFunction& f) {
  const auto& fu = space.knots_u[static_cast<std::size_t>(f.rep_level - 1)];
  const auto& fv = space.knots_v[static_cast<std::size_t>(f.rep_level - 1)];
  Box b{};
  bool first = true;
  for (const auto& [ij, c] : f.rep) {
    const Box t = window_box(fu, space.p1, fv, space.p2, ij.first, ij.second);
    if (first) {
      b = t;
      first = false;
    } else {
      b.x0 = std::min(b.x0, t.x0);
      b.x1 = std::max(b.x1, t.x1);
      b.y0 = std::min(b.y0, t.y0);
      b.y1 = std::max(b.y1, t.y1);
    }
  }
  return b;
}

bool thb_supported_on(const THBSpace& space, const THBFunction& f, const Box& element) {
  const auto& fu = space.knots_u[static_cast<std::size_t>(f.rep_level - 1)];
  const auto& fv = space.knots_v[static_cast<std::size_t>(f.rep_level - 1)];
  for (const auto& [ij, c] : f.rep)
    if (window_box(fu, space.p1, fv, space.p2, ij.first, ij.second).overlaps_interior(element))
      return true;
  return false;
}

double thb_partition_sum(const THBSpace& space, double x, double y) {
  double sum = 0;
  for (const auto& f : space.basis) sum += thb_eval(space, f, x, y);
  return sum;
}

std::string write_space(const THBSpace& space) {
  std::string out = "# splyne space v1\n# degree " + std::to_string(space.p1) + " " +
                    std::to_string(space.p2) + "\n# boundary " +
                    (space.boundary == Boundary::open ? "open" : "ghost") + "\n# funcs " +
                    std::to_string(space.basis.size()) + "\n";
  for (const auto& f : space.basis) {
    out += "#level " + std::to_string(f.origin_level) + "\n";
    std::string line;
    for (double t : f.mother.first) line += to_string(dfd(t)) + " ";
    line += "| ";
    for (double t : f.mother.second) line += to_string(dfd(t)) + " ";
    line += "| " + fmt_weight(1.0);
    out += line + "\n";
  }
  return out;
}

}  // namespace splyne
