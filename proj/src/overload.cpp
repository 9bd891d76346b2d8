#include "splyne/overload.hpp"

#include <algorithm>
#include <cstdio>
#include <tuple>

#include "splyne/errors.hpp"

namespace splyne {

namespace {

std::vector<Element> core_elements(const BoxMesh& mesh, const Box& core) {
  std::vector<Element> out;
  for (const Element& e : mesh.elements())
    if (core.contains(e.box)) out.push_back(e);
  return out;
}

void tally(OverloadReport& r) {
  for (std::size_t i = 0; i < r.counts.size(); ++i) {
    const int excess = r.counts[i] - r.limit;
    if (excess > 0) {
      r.overloaded.push_back(i);
      ++r.excess_histogram[excess];
    }
  }
}

void require_bicubic(const LRSpace& space) {
  if (space.p1 != 3 || space.p2 != 3)
    throw config_error("overload modifiers support degree (3,3) only");
}

int max_element_level(const BoxMesh& mesh) {
  int top = 1;
  for (const Element& e : mesh.elements()) top = std::max(top, e.level);
  return top;
}

// floor(q / step) for q >= 0 and step = 1/2^k.
std::int64_t lattice_index(Dyadic q, Dyadic step) {
  if (q.num == 0) return 0;
  const int shift = step.exp2 - q.exp2;
  return shift >= 0 ? (q.num << shift) : (q.num >> -shift);
}

// The level's refined zone, reconstructed from the partition itself: a cell
// of the coarser lattice counts as refined when elements no bigger than this
// level's cells tile it completely. Meshline extensions can refine cells
// outside the nominal region; those count too, since overloading follows the
// actual mesh.
std::vector<Box> level_region(const BoxMesh& mesh, int level) {
  const Dyadic h = level_cell(level);
  const Dyadic H = 2 * h;
  const Box& dom = mesh.domain();
  std::map<std::pair<std::int64_t, std::int64_t>, double> area;
  for (const Element& e : mesh.elements()) {
    const Dyadic w = e.box.x1 - e.box.x0;
    const Dyadic t = e.box.y1 - e.box.y0;
    if (h < w || h < t) continue;
    const auto key = std::make_pair(lattice_index(e.box.x0 - dom.x0, H),
                                    lattice_index(e.box.y0 - dom.y0, H));
    area[key] += w.to_double() * t.to_double();
  }
  const double full = H.to_double() * H.to_double();
  std::vector<Box> out;
  for (const auto& [key, covered] : area) {
    if (covered < full * (1.0 - 1e-9)) continue;
    const Dyadic x0 = dom.x0 + key.first * H;
    const Dyadic y0 = dom.y0 + key.second * H;
    out.push_back(Box{x0, x0 + H, y0, y0 + H});
  }
  return out;
}

// True iff q is an odd multiple of the lattice step h = 1/2^k. Odd multiples
// are the lines new to this level; even ones already exist one level up.
bool odd_multiple(Dyadic q, Dyadic h) {
  return q.num != 0 && h.num == 1 && q.exp2 == h.exp2;
}

struct Request {
  Dir dir = Dir::vertical;
  Dyadic fixed, lo, hi;
};

// Clips to the domain and drops requests that degenerate there. A clipped
// extension legally stops at the boundary line.
void push_request(std::vector<Request>& reqs, const Box& dom, Dir dir, Dyadic fixed,
                  Dyadic lo, Dyadic hi) {
  const bool v = dir == Dir::vertical;
  if (fixed <= (v ? dom.x0 : dom.y0) || (v ? dom.x1 : dom.y1) <= fixed) return;
  lo = std::max(lo, v ? dom.y0 : dom.x0);
  hi = std::min(hi, v ? dom.y1 : dom.x1);
  if (lo < hi) reqs.push_back({dir, fixed, lo, hi});
}

// Moves an endpoint outward until it no longer sits strictly inside an
// element: extensions leaving the fine band must continue to a line of the
// coarser lattice to keep the mesh legal.
Dyadic snap_out(const BoxMesh& mesh, Dir dir, Dyadic fixed, Dyadic q, bool down) {
  for (bool moved = true; moved;) {
    moved = false;
    for (const Element& e : mesh.elements()) {
      const Box& b = e.box;
      const bool inside = dir == Dir::vertical
                              ? b.x0 < fixed && fixed < b.x1 && b.y0 < q && q < b.y1
                              : b.y0 < fixed && fixed < b.y1 && b.x0 < q && q < b.x1;
      if (!inside) continue;
      if (dir == Dir::vertical)
        q = down ? b.y0 : b.y1;
      else
        q = down ? b.x0 : b.x1;
      moved = true;
      break;
    }
  }
  return q;
}

// Merges collinear overlapping requests, then inserts whatever is not yet
// covered. Fixed ordering keeps the construction deterministic.
void apply_requests(LRSpace& space, std::vector<Request> reqs) {
  auto key = [](const Request& r) {
    return std::make_tuple(static_cast<int>(r.dir), r.fixed, r.lo, r.hi);
  };
  std::sort(reqs.begin(), reqs.end(),
            [&](const Request& a, const Request& b) { return key(a) < key(b); });
  std::vector<Request> merged;
  for (const Request& r : reqs) {
    if (!merged.empty()) {
      Request& m = merged.back();
      if (m.dir == r.dir && m.fixed == r.fixed && r.lo <= m.hi) {
        m.hi = std::max(m.hi, r.hi);
        continue;
      }
    }
    merged.push_back(r);
  }
  for (Request& r : merged) {
    r.lo = snap_out(space.mesh, r.dir, r.fixed, r.lo, true);
    r.hi = snap_out(space.mesh, r.dir, r.fixed, r.hi, false);
    if (space.mesh.covered(r.dir, r.fixed, r.lo, r.hi, 1)) continue;
    insert_local_line(space, MeshRectangle{r.dir, r.fixed, r.lo, r.hi, 1});
  }
}

// The central-pattern corner rule: the fine meshline one cell from the corner
// extends three coarse cells past the region edge, the one three cells away
// extends one. Either direction can be suppressed for one-directional use.
void corner_requests(std::vector<Request>& reqs, const Box& dom, const ConvexCorner& c,
                     Dyadic h, bool verticals, bool horizontals) {
  const Dyadic H = 2 * h;
  if (verticals) {
    for (int step : {1, 3}) {
      const Dyadic x = c.x + (step * c.qx) * h;
      const Dyadic len = step == 1 ? 3 * H : H;
      const Dyadic lo = c.qy > 0 ? c.y - len : c.y;
      const Dyadic hi = c.qy > 0 ? c.y : c.y + len;
      push_request(reqs, dom, Dir::vertical, x, lo, hi);
    }
  }
  if (horizontals) {
    for (int step : {1, 3}) {
      const Dyadic y = c.y + (step * c.qy) * h;
      const Dyadic len = step == 1 ? 3 * H : H;
      const Dyadic lo = c.qx > 0 ? c.x - len : c.x;
      const Dyadic hi = c.qx > 0 ? c.x : c.x + len;
      push_request(reqs, dom, Dir::horizontal, y, lo, hi);
    }
  }
}

// Maximal covered intervals at one fixed coordinate (runs merged across
// multiplicity changes).
std::vector<std::pair<Dyadic, Dyadic>> coverage(const std::vector<LineRun>& runs) {
  std::vector<std::pair<Dyadic, Dyadic>> out;
  for (const LineRun& r : runs) {
    if (!out.empty() && r.lo <= out.back().second)
      out.back().second = std::max(out.back().second, r.hi);
    else
      out.emplace_back(r.lo, r.hi);
  }
  return out;
}

}  // namespace

OverloadReport overload_report(const LRSpace& space) {
  OverloadReport r;
  r.limit = (space.p1 + 1) * (space.p2 + 1);
  r.elements = core_elements(space.mesh, space.core());
  r.counts.assign(r.elements.size(), 0);
  const std::vector<TensorBSpline> funcs = active_functions(space);
  for (std::size_t i = 0; i < r.elements.size(); ++i) {
    const Box& b = r.elements[i].box;
    const double x0 = b.x0.to_double(), x1 = b.x1.to_double();
    const double y0 = b.y0.to_double(), y1 = b.y1.to_double();
    for (const TensorBSpline& f : funcs)
      if (f.x0() < x1 && x0 < f.x1() && f.y0() < y1 && y0 < f.y1()) ++r.counts[i];
  }
  tally(r);
  return r;
}

OverloadReport overload_report(const THBSpace& space) {
  OverloadReport r;
  r.limit = (space.p1 + 1) * (space.p2 + 1);
  r.elements = core_elements(space.mesh, space.core());
  r.counts.assign(r.elements.size(), 0);
  for (std::size_t i = 0; i < r.elements.size(); ++i)
    for (const THBFunction& f : space.basis)
      if (thb_supported_on(space, f, r.elements[i].box)) ++r.counts[i];
  tally(r);
  return r;
}

LRSpace lrbno_modify(const LRSpace& space) {
  require_bicubic(space);
  LRSpace out = space;
  const Box dom = out.mesh.domain();
  const int top = max_element_level(out.mesh);
  for (int level = 2; level <= top; ++level) {
    const std::vector<Box> region = level_region(out.mesh, level);
    if (region.empty()) continue;
    const Dyadic h = level_cell(level);
    std::vector<Request> reqs;
    for (const ConvexCorner& c : convex_corners(region, h))
      corner_requests(reqs, dom, c, h, true, true);
    apply_requests(out, std::move(reqs));
  }
  return out;
}

LRSpace tlrbno_modify(const LRSpace& space) {
  require_bicubic(space);
  LRSpace out = space;
  const Box dom = out.mesh.domain();
  const int top = max_element_level(out.mesh);
  for (int level = 2; level <= top; ++level) {
    const std::vector<Box> region = level_region(out.mesh, level);
    if (region.empty()) continue;
    const Dyadic h = level_cell(level);
    const std::vector<ConvexCorner> corners = convex_corners(region, h);

    // The border bands of nearby corners would collide; the staircase
    // pattern in particular has no T-mesh form.
    for (std::size_t i = 0; i < corners.size(); ++i)
      for (std::size_t j = i + 1; j < corners.size(); ++j) {
        Dyadic dx = corners[i].x - corners[j].x;
        if (dx < Dyadic{}) dx = -dx;
        Dyadic dy = corners[i].y - corners[j].y;
        if (dy < Dyadic{}) dy = -dy;
        if (std::max(dx, dy) < 6 * h) throw config_error("T-mesh incompatible");
      }

    Dyadic rx0 = region.front().x0, rx1 = region.front().x1;
    Dyadic ry0 = region.front().y0, ry1 = region.front().y1;
    for (const Box& b : region) {
      rx0 = std::min(rx0, b.x0);
      rx1 = std::max(rx1, b.x1);
      ry0 = std::min(ry0, b.y0);
      ry1 = std::max(ry1, b.y1);
    }

    std::vector<Request> reqs;
    // Every fine meshline ending on the refinement border extends two fine
    // cells; the ones flanking a corner extend three coarse cells instead.
    for (const auto& [x, runs] : out.mesh.lines(Dir::vertical)) {
      if (!(rx0 < x && x < rx1) || !odd_multiple(x - dom.x0, h)) continue;
      for (const auto& [lo, hi] : coverage(runs)) {
        if (dom.y0 < lo) {
          Dyadic len = 2 * h;
          for (const ConvexCorner& c : corners)
            if (c.qy > 0 && c.y == lo && x == c.x + c.qx * h) len = 6 * h;
          push_request(reqs, dom, Dir::vertical, x, lo - len, lo);
        }
        if (hi < dom.y1) {
          Dyadic len = 2 * h;
          for (const ConvexCorner& c : corners)
            if (c.qy < 0 && c.y == hi && x == c.x + c.qx * h) len = 6 * h;
          push_request(reqs, dom, Dir::vertical, x, hi, hi + len);
        }
      }
    }
    for (const auto& [y, runs] : out.mesh.lines(Dir::horizontal)) {
      if (!(ry0 < y && y < ry1) || !odd_multiple(y - dom.y0, h)) continue;
      for (const auto& [lo, hi] : coverage(runs)) {
        if (dom.x0 < lo) {
          Dyadic len = 2 * h;
          for (const ConvexCorner& c : corners)
            if (c.qx > 0 && c.x == lo && y == c.y + c.qy * h) len = 6 * h;
          push_request(reqs, dom, Dir::horizontal, y, lo - len, lo);
        }
        if (hi < dom.x1) {
          Dyadic len = 2 * h;
          for (const ConvexCorner& c : corners)
            if (c.qx < 0 && c.x == hi && y == c.y + c.qy * h) len = 6 * h;
          push_request(reqs, dom, Dir::horizontal, y, hi, hi + len);
        }
      }
    }
    apply_requests(out, std::move(reqs));
  }
  return out;
}

LRSpace diagonal_modify(const LRSpace& space) {
  require_bicubic(space);
  LRSpace out = space;
  const Box dom = out.mesh.domain();
  const int top = max_element_level(out.mesh);
  for (int level = 2; level <= top; ++level) {
    const std::vector<Box> region = level_region(out.mesh, level);
    if (region.empty()) continue;
    const Dyadic h = level_cell(level);

    // The staircase steps are too close together for the corner treatment:
    // extensions from neighbouring steps cross, refine cells outside the
    // band, and recreate the problem there. Extending in one direction only
    // avoids that: every fine meshline of the band runs across the whole
    // domain height, so each column of the band is a tensor strip in u and
    // the one-dimensional window count caps the rest.
    Dyadic rx0 = region.front().x0, rx1 = region.front().x1;
    for (const Box& b : region) {
      rx0 = std::min(rx0, b.x0);
      rx1 = std::max(rx1, b.x1);
    }
    std::vector<Request> reqs;
    for (Dyadic x = dom.x0 + h; x < dom.x1; x = x + 2 * h)
      if (rx0 < x && x < rx1)
        push_request(reqs, dom, Dir::vertical, x, dom.y0, dom.y1);
    apply_requests(out, std::move(reqs));
  }
  return out;
}

std::string write_report_csv(const OverloadReport& r) {
  std::string out = "element_id,x0,x1,y0,y1,count,excess\n";
  char buf[192];
  for (std::size_t i = 0; i < r.elements.size(); ++i) {
    const Box& b = r.elements[i].box;
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%d,%d\n", i,
                  b.x0.to_double(), b.x1.to_double(), b.y0.to_double(), b.y1.to_double(),
                  r.counts[i], std::max(0, r.counts[i] - r.limit));
    out += buf;
  }
  return out;
}

}  // namespace splyne
