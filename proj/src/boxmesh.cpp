#include "splyne/boxmesh.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "splyne/errors.hpp"

namespace splyne {

namespace {

const std::vector<LineRun> kNoRuns;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int element_level(const Box& b) {
  const Dyadic w = b.x1 - b.x0;
  const Dyadic h = b.y1 - b.y0;
  const Dyadic side = w < h ? w : h;
  int k = 0;
  while (side < Dyadic{1, k} && k < 62) ++k;
  return 1 + k;
}

}  // namespace

BoxMesh BoxMesh::tensor(Box domain, int nx, int ny, int mult_x, int mult_y, PhysMap phys) {
  if (nx < 1 || ny < 1) throw config_error("tensor mesh: cell counts must be positive");
  if (mult_x < 1 || mult_y < 1) throw config_error("tensor mesh: multiplicities must be positive");
  if (domain.x1 - domain.x0 != Dyadic{nx} || domain.y1 - domain.y0 != Dyadic{ny})
    throw config_error("tensor mesh: domain must span nx-by-ny unit cells in index units");

  BoxMesh m;
  m.domain_ = domain;
  m.phys_ = phys;
  m.nx_ = nx;
  m.ny_ = ny;
  m.mult_x_ = mult_x;
  m.mult_y_ = mult_y;
  for (int i = 0; i <= nx; ++i) {
    const Dyadic x = domain.x0 + Dyadic{i};
    m.vlines_[x] = {LineRun{domain.y0, domain.y1, (i == 0 || i == nx) ? mult_x : 1}};
  }
  for (int j = 0; j <= ny; ++j) {
    const Dyadic y = domain.y0 + Dyadic{j};
    m.hlines_[y] = {LineRun{domain.x0, domain.x1, (j == 0 || j == ny) ? mult_y : 1}};
  }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Box b{domain.x0 + Dyadic{i}, domain.x0 + Dyadic{i + 1},
                  domain.y0 + Dyadic{j}, domain.y0 + Dyadic{j + 1}};
      m.elements_.push_back(Element{b, 1});
    }
  m.sort_elements();
  return m;
}

const std::vector<LineRun>& BoxMesh::runs(Dir dir, Dyadic fixed) const {
  const auto& lines = dir == Dir::vertical ? vlines_ : hlines_;
  const auto it = lines.find(fixed);
  return it == lines.end() ? kNoRuns : it->second;
}

bool BoxMesh::covered(Dir dir, Dyadic fixed, Dyadic lo, Dyadic hi, int min_mult) const {
  Dyadic cur = lo;
  for (const LineRun& r : runs(dir, fixed)) {
    if (r.mult < min_mult) continue;
    if (r.lo > cur) break;
    if (r.hi > cur) cur = r.hi;
    if (cur >= hi) return true;
  }
  return cur >= hi;
}

int BoxMesh::traversal_mult(Dir dir, Dyadic fixed, Dyadic lo, Dyadic hi) const {
  if (!covered(dir, fixed, lo, hi, 1)) return 0;
  int mx = 0;
  for (const LineRun& r : runs(dir, fixed))
    if (r.lo < hi && r.hi > lo) mx = std::max(mx, r.mult);
  return mx;
}

void BoxMesh::add_run(Dir dir, Dyadic fixed, Dyadic lo, Dyadic hi, int mult) {
  auto& lines = dir == Dir::vertical ? vlines_ : hlines_;
  auto& rs = lines[fixed];
  // Rebuild the atomic decomposition with max-multiplicity overlay.
  std::set<Dyadic> cuts{lo, hi};
  for (const LineRun& r : rs) {
    cuts.insert(r.lo);
    cuts.insert(r.hi);
  }
  std::vector<LineRun> out;
  for (auto it = cuts.begin(); std::next(it) != cuts.end(); ++it) {
    const Dyadic a = *it, b = *std::next(it);
    int m = 0;
    for (const LineRun& r : rs)
      if (r.lo <= a && b <= r.hi) m = std::max(m, r.mult);
    if (lo <= a && b <= hi) m = std::max(m, mult);
    if (m == 0) continue;
    if (!out.empty() && out.back().hi == a && out.back().mult == m)
      out.back().hi = b;
    else
      out.push_back(LineRun{a, b, m});
  }
  rs = std::move(out);
}

void BoxMesh::split_elements(const MeshRectangle& r) {
  std::vector<Element> next;
  next.reserve(elements_.size() + 8);
  for (const Element& e : elements_) {
    const Box& b = e.box;
    const bool crosses = r.dir == Dir::vertical ? (b.x0 < r.fixed && r.fixed < b.x1)
                                                : (b.y0 < r.fixed && r.fixed < b.y1);
    if (!crosses) {
      next.push_back(e);
      continue;
    }
    const Dyadic elo = r.dir == Dir::vertical ? b.y0 : b.x0;
    const Dyadic ehi = r.dir == Dir::vertical ? b.y1 : b.x1;
    const Dyadic olo = r.lo > elo ? r.lo : elo;
    const Dyadic ohi = r.hi < ehi ? r.hi : ehi;
    if (!(olo < ohi)) {
      next.push_back(e);
      continue;
    }
    if (r.lo > elo || r.hi < ehi)
      throw config_error("insert_meshline: line terminates strictly inside an element");
    Box left = b, right = b;
    if (r.dir == Dir::vertical) {
      left.x1 = r.fixed;
      right.x0 = r.fixed;
    } else {
      left.y1 = r.fixed;
      right.y0 = r.fixed;
    }
    next.push_back(Element{left, element_level(left)});
    next.push_back(Element{right, element_level(right)});
  }
  elements_ = std::move(next);
  sort_elements();
}

void BoxMesh::sort_elements() {
  std::sort(elements_.begin(), elements_.end(), [](const Element& a, const Element& b) {
    if (a.box.y0 != b.box.y0) return a.box.y0 < b.box.y0;
    return a.box.x0 < b.box.x0;
  });
}

void BoxMesh::insert(const MeshRectangle& r) {
  if (!(r.lo < r.hi)) throw config_error("insert_meshline: span must have positive length");
  if (r.mult < 1) throw config_error("insert_meshline: multiplicity must be positive");
  if (r.dir == Dir::vertical) {
    if (r.fixed < domain_.x0 || r.fixed > domain_.x1 || r.lo < domain_.y0 || r.hi > domain_.y1)
      throw config_error("insert_meshline: line leaves the domain");
  } else {
    if (r.fixed < domain_.y0 || r.fixed > domain_.y1 || r.lo < domain_.x0 || r.hi > domain_.x1)
      throw config_error("insert_meshline: line leaves the domain");
  }
  split_elements(r);
  add_run(r.dir, r.fixed, r.lo, r.hi, r.mult);
  history_.push_back(r);
}

BoxMesh insert_meshline(const BoxMesh& mesh, const MeshRectangle& r) {
  BoxMesh out = mesh;
  out.insert(r);
  return out;
}

Dyadic level_cell(int level) {
  if (level < 1) throw config_error("level_cell: levels start at 1");
  return Dyadic{1, level - 1};
}

namespace {

bool on_lattice(Dyadic v, Dyadic cell) {
  // cell is 2^-k; v is a multiple iff its denominator is no finer.
  return v.exp2 <= cell.exp2;
}

}  // namespace

bool union_contains_point(const std::vector<Box>& boxes, Dyadic x, Dyadic y) {
  for (const Box& b : boxes)
    if (b.contains_interior_point(x, y)) return true;
  return false;
}

bool union_contains_box(const std::vector<Box>& cover, const Box& target) {
  std::set<Dyadic> xs{target.x0, target.x1};
  std::set<Dyadic> ys{target.y0, target.y1};
  for (const Box& b : cover) {
    if (target.x0 < b.x0 && b.x0 < target.x1) xs.insert(b.x0);
    if (target.x0 < b.x1 && b.x1 < target.x1) xs.insert(b.x1);
    if (target.y0 < b.y0 && b.y0 < target.y1) ys.insert(b.y0);
    if (target.y0 < b.y1 && b.y1 < target.y1) ys.insert(b.y1);
  }
  for (auto xi = xs.begin(); std::next(xi) != xs.end(); ++xi)
    for (auto yi = ys.begin(); std::next(yi) != ys.end(); ++yi) {
      const Dyadic cx = midpoint(*xi, *std::next(xi));
      const Dyadic cy = midpoint(*yi, *std::next(yi));
      if (!union_contains_point(cover, cx, cy)) return false;
    }
  return true;
}

std::vector<std::pair<Dyadic, Dyadic>> union_cross_section(const std::vector<Box>& boxes,
                                                           Dir dir, Dyadic fixed) {
  std::vector<std::pair<Dyadic, Dyadic>> iv;
  for (const Box& b : boxes) {
    if (dir == Dir::vertical) {
      if (b.x0 < fixed && fixed < b.x1) iv.emplace_back(b.y0, b.y1);
    } else {
      if (b.y0 < fixed && fixed < b.y1) iv.emplace_back(b.x0, b.x1);
    }
  }
  std::sort(iv.begin(), iv.end());
  std::vector<std::pair<Dyadic, Dyadic>> out;
  for (const auto& [lo, hi] : iv) {
    if (!out.empty() && lo <= out.back().second) {
      if (hi > out.back().second) out.back().second = hi;
    } else {
      out.emplace_back(lo, hi);
    }
  }
  return out;
}

std::vector<ConvexCorner> convex_corners(const std::vector<Box>& region, Dyadic cell) {
  std::set<Dyadic> xs, ys;
  for (const Box& b : region) {
    xs.insert(b.x0);
    xs.insert(b.x1);
    ys.insert(b.y0);
    ys.insert(b.y1);
  }
  const Dyadic probe{cell.num, cell.exp2 + 1};  // cell / 2
  std::vector<ConvexCorner> out;
  for (Dyadic x : xs)
    for (Dyadic y : ys) {
      int count = 0;
      int qx = 0, qy = 0;
      for (int sx : {-1, 1})
        for (int sy : {-1, 1})
          if (union_contains_point(region, x + sx * probe, y + sy * probe)) {
            ++count;
            qx = sx;
            qy = sy;
          }
      if (count == 1) out.push_back(ConvexCorner{x, y, qx, qy});
    }
  return out;
}

BoxMesh build_hierarchical(const HierarchicalSpec& spec) {
  BoxMesh m = BoxMesh::tensor(spec.domain, spec.nx, spec.ny, spec.mult_x, spec.mult_y, spec.phys);
  std::vector<Box> prev{spec.domain};
  for (std::size_t li = 0; li < spec.regions.size(); ++li) {
    const int level = static_cast<int>(li) + 2;
    const Dyadic h = level_cell(level);
    const Dyadic coarse = level_cell(level - 1);
    const std::vector<Box>& region = spec.regions[li];
    for (const Box& b : region) {
      if (!(b.x0 < b.x1 && b.y0 < b.y1))
        throw config_error("build_hierarchical: degenerate region box");
      if (!on_lattice(b.x0, coarse) || !on_lattice(b.x1, coarse) || !on_lattice(b.y0, coarse) ||
          !on_lattice(b.y1, coarse))
        throw config_error("build_hierarchical: region not aligned to the previous level");
      if (!union_contains_box(prev, b))
        throw config_error("build_hierarchical: regions must be nested");
    }
    // New lines of this level sit at odd multiples of the level cell.
    for (Dir dir : {Dir::vertical, Dir::horizontal}) {
      Dyadic lo = dir == Dir::vertical ? region.front().x0 : region.front().y0;
      Dyadic hi = dir == Dir::vertical ? region.front().x1 : region.front().y1;
      for (const Box& b : region) {
        const Dyadic blo = dir == Dir::vertical ? b.x0 : b.y0;
        const Dyadic bhi = dir == Dir::vertical ? b.x1 : b.y1;
        if (blo < lo) lo = blo;
        if (bhi > hi) hi = bhi;
      }
      for (Dyadic c = lo + h; c < hi; c = c + h + h) {
        for (const auto& [slo, shi] : union_cross_section(region, dir, c))
          m.insert(MeshRectangle{dir, c, slo, shi, 1});
      }
    }
    prev = region;
  }
  return m;
}

std::string write_mesh(const BoxMesh& m) {
  std::ostringstream os;
  os << "# splyne boxmesh v1\n";
  os << "# domain " << to_string(m.domain().x0) << ' ' << to_string(m.domain().x1) << ' '
     << to_string(m.domain().y0) << ' ' << to_string(m.domain().y1) << '\n';
  os << "# grid " << m.init_nx() << ' ' << m.init_ny() << ' ' << m.boundary_mult_x() << ' '
     << m.boundary_mult_y() << '\n';
  os << "# phys " << fmt_double(m.phys().ox) << ' ' << fmt_double(m.phys().oy) << ' '
     << fmt_double(m.phys().hx) << ' ' << fmt_double(m.phys().hy) << '\n';
  for (const MeshRectangle& r : m.history()) {
    os << static_cast<int>(r.dir) << ' ' << to_string(r.fixed) << ' ' << to_string(r.lo) << ' '
       << to_string(r.hi) << ' ' << r.mult << '\n';
  }
  return os.str();
}

BoxMesh read_mesh(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool have_domain = false, have_grid = false;
  Box domain;
  int nx = 0, ny = 0, mx = 1, my = 1;
  PhysMap phys;
  std::optional<BoxMesh> mesh;

  auto fail = [&](const std::string& what) {
    throw config_error("read_mesh: line " + std::to_string(lineno) + ": " + what);
  };

  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, tag;
      ls >> hash >> tag;
      if (tag == "domain") {
        std::string a, b, c, d;
        if (!(ls >> a >> b >> c >> d)) fail("bad domain header");
        domain = Box{parse_dyadic(a), parse_dyadic(b), parse_dyadic(c), parse_dyadic(d)};
        have_domain = true;
      } else if (tag == "grid") {
        if (!(ls >> nx >> ny >> mx >> my)) fail("bad grid header");
        have_grid = true;
      } else if (tag == "phys") {
        if (!(ls >> phys.ox >> phys.oy >> phys.hx >> phys.hy)) fail("bad phys header");
      }
      continue;
    }
    if (!mesh) {
      if (!have_domain || !have_grid) fail("record before domain/grid headers");
      mesh = BoxMesh::tensor(Box{domain.x0, domain.x1, domain.y0, domain.y1}, nx, ny, mx, my, phys);
    }
    int k = 0, mult = 0;
    std::string f, a, b;
    if (!(ls >> k >> f >> a >> b >> mult)) fail("malformed record, expected 'k fixed lo hi mult'");
    if (k != 1 && k != 2) fail("direction must be 1 (vertical) or 2 (horizontal)");
    try {
      mesh->insert(MeshRectangle{static_cast<Dir>(k), parse_dyadic(f), parse_dyadic(a),
                                 parse_dyadic(b), mult});
    } catch (const config_error& e) {
      fail(e.what());
    }
  }
  if (!mesh) {
    if (!have_domain || !have_grid) throw config_error("read_mesh: missing domain/grid headers");
    mesh = BoxMesh::tensor(Box{domain.x0, domain.x1, domain.y0, domain.y1}, nx, ny, mx, my, phys);
  }
  return *mesh;
}

}  // namespace splyne
