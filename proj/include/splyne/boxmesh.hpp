#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "splyne/dyadic.hpp"

namespace splyne {

/// Direction of a mesh rectangle's trivial component. A vertical line fixes
/// the x coordinate (serialized as k = 1), a horizontal line fixes y (k = 2).
enum class Dir { vertical = 1, horizontal = 2 };

/// Axis-aligned line segment with multiplicity: the 2D mesh rectangle.
struct MeshRectangle {
  Dir dir = Dir::vertical;
  Dyadic fixed;
  Dyadic lo, hi;  // span in the non-fixed coordinate, lo < hi
  int mult = 1;
};

/// Axis-aligned box in index units.
struct Box {
  Dyadic x0, x1, y0, y1;

  bool contains(const Box& b) const {
    return x0 <= b.x0 && b.x1 <= x1 && y0 <= b.y0 && b.y1 <= y1;
  }
  bool contains_interior_point(Dyadic x, Dyadic y) const {
    return x0 < x && x < x1 && y0 < y && y < y1;
  }
  /// Open-interior overlap (shared edges do not count).
  bool overlaps_interior(const Box& b) const {
    return x0 < b.x1 && b.x0 < x1 && y0 < b.y1 && b.y0 < y1;
  }
  friend bool operator==(const Box&, const Box&) = default;
};

/// Element of the generated box partition. The level tag is informational:
/// 1 for initial-size cells, one more per halving of the shorter side.
struct Element {
  Box box;
  int level = 1;
};

/// Affine map from index units to physical coordinates: phys = origin + q * h.
struct PhysMap {
  double ox = 0.0, oy = 0.0;
  double hx = 1.0, hy = 1.0;

  double x(double qx) const { return ox + qx * hx; }
  double y(double qy) const { return oy + qy * hy; }
};

/// Maximal run of a mesh line at one fixed coordinate with constant
/// multiplicity. Runs at the same coordinate are disjoint and sorted.
struct LineRun {
  Dyadic lo, hi;
  int mult = 1;
};

/// 2D box mesh: a box partition of the domain generated by axis-aligned
/// meshlines with multiplicities. Insertions are validated so that no line
/// ever terminates strictly inside an element.
class BoxMesh {
 public:
  BoxMesh() = default;

  /// Tensor-product seed: nx-by-ny unit cells in index units. Boundary lines
  /// carry mult_x / mult_y, interior lines multiplicity 1.
  static BoxMesh tensor(Box domain, int nx, int ny, int mult_x, int mult_y, PhysMap phys);

  const Box& domain() const { return domain_; }
  const PhysMap& phys() const { return phys_; }
  int init_nx() const { return nx_; }
  int init_ny() const { return ny_; }
  int boundary_mult_x() const { return mult_x_; }
  int boundary_mult_y() const { return mult_y_; }

  /// Mutating insertion; throws config_error if the segment would dangle
  /// inside an element or leave the domain. Appends to the history.
  void insert(const MeshRectangle& r);

  /// Elements of the generated partition, sorted by (y0, x0).
  const std::vector<Element>& elements() const { return elements_; }

  /// Raw insertion log (excludes the tensor seed).
  const std::vector<MeshRectangle>& history() const { return history_; }

  /// Canonical merged runs at one fixed coordinate (empty if none).
  const std::vector<LineRun>& runs(Dir dir, Dyadic fixed) const;

  /// All fixed coordinates with at least one run in the given direction.
  const std::map<Dyadic, std::vector<LineRun>>& lines(Dir dir) const {
    return dir == Dir::vertical ? vlines_ : hlines_;
  }

  /// True iff every point of [lo, hi] at the fixed coordinate lies on a run
  /// with multiplicity >= min_mult.
  bool covered(Dir dir, Dyadic fixed, Dyadic lo, Dyadic hi, int min_mult = 1) const;

  /// If the runs at the fixed coordinate jointly cover [lo, hi], the largest
  /// multiplicity met along it; 0 otherwise.
  int traversal_mult(Dir dir, Dyadic fixed, Dyadic lo, Dyadic hi) const;

  /// Domain edge max in each direction, as doubles (for evaluation-edge
  /// handling).
  double xmax() const { return domain_.x1.to_double(); }
  double ymax() const { return domain_.y1.to_double(); }

 private:
  Box domain_;
  PhysMap phys_;
  int nx_ = 0, ny_ = 0, mult_x_ = 1, mult_y_ = 1;
  std::map<Dyadic, std::vector<LineRun>> vlines_;
  std::map<Dyadic, std::vector<LineRun>> hlines_;
  std::vector<Element> elements_;
  std::vector<MeshRectangle> history_;

  void add_run(Dir dir, Dyadic fixed, Dyadic lo, Dyadic hi, int mult);
  void split_elements(const MeshRectangle& r);
  void sort_elements();
};

/// Functional insertion per the module contract: copies, inserts, returns.
BoxMesh insert_meshline(const BoxMesh& mesh, const MeshRectangle& r);

/// Hierarchical mesh description: nested regions per level over an initial
/// tensor grid. regions[i] is the union of boxes refined at level i + 2
/// (level 1 is the tensor grid itself); each union must be aligned to the
/// previous level's lattice and nested inside the previous region.
struct HierarchicalSpec {
  Box domain;  // integer corners, index units
  int nx = 1, ny = 1;
  int mult_x = 1, mult_y = 1;
  PhysMap phys;
  std::vector<std::vector<Box>> regions;

  int levels() const { return static_cast<int>(regions.size()) + 1; }
};

/// Builds the box mesh of a hierarchical spec by inserting each level's new
/// lines coarse to fine. Throws config_error on misaligned or non-nested
/// regions.
BoxMesh build_hierarchical(const HierarchicalSpec& spec);

/// Cell size of hierarchy level l (level 1 = unit cells): 2^(1-l).
Dyadic level_cell(int level);

// Box-union helpers shared by the refinement and modification code.

/// True iff target is covered by the union of boxes.
bool union_contains_box(const std::vector<Box>& cover, const Box& target);

/// True iff the point is interior to some box of the union.
bool union_contains_point(const std::vector<Box>& boxes, Dyadic x, Dyadic y);

/// Merged intervals of the union's cross-section at the given coordinate
/// (vertical: x fixed, returns y intervals).
std::vector<std::pair<Dyadic, Dyadic>> union_cross_section(const std::vector<Box>& boxes,
                                                           Dir dir, Dyadic fixed);

/// Convex corner of a region boundary: exactly one of the four adjacent
/// cells (probed at half the given cell size) lies inside the union.
/// qx/qy point into the region.
struct ConvexCorner {
  Dyadic x, y;
  int qx = 1, qy = 1;
};
std::vector<ConvexCorner> convex_corners(const std::vector<Box>& region, Dyadic cell);

// Serialization. Records are "k fixed lo hi mult" with dyadics as num/2^k;
// header lines starting with '#' carry the domain, seed grid, and physical
// map so that a round trip reproduces the mesh including its history.
std::string write_mesh(const BoxMesh& mesh);
BoxMesh read_mesh(const std::string& text);

}  // namespace splyne
