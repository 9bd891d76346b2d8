#pragma once

#include <map>
#include <utility>
#include <vector>

#include "splyne/boxmesh.hpp"
#include "splyne/splinecore.hpp"

namespace splyne {

enum class Boundary { open, ghost };

/// Pair of local knot vectors as raw doubles; exact key of a basis function.
using KnotKey = std::pair<std::vector<double>, std::vector<double>>;

/// Locally refined spline space over a box mesh. The basis is kept as a map
/// from local knot vectors to scaling weights so that duplicates produced by
/// splitting always merge by summing weights; this is what preserves the
/// partition of unity.
///
/// For the ghost variant the mesh lives on the domain extended by p_k initial
/// cells per side with single-multiplicity boundary; `core()` is the original
/// domain and enumeration retains only functions whose support meets its
/// interior. Inactive functions stay in `funcs` because later refinements may
/// split them into active ones.
struct LRSpace {
  BoxMesh mesh;
  int p1 = 3, p2 = 3;
  Boundary boundary = Boundary::open;
  std::map<KnotKey, double> funcs;

  Box core() const;
};

/// Tensor-product space on a seed mesh (no history replay). Boundary knots
/// take the mesh's boundary multiplicity, which must be in [1, p+1].
LRSpace lr_tensor(const BoxMesh& seed, int p1, int p2, Boundary boundary = Boundary::open);

/// Tensor space on the domain extended by p1/p2 initial cells per side with
/// multiplicity-1 boundary. The core box is remembered via the convention
/// above; nx/ny/phys describe the core grid.
LRSpace lr_ghost_tensor(Box core_domain, int nx, int ny, PhysMap phys, int p1, int p2);

/// Inserts one meshline and restores minimal support by splitting, FIFO over
/// the affected functions, scanning witnesses u-direction first, coordinates
/// ascending. Returns the number of splits performed. Throws config_error
/// "inadmissible insertion" if nothing is split (the line would not change
/// the space).
int insert_local_line(LRSpace& space, const MeshRectangle& line);

/// Rebuilds a space from a mesh by replaying its insertion history on the
/// seed tensor space. Every history line must split at least one function.
LRSpace lr_construct(const BoxMesh& mesh, int p1, int p2, Boundary boundary = Boundary::open);

/// Bisects every element inside the region union in both directions.
/// Candidate lines are the merged per-element midlines; a candidate too short
/// to split any function is lengthened by whole neighboring elements,
/// symmetrically, preferring the side toward the nearer domain edge on ties,
/// until it splits one. The region must be aligned: no current element may
/// straddle its boundary. Returns the lines actually inserted.
std::vector<MeshRectangle> refine_region(LRSpace& space, const std::vector<Box>& region);

/// True iff the function with these knots has minimal support on the mesh:
/// all knot lines are realized by mesh runs of sufficient multiplicity across
/// the support, and no mesh line traverses the support with multiplicity
/// exceeding the local knot multiplicity.
bool has_minimal_support(const BoxMesh& mesh, const KnotKey& key);

/// Retained basis, sorted by knot vectors: weight-carrying tensor B-splines
/// whose support meets the interior of the core domain.
std::vector<TensorBSpline> active_functions(const LRSpace& space);

/// Sum of all weighted basis functions at an index-space point; 1 on the
/// core domain up to rounding. Uses left limits at the mesh's upper edges.
double partition_sum(const LRSpace& space, double x, double y);

/// One record per retained function: "u-knots | v-knots | weight" with knots
/// as dyadic rationals and the weight in full precision.
std::string write_space(const LRSpace& space);

}  // namespace splyne
