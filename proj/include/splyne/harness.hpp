#pragma once

#include <optional>
#include <string>
#include <vector>

#include "splyne/assembly.hpp"
#include "splyne/overload.hpp"
#include "splyne/thbspace.hpp"

namespace splyne {

/// Space construction recipes. The S- prefix swaps the open boundary for the
/// ghost extension with single knots; LRB1 inserts the one-directional
/// meshlines that cut down overloading; LRBNO / T-LRBNO / LRBNO-diag run the
/// corresponding overload-removal modifier after refinement.
enum class Method { tp, lrb, thb, s_lrb, s_thb, lrb1, s_lrb1, lrbno, t_lrbno, lrbno_diag };

/// Built-in refinement families: a centered square halving per level, or the
/// staircase band hugging the diagonal.
enum class Pattern { central, diagonal };

/// One experiment: a method on a refinement family (or an explicit
/// hierarchy), run for levels 1..max_level.
struct Scenario {
  std::string name;
  Method method = Method::lrb;
  std::optional<Pattern> pattern;
  std::optional<HierarchicalSpec> hierarchy;
  int p1 = 3, p2 = 3;
  int max_level = 1;
  int base = 16;
  PhysMap phys;
  bool allow_heavy = false;
  std::vector<std::string> outputs;
};

/// One level of one scenario. Wall time is serialized separately so the data
/// files stay byte-identical between runs.
struct RunRecord {
  std::string scenario;
  int level = 0;
  std::size_t dof = 0;
  double cond_mass = 0;
  double cond_stiffness = 0;
  std::size_t overloaded = 0;
  double wall_seconds = 0;
};

/// Parses and fully validates a scenario from JSON text. Unknown keys,
/// malformed values, incompatible method/pattern pairs, and heavy runs
/// without allow_heavy are all rejected here, before any work happens.
Scenario parse_scenario(const std::string& json_text);

/// The validation half of parse_scenario, usable on programmatic scenarios.
void validate_scenario(const Scenario& s);

/// The refinement family as a hierarchy: domain [0,base]^2, one region list
/// per level from 2 to `levels`.
HierarchicalSpec family_spec(Pattern pattern, int base, int levels);

/// LR space over a hierarchy: tensor seed (open or ghost), then refine_region
/// per level. The hierarchy's multiplicity fields are ignored; boundary knots
/// take p+1 (open) or 1 (ghost).
LRSpace build_lr(const HierarchicalSpec& spec, int p1, int p2, Boundary boundary);

/// Runs levels 1..max_level: build, modify if the method asks for it,
/// assemble both operators, estimate conditions, count overloaded elements.
/// With a non-empty out_dir, writes records.csv / timings.csv plus whatever
/// per-level artifacts the scenario's `outputs` request.
std::vector<RunRecord> run_scenario(const Scenario& s, const std::string& out_dir = "");

/// The boundary-multiplicity comparison: S-THB, S-LRB, THB, LRB, LRB1 and
/// S-LRB1 on the central family, concatenated records in that order.
std::vector<RunRecord> boundary_study(int base, int max_level, const std::string& out_dir = "",
                                      bool allow_heavy = false);

/// CSV serializations; records omit wall time, timings carry only it.
std::string records_csv(const std::vector<RunRecord>& records);
std::string timings_csv(const std::vector<RunRecord>& records);

/// Deterministic SVG renderings: meshlines as strokes with width proportional
/// to multiplicity; overloaded elements shaded with opacity growing in the
/// excess; heatmap elements filled on a white-to-black ramp.
std::string render_mesh_svg(const BoxMesh& mesh);
std::string render_mesh_svg(const BoxMesh& mesh, const OverloadReport& report);
std::string render_mesh_svg(const BoxMesh& mesh, const Heatmap& heatmap);

}  // namespace splyne
