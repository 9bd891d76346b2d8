#include "splyne/harness.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>

#include "splyne/errors.hpp"

namespace splyne {
namespace {

using nlohmann::json;

constexpr std::size_t desk_dof_cap = 20000;

struct MethodInfo {
  const char* token;
  Method method;
};

constexpr MethodInfo method_table[] = {
    {"TP", Method::tp},         {"LRB", Method::lrb},
    {"THB", Method::thb},       {"S-LRB", Method::s_lrb},
    {"S-THB", Method::s_thb},   {"LRB1", Method::lrb1},
    {"S-LRB1", Method::s_lrb1}, {"LRBNO", Method::lrbno},
    {"T-LRBNO", Method::t_lrbno}, {"LRBNO-diag", Method::lrbno_diag},
};

Method method_from(const std::string& s) {
  for (const MethodInfo& m : method_table)
    if (s == m.token) return m.method;
  throw config_error("unknown method '" + s + "'");
}

bool uses_ghost(Method m) {
  return m == Method::s_lrb || m == Method::s_thb || m == Method::s_lrb1;
}

bool uses_thb(Method m) { return m == Method::thb || m == Method::s_thb; }

bool uses_modifier(Method m) {
  return m == Method::lrb1 || m == Method::s_lrb1 || m == Method::lrbno ||
         m == Method::t_lrbno || m == Method::lrbno_diag;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot write " + path);
  f << content;
}

Dyadic dy(double v) { return dyadic_from_double(v); }

Box parse_box(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 4)
    throw config_error(std::string(what) + " must be [x0,x1,y0,y1]");
  const Box b{dy(j[0].get<double>()), dy(j[1].get<double>()), dy(j[2].get<double>()),
              dy(j[3].get<double>())};
  if (!(b.x0 < b.x1) || !(b.y0 < b.y1))
    throw config_error(std::string(what) + " has an empty side");
  return b;
}

// Per-level build result, uniform over the two space kinds so the level loop
// stays a single code path.
struct LevelBuild {
  std::size_t dof = 0;
  OverloadReport report;
  SymmetricOperator mass, stiffness;
  const BoxMesh* mesh = nullptr;
  std::function<Heatmap(const EigenSummary&, Extreme)> heatmap;
};

}  // namespace

HierarchicalSpec family_spec(Pattern pattern, int base, int levels) {
  HierarchicalSpec spec;
  spec.domain = Box{Dyadic{0}, Dyadic{base}, Dyadic{0}, Dyadic{base}};
  spec.nx = base;
  spec.ny = base;
  spec.mult_x = 4;
  spec.mult_y = 4;
  for (int l = 2; l <= levels; ++l) {
    if (pattern == Pattern::central) {
      const Dyadic w{base, l - 1};
      const Dyadic lo = Dyadic{base, 1} - Dyadic{base, l};
      spec.regions.push_back({Box{lo, lo + w, lo, lo + w}});
    } else {
      const Dyadic cell = level_cell(l - 1);
      const int m = base * (1 << (l - 2));
      std::vector<Box> band;
      for (int i = 0; i < m; ++i)
        for (int j = std::max(0, i - 1); j <= std::min(m - 1, i + 1); ++j)
          band.push_back(Box{i * cell, (i + 1) * cell, j * cell, (j + 1) * cell});
      spec.regions.push_back(std::move(band));
    }
  }
  return spec;
}

LRSpace build_lr(const HierarchicalSpec& spec, int p1, int p2, Boundary boundary) {
  LRSpace s = boundary == Boundary::ghost
                  ? lr_ghost_tensor(spec.domain, spec.nx, spec.ny, spec.phys, p1, p2)
                  : lr_tensor(BoxMesh::tensor(spec.domain, spec.nx, spec.ny, p1 + 1, p2 + 1,
                                              spec.phys),
                              p1, p2);
  for (const std::vector<Box>& region : spec.regions) refine_region(s, region);
  return s;
}

void validate_scenario(const Scenario& s) {
  if (s.name.empty()) throw config_error("scenario name is empty");
  for (char c : s.name)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_')
      throw config_error("scenario name must be alphanumeric with - or _");
  if (s.pattern.has_value() == s.hierarchy.has_value())
    throw config_error("scenario needs exactly one of pattern or hierarchy");
  if (s.p1 < 0 || s.p2 < 0 || s.p1 > 8 || s.p2 > 8)
    throw config_error("degree out of range");
  if (s.max_level < 1) throw config_error("max_level must be at least 1");
  if (s.max_level >= 8 && !s.allow_heavy)
    throw config_error("levels this deep are a heavy run; set allow_heavy");
  if (s.hierarchy &&
      s.max_level > static_cast<int>(s.hierarchy->regions.size()) + 1)
    throw config_error("max_level exceeds the hierarchy depth");
  if (s.pattern) {
    if (s.base < 2 || s.base > 256) throw config_error("base out of range");
    if (*s.pattern == Pattern::central && s.base % 4 != 0)
      throw config_error("the central pattern needs base divisible by 4");
  }
  if (!(s.phys.hx > 0) || !(s.phys.hy > 0))
    throw config_error("phys cell size must be positive");

  if (s.pattern && *s.pattern == Pattern::diagonal &&
      (s.method == Method::lrb1 || s.method == Method::s_lrb1 || s.method == Method::lrbno ||
       s.method == Method::t_lrbno))
    throw config_error("this method runs on the central pattern only");
  if (s.pattern && *s.pattern == Pattern::central && s.method == Method::lrbno_diag)
    throw config_error("LRBNO-diag runs on the diagonal pattern only");
  if (uses_modifier(s.method) && (s.p1 != 3 || s.p2 != 3))
    throw config_error("overload modifiers support degree (3,3) only");

  for (const std::string& o : s.outputs)
    if (o != "svg" && o != "overload" && o != "matrices" && o != "eigs" && o != "heatmaps")
      throw config_error("unknown output '" + o + "'");
}

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw config_error(std::string("scenario config: ") + e.what());
  }
  if (!j.is_object()) throw config_error("scenario config must be a JSON object");

  static const char* known[] = {"name",  "method", "pattern",     "hierarchy", "degree",
                                "max_level", "base",   "phys",        "allow_heavy", "outputs"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(std::begin(known), std::end(known),
                     [&](const char* k) { return key == k; }))
      throw config_error("unknown key '" + key + "'");
  }

  Scenario s;
  try {
    s.name = j.at("name").get<std::string>();
    s.method = method_from(j.at("method").get<std::string>());
    s.max_level = j.at("max_level").get<int>();

    if (j.contains("pattern")) {
      const auto p = j["pattern"].get<std::string>();
      if (p == "Central")
        s.pattern = Pattern::central;
      else if (p == "Diagonal")
        s.pattern = Pattern::diagonal;
      else
        throw config_error("unknown pattern '" + p + "'");
    }
    if (j.contains("degree")) {
      const auto& d = j["degree"];
      if (!d.is_array() || d.size() != 2) throw config_error("degree must be [p1,p2]");
      s.p1 = d[0].get<int>();
      s.p2 = d[1].get<int>();
    }
    if (j.contains("base")) s.base = j["base"].get<int>();
    if (j.contains("allow_heavy")) s.allow_heavy = j["allow_heavy"].get<bool>();
    if (j.contains("outputs"))
      for (const auto& o : j["outputs"]) s.outputs.push_back(o.get<std::string>());
    if (j.contains("phys")) {
      const auto& p = j["phys"];
      s.phys.ox = p.value("ox", 0.0);
      s.phys.oy = p.value("oy", 0.0);
      s.phys.hx = p.value("hx", 1.0);
      s.phys.hy = p.value("hy", 1.0);
    }
    if (j.contains("hierarchy")) {
      const auto& h = j["hierarchy"];
      HierarchicalSpec spec;
      spec.domain = parse_box(h.at("domain"), "hierarchy domain");
      spec.nx = h.at("nx").get<int>();
      spec.ny = h.at("ny").get<int>();
      spec.phys = s.phys;
      for (const auto& level : h.at("regions")) {
        std::vector<Box> region;
        for (const auto& b : level) region.push_back(parse_box(b, "hierarchy region"));
        spec.regions.push_back(std::move(region));
      }
      s.hierarchy = std::move(spec);
    }
  } catch (const config_error&) {
    throw;
  } catch (const std::exception& e) {
    throw config_error(std::string("scenario config: ") + e.what());
  }

  validate_scenario(s);
  return s;
}

namespace {

LevelBuild build_level(const Scenario& s, const HierarchicalSpec& spec_n,
                       std::vector<LRSpace>& lr_keep, std::vector<THBSpace>& thb_keep) {
  LevelBuild out;
  const Boundary bnd = uses_ghost(s.method) ? Boundary::ghost : Boundary::open;
  if (uses_thb(s.method)) {
    HierarchicalSpec spec = spec_n;
    spec.mult_x = s.p1 + 1;
    spec.mult_y = s.p2 + 1;
    thb_keep.push_back(thb_construct(spec, s.p1, s.p2, bnd));
    const THBSpace& t = thb_keep.back();
    out.dof = t.basis.size();
    if (out.dof > desk_dof_cap && !s.allow_heavy)
      throw config_error("run exceeds the desk-scale budget; set allow_heavy");
    out.report = overload_report(t);
    out.mass = assemble(t, OperatorKind::mass);
    out.stiffness = assemble(t, OperatorKind::stiffness);
    out.mesh = &t.mesh;
    out.heatmap = [&t](const EigenSummary& sum, Extreme w) { return eigvec_heatmap(t, sum, w); };
    return out;
  }

  LRSpace space = build_lr(spec_n, s.p1, s.p2, bnd);
  switch (s.method) {
    case Method::lrbno:
      space = lrbno_modify(space);
      break;
    case Method::t_lrbno:
      space = tlrbno_modify(space);
      break;
    case Method::lrbno_diag:
      space = diagonal_modify(space);
      break;
    case Method::lrb1:
    case Method::s_lrb1:
      // The same one-directional meshline insertion the staircase modifier
      // uses, here applied to the central family to curb its overloading.
      space = diagonal_modify(space);
      break;
    default:
      break;
  }
  lr_keep.push_back(std::move(space));
  const LRSpace& lr = lr_keep.back();
  out.dof = active_functions(lr).size();
  if (out.dof > desk_dof_cap && !s.allow_heavy)
    throw config_error("run exceeds the desk-scale budget; set allow_heavy");
  out.report = overload_report(lr);
  out.mass = assemble(lr, OperatorKind::mass);
  out.stiffness = assemble(lr, OperatorKind::stiffness);
  out.mesh = &lr.mesh;
  out.heatmap = [&lr](const EigenSummary& sum, Extreme w) { return eigvec_heatmap(lr, sum, w); };
  return out;
}

bool wants(const Scenario& s, const char* what) {
  return std::find(s.outputs.begin(), s.outputs.end(), what) != s.outputs.end();
}

}  // namespace

std::vector<RunRecord> run_scenario(const Scenario& s, const std::string& out_dir) {
  validate_scenario(s);
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  HierarchicalSpec full;
  if (s.hierarchy) {
    full = *s.hierarchy;
  } else if (s.method == Method::tp) {
    full = family_spec(Pattern::central, s.base, 1);
    full.regions.assign(static_cast<std::size_t>(s.max_level - 1), {full.domain});
  } else {
    full = family_spec(*s.pattern, s.base, s.max_level);
  }
  if (!s.hierarchy) full.phys = s.phys;

  std::vector<RunRecord> records;
  for (int n = 1; n <= s.max_level; ++n) {
    const auto t0 = std::chrono::steady_clock::now();
    HierarchicalSpec spec_n = full;
    spec_n.regions.resize(static_cast<std::size_t>(n - 1));

    // The spaces live per level only; keep-alive vectors let the heatmap
    // closures reference them until the level's outputs are written.
    std::vector<LRSpace> lr_keep;
    std::vector<THBSpace> thb_keep;
    const LevelBuild b = build_level(s, spec_n, lr_keep, thb_keep);

    const EigenSummary mass_sum = eigensolve(b.mass);
    const EigenSummary stiff_sum = eigensolve(b.stiffness);

    RunRecord r;
    r.scenario = s.name;
    r.level = n;
    r.dof = b.dof;
    r.cond_mass = condition_estimate(b.mass, mass_sum);
    r.cond_stiffness = condition_estimate(b.stiffness, stiff_sum);
    r.overloaded = b.report.overloaded.size();
    r.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    records.push_back(r);

    if (!out_dir.empty()) {
      const std::string stem = out_dir + "/" + s.name + "_L" + std::to_string(n);
      if (wants(s, "svg")) write_file(stem + "_mesh.svg", render_mesh_svg(*b.mesh));
      if (wants(s, "overload")) {
        write_file(stem + "_overload.csv", write_report_csv(b.report));
        write_file(stem + "_overload.svg", render_mesh_svg(*b.mesh, b.report));
      }
      if (wants(s, "matrices")) {
        write_file(stem + "_mass.mtx", write_matrix_market(b.mass));
        write_file(stem + "_stiffness.mtx", write_matrix_market(b.stiffness));
      }
      if (wants(s, "eigs")) {
        write_file(stem + "_mass_eigs.csv", write_eigen_csv(mass_sum));
        write_file(stem + "_stiffness_eigs.csv", write_eigen_csv(stiff_sum));
      }
      if (wants(s, "heatmaps"))
        write_file(stem + "_heatmap.svg",
                   render_mesh_svg(*b.mesh, b.heatmap(mass_sum, Extreme::min)));
    }
  }

  if (!out_dir.empty()) {
    write_file(out_dir + "/" + s.name + "_records.csv", records_csv(records));
    write_file(out_dir + "/" + s.name + "_timings.csv", timings_csv(records));
  }
  return records;
}

std::vector<RunRecord> boundary_study(int base, int max_level, const std::string& out_dir,
                                      bool allow_heavy) {
  static const std::pair<const char*, Method> lineup[] = {
      {"S-THB", Method::s_thb}, {"S-LRB", Method::s_lrb},   {"THB", Method::thb},
      {"LRB", Method::lrb},     {"LRB1", Method::lrb1},     {"S-LRB1", Method::s_lrb1},
  };
  std::vector<RunRecord> all;
  for (const auto& [token, method] : lineup) {
    Scenario s;
    s.name = token;
    s.method = method;
    s.pattern = Pattern::central;
    s.max_level = max_level;
    s.base = base;
    s.allow_heavy = allow_heavy;
    const auto records = run_scenario(s);
    all.insert(all.end(), records.begin(), records.end());
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir + "/boundary_records.csv", records_csv(all));
    write_file(out_dir + "/boundary_timings.csv", timings_csv(all));
  }
  return all;
}

std::string records_csv(const std::vector<RunRecord>& records) {
  std::string out = "scenario,level,dof,cond_mass,cond_stiffness,overloaded\n";
  char buf[192];
  for (const RunRecord& r : records) {
    std::snprintf(buf, sizeof buf, "%s,%d,%zu,%.17g,%.17g,%zu\n", r.scenario.c_str(), r.level,
                  r.dof, r.cond_mass, r.cond_stiffness, r.overloaded);
    out += buf;
  }
  return out;
}

std::string timings_csv(const std::vector<RunRecord>& records) {
  std::string out = "scenario,level,wall_seconds\n";
  char buf[128];
  for (const RunRecord& r : records) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.6f\n", r.scenario.c_str(), r.level, r.wall_seconds);
    out += buf;
  }
  return out;
}

namespace {

struct SvgCanvas {
  double x0, y1, scale, margin = 20;
  std::string body;

  SvgCanvas(const Box& d) {
    x0 = d.x0.to_double();
    y1 = d.y1.to_double();
    const double ex = d.x1.to_double() - x0, ey = y1 - d.y0.to_double();
    scale = 600.0 / std::max(ex, ey);
  }
  double px(double q) const { return margin + (q - x0) * scale; }
  double py(double q) const { return margin + (y1 - q) * scale; }

  void rect(const Box& b, const char* fill, double opacity) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.6g\" y=\"%.6g\" width=\"%.6g\" height=\"%.6g\" fill=\"%s\" "
                  "fill-opacity=\"%.4g\"/>\n",
                  px(b.x0.to_double()), py(b.y1.to_double()),
                  (b.x1.to_double() - b.x0.to_double()) * scale,
                  (b.y1.to_double() - b.y0.to_double()) * scale, fill, opacity);
    body += buf;
  }

  void lines(const BoxMesh& mesh) {
    char buf[256];
    for (const Dir dir : {Dir::vertical, Dir::horizontal})
      for (const auto& [fixed, runs] : mesh.lines(dir))
        for (const LineRun& run : runs) {
          const double f = fixed.to_double();
          const double a = run.lo.to_double(), b = run.hi.to_double();
          if (dir == Dir::vertical)
            std::snprintf(buf, sizeof buf,
                          "<line x1=\"%.6g\" y1=\"%.6g\" x2=\"%.6g\" y2=\"%.6g\" "
                          "stroke=\"#222\" stroke-width=\"%.6g\"/>\n",
                          px(f), py(a), px(f), py(b), 0.5 * run.mult);
          else
            std::snprintf(buf, sizeof buf,
                          "<line x1=\"%.6g\" y1=\"%.6g\" x2=\"%.6g\" y2=\"%.6g\" "
                          "stroke=\"#222\" stroke-width=\"%.6g\"/>\n",
                          px(a), py(f), px(b), py(f), 0.5 * run.mult);
          body += buf;
        }
  }

  std::string finish(const Box& d) const {
    const double w = px(d.x1.to_double()) + margin;
    const double h = py(d.y0.to_double()) + margin;
    char head[192];
    std::snprintf(head, sizeof head,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.6g\" height=\"%.6g\" "
                  "viewBox=\"0 0 %.6g %.6g\">\n",
                  w, h, w, h);
    return std::string(head) + body + "</svg>\n";
  }
};

}  // namespace

std::string render_mesh_svg(const BoxMesh& mesh) {
  SvgCanvas c(mesh.domain());
  c.lines(mesh);
  return c.finish(mesh.domain());
}

std::string render_mesh_svg(const BoxMesh& mesh, const OverloadReport& report) {
  SvgCanvas c(mesh.domain());
  for (std::size_t idx : report.overloaded) {
    const int excess = report.counts[idx] - report.limit;
    c.rect(report.elements[idx].box, "#c0392b", std::min(0.9, 0.25 + 0.1 * excess));
  }
  c.lines(mesh);
  return c.finish(mesh.domain());
}

std::string render_mesh_svg(const BoxMesh& mesh, const Heatmap& heatmap) {
  SvgCanvas c(mesh.domain());
  for (std::size_t i = 0; i < heatmap.elements.size(); ++i) {
    if (heatmap.intensity[i] <= 0.0) continue;
    const int v = static_cast<int>(255.5 - 255.0 * heatmap.intensity[i]);
    char fill[24];
    std::snprintf(fill, sizeof fill, "rgb(%d,%d,%d)", v, v, v);
    c.rect(heatmap.elements[i].box, fill, 1.0);
  }
  c.lines(mesh);
  return c.finish(mesh.domain());
}

}  // namespace splyne
