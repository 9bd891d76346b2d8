// Command-line driver. Exit codes: 0 ok, 2 configuration error (including
// bad command lines), 3 numerical failure.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "splyne/assembly.hpp"
#include "splyne/errors.hpp"
#include "splyne/harness.hpp"
#include "splyne/overload.hpp"
#include "splyne/thbspace.hpp"

using namespace splyne;

namespace {

struct FamilyOpts {
  std::string pattern = "central";
  int base = 16;
  int levels = 1;
  std::string degree = "3,3";
  std::string boundary = "open";
  bool thb = false;
  bool allow_heavy = false;
};

struct OutOpts {
  std::string out_dir = ".";
  bool svg = false;
  bool csv = false;
};

void add_family(CLI::App* cmd, FamilyOpts& o, bool with_kind = true) {
  cmd->add_option("--pattern", o.pattern, "refinement family: central or diagonal")
      ->check(CLI::IsMember({"central", "diagonal"}));
  cmd->add_option("--base", o.base, "tensor cells per direction at the first level");
  cmd->add_option("--levels", o.levels, "number of hierarchy levels");
  cmd->add_option("--degree", o.degree, "polynomial degree as p1,p2");
  cmd->add_option("--boundary", o.boundary, "open knots or uniform ghost padding")
      ->check(CLI::IsMember({"open", "ghost"}));
  cmd->add_flag("--allow-heavy", o.allow_heavy, "lift the desk-scale budget");
  if (with_kind) cmd->add_flag("--thb", o.thb, "truncated hierarchical space instead of LR");
}

void add_out(CLI::App* cmd, OutOpts& o, bool svg = true, bool csv = true) {
  cmd->add_option("--out-dir", o.out_dir, "directory for generated files");
  if (svg) cmd->add_flag("--svg", o.svg, "also write pictures");
  if (csv) cmd->add_flag("--csv", o.csv, "also write tables");
}

std::pair<int, int> parse_degree(const std::string& s) {
  int p1 = 0, p2 = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%d,%d%c", &p1, &p2, &tail) != 2)
    throw config_error("--degree expects p1,p2");
  return {p1, p2};
}

// Family selections share the scenario checks (ranges, heavy guard, pattern
// alignment), so a bad CLI request fails the same way a bad config file does.
void check_family(const FamilyOpts& o) {
  Scenario s;
  s.name = "cli";
  s.method = o.thb ? Method::thb : Method::lrb;
  s.pattern = o.pattern == "central" ? Pattern::central : Pattern::diagonal;
  s.base = o.base;
  s.max_level = o.levels;
  std::tie(s.p1, s.p2) = parse_degree(o.degree);
  s.allow_heavy = o.allow_heavy;
  validate_scenario(s);
}

HierarchicalSpec family_of(const FamilyOpts& o) {
  check_family(o);
  return family_spec(o.pattern == "central" ? Pattern::central : Pattern::diagonal, o.base,
                     o.levels);
}

Boundary boundary_of(const FamilyOpts& o) {
  return o.boundary == "ghost" ? Boundary::ghost : Boundary::open;
}

void cap_dof(std::size_t dof, const FamilyOpts& o) {
  if (dof > 20000 && !o.allow_heavy)
    throw config_error("run exceeds the desk-scale budget; set allow_heavy");
}

// Either space kind behind the handful of queries the subcommands need.
struct AnySpace {
  std::size_t dof = 0;
  const BoxMesh* mesh = nullptr;
  OverloadReport report;
  SymmetricOperator mass, stiffness;
  std::function<void(OperatorKind)> run_assemble;
};

AnySpace open_space(const FamilyOpts& o, LRSpace& lr_slot, THBSpace& thb_slot) {
  const auto [p1, p2] = parse_degree(o.degree);
  AnySpace a;
  if (o.thb) {
    HierarchicalSpec spec = family_of(o);
    spec.mult_x = p1 + 1;
    spec.mult_y = p2 + 1;
    thb_slot = thb_construct(spec, p1, p2, boundary_of(o));
    a.dof = thb_slot.basis.size();
    cap_dof(a.dof, o);
    a.mesh = &thb_slot.mesh;
    a.report = overload_report(thb_slot);
    a.run_assemble = [&thb_slot, &a](OperatorKind k) {
      (k == OperatorKind::mass ? a.mass : a.stiffness) = assemble(thb_slot, k);
    };
  } else {
    lr_slot = build_lr(family_of(o), p1, p2, boundary_of(o));
    a.dof = active_functions(lr_slot).size();
    cap_dof(a.dof, o);
    a.mesh = &lr_slot.mesh;
    a.report = overload_report(lr_slot);
    a.run_assemble = [&lr_slot, &a](OperatorKind k) {
      (k == OperatorKind::mass ? a.mass : a.stiffness) = assemble(lr_slot, k);
    };
  }
  return a;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot write " + path);
  f << content;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string in_dir(const OutOpts& o, const std::string& name) {
  std::filesystem::create_directories(o.out_dir);
  return o.out_dir + "/" + name;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"locally refined spline workbench"};
  app.require_subcommand(1);

  FamilyOpts fam;
  OutOpts out;
  std::string modify_kind, config_path;
  std::function<int()> action;

  CLI::App* mesh = app.add_subcommand("mesh", "box partitions");
  CLI::App* mesh_build = mesh->add_subcommand("build", "print a hierarchical mesh");
  mesh->require_subcommand(1);
  add_family(mesh_build, fam, false);
  add_out(mesh_build, out, true, false);
  mesh_build->callback([&] {
    action = [&] {
      const BoxMesh m = build_hierarchical(family_of(fam));
      std::fputs(write_mesh(m).c_str(), stdout);
      if (out.svg) write_file(in_dir(out, "mesh.svg"), render_mesh_svg(m));
      return 0;
    };
  });

  CLI::App* space = app.add_subcommand("space", "spline spaces");
  CLI::App* space_build = space->add_subcommand("build", "build a space and report its size");
  space->require_subcommand(1);
  add_family(space_build, fam);
  add_out(space_build, out, true, false);
  space_build->callback([&] {
    action = [&] {
      LRSpace lr;
      THBSpace thb;
      const AnySpace a = open_space(fam, lr, thb);
      std::printf("functions %zu\nelements %zu\n", a.dof, a.mesh->elements().size());
      if (out.svg) write_file(in_dir(out, "space_mesh.svg"), render_mesh_svg(*a.mesh));
      return 0;
    };
  });

  CLI::App* ovl = app.add_subcommand("overload", "element support counts");
  CLI::App* ovl_report = ovl->add_subcommand("report", "per-element counts and excess");
  ovl->require_subcommand(1);
  add_family(ovl_report, fam);
  add_out(ovl_report, out);
  ovl_report->callback([&] {
    action = [&] {
      LRSpace lr;
      THBSpace thb;
      const AnySpace a = open_space(fam, lr, thb);
      const std::string table = write_report_csv(a.report);
      std::fputs(table.c_str(), stdout);
      if (out.csv) write_file(in_dir(out, "overload.csv"), table);
      if (out.svg) write_file(in_dir(out, "overload.svg"), render_mesh_svg(*a.mesh, a.report));
      return 0;
    };
  });

  CLI::App* modify = app.add_subcommand("modify", "overload removal");
  modify->add_option("kind", modify_kind, "lrbno, tlrbno, or diag")
      ->required()
      ->check(CLI::IsMember({"lrbno", "tlrbno", "diag"}));
  add_family(modify, fam, false);
  add_out(modify, out);
  modify->callback([&] {
    action = [&] {
      const auto [p1, p2] = parse_degree(fam.degree);
      const LRSpace before = build_lr(family_of(fam), p1, p2, boundary_of(fam));
      const OverloadReport pre = overload_report(before);
      const LRSpace after = modify_kind == "lrbno"    ? lrbno_modify(before)
                            : modify_kind == "tlrbno" ? tlrbno_modify(before)
                                                      : diagonal_modify(before);
      cap_dof(active_functions(after).size(), fam);
      const OverloadReport post = overload_report(after);
      std::printf("functions %zu -> %zu\noverloaded %zu -> %zu\n",
                  active_functions(before).size(), active_functions(after).size(),
                  pre.overloaded.size(), post.overloaded.size());
      if (out.csv) write_file(in_dir(out, "overload.csv"), write_report_csv(post));
      if (out.svg)
        write_file(in_dir(out, "overload.svg"), render_mesh_svg(after.mesh, post));
      return 0;
    };
  });

  CLI::App* asm_cmd = app.add_subcommand("assemble", "mass and stiffness matrices");
  add_family(asm_cmd, fam);
  add_out(asm_cmd, out, false, false);
  asm_cmd->callback([&] {
    action = [&] {
      LRSpace lr;
      THBSpace thb;
      AnySpace a = open_space(fam, lr, thb);
      a.run_assemble(OperatorKind::mass);
      a.run_assemble(OperatorKind::stiffness);
      write_file(in_dir(out, "mass.mtx"), write_matrix_market(a.mass));
      write_file(in_dir(out, "stiffness.mtx"), write_matrix_market(a.stiffness));
      std::printf("wrote %s/mass.mtx and %s/stiffness.mtx (%zu functions)\n",
                  out.out_dir.c_str(), out.out_dir.c_str(), a.dof);
      return 0;
    };
  });

  CLI::App* cond = app.add_subcommand("cond", "condition numbers of both operators");
  add_family(cond, fam);
  add_out(cond, out, false, true);
  cond->callback([&] {
    action = [&] {
      LRSpace lr;
      THBSpace thb;
      AnySpace a = open_space(fam, lr, thb);
      a.run_assemble(OperatorKind::mass);
      a.run_assemble(OperatorKind::stiffness);
      const EigenSummary ms = eigensolve(a.mass);
      const EigenSummary ss = eigensolve(a.stiffness);
      std::printf("functions %zu\nmass %.17g\nstiffness %.17g\n", a.dof,
                  condition_estimate(a.mass, ms), condition_estimate(a.stiffness, ss));
      if (out.csv) {
        write_file(in_dir(out, "mass_eigs.csv"), write_eigen_csv(ms));
        write_file(in_dir(out, "stiffness_eigs.csv"), write_eigen_csv(ss));
      }
      return 0;
    };
  });

  CLI::App* exp = app.add_subcommand("experiment", "declarative scenario runs");
  CLI::App* exp_run = exp->add_subcommand("run", "run a scenario config");
  exp->require_subcommand(1);
  exp_run->add_option("config", config_path, "scenario JSON file")->required();
  add_out(exp_run, out, false, false);
  exp_run->callback([&] {
    action = [&] {
      const Scenario s = parse_scenario(read_file(config_path));
      const auto records = run_scenario(s, out.out_dir);
      std::fputs(records_csv(records).c_str(), stdout);
      return 0;
    };
  });

  CLI::App* study = app.add_subcommand("study", "curated comparisons");
  CLI::App* study_b = study->add_subcommand("boundary", "six-method conditioning lineup");
  study->require_subcommand(1);
  study_b->add_option("--base", fam.base, "tensor cells per direction at the first level");
  study_b->add_option("--levels", fam.levels, "number of hierarchy levels");
  study_b->add_flag("--allow-heavy", fam.allow_heavy, "lift the desk-scale budget");
  add_out(study_b, out, false, false);
  study_b->callback([&] {
    action = [&] {
      const auto records = boundary_study(fam.base, fam.levels, out.out_dir, fam.allow_heavy);
      std::fputs(records_csv(records).c_str(), stdout);
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    return action();
  } catch (const config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const numerical_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}
