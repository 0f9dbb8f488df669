// polyhdiv command line: build elements, run the verification suite and
// export boundary traces / field samples.
//
// Exit statuses: 0 ok, 1 check failure, 2 input error, 3 internal error.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "polyhdiv/archive.hpp"
#include "polyhdiv/verify.hpp"

using namespace polyhdiv;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitInputError = 2;
constexpr int kExitInternalError = 3;

bool is_input_error(const Error& e) {
  const std::string& k = e.kind();
  return k == "GeometryError" || k == "UsageError" || k == "AdmissibilityError" ||
         k == "MeshError" || k == "QuadratureError";
}

void emit_error_record(const std::string& kind, const std::string& message,
                       const std::string& out_dir) {
  nlohmann::json rec = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << rec.dump() << "\n";
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (!ec) {
      std::ofstream f(std::filesystem::path(out_dir) / "error.json");
      f << rec.dump(2) << "\n";
    }
  }
}

struct CommonArgs {
  std::string polygon_path;
  int k = 0;
  std::string setting = "general";
  std::string config = "ib";
  std::string projector = "hermite";
  double h_target = 0.0;
  int fe_order = 0;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool polygon_required = true) {
  auto* p = cmd->add_option("--polygon", args.polygon_path, "polygon JSON document");
  if (polygon_required) p->required();
  cmd->add_option("--k", args.k, "discretisation order")->check(CLI::NonNegativeNumber);
  cmd->add_option("--setting", args.setting, "general | reduced")
      ->check(CLI::IsMember({"general", "reduced"}));
  cmd->add_option("--config", args.config, "normal DOF configuration: ia | ib")
      ->check(CLI::IsMember({"ia", "ib"}));
  cmd->add_option("--projector", args.projector, "monomial | orthogonal | hermite")
      ->check(CLI::IsMember({"monomial", "orthogonal", "hermite"}));
  cmd->add_option("--h-target", args.h_target, "sub-mesh size (default: diameter/16)");
  cmd->add_option("--fe-order", args.fe_order, "FE order (default: max(2, k+1))");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "seed for randomized probes");
}

ElementSpec spec_from_args(const CommonArgs& args) {
  ElementSpec spec = args.setting == "reduced" ? ElementSpec::reduced(args.k)
                                               : ElementSpec::general(args.k);
  spec.config = args.config == "ia" ? NormalConfig::Ia : NormalConfig::Ib;
  spec.projector = projector_kind_from_string(args.projector);
  spec.h_target = args.h_target;
  spec.fe_order = args.fe_order;
  return spec;
}

void warn_near_parallel(const Polygon& poly) {
  const AdmissibilityReport rep = check_admissibility(poly);
  if (!rep.near_parallel_edges.empty()) {
    std::cerr << "warning: edges nearly parallel to an axis (coordinate-wise "
                 "moments become ill-conditioned):";
    for (int e : rep.near_parallel_edges) std::cerr << " " << e;
    std::cerr << "\n";
  }
}

NodalBasis build_element(const CommonArgs& args, const ElementSpec& spec) {
  const Polygon poly = load_polygon(args.polygon_path);
  warn_near_parallel(poly);
  auto space = std::make_shared<SpaceBasis>(build_space(poly, spec));
  return build_nodal_basis(space, make_dof_set(poly, spec));
}

void write_csv_row(std::FILE* f, const std::vector<double>& row) {
  for (size_t i = 0; i < row.size(); ++i) {
    std::fprintf(f, i + 1 < row.size() ? "%.17g," : "%.17g\n", row[i]);
  }
}

int cmd_build(const CommonArgs& args) {
  const ElementSpec spec = spec_from_args(args);
  const NodalBasis nb = build_element(args, spec);
  write_element_archive(nb, args.out_dir);
  int degenerate = 0;
  int internal = 0;
  for (DualClass c : nb.classification) {
    if (c == DualClass::DegenerateNormal) ++degenerate;
    if (c == DualClass::Internal) ++internal;
  }
  std::printf("wrote %s: %d basis functions (normal %d, degenerate-normal %d, "
              "internal %d), condition %.3e, kronecker defect %.3e\n",
              args.out_dir.c_str(), nb.size(), nb.size() - degenerate - internal,
              degenerate, internal, nb.condition, nb.kronecker_defect);
  return kExitOk;
}

int cmd_verify(const CommonArgs& args, bool refine, bool compare_conditioning) {
  const ElementSpec spec = spec_from_args(args);
  const Polygon poly = load_polygon(args.polygon_path);
  warn_near_parallel(poly);
  SuiteOptions opts;
  opts.thresholds.seed = args.seed;
  opts.refinement_study = refine;
  opts.conditioning_compare = compare_conditioning;
  VerificationReport rep = run_suite(poly, spec, opts);
  rep.polygon_source = args.polygon_path;

  std::filesystem::create_directories(args.out_dir);
  std::ofstream f(std::filesystem::path(args.out_dir) / "report.json");
  f << rep.to_json() << "\n";

  for (const CheckResult& c : rep.checks) {
    std::printf("%-36s %s  measured=%.6e threshold=%.6e\n", c.name.c_str(),
                c.pass ? "PASS" : "FAIL", c.measured, c.threshold);
  }
  if (!rep.error_kind.empty()) {
    emit_error_record(rep.error_kind, rep.error_message, args.out_dir);
    return kExitInputError;
  }
  return rep.all_pass() ? kExitOk : kExitCheckFailure;
}

int cmd_trace(const CommonArgs& args, int dof_index, int edge_index, int samples) {
  const ElementArchive ar = load_element_archive(args.out_dir);
  const Polygon& poly = ar.polygon();
  const int n = static_cast<int>(ar.coeff.cols());
  std::vector<int> duals;
  if (dof_index >= 0) {
    if (dof_index >= n) throw UsageError("dof index out of range");
    duals.push_back(dof_index);
  } else if (edge_index >= 0) {
    if (edge_index >= poly.n_faces()) throw UsageError("edge index out of range");
    const int per_edge = ar.n_normal / poly.n_faces();
    for (int a = 0; a < per_edge; ++a) duals.push_back(edge_index * per_edge + a);
  } else {
    throw UsageError("trace needs --index or --edge");
  }

  const std::filesystem::path path = std::filesystem::path(args.out_dir) / "trace.csv";
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw UsageError("cannot open " + path.string());
  std::fprintf(f, "dof,edge,t,x,y,phi_1,phi_2,phi_dot_n\n");
  for (int i : duals) {
    for (int e = 0; e < poly.n_faces(); ++e) {
      for (int s = 0; s < samples; ++s) {
        const double t = samples > 1 ? static_cast<double>(s) / (samples - 1) : 0.5;
        const Vec2 x = poly.edge(e).point(t);
        const Vec2 v = ar.trace(i, e, t);
        std::fprintf(f, "%d,%d,", i, e);
        write_csv_row(f, {t, x.x, x.y, v.x, v.y, v.dot(poly.edge(e).normal)});
      }
    }
  }
  std::fclose(f);
  std::printf("wrote %s\n", path.string().c_str());
  return kExitOk;
}

int cmd_export(const CommonArgs& args, int dof_index, int grid) {
  const ElementSpec spec = spec_from_args(args);
  const NodalBasis nb = build_element(args, spec);
  if (dof_index < 0 || dof_index >= nb.size()) {
    throw UsageError("export needs a valid --index");
  }
  const Polygon& poly = nb.space->mesh->polygon();
  double xmin = poly.vertices()[0].x, xmax = xmin;
  double ymin = poly.vertices()[0].y, ymax = ymin;
  for (const Vec2& v : poly.vertices()) {
    xmin = std::min(xmin, v.x);
    xmax = std::max(xmax, v.x);
    ymin = std::min(ymin, v.y);
    ymax = std::max(ymax, v.y);
  }
  std::filesystem::create_directories(args.out_dir);
  const std::filesystem::path path = std::filesystem::path(args.out_dir) / "field.csv";
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw UsageError("cannot open " + path.string());
  std::fprintf(f, "x,y,phi_1,phi_2\n");
  for (int iy = 0; iy < grid; ++iy) {
    for (int ix = 0; ix < grid; ++ix) {
      const Vec2 p{xmin + (xmax - xmin) * (ix + 0.5) / grid,
                   ymin + (ymax - ymin) * (iy + 0.5) / grid};
      if (!poly.contains(p)) continue;
      const Vec2 v = nb.eval(dof_index, p);
      write_csv_row(f, {p.x, p.y, v.x, v.y});
    }
  }
  std::fclose(f);
  std::printf("wrote %s\n", path.string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"H(div)-conformal elements on arbitrary simple polygons"};
  app.require_subcommand(1);

  CommonArgs args;
  bool refine = false;
  bool no_conditioning = false;
  int dof_index = -1;
  int edge_index = -1;
  int samples = 33;
  int grid = 48;

  CLI::App* build = app.add_subcommand("build", "build an element archive");
  add_common(build, args);

  CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
  add_common(verify, args);
  verify->add_flag("--refine", refine, "include the refinement study");
  verify->add_flag("--no-conditioning", no_conditioning,
                   "skip the Hermite-vs-monomial comparison");

  CLI::App* trace = app.add_subcommand("trace", "export boundary traces from an archive");
  add_common(trace, args, /*polygon_required=*/false);
  trace->add_option("--index", dof_index, "dual basis function index");
  trace->add_option("--edge", edge_index, "all duals generated from this edge");
  trace->add_option("--samples", samples, "points per edge (default 33)");

  CLI::App* exp = app.add_subcommand("export", "sample a dual basis function on a grid");
  add_common(exp, args);
  exp->add_option("--index", dof_index, "dual basis function index")->required();
  exp->add_option("--grid", grid, "grid resolution (default 48)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (build->parsed()) return cmd_build(args);
    if (verify->parsed()) return cmd_verify(args, refine, !no_conditioning);
    if (trace->parsed()) return cmd_trace(args, dof_index, edge_index, samples);
    if (exp->parsed()) return cmd_export(args, dof_index, grid);
  } catch (const Error& e) {
    emit_error_record(e.kind(), e.what(), args.out_dir);
    return is_input_error(e) ? kExitInputError : kExitInternalError;
  } catch (const std::exception& e) {
    emit_error_record("InternalError", e.what(), args.out_dir);
    return kExitInternalError;
  }
  return kExitInputError;
}
