// Command-line front end: mesh generation, single runs, convergence studies,
// functional-analysis diagnostics and mesh-file validation.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdo/study.hpp"

namespace {

using namespace cdo;

int cmd_mesh_gen(const std::string& family, int n, double amplitude, std::uint64_t seed,
                 const std::string& out) {
  MeshSpec spec;
  spec.family = family;
  spec.n = n;
  spec.amplitude = amplitude;
  spec.seed = seed;
  const PrimalMesh mesh = build_family_mesh(spec);
  write_mesh_file(mesh, out);
  std::cout << "wrote " << out << ": " << mesh.n_vertices() << " vertices, " << mesh.n_edges()
            << " edges, " << mesh.n_faces() << " faces, " << mesh.n_cells() << " cells\n";
  return 0;
}

int cmd_run(const std::string& config_path) {
  const RunConfig cfg = load_config_file(config_path);
  const ErrorReport rep = run_case(cfg);

  ConvergenceTable table;
  table.rows.push_back(rep);
  write_csv(table, cfg.output_dir + "/report.csv");

  std::printf("h=%.6e dofs=%d iters=%d residual=%.3e\n", rep.h, rep.dofs, rep.iterations,
              rep.final_residual);
  std::printf("err_energy=%.6e err_energy_rec=%.6e err_l2_pot=%.6e err_flux=%.6e\n",
              rep.err_energy, rep.err_energy_rec, rep.err_l2_pot, rep.err_flux);
  std::cout << "wrote " << cfg.output_dir << "/report.csv\n";
  return 0;
}

int cmd_convergence(const std::string& config_path, const std::vector<int>& levels) {
  const RunConfig cfg = load_config_file(config_path);
  const ConvergenceTable table = run_convergence(cfg, levels);
  write_csv(table, cfg.output_dir + "/convergence.csv");
  write_svg(table, cfg.output_dir + "/convergence.svg");

  std::cout << csv_string(table);
  std::printf("rates: energy=%.3f energy_rec=%.3f l2_pot=%.3f flux=%.3f\n", table.rate_energy,
              table.rate_energy_rec, table.rate_l2_pot, table.rate_flux);
  std::cout << "wrote " << cfg.output_dir << "/convergence.{csv,svg}\n";
  return 0;
}

int cmd_diagnose(const std::string& config_path, bool poincare, bool sobolev) {
  const RunConfig cfg = load_config_file(config_path);
  const PrimalMesh mesh = build_family_mesh(cfg.mesh);
  const GeometricTables geom = compute_geometry(mesh);
  const DualGeometry dual = build_dual_geometry(mesh, geom);

  if (poincare) {
    const double cp = poincare_constant(mesh, geom, dual);
    std::printf("poincare constant: %.10f (h = %.6e)\n", cp, geom.mesh_size);
  }
  if (sobolev) {
    const auto rows = sobolev_ratio_diagnostic(mesh, geom, dual, {2, 4, 6});
    for (const SobolevRatio& r : rows)
      std::printf("sobolev ratio q=%d: %.10f (h = %.6e)\n", r.q, r.max_ratio, geom.mesh_size);
  }
  return 0;
}

int cmd_validate(const std::string& mesh_path) {
  const PrimalMesh mesh = read_mesh_file(mesh_path);
  const GeometricTables geom = compute_geometry(mesh);
  const DualGeometry dual = build_dual_geometry(mesh, geom);

  double worst_edge = 0.0, worst_face = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const LocalIdentityCheck chk = check_local_identities(c, mesh, geom, dual);
    worst_edge = std::max(worst_edge, chk.edge_identity_deviation);
    worst_face = std::max(worst_face, chk.face_identity_deviation);
  }
  std::printf("%d vertices, %d edges, %d faces, %d cells; h = %.6e, volume = %.12e\n",
              mesh.n_vertices(), mesh.n_edges(), mesh.n_faces(), mesh.n_cells(), geom.mesh_size,
              geom.total_volume);
  std::printf("dual identity deviations: edge %.3e, face %.3e\n", worst_edge, worst_face);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compatible discrete operator schemes on polyhedral meshes"};
  app.require_subcommand(1);

  // mesh gen
  auto* mesh_cmd = app.add_subcommand("mesh", "mesh utilities");
  mesh_cmd->require_subcommand(1);
  auto* gen = mesh_cmd->add_subcommand("gen", "generate a built-in mesh family");
  std::string family = "cart", out_file = "mesh.json";
  int n = 4;
  double amplitude = 0.2;
  std::uint64_t seed = 42;
  gen->add_option("--family", family, "cart | pert | prism")->required();
  gen->add_option("--n", n, "cells per direction (layers/rings for prism)")->required();
  gen->add_option("--amplitude", amplitude, "perturbation amplitude (pert only)");
  gen->add_option("--seed", seed, "perturbation seed (pert only)");
  gen->add_option("--out", out_file, "output mesh file")->required();

  // run / convergence
  auto* run = app.add_subcommand("run", "run a single configuration");
  std::string run_config;
  run->add_option("--config", run_config, "JSON run configuration")->required();

  auto* conv = app.add_subcommand("convergence", "run a refinement sequence and fit rates");
  std::string conv_config;
  std::vector<int> levels = {4, 8, 16};
  conv->add_option("--config", conv_config, "JSON run configuration")->required();
  conv->add_option("--levels", levels, "mesh sizes, coarse to fine")->expected(-3);

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "discrete functional-analysis diagnostics");
  std::string diag_config;
  bool want_poincare = false, want_sobolev = false;
  diag->add_option("--config", diag_config, "JSON run configuration")->required();
  diag->add_flag("--poincare", want_poincare, "estimate the discrete Poincare constant");
  diag->add_flag("--sobolev", want_sobolev, "sample discrete Sobolev ratios (q = 2, 4, 6)");

  // validate
  auto* val = app.add_subcommand("validate", "read a mesh file and check its invariants");
  std::string mesh_file;
  val->add_option("--mesh", mesh_file, "mesh file to validate")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_mesh_gen(family, n, amplitude, seed, out_file);
    if (run->parsed()) return cmd_run(run_config);
    if (conv->parsed()) return cmd_convergence(conv_config, levels);
    if (diag->parsed()) {
      if (!want_poincare && !want_sobolev) {
        std::cerr << "error: diagnose needs --poincare and/or --sobolev\n";
        return 2;
      }
      return cmd_diagnose(diag_config, want_poincare, want_sobolev);
    }
    if (val->parsed()) return cmd_validate(mesh_file);
  } catch (const DegenerateMeshError& e) {
    std::cerr << "degenerate mesh: " << e.what() << '\n';
    return 4;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgumentError& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
