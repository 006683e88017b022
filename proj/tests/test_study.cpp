#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "cdo/study.hpp"

using namespace cdo;

TEST_CASE("config parsing, defaults and validation") {
  const RunConfig cfg = parse_config(R"({
    "scheme": "cell",
    "mesh": {"family": "pert", "n": 6, "amplitude": 0.15, "seed": 99},
    "case": "sin-aniso",
    "hodge": {"method": "stabilized", "beta": 0.5},
    "solver": {"tol": 1e-9, "max_iter": 500},
    "output_dir": "/tmp"
  })");
  CHECK(cfg.scheme == SchemeKind::cell);
  CHECK(cfg.mesh.family == "pert");
  CHECK(cfg.mesh.n == 6);
  CHECK(cfg.mesh.amplitude == 0.15);
  CHECK(cfg.mesh.seed == 99);
  CHECK(cfg.case_name == "sin-aniso");
  CHECK(cfg.method == HodgeMethod::stabilized_algebraic);
  CHECK(cfg.beta == 0.5);
  CHECK(cfg.tol == 1e-9);
  CHECK(cfg.max_iter == 500);

  const RunConfig defaults = parse_config("{}");
  CHECK(defaults.scheme == SchemeKind::vertex);
  CHECK(defaults.mesh.family == "cart");
  CHECK(defaults.case_name == "sin-iso");

  CHECK_THROWS_AS(parse_config("not json at all"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"case": "unknown-case"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"mesh": {"family": "tet"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"solver": {"tol": 2.0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scheme": "edge"})"), ConfigError);
}

TEST_CASE("rate fitter is exact on power-law data") {
  const std::vector<double> h = {0.25, 0.125, 0.0625};
  std::vector<double> e1(3), e2(3);
  for (int i = 0; i < 3; ++i) {
    e1[i] = h[i];
    e2[i] = 3.7 * h[i] * h[i];
  }
  CHECK(std::abs(fit_rate(h, e1) - 1.0) < 1e-12);
  CHECK(std::abs(fit_rate(h, e2) - 2.0) < 1e-12);
  CHECK(std::isnan(fit_rate({0.5, 0.25}, {0.1, 0.05})));
  CHECK(std::isnan(fit_rate(h, {0.1, 0.05, 1e-13})));
}

TEST_CASE("run_case end-to-end smoke") {
  RunConfig cfg;
  cfg.mesh.family = "cart";
  cfg.mesh.n = 4;
  const ErrorReport rep = run_case(cfg);
  CHECK(rep.dofs == 27);
  CHECK(rep.err_l2_pot > 0.0);
  CHECK(rep.err_l2_pot < 1.0);
  CHECK(std::isfinite(rep.err_energy_rec));
  CHECK(rep.final_residual <= cfg.tol);
}

TEST_CASE("csv emission and round trip") {
  ConvergenceTable t;
  for (int i = 0; i < 3; ++i) {
    ErrorReport r;
    r.h = 0.25 / (1 << i);
    r.dofs = 27 * (1 << (3 * i));
    r.err_energy = 0.3 * r.h;
    r.err_energy_rec = 0.6 * r.h;
    r.err_l2_pot = 0.1 * r.h * r.h;
    r.err_flux = 0.0;
    r.iterations = 10 + i;
    t.rows.push_back(r);
  }
  const std::string csv = csv_string(t);
  int lines = 0;
  for (char ch : csv)
    if (ch == '\n') ++lines;
  CHECK(lines == 4);
  CHECK(csv.rfind("h,dofs,err_energy,err_energy_rec,err_l2_pot,err_flux,iters\n", 0) == 0);

  const ConvergenceTable back = parse_csv(csv);
  CHECK(csv_string(back) == csv);
  CHECK(std::abs(back.rate_energy - 1.0) < 1e-10);
  CHECK(std::abs(back.rate_l2_pot - 2.0) < 1e-10);
  CHECK(std::isnan(back.rate_flux));

  CHECK_THROWS_AS(csv_string(ConvergenceTable{}), InvalidArgumentError);
  CHECK_THROWS_AS(parse_csv("wrong,header\n1,2\n"), IoError);

  const std::string svg = svg_string(t);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("slope 1") != std::string::npos);
  CHECK(svg.find("slope 2") != std::string::npos);
  CHECK(svg.find("l2_pot") != std::string::npos);
  CHECK(svg.find("href") == std::string::npos);  // self-contained

  CHECK_THROWS_AS(write_csv(t, "/nonexistent-dir/x.csv"), IoError);
}

TEST_CASE("identical configurations give identical csv bytes") {
  RunConfig cfg;
  cfg.mesh.family = "pert";
  cfg.mesh.n = 3;
  cfg.mesh.amplitude = 0.2;
  cfg.mesh.seed = 42;
  ConvergenceTable t1, t2;
  t1.rows.push_back(run_case(cfg));
  t2.rows.push_back(run_case(cfg));
  CHECK(csv_string(t1) == csv_string(t2));
}

TEST_CASE("convergence driver on a short vertex sequence") {
  RunConfig cfg;
  cfg.mesh.family = "pert";
  cfg.mesh.amplitude = 0.2;
  cfg.mesh.seed = 42;
  CHECK_THROWS_AS(run_convergence(cfg, {4, 8}), InvalidArgumentError);

  const ConvergenceTable t = run_convergence(cfg, {2, 3, 4});
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].h > t.rows[1].h);
  CHECK(t.rows[1].h > t.rows[2].h);
  CHECK(std::isfinite(t.rate_l2_pot));
  CHECK(std::isnan(t.rate_flux));  // vertex scheme leaves the flux column empty
}

TEST_CASE("poincare constant behaves like the Dirichlet eigenvalue") {
  PrimalMesh mesh = build_cartesian_hex({8, 8, 8}, {0, 0, 0}, {1, 1, 1});
  GeometricTables geom = compute_geometry(mesh);
  DualGeometry dual = build_dual_geometry(mesh, geom);
  const double cp = poincare_constant(mesh, geom, dual);
  CHECK(cp > 0.0);
  const double exact = 1.0 / (std::sqrt(3.0) * std::acos(-1.0));
  CHECK(std::abs(cp - exact) / exact < 0.2);

  const auto rows = sobolev_ratio_diagnostic(mesh, geom, dual, {2, 4, 6});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].max_ratio <= cp + 1e-8);
  for (const SobolevRatio& r : rows) CHECK(r.max_ratio > 0.0);
  CHECK_THROWS_AS(sobolev_ratio_diagnostic(mesh, geom, dual, {3}), InvalidArgumentError);
}
