#include "cdo/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace cdo {

namespace {

using nlohmann::json;

SchemeKind parse_scheme(const std::string& s) {
  if (s == "vertex") return SchemeKind::vertex;
  if (s == "cell") return SchemeKind::cell;
  throw ConfigError("unknown scheme '" + s + "' (expected vertex or cell)");
}

HodgeMethod parse_method(const std::string& s) {
  if (s == "reconstruction") return HodgeMethod::reconstruction;
  if (s == "stabilized") return HodgeMethod::stabilized_algebraic;
  if (s == "diagonal") return HodgeMethod::diagonal_orthogonal;
  throw ConfigError("unknown hodge method '" + s +
                    "' (expected reconstruction, stabilized or diagonal)");
}

const char* kCsvHeader = "h,dofs,err_energy,err_energy_rec,err_l2_pot,err_flux,iters";
constexpr double kRateFloor = 1e-12;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out << content;
    if (!out.flush()) throw IoError("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("cannot move '" + tmp + "' to '" + path + "'");
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  RunConfig cfg;
  try {
    if (j.contains("scheme")) cfg.scheme = parse_scheme(j.at("scheme").get<std::string>());
    if (j.contains("mesh")) {
      const json& m = j.at("mesh");
      if (m.contains("family")) cfg.mesh.family = m.at("family").get<std::string>();
      if (m.contains("n")) cfg.mesh.n = m.at("n").get<int>();
      if (m.contains("amplitude")) cfg.mesh.amplitude = m.at("amplitude").get<double>();
      if (m.contains("seed")) cfg.mesh.seed = m.at("seed").get<std::uint64_t>();
    }
    if (j.contains("case")) cfg.case_name = j.at("case").get<std::string>();
    if (j.contains("hodge")) {
      const json& h = j.at("hodge");
      if (h.contains("method")) cfg.method = parse_method(h.at("method").get<std::string>());
      if (h.contains("beta")) cfg.beta = h.at("beta").get<double>();
    }
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      if (s.contains("tol")) cfg.tol = s.at("tol").get<double>();
      if (s.contains("max_iter")) cfg.max_iter = s.at("max_iter").get<int>();
    }
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }

  if (cfg.mesh.family != "cart" && cfg.mesh.family != "pert" && cfg.mesh.family != "prism")
    throw ConfigError("unknown mesh family '" + cfg.mesh.family + "'");
  if (cfg.mesh.n < 1) throw ConfigError("mesh.n must be >= 1");
  manufactured_case(cfg.case_name);  // resolves or throws
  if (!(cfg.tol > 0.0 && cfg.tol < 1.0)) throw ConfigError("solver.tol must lie in (0, 1)");
  if (cfg.max_iter < 1) throw ConfigError("solver.max_iter must be >= 1");
  if (!(cfg.beta > 0.0)) throw ConfigError("hodge.beta must be positive");
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

PrimalMesh build_family_mesh(const MeshSpec& spec) {
  if (spec.family == "cart" || spec.family == "pert") {
    PrimalMesh m = build_cartesian_hex({spec.n, spec.n, spec.n}, {0, 0, 0}, {1, 1, 1});
    if (spec.family == "pert") m = perturb_hex(m, spec.amplitude, spec.seed);
    return m;
  }
  if (spec.family == "prism") return build_prismatic_polygonal(spec.n, spec.n);
  throw ConfigError("unknown mesh family '" + spec.family + "'");
}

ErrorReport run_case(const RunConfig& cfg) {
  const ManufacturedCase& mc = manufactured_case(cfg.case_name);
  const PrimalMesh mesh = build_family_mesh(cfg.mesh);
  const GeometricTables geom = compute_geometry(mesh);
  const DualGeometry dual = build_dual_geometry(mesh, geom);

  if (cfg.scheme == SchemeKind::vertex) {
    std::vector<double> bc(mesh.n_vertices());
    for (int v = 0; v < mesh.n_vertices(); ++v) bc[v] = mc.potential(mesh.vertices[v]);
    const DiscreteSystem sys = assemble_vertex_scheme(mesh, geom, dual, mc.material, cfg.method,
                                                      cfg.beta, mc.source, bc);
    const SchemeSolution sol = solve_scheme(sys, cfg.tol, cfg.max_iter);
    const GlobalHodge hodge = assemble_global(mesh, geom, dual, mc.material, cfg.method,
                                              HodgeKind::vertex, cfg.beta);
    return evaluate_errors(mc, sol, mesh, geom, dual, hodge, cfg.beta);
  }

  const DiscreteSystem sys = assemble_cell_scheme(mesh, geom, dual, mc.material, cfg.method,
                                                  cfg.beta, mc.source, mc.potential);
  const SchemeSolution sol = solve_scheme(sys, cfg.tol, cfg.max_iter);
  GlobalHodge hodge;
  hodge.kind = HodgeKind::cell;
  hodge.matrix = sys.hodge;
  return evaluate_errors(mc, sol, mesh, geom, dual, hodge, cfg.beta);
}

double fit_rate(const std::vector<double>& h, const std::vector<double>& err) {
  const double nan = std::nan("");
  if (h.size() != err.size()) throw InvalidArgumentError("fit_rate: size mismatch");
  if (h.size() < 3) return nan;
  for (double e : err)
    if (!(e > kRateFloor)) return nan;

  const int n = static_cast<int>(h.size());
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += std::log(h[i]);
    my += std::log(err[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dx = std::log(h[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(err[i]) - my);
  }
  return sxy / sxx;
}

namespace {

void refit_rates(ConvergenceTable& table) {
  std::vector<double> h, e1, e2, e3, e4;
  for (const ErrorReport& r : table.rows) {
    h.push_back(r.h);
    e1.push_back(r.err_energy);
    e2.push_back(r.err_energy_rec);
    e3.push_back(r.err_l2_pot);
    e4.push_back(r.err_flux);
  }
  table.rate_energy = fit_rate(h, e1);
  table.rate_energy_rec = fit_rate(h, e2);
  table.rate_l2_pot = fit_rate(h, e3);
  table.rate_flux = fit_rate(h, e4);
}

}  // namespace

ConvergenceTable run_convergence(const RunConfig& config, const std::vector<int>& levels) {
  if (levels.size() < 3)
    throw InvalidArgumentError("run_convergence: at least 3 refinement levels required");

  ConvergenceTable table;
  for (size_t i = 0; i < levels.size(); ++i) {
    RunConfig cfg = config;
    cfg.mesh.n = levels[i];
    cfg.mesh.seed = config.mesh.seed + i;
    try {
      table.rows.push_back(run_case(cfg));
    } catch (const Error& e) {
      throw NumericalFailure("run_convergence: level n=" + std::to_string(levels[i]) +
                             " failed after " + std::to_string(table.rows.size()) +
                             " completed levels: " + e.what());
    }
    if (i > 0 && !(table.rows[i].h < table.rows[i - 1].h))
      throw InvalidArgumentError("run_convergence: mesh sizes are not strictly decreasing");
  }
  refit_rates(table);
  return table;
}

double poincare_constant(const PrimalMesh& mesh, const GeometricTables& geom,
                         const DualGeometry& dual, double eig_tol) {
  const Material unit = Material::isotropic(1.0);
  const DiscreteSystem sys = assemble_vertex_scheme(mesh, geom, dual, unit,
                                                    HodgeMethod::reconstruction, 1.0, {});
  const int n = sys.stiffness.n;
  std::vector<double> mass(n);
  for (int u = 0; u < n; ++u) mass[u] = dual.dual_cell_volume[sys.unknown_to_vertex[u]];

  auto m_dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * mass[i] * b[i];
    return s;
  };

  std::vector<double> x(n, 1.0);
  {
    const double s = 1.0 / std::sqrt(m_dot(x, x));
    for (double& v : x) v *= s;
  }

  const int max_cg = 20 * n + 200;
  double lambda = 0.0;
  bool converged = false;
  for (int it = 0; it < 500 && !converged; ++it) {
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = mass[i] * x[i];
    std::vector<double> y(n, 0.0);
    cg_solve(sys.stiffness, rhs, y, 1e-12, max_cg);

    // y = A^{-1} M x, so y^T A y = y^T M x
    const double next = m_dot(y, x) / m_dot(y, y);
    const double s = 1.0 / std::sqrt(m_dot(y, y));
    for (int i = 0; i < n; ++i) x[i] = s * y[i];
    if (it > 0 && std::abs(next - lambda) <= eig_tol * std::abs(next)) converged = true;
    lambda = next;
  }
  if (!converged)
    throw NumericalFailure("poincare_constant: inverse power iteration did not converge");
  return 1.0 / std::sqrt(lambda);
}

std::vector<SobolevRatio> sobolev_ratio_diagnostic(const PrimalMesh& mesh,
                                                   const GeometricTables& geom,
                                                   const DualGeometry& dual,
                                                   const std::vector<int>& q_list, int n_draws,
                                                   std::uint64_t seed) {
  for (int q : q_list)
    if (q != 2 && q != 4 && q != 6)
      throw InvalidArgumentError("sobolev_ratio_diagnostic: q must be one of 2, 4, 6");

  const Material unit = Material::isotropic(1.0);
  const DiscreteSystem sys = assemble_vertex_scheme(mesh, geom, dual, unit,
                                                    HodgeMethod::reconstruction, 1.0, {});
  const int n = sys.stiffness.n;

  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0; };

  std::vector<std::vector<double>> draws(n_draws, std::vector<double>(n));
  for (auto& d : draws)
    for (double& v : d) v = uniform();

  std::vector<SobolevRatio> out;
  for (int q : q_list) {
    SobolevRatio row;
    row.q = q;
    for (const auto& p : draws) {
      double lq = 0.0;
      for (int u = 0; u < n; ++u)
        lq += dual.dual_cell_volume[sys.unknown_to_vertex[u]] * std::pow(std::abs(p[u]), q);
      const std::vector<double> ap = sys.stiffness.multiply(p);
      double energy2 = 0.0;
      for (int u = 0; u < n; ++u) energy2 += p[u] * ap[u];
      const double ratio =
          (energy2 > 0.0) ? std::pow(lq, 1.0 / q) / std::sqrt(energy2) : 0.0;
      row.max_ratio = std::max(row.max_ratio, ratio);
    }
    out.push_back(row);
  }
  return out;
}

std::string csv_string(const ConvergenceTable& table) {
  if (table.rows.empty()) throw InvalidArgumentError("csv_string: empty table");
  std::string out = kCsvHeader;
  out += '\n';
  for (const ErrorReport& r : table.rows) {
    out += fmt(r.h) + ',' + std::to_string(r.dofs) + ',' + fmt(r.err_energy) + ',' +
           fmt(r.err_energy_rec) + ',' + fmt(r.err_l2_pot) + ',' + fmt(r.err_flux) + ',' +
           std::to_string(r.iterations) + '\n';
  }
  return out;
}

ConvergenceTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw IoError("parse_csv: missing or malformed header");

  ConvergenceTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 7) throw IoError("parse_csv: expected 7 fields per row");
    ErrorReport r;
    try {
      r.h = std::stod(fields[0]);
      r.dofs = std::stoi(fields[1]);
      r.err_energy = std::stod(fields[2]);
      r.err_energy_rec = std::stod(fields[3]);
      r.err_l2_pot = std::stod(fields[4]);
      r.err_flux = std::stod(fields[5]);
      r.iterations = std::stoi(fields[6]);
    } catch (const std::exception&) {
      throw IoError("parse_csv: non-numeric field in row '" + line + "'");
    }
    table.rows.push_back(r);
  }
  if (table.rows.empty()) throw IoError("parse_csv: no data rows");
  refit_rates(table);
  return table;
}

namespace {

struct Series {
  const char* name;
  const char* color;
  std::vector<std::pair<double, double>> points;  // (log10 h, log10 err)
};

}  // namespace

std::string svg_string(const ConvergenceTable& table) {
  if (table.rows.empty()) throw InvalidArgumentError("svg_string: empty table");

  std::vector<Series> series = {{"energy", "#1f77b4", {}},
                                {"energy_rec", "#ff7f0e", {}},
                                {"l2_pot", "#2ca02c", {}},
                                {"flux", "#d62728", {}}};
  for (const ErrorReport& r : table.rows) {
    const double lh = std::log10(r.h);
    const double errs[4] = {r.err_energy, r.err_energy_rec, r.err_l2_pot, r.err_flux};
    for (int k = 0; k < 4; ++k)
      if (errs[k] > kRateFloor) series[k].points.push_back({lh, std::log10(errs[k])});
  }

  double x0 = 1e30, x1 = -1e30, y0 = 1e30, y1 = -1e30;
  for (const Series& s : series)
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (x0 > x1) {  // all columns at the rounding floor
    x0 = -2.0; x1 = 0.0; y0 = -13.0; y1 = -12.0;
  }
  if (x1 - x0 < 1e-9) x1 = x0 + 1.0;
  if (y1 - y0 < 1e-9) y1 = y0 + 1.0;

  const double w = 640, hgt = 480, ml = 70, mr = 150, mt = 30, mb = 50;
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); };
  auto py = [&](double y) { return hgt - mb - (y - y0) / (y1 - y0) * (hgt - mt - mb); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << hgt
      << "\" viewBox=\"0 0 " << w << " " << hgt << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr << "\" height=\""
      << hgt - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"" << (ml + (w - mr)) / 2 << "\" y=\"" << hgt - 12
      << "\" text-anchor=\"middle\" font-size=\"14\">log10 h</text>\n"
      << "<text x=\"18\" y=\"" << (mt + hgt - mb) / 2 << "\" text-anchor=\"middle\" "
      << "font-size=\"14\" transform=\"rotate(-90 18 " << (mt + hgt - mb) / 2
      << ")\">log10 error</text>\n";

  // reference guides of slope 1 and 2 anchored at the coarsest level
  for (int slope = 1; slope <= 2; ++slope) {
    const double ya = y1, xa = x1;  // through the top-right data corner
    const double yb = ya + slope * (x0 - xa);
    svg << "<line x1=\"" << px(xa) << "\" y1=\"" << py(ya) << "\" x2=\"" << px(x0) << "\" y2=\""
        << py(std::max(yb, y0 - (y1 - y0))) << "\" stroke=\"#999\" stroke-dasharray=\"5,4\"/>\n"
        << "<text x=\"" << px(x0) + 4 << "\" y=\"" << py(std::max(yb, y0 - (y1 - y0))) - 4
        << "\" font-size=\"11\" fill=\"#666\">slope " << slope << "</text>\n";
  }

  int legend_row = 0;
  for (const Series& s : series) {
    if (s.points.empty()) continue;
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.points) svg << px(x) << ',' << py(y) << ' ';
    svg << "\"/>\n";
    for (const auto& [x, y] : s.points)
      svg << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << s.color
          << "\"/>\n";
    const double ly = mt + 16 + 18 * legend_row++;
    svg << "<rect x=\"" << w - mr + 12 << "\" y=\"" << ly - 9 << "\" width=\"12\" height=\"12\" "
        << "fill=\"" << s.color << "\"/>\n<text x=\"" << w - mr + 30 << "\" y=\"" << ly + 2
        << "\" font-size=\"12\">" << s.name << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_csv(const ConvergenceTable& table, const std::string& path) {
  atomic_write(path, csv_string(table));
}

void write_svg(const ConvergenceTable& table, const std::string& path) {
  atomic_write(path, svg_string(table));
}

}  // namespace cdo
