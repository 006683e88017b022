#include "cdo/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace cdo {

namespace {

constexpr double kPi = std::numbers::pi;

ManufacturedCase make_sin_case(const std::string& name, const Mat3& lambda) {
  ManufacturedCase mc;
  mc.name = name;
  mc.potential = [](const Vec3& x) {
    return std::sin(kPi * x.x) * std::sin(kPi * x.y) * std::sin(kPi * x.z);
  };
  mc.gradient = [](const Vec3& x) {
    const double sx = std::sin(kPi * x.x), cx = std::cos(kPi * x.x);
    const double sy = std::sin(kPi * x.y), cy = std::cos(kPi * x.y);
    const double sz = std::sin(kPi * x.z), cz = std::cos(kPi * x.z);
    return Vec3{kPi * cx * sy * sz, kPi * sx * cy * sz, kPi * sx * sy * cz};
  };
  mc.flux = [lambda, grad = mc.gradient](const Vec3& x) { return -1.0 * (lambda * grad(x)); };
  mc.source = [lambda](const Vec3& x) {
    const double sx = std::sin(kPi * x.x), cx = std::cos(kPi * x.x);
    const double sy = std::sin(kPi * x.y), cy = std::cos(kPi * x.y);
    const double sz = std::sin(kPi * x.z), cz = std::cos(kPi * x.z);
    return kPi * kPi *
           (trace(lambda) * sx * sy * sz - 2.0 * lambda(0, 1) * cx * cy * sz -
            2.0 * lambda(0, 2) * cx * sy * cz - 2.0 * lambda(1, 2) * sx * cy * cz);
  };
  mc.material = Material::constant(lambda);
  return mc;
}

Mat3 rotation_zy(double angle_z, double angle_y) {
  Mat3 rz = Mat3::identity(), ry = Mat3::identity();
  rz(0, 0) = std::cos(angle_z); rz(0, 1) = -std::sin(angle_z);
  rz(1, 0) = std::sin(angle_z); rz(1, 1) = std::cos(angle_z);
  ry(0, 0) = std::cos(angle_y); ry(0, 2) = std::sin(angle_y);
  ry(2, 0) = -std::sin(angle_y); ry(2, 2) = std::cos(angle_y);
  return rz * ry;
}

const std::map<std::string, ManufacturedCase>& case_registry() {
  static const std::map<std::string, ManufacturedCase> registry = [] {
    std::map<std::string, ManufacturedCase> m;
    m["sin-iso"] = make_sin_case("sin-iso", Mat3::identity());
    m["sin-aniso"] = make_sin_case("sin-aniso", Mat3::diagonal(1.0, 1.0, 0.01));
    const Mat3 r = rotation_zy(0.7, 0.4);
    m["sin-rot"] = make_sin_case("sin-rot", r * Mat3::diagonal(1.0, 1.0, 0.01) * transpose(r));
    return m;
  }();
  return registry;
}

}  // namespace

const ManufacturedCase& manufactured_case(const std::string& name) {
  const auto& reg = case_registry();
  const auto it = reg.find(name);
  if (it == reg.end()) throw ConfigError("unknown manufactured case '" + name + "'");
  return it->second;
}

std::vector<std::string> manufactured_case_names() {
  std::vector<std::string> names;
  for (const auto& [name, mc] : case_registry()) names.push_back(name);
  return names;
}

void ManufacturedCase::validate(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return 0.1 + 0.8 * ((rng() >> 11) * 0x1.0p-53); };
  const double h = 1e-5;
  const Mat3 lambda = material.sample({0.5, 0.5, 0.5});

  for (int trial = 0; trial < 10; ++trial) {
    const Vec3 x{uniform(), uniform(), uniform()};
    Vec3 fd_grad{};
    double fd_div = 0.0;
    for (int i = 0; i < 3; ++i) {
      Vec3 xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd_grad[i] = (potential(xp) - potential(xm)) / (2.0 * h);
      fd_div += (flux(xp)[i] - flux(xm)[i]) / (2.0 * h);
    }
    if (norm(fd_grad - gradient(x)) > 1e-6)
      throw NumericalFailure("manufactured case '" + name + "': gradient mismatch");
    if (std::abs(fd_div - source(x)) > 1e-4)
      throw NumericalFailure("manufactured case '" + name + "': source mismatch");
    if (norm(flux(x) + lambda * gradient(x)) > 1e-12)
      throw NumericalFailure("manufactured case '" + name + "': flux is not -Lambda grad p");
  }
}

DiscreteSystem assemble_vertex_scheme(const PrimalMesh& mesh, const GeometricTables& geom,
                                      const DualGeometry& dual, const Material& material,
                                      HodgeMethod method, double beta, const ScalarField& source,
                                      const std::vector<double>& boundary_values) {
  if (!boundary_values.empty() &&
      boundary_values.size() != static_cast<size_t>(mesh.n_vertices()))
    throw InvalidArgumentError("assemble_vertex_scheme: boundary value vector size mismatch");

  DiscreteSystem sys;
  sys.variant = DiscreteSystem::Variant::spd;
  sys.boundary_values.assign(mesh.n_vertices(), 0.0);
  if (!boundary_values.empty())
    for (int v = 0; v < mesh.n_vertices(); ++v)
      if (mesh.vertex_on_boundary[v]) sys.boundary_values[v] = boundary_values[v];

  sys.vertex_to_unknown.assign(mesh.n_vertices(), -1);
  for (int v = 0; v < mesh.n_vertices(); ++v)
    if (!mesh.vertex_on_boundary[v]) {
      sys.vertex_to_unknown[v] = static_cast<int>(sys.unknown_to_vertex.size());
      sys.unknown_to_vertex.push_back(v);
    }
  const int n_unknown = static_cast<int>(sys.unknown_to_vertex.size());
  if (n_unknown == 0)
    throw InvalidArgumentError("assemble_vertex_scheme: mesh has no interior vertices");

  // dual-cell source averages on the interior rows
  sys.rhs.assign(n_unknown, 0.0);
  if (source) {
    const DoFArray reduced = reduce_dual_source(source, SourceVariant::vertex, mesh, dual);
    for (int u = 0; u < n_unknown; ++u) sys.rhs[u] = reduced.values[sys.unknown_to_vertex[u]];
  }

  SparseBuilder builder(n_unknown);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const LocalHodge h =
        build_local_hodge(c, method, HodgeKind::vertex, material, beta, mesh, geom, dual);
    const CellDual& cd = dual.cells[c];
    const int nlv = static_cast<int>(cd.vertices.size());
    const int nle = static_cast<int>(cd.edges.size());

    // endpoints of each local edge as positions in cd.vertices
    std::vector<std::array<int, 2>> ends(nle);
    for (int k = 0; k < nle; ++k) {
      const auto& e = mesh.edges[cd.edges[k]];
      for (int s = 0; s < 2; ++s)
        ends[k][s] = static_cast<int>(std::lower_bound(cd.vertices.begin(), cd.vertices.end(),
                                                       e[s]) -
                                      cd.vertices.begin());
    }

    // local stiffness K = G^T H G; G row k is -1 at ends[k][0], +1 at ends[k][1]
    std::vector<std::vector<double>> stiff(nlv, std::vector<double>(nlv, 0.0));
    for (int k = 0; k < nle; ++k)
      for (int l = 0; l < nle; ++l) {
        const double hv = h.matrix(k, l);
        stiff[ends[k][0]][ends[l][0]] += hv;
        stiff[ends[k][0]][ends[l][1]] -= hv;
        stiff[ends[k][1]][ends[l][0]] -= hv;
        stiff[ends[k][1]][ends[l][1]] += hv;
      }

    for (int i = 0; i < nlv; ++i) {
      const int vi = cd.vertices[i];
      const int ui = sys.vertex_to_unknown[vi];
      if (ui < 0) continue;
      for (int j = 0; j < nlv; ++j) {
        const int vj = cd.vertices[j];
        const int uj = sys.vertex_to_unknown[vj];
        if (uj >= 0)
          builder.add(ui, uj, stiff[i][j]);
        else
          sys.rhs[ui] -= stiff[i][j] * sys.boundary_values[vj];
      }
    }
  }
  sys.stiffness = builder.build();
  return sys;
}

DiscreteSystem assemble_cell_scheme(const PrimalMesh& mesh, const GeometricTables& geom,
                                    const DualGeometry& dual, const Material& material,
                                    HodgeMethod method, double beta, const ScalarField& source,
                                    const ScalarField& boundary_potential) {
  DiscreteSystem sys;
  sys.variant = DiscreteSystem::Variant::saddle;
  sys.hodge = assemble_global(mesh, geom, dual, material, method, HodgeKind::cell, beta).matrix;
  sys.divergence = build_incidence(mesh).div;

  sys.rhs_flux.assign(mesh.n_faces(), 0.0);
  if (boundary_potential)
    for (int c = 0; c < mesh.n_cells(); ++c)
      for (const CellFace& cf : mesh.cells[c])
        if (mesh.face_on_boundary[cf.face])
          sys.rhs_flux[cf.face] = -cf.sign * boundary_potential(geom.face_center[cf.face]);

  sys.rhs_cells.assign(mesh.n_cells(), 0.0);
  if (source) {
    const DoFArray reduced = reduce_dual_source(source, SourceVariant::cell, mesh, dual);
    for (int c = 0; c < mesh.n_cells(); ++c) sys.rhs_cells[c] = -reduced.values[c];
  }
  return sys;
}

namespace {

SchemeSolution solve_saddle(const DiscreteSystem& sys, double tol, int max_iter) {
  const int n_f = sys.hodge.n;
  const int n_c = sys.divergence.rows;
  const double inner_tol = tol / 100.0;

  std::vector<double> hodge_inv_diag = sys.hodge.diagonal();
  for (double& d : hodge_inv_diag) d = 1.0 / d;

  SchemeSolution sol;
  sol.kind = SchemeKind::cell;

  // z = H^{-1} r by preconditioned CG
  auto apply_hinv = [&](const std::vector<double>& r) {
    std::vector<double> z(n_f, 0.0);
    const CgStats st = cg_solve_op(
        [&](std::span<const double> x, std::span<double> y) { sys.hodge.multiply(x, y); }, r, z,
        inner_tol, max_iter, hodge_inv_diag);
    sol.stats.inner_iterations += st.iterations;
    return z;
  };

  // Schur complement right-hand side: s_bar - DIV H^{-1} b1
  std::vector<double> schur_rhs(n_c, 0.0);
  for (int c = 0; c < n_c; ++c) schur_rhs[c] = -sys.rhs_cells[c];
  {
    const std::vector<double> z = apply_hinv(sys.rhs_flux);
    const std::vector<double> dz = sys.divergence.apply(z);
    for (int c = 0; c < n_c; ++c) schur_rhs[c] -= dz[c];
  }

  // Jacobi guess for the Schur diagonal: sum_f D_cf^2 / H_ff
  std::vector<double> schur_inv_diag(n_c, 0.0);
  for (int c = 0; c < n_c; ++c) {
    double d = 0.0;
    for (int k = sys.divergence.offs[c]; k < sys.divergence.offs[c + 1]; ++k)
      d += hodge_inv_diag[sys.divergence.idx[k]];
    schur_inv_diag[c] = 1.0 / d;
  }

  auto apply_schur = [&](std::span<const double> p, std::span<double> y) {
    const std::vector<double> dtp =
        sys.divergence.apply_transpose(std::vector<double>(p.begin(), p.end()));
    const std::vector<double> z = apply_hinv(dtp);
    const std::vector<double> dz = sys.divergence.apply(z);
    std::copy(dz.begin(), dz.end(), y.begin());
  };

  sol.potential.kind = DoFKind::cell_average;
  sol.potential.values.assign(n_c, 0.0);
  const CgStats outer =
      cg_solve_op(apply_schur, schur_rhs, sol.potential.values, tol, max_iter, schur_inv_diag);
  sol.stats.iterations = outer.iterations;
  sol.stats.final_residual = outer.final_residual;

  // recover the fluxes: H phi = b1 + DIV^T p
  std::vector<double> flux_rhs = sys.divergence.apply_transpose(sol.potential.values);
  for (int f = 0; f < n_f; ++f) flux_rhs[f] += sys.rhs_flux[f];
  sol.flux.kind = DoFKind::face_flux;
  sol.flux.values = apply_hinv(flux_rhs);
  return sol;
}

}  // namespace

SchemeSolution solve_scheme(const DiscreteSystem& sys, double tol, int max_iter) {
  if (sys.variant == DiscreteSystem::Variant::saddle) return solve_saddle(sys, tol, max_iter);

  SchemeSolution sol;
  sol.kind = SchemeKind::vertex;
  std::vector<double> x(sys.stiffness.n, 0.0);
  const CgStats st = cg_solve(sys.stiffness, sys.rhs, x, tol, max_iter, Preconditioner::jacobi);
  sol.stats.iterations = st.iterations;
  sol.stats.final_residual = st.final_residual;

  sol.potential.kind = DoFKind::vertex_potential;
  sol.potential.values = sys.boundary_values;
  for (size_t u = 0; u < sys.unknown_to_vertex.size(); ++u)
    sol.potential.values[sys.unknown_to_vertex[u]] = x[u];
  return sol;
}

PatchTestResult patch_test(SchemeKind kind, const PrimalMesh& mesh, const GeometricTables& geom,
                           const DualGeometry& dual, const Material& material, HodgeMethod method,
                           double beta, const Vec3& a, double b, double tol) {
  const auto affine = [a, b](const Vec3& x) { return dot(a, x) + b; };
  const int max_iter = 10 * (mesh.n_vertices() + mesh.n_faces()) + 100;

  PatchTestResult out;
  if (kind == SchemeKind::vertex) {
    std::vector<double> bc(mesh.n_vertices());
    for (int v = 0; v < mesh.n_vertices(); ++v) bc[v] = affine(mesh.vertices[v]);
    const DiscreteSystem sys =
        assemble_vertex_scheme(mesh, geom, dual, material, method, beta, {}, bc);
    const SchemeSolution sol = solve_scheme(sys, tol, max_iter);

    for (int v = 0; v < mesh.n_vertices(); ++v)
      out.potential_deviation =
          std::max(out.potential_deviation, std::abs(sol.potential.values[v] - bc[v]));

    DoFArray grad_dofs;
    grad_dofs.kind = DoFKind::edge_circulation;
    grad_dofs.values = build_incidence(mesh).grad.apply(sol.potential.values);
    const SubcellField rec =
        reconstruct_field(grad_dofs, mesh, geom, dual, HodgeKind::vertex, beta);
    for (const auto& cell : rec.cell_values)
      for (const Vec3& g : cell)
        out.field_deviation = std::max(out.field_deviation, norm(g - a));
  } else {
    const DiscreteSystem sys =
        assemble_cell_scheme(mesh, geom, dual, material, method, beta, {}, affine);
    const SchemeSolution sol = solve_scheme(sys, tol, max_iter);
    const Vec3 exact_flux = -1.0 * (material.sample({0.0, 0.0, 0.0}) * a);

    for (int c = 0; c < mesh.n_cells(); ++c)
      out.potential_deviation = std::max(
          out.potential_deviation, std::abs(sol.potential.values[c] - affine(geom.cell_center[c])));
    for (int f = 0; f < mesh.n_faces(); ++f)
      out.flux_dof_deviation =
          std::max(out.flux_dof_deviation,
                   std::abs(sol.flux.values[f] - dot(exact_flux, geom.face_area[f])));

    const SubcellField rec = reconstruct_field(sol.flux, mesh, geom, dual, HodgeKind::cell, beta);
    for (const auto& cell : rec.cell_values)
      for (const Vec3& phi : cell)
        out.field_deviation = std::max(out.field_deviation, norm(phi - exact_flux));
  }
  return out;
}

ErrorReport evaluate_errors(const ManufacturedCase& mcase, const SchemeSolution& sol,
                            const PrimalMesh& mesh, const GeometricTables& geom,
                            const DualGeometry& dual, const GlobalHodge& hodge, double beta) {
  if ((sol.kind == SchemeKind::vertex) != (hodge.kind == HodgeKind::vertex))
    throw InvalidArgumentError("evaluate_errors: Hodge kind does not match the solution");

  ErrorReport rep;
  rep.h = geom.mesh_size;
  rep.iterations = sol.stats.iterations;
  rep.inner_iterations = sol.stats.inner_iterations;
  rep.final_residual = sol.stats.final_residual;

  if (sol.kind == SchemeKind::vertex) {
    DoFArray grad_dofs;
    grad_dofs.kind = DoFKind::edge_circulation;
    grad_dofs.values = build_incidence(mesh).grad.apply(sol.potential.values);
    const DoFArray exact = de_rham_edge(mcase.gradient, mesh, geom);

    std::vector<double> diff(mesh.n_edges());
    for (int e = 0; e < mesh.n_edges(); ++e) diff[e] = grad_dofs.values[e] - exact.values[e];
    const std::vector<double> hd = hodge.matrix.multiply(diff);
    double energy2 = 0.0;
    for (int e = 0; e < mesh.n_edges(); ++e) energy2 += diff[e] * hd[e];
    rep.err_energy = std::sqrt(std::max(energy2, 0.0));

    const SubcellField rec =
        reconstruct_field(grad_dofs, mesh, geom, dual, HodgeKind::vertex, beta);
    double rec2 = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const CellDual& cd = dual.cells[c];
      const Mat3 lambda = mcase.material.sample(geom.cell_center[c]);
      for (size_t le = 0; le < cd.edges.size(); ++le) {
        const Vec3 d = rec.cell_values[c][le] - mcase.gradient(cd.edge_subvol_center[le]);
        rec2 += cd.edge_subvol[le] * dot(d, lambda * d);
      }
    }
    rep.err_energy_rec = std::sqrt(rec2);

    double l2 = 0.0;
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      const double d = sol.potential.values[v] - mcase.potential(mesh.vertices[v]);
      l2 += dual.dual_cell_volume[v] * d * d;
    }
    rep.err_l2_pot = std::sqrt(l2);

    for (int v = 0; v < mesh.n_vertices(); ++v)
      if (!mesh.vertex_on_boundary[v]) ++rep.dofs;
  } else {
    const DoFArray exact = de_rham_face(mcase.flux, mesh, geom);
    std::vector<double> diff(mesh.n_faces());
    for (int f = 0; f < mesh.n_faces(); ++f) diff[f] = sol.flux.values[f] - exact.values[f];
    const std::vector<double> hd = hodge.matrix.multiply(diff);
    double energy2 = 0.0;
    for (int f = 0; f < mesh.n_faces(); ++f) energy2 += diff[f] * hd[f];
    rep.err_flux = std::sqrt(std::max(energy2, 0.0));

    const SubcellField rec = reconstruct_field(sol.flux, mesh, geom, dual, HodgeKind::cell, beta);
    double rec2 = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const CellDual& cd = dual.cells[c];
      const Mat3 lambda_inv = invert_sym3(mcase.material.sample(geom.cell_center[c]));
      for (size_t lf = 0; lf < cd.faces.size(); ++lf) {
        const Vec3 d = rec.cell_values[c][lf] - mcase.flux(cd.face_subvol_center[lf]);
        rec2 += cd.face_subvol[lf] * dot(d, lambda_inv * d);
      }
    }
    rep.err_energy_rec = std::sqrt(rec2);

    double l2 = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const double d = sol.potential.values[c] - mcase.potential(geom.cell_center[c]);
      l2 += geom.cell_volume[c] * d * d;
    }
    rep.err_l2_pot = std::sqrt(l2);
    rep.dofs = mesh.n_faces() + mesh.n_cells();
  }
  return rep;
}

}  // namespace cdo
