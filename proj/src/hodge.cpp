#include "cdo/hodge.hpp"

#include <algorithm>
#include <cmath>

namespace cdo {

Mat3 Material::sample(const Vec3& x) const {
  const Mat3 m = tensor(x);
  double scale = 0.0, asym = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      scale = std::max(scale, std::abs(m(i, j)));
      asym = std::max(asym, std::abs(m(i, j) - m(j, i)));
    }
  if (asym > 1e-12 * std::max(scale, 1.0))
    throw InvalidArgumentError("material tensor is not symmetric");
  DenseSym d(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j <= i; ++j) d.at(i, j) = m(i, j);
  const auto eig = dense_sym_eig(d);
  if (eig.eigenvalues.front() < eig_min_bound || eig.eigenvalues.back() > eig_max_bound)
    throw InvalidArgumentError("material tensor eigenvalues outside configured bounds");
  return m;
}

Material Material::isotropic(double value) {
  return constant(Mat3::diagonal(value, value, value));
}

Material Material::diagonal(double d0, double d1, double d2) {
  return constant(Mat3::diagonal(d0, d1, d2));
}

Material Material::constant(const Mat3& tensor) {
  Material m;
  m.tensor = [tensor](const Vec3&) { return tensor; };
  return m;
}

namespace {

/// Per-cell quantities shared by the Hodge builders: primal vectors d_i,
/// dual vectors w_i, subvolumes, and the (possibly inverted) tensor.
struct LocalFrame {
  std::vector<int> entities;
  std::vector<int> signs;       // +-1 local-to-global DoF factor (cell kind)
  std::vector<Vec3> primal;     // d_i
  std::vector<Vec3> dual_vec;   // w_i
  std::vector<double> subvol;
  Mat3 tensor;                  // Lambda (vertex kind) or its inverse
  double volume = 0.0;
};

LocalFrame gather_frame(int cell, HodgeKind kind, const Material& material,
                        const PrimalMesh& mesh, const GeometricTables& geom,
                        const DualGeometry& dual) {
  const CellDual& cd = dual.cells[cell];
  LocalFrame fr;
  fr.volume = geom.cell_volume[cell];
  const Mat3 lambda = material.sample(geom.cell_center[cell]);
  if (kind == HodgeKind::vertex) {
    fr.tensor = lambda;
    fr.entities = cd.edges;
    fr.signs.assign(cd.edges.size(), 1);
    for (size_t i = 0; i < cd.edges.size(); ++i) {
      fr.primal.push_back(geom.edge_vector[cd.edges[i]]);
      fr.dual_vec.push_back(cd.edge_dual_area[i]);
      fr.subvol.push_back(cd.edge_subvol[i]);
    }
  } else {
    fr.tensor = invert_sym3(lambda);
    fr.entities = cd.faces;
    for (size_t i = 0; i < cd.faces.size(); ++i) {
      const CellFace& cf = mesh.cells[cell][i];
      fr.signs.push_back(cf.sign);
      fr.primal.push_back(cf.sign * geom.face_area[cf.face]);
      fr.dual_vec.push_back(cd.face_dual_edge[i]);
      fr.subvol.push_back(cd.face_subvol[i]);
    }
  }
  return fr;
}

/// Reconstruction basis: column k holds L(delta_k) on every subvolume.
std::vector<std::vector<Vec3>> reconstruction_basis(const LocalFrame& fr, double beta) {
  const int n = static_cast<int>(fr.entities.size());
  std::vector<std::vector<Vec3>> basis(n, std::vector<Vec3>(n));
  for (int k = 0; k < n; ++k) {
    const Vec3 consistent = fr.dual_vec[k] / fr.volume;
    for (int i = 0; i < n; ++i) {
      const double correction =
          ((i == k ? 1.0 : 0.0) - dot(fr.primal[i], consistent)) /
          dot(fr.primal[i], fr.dual_vec[i]);
      basis[k][i] = consistent + beta * correction * fr.dual_vec[i];
    }
  }
  return basis;
}

}  // namespace

LocalHodge build_local_hodge(int cell, HodgeMethod method, HodgeKind kind,
                             const Material& material, double beta, const PrimalMesh& mesh,
                             const GeometricTables& geom, const DualGeometry& dual) {
  if (!(beta > 0.0)) throw InvalidArgumentError("build_local_hodge: beta must be positive");
  const LocalFrame fr = gather_frame(cell, kind, material, mesh, geom, dual);
  const int n = static_cast<int>(fr.entities.size());

  LocalHodge h;
  h.cell = cell;
  h.kind = kind;
  h.entities = fr.entities;
  h.matrix = DenseSym(n);

  switch (method) {
    case HodgeMethod::reconstruction: {
      const auto basis = reconstruction_basis(fr, beta);
      for (int k = 0; k < n; ++k)
        for (int l = 0; l <= k; ++l) {
          double s = 0.0;
          for (int i = 0; i < n; ++i)
            s += fr.subvol[i] * dot(basis[k][i], fr.tensor * basis[l][i]);
          h.matrix.at(k, l) = s;
        }
      break;
    }
    case HodgeMethod::stabilized_algebraic: {
      // consistent part (1/|c|) W T W^T
      DenseSym consistent(n);
      for (int k = 0; k < n; ++k)
        for (int l = 0; l <= k; ++l)
          consistent.at(k, l) = dot(fr.dual_vec[k], fr.tensor * fr.dual_vec[l]) / fr.volume;
      // projector onto the span of the primal vectors
      Mat3 gram{};
      for (int i = 0; i < n; ++i) gram += outer(fr.primal[i], fr.primal[i]);
      const Mat3 gram_inv = invert_sym3(gram);
      const double scale = consistent.trace() / 3.0;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l <= k; ++l) {
          const double proj = dot(fr.primal[k], gram_inv * fr.primal[l]);
          h.matrix.at(k, l) = consistent(k, l) + scale * ((k == l ? 1.0 : 0.0) - proj);
        }
      break;
    }
    case HodgeMethod::diagonal_orthogonal: {
      const Mat3 lambda = material.sample(geom.cell_center[cell]);
      const double iso = trace(lambda) / 3.0;
      if (frobenius_norm(lambda - iso * Mat3::identity()) > 1e-10 * frobenius_norm(lambda))
        throw InvalidArgumentError("diagonal-orthogonal Hodge requires isotropic conductivity");
      for (int i = 0; i < n; ++i) {
        const Vec3& d = fr.primal[i];
        const Vec3& w = fr.dual_vec[i];
        if (norm(cross(d, w)) > 1e-10 * norm(d) * norm(w))
          throw InvalidArgumentError(
              "diagonal-orthogonal Hodge requires an orthogonal cell (entity " +
              std::to_string(fr.entities[i]) + " fails the parallelism test)");
        // per-cell share of lambda |s~_e|/|e| (resp. |e~_f|/|f| / lambda)
        const double value =
            (kind == HodgeKind::vertex) ? iso * norm(w) / norm(d) : norm(w) / norm(d) / iso;
        h.matrix.at(i, i) = value;
      }
      break;
    }
  }
  return h;
}

HodgeCheck check_local_hodge(const LocalHodge& h, const PrimalMesh& mesh,
                             const GeometricTables& geom, const DualGeometry& dual,
                             const Material& material) {
  const LocalFrame fr = gather_frame(h.cell, h.kind, material, mesh, geom, dual);
  const int n = static_cast<int>(fr.entities.size());
  const double norm_scale = std::pow(fr.volume, 2.0 / 3.0);

  HodgeCheck out;
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 g{};
    g[axis] = 1.0;
    std::vector<double> reduced(n);
    for (int i = 0; i < n; ++i) reduced[i] = dot(g, fr.primal[i]);
    const std::vector<double> mapped = h.matrix.multiply(reduced);
    const Vec3 tg = fr.tensor * g;
    const double scale = norm_scale * std::max(norm(tg), 1.0);
    for (int i = 0; i < n; ++i)
      out.p0_residual =
          std::max(out.p0_residual, std::abs(mapped[i] - dot(tg, fr.dual_vec[i])) / scale);
  }

  const auto eig = dense_sym_eig(h.matrix);
  out.lambda_min = eig.eigenvalues.front();
  out.lambda_max = eig.eigenvalues.back();
  const double tr = h.matrix.trace();
  out.stability_ratio_min = out.lambda_min * n / tr;
  out.stability_ratio_max = out.lambda_max * n / tr;
  return out;
}

GlobalHodge assemble_global(const PrimalMesh& mesh, const GeometricTables& geom,
                            const DualGeometry& dual, const Material& material,
                            HodgeMethod method, HodgeKind kind, double beta) {
  GlobalHodge gh;
  gh.kind = kind;
  const int n_global = (kind == HodgeKind::vertex) ? mesh.n_edges() : mesh.n_faces();
  SparseBuilder builder(n_global);

  for (int c = 0; c < mesh.n_cells(); ++c) {
    LocalHodge h;
    try {
      h = build_local_hodge(c, method, kind, material, beta, mesh, geom, dual);
    } catch (const Error& e) {
      throw InvalidArgumentError("assemble_global: cell " + std::to_string(c) + ": " + e.what());
    }
    std::vector<int> sign(h.entities.size(), 1);
    if (kind == HodgeKind::cell)
      for (size_t i = 0; i < h.entities.size(); ++i) sign[i] = mesh.cells[c][i].sign;
    for (size_t k = 0; k < h.entities.size(); ++k)
      for (size_t l = 0; l < h.entities.size(); ++l)
        builder.add(h.entities[k], h.entities[l],
                    sign[k] * sign[l] * h.matrix(static_cast<int>(k), static_cast<int>(l)));
  }
  gh.matrix = builder.build();
  return gh;
}

SubcellField reconstruct_field(const DoFArray& dofs, const PrimalMesh& mesh,
                               const GeometricTables& geom, const DualGeometry& dual,
                               HodgeKind kind, double beta) {
  if ((kind == HodgeKind::vertex && dofs.kind != DoFKind::edge_circulation) ||
      (kind == HodgeKind::cell && dofs.kind != DoFKind::face_flux))
    throw InvalidArgumentError("reconstruct_field: DoF kind does not match the Hodge kind");

  SubcellField field;
  field.kind = kind;
  field.cell_values.resize(mesh.n_cells());

  // The frame only needs geometry here; a unit material keeps sample() happy.
  const Material unit = Material::isotropic(1.0);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const LocalFrame fr = gather_frame(c, kind, unit, mesh, geom, dual);
    const int n = static_cast<int>(fr.entities.size());
    std::vector<double> u(n);
    for (int i = 0; i < n; ++i) u[i] = fr.signs[i] * dofs.values[fr.entities[i]];

    Vec3 consistent{};
    for (int i = 0; i < n; ++i) consistent += u[i] * fr.dual_vec[i];
    consistent = consistent / fr.volume;

    auto& values = field.cell_values[c];
    values.resize(n);
    for (int i = 0; i < n; ++i) {
      const double correction =
          (u[i] - dot(fr.primal[i], consistent)) / dot(fr.primal[i], fr.dual_vec[i]);
      values[i] = consistent + beta * correction * fr.dual_vec[i];
    }
  }
  return field;
}

}  // namespace cdo
