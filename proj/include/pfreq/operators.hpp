#pragma once

#include "pfreq/analytic_basis.hpp"
#include "pfreq/geometry.hpp"

#include <Eigen/Sparse>

#include <memory>

namespace pfreq {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class MassKind { Lumped, Consistent };

/// Discrete Dirichlet form and L2 inner product.
///
/// Nodal pairs act on per-vertex values (cotangent stiffness). Modal pairs
/// belong to analytic geometries: both operators are diagonal in the
/// closed-form eigenbasis held in `modes`, with the identity as mass.
struct OperatorPair {
  SparseMatrix stiffness;
  SparseMatrix mass;
  bool lumped = true;
  std::shared_ptr<const AnalyticBasis> modes;

  bool modal() const { return static_cast<bool>(modes); }
  Eigen::Index size() const { return stiffness.rows(); }
};

/// Default operators: modal for analytic kinds, cotangent for meshes.
OperatorPair operators(const Geometry& g, MassKind mass = MassKind::Lumped, std::size_t analytic_modes = 256);

/// Cotangent stiffness and P1 mass on the triangulation of any geometry that
/// has one. Throws MeshError listing triangles with area below 1e-14 times
/// the mean.
OperatorPair mesh_operators(const Geometry& g, MassKind mass = MassKind::Lumped);
OperatorPair mesh_operators(const TriMesh& mesh, MassKind mass = MassKind::Lumped);

/// Per-triangle constant gradients of P1 fields: row 3f + c holds component
/// c of the gradient on triangle f.
struct FaceGradient {
  SparseMatrix op;
  Eigen::VectorXd face_area;

  Eigen::Index faces() const { return face_area.size(); }
};

FaceGradient face_gradient(const TriMesh& mesh);

/// sum over faces of area * (mean of `weight` on the face) * <grad a, grad b>.
double weighted_dirichlet(const TriMesh& mesh, const FaceGradient& grad, const Eigen::VectorXd& weight,
                          const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Stiffness with per-face weight given by the vertex mean of `weight`.
SparseMatrix weighted_stiffness(const TriMesh& mesh, const Eigen::VectorXd& weight);

}  // namespace pfreq
