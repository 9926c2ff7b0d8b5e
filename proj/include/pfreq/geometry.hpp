#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <functional>
#include <json.hpp>
#include <string_view>
#include <utility>
#include <vector>

namespace pfreq {

using Vec3 = Eigen::Vector3d;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
};

/// Icosahedron refined `subdivision` times by edge midpoints, projected to the
/// sphere of the given radius. Vertex count is 10 * 4^s + 2.
TriMesh icosphere(int subdivision, double radius = 1.0);

enum class GeometryKind { FlatTorus, RoundSphere, Mesh };

std::string_view to_string(GeometryKind kind);

struct MeshTopology {
  int vertices = 0;
  int edges = 0;
  int faces = 0;
  int euler_characteristic = 0;
  int genus = 0;
};

/// Off-sample evaluator attached to fields on analytic geometries.
using PointFunction = std::function<double(const Vec3&)>;

/// One value per sample point of a Geometry. Fields on analytic kinds may
/// also carry the exact function they were sampled from.
struct ScalarField {
  Eigen::VectorXd values;
  PointFunction exact;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  bool has_exact() const { return static_cast<bool>(exact); }
};

/// Closed-form metric data of an analytic model; cheap to copy into closures.
struct AnalyticModel {
  GeometryKind kind = GeometryKind::FlatTorus;
  double period_x = 0.0;
  double period_y = 0.0;
  double radius = 0.0;

  double distance(const Vec3& a, const Vec3& b) const;
  /// Point reached by the geodesic from p with initial tangent vector v.
  Vec3 geodesic_step(const Vec3& p, const Vec3& v) const;
  /// Orthonormal tangent frame at an arbitrary point.
  std::pair<Vec3, Vec3> frame_at(const Vec3& p) const;
};

/// A closed surface: flat torus, round sphere, or a triangle mesh.
///
/// Analytic kinds carry exact curvature descriptors and closed-form distances;
/// the round sphere is sampled at icosphere vertices. Immutable after
/// construction.
class Geometry {
 public:
  static Geometry flat_torus(double period_x, double period_y, int nx, int ny);
  static Geometry round_sphere(double radius, int subdivision);
  /// Validates that the mesh is a connected, closed, orientable 2-manifold.
  static Geometry from_mesh(TriMesh mesh);

  GeometryKind kind() const { return kind_; }
  bool is_analytic() const { return kind_ != GeometryKind::Mesh; }
  int dimension() const { return 2; }
  std::size_t sample_count() const { return positions_.size(); }

  int basepoint() const { return basepoint_; }
  Geometry with_basepoint(int index) const;
  const Vec3& basepoint_position() const { return positions_[static_cast<std::size_t>(basepoint_)]; }

  /// Lower bound on sectional curvature.
  double curvature_lower_bound() const { return k_lower_; }
  /// Bound on |grad Ric|; zero on the analytic models.
  double ricci_gradient_bound() const { return l_ricci_grad_; }
  double area() const { return area_; }

  double period_x() const { return period_x_; }
  double period_y() const { return period_y_; }
  int grid_nx() const { return nx_; }
  int grid_ny() const { return ny_; }
  double radius() const { return radius_; }

  const Vec3& position(std::size_t i) const { return positions_[i]; }
  const std::vector<Vec3>& positions() const { return positions_; }
  const Vec3& normal(std::size_t i) const { return normals_[i]; }
  /// Orthonormal tangent frame (e1, e2) with e1 x e2 = normal.
  const std::pair<Vec3, Vec3>& frame(std::size_t i) const { return frames_[i]; }

  bool has_mesh() const { return !mesh_.triangles.empty(); }
  const TriMesh& mesh() const { return mesh_; }
  MeshTopology topology() const { return topology_; }
  /// Vertex adjacency (grid neighbours on the torus), sorted.
  const std::vector<std::vector<int>>& neighbors() const { return neighbors_; }

  /// Lumped sample weights; sums to area().
  const Eigen::VectorXd& lumped_mass() const { return lumped_mass_; }

  /// Closed-form metric of an analytic kind; throws on meshes.
  AnalyticModel analytic() const;
  double distance(const Vec3& a, const Vec3& b) const { return analytic().distance(a, b); }

  nlohmann::json to_json() const;

 private:
  Geometry() = default;
  void finish_mesh_data();

  GeometryKind kind_ = GeometryKind::Mesh;
  int basepoint_ = 0;
  double k_lower_ = 0.0;
  double l_ricci_grad_ = 0.0;
  double area_ = 0.0;
  double period_x_ = 0.0, period_y_ = 0.0;
  int nx_ = 0, ny_ = 0;
  double radius_ = 0.0;
  int subdivision_ = -1;

  std::vector<Vec3> positions_;
  std::vector<Vec3> normals_;
  std::vector<std::pair<Vec3, Vec3>> frames_;
  TriMesh mesh_;
  MeshTopology topology_;
  std::vector<std::vector<int>> neighbors_;
  Eigen::VectorXd lumped_mass_;
};

/// Orthonormal pair spanning the plane orthogonal to n (deterministic).
std::pair<Vec3, Vec3> tangent_basis(const Vec3& n);

/// Distance to the basepoint o. Closed forms on analytic kinds; on meshes
/// Dijkstra over edges refined by triangle-unfolding updates.
ScalarField geodesic_distance(const Geometry& g, int basepoint);
inline ScalarField geodesic_distance(const Geometry& g) { return geodesic_distance(g, g.basepoint()); }

/// Gaussian curvature (half the scalar curvature). Meshes use the angle
/// defect divided by the one-third vertex area.
ScalarField gaussian_curvature(const Geometry& g);

/// Per-vertex angle defect 2*pi - sum of incident angles.
Eigen::VectorXd angle_defects(const TriMesh& mesh);

double triangle_area(const TriMesh& mesh, std::size_t f);

}  // namespace pfreq
