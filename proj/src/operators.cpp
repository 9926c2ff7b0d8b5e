#include "pfreq/operators.hpp"

#include "pfreq/error.hpp"

#include <sstream>
#include <vector>

namespace pfreq {

namespace {

void check_degenerate(const TriMesh& mesh) {
  const auto nf = mesh.triangles.size();
  std::vector<double> area(nf);
  double mean = 0.0;
  for (std::size_t f = 0; f < nf; ++f) {
    area[f] = triangle_area(mesh, f);
    mean += area[f];
  }
  mean /= static_cast<double>(nf);
  std::vector<std::size_t> bad;
  for (std::size_t f = 0; f < nf; ++f) {
    if (!(area[f] >= 1e-14 * mean)) bad.push_back(f);
  }
  if (bad.empty()) return;
  std::ostringstream msg;
  msg << bad.size() << " degenerate triangle(s) with area below 1e-14 * mean:";
  for (std::size_t k = 0; k < bad.size() && k < 20; ++k) msg << ' ' << bad[k];
  if (bad.size() > 20) msg << " ...";
  throw MeshError(msg.str());
}

// Cotangent element matrix entries: w[k] = cot of the angle opposite edge k,
// where edge k joins corners (k + 1) % 3 and (k + 2) % 3.
std::array<double, 3> half_cotangents(const TriMesh& mesh, const std::array<int, 3>& t) {
  std::array<double, 3> w{};
  for (int k = 0; k < 3; ++k) {
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])];
    const Vec3& b = mesh.vertices[static_cast<std::size_t>(t[static_cast<std::size_t>((k + 1) % 3)])];
    const Vec3& c = mesh.vertices[static_cast<std::size_t>(t[static_cast<std::size_t>((k + 2) % 3)])];
    const Vec3 u = b - a, v = c - a;
    w[static_cast<std::size_t>(k)] = 0.5 * u.dot(v) / u.cross(v).norm();
  }
  return w;
}

SparseMatrix assemble_stiffness(const TriMesh& mesh, const Eigen::VectorXd* weight) {
  const auto nv = static_cast<Eigen::Index>(mesh.vertices.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (const auto& t : mesh.triangles) {
    const auto w = half_cotangents(mesh, t);
    double scale = 1.0;
    if (weight) scale = ((*weight)[t[0]] + (*weight)[t[1]] + (*weight)[t[2]]) / 3.0;
    for (int k = 0; k < 3; ++k) {
      const int i = t[static_cast<std::size_t>((k + 1) % 3)];
      const int j = t[static_cast<std::size_t>((k + 2) % 3)];
      const double c = scale * w[static_cast<std::size_t>(k)];
      trip.emplace_back(i, j, -c);
      trip.emplace_back(j, i, -c);
      trip.emplace_back(i, i, c);
      trip.emplace_back(j, j, c);
    }
  }
  SparseMatrix s(nv, nv);
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

}  // namespace

OperatorPair mesh_operators(const TriMesh& mesh, MassKind mass) {
  check_degenerate(mesh);
  const auto nv = static_cast<Eigen::Index>(mesh.vertices.size());
  OperatorPair ops;
  ops.stiffness = assemble_stiffness(mesh, nullptr);
  ops.lumped = mass == MassKind::Lumped;
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    const auto& t = mesh.triangles[f];
    const double area = triangle_area(mesh, f);
    for (int a = 0; a < 3; ++a) {
      if (ops.lumped) {
        trip.emplace_back(t[static_cast<std::size_t>(a)], t[static_cast<std::size_t>(a)], area / 3.0);
        continue;
      }
      for (int b = 0; b < 3; ++b) {
        trip.emplace_back(t[static_cast<std::size_t>(a)], t[static_cast<std::size_t>(b)],
                          area * (a == b ? 2.0 : 1.0) / 12.0);
      }
    }
  }
  ops.mass.resize(nv, nv);
  ops.mass.setFromTriplets(trip.begin(), trip.end());
  return ops;
}

OperatorPair mesh_operators(const Geometry& g, MassKind mass) {
  if (!g.has_mesh()) throw ParameterError(std::string(to_string(g.kind())) + " geometry has no triangulation");
  OperatorPair ops = mesh_operators(g.mesh(), mass);
  if (g.kind() == GeometryKind::RoundSphere && ops.lumped) {
    // Keep the sample weights of the analytic sphere, which sum to 4 pi r^2.
    for (Eigen::Index i = 0; i < ops.mass.rows(); ++i) ops.mass.coeffRef(i, i) = g.lumped_mass()[i];
  }
  return ops;
}

OperatorPair operators(const Geometry& g, MassKind mass, std::size_t analytic_modes) {
  if (!g.is_analytic()) return mesh_operators(g, mass);
  OperatorPair ops;
  ops.modes = make_analytic_basis(g, analytic_modes);
  const auto n = static_cast<Eigen::Index>(ops.modes->size());
  ops.stiffness.resize(n, n);
  ops.mass.resize(n, n);
  std::vector<Eigen::Triplet<double>> s, m;
  for (Eigen::Index k = 0; k < n; ++k) {
    s.emplace_back(k, k, ops.modes->eigenvalues()[k]);
    m.emplace_back(k, k, 1.0);
  }
  ops.stiffness.setFromTriplets(s.begin(), s.end());
  ops.mass.setFromTriplets(m.begin(), m.end());
  ops.lumped = true;
  return ops;
}

FaceGradient face_gradient(const TriMesh& mesh) {
  const auto nf = static_cast<Eigen::Index>(mesh.triangles.size());
  FaceGradient out;
  out.face_area.resize(nf);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (Eigen::Index f = 0; f < nf; ++f) {
    const auto& t = mesh.triangles[static_cast<std::size_t>(f)];
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(t[0])];
    const Vec3& b = mesh.vertices[static_cast<std::size_t>(t[1])];
    const Vec3& c = mesh.vertices[static_cast<std::size_t>(t[2])];
    const Vec3 n2 = (b - a).cross(c - a);
    const double area2 = n2.norm();
    out.face_area[f] = 0.5 * area2;
    const Vec3 n = n2 / area2;
    // grad phi_k = n x (opposite edge) / (2 area).
    const std::array<Vec3, 3> opposite = {c - b, a - c, b - a};
    for (int k = 0; k < 3; ++k) {
      const Vec3 gk = n.cross(opposite[static_cast<std::size_t>(k)]) / area2;
      for (int comp = 0; comp < 3; ++comp) trip.emplace_back(3 * f + comp, t[static_cast<std::size_t>(k)], gk[comp]);
    }
  }
  out.op.resize(3 * nf, static_cast<Eigen::Index>(mesh.vertices.size()));
  out.op.setFromTriplets(trip.begin(), trip.end());
  return out;
}

double weighted_dirichlet(const TriMesh& mesh, const FaceGradient& grad, const Eigen::VectorXd& weight,
                          const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ga = grad.op * a;
  const Eigen::VectorXd gb = a.data() == b.data() ? ga : Eigen::VectorXd(grad.op * b);
  double sum = 0.0;
  for (Eigen::Index f = 0; f < grad.faces(); ++f) {
    const auto& t = mesh.triangles[static_cast<std::size_t>(f)];
    const double w = (weight[t[0]] + weight[t[1]] + weight[t[2]]) / 3.0;
    sum += grad.face_area[f] * w * ga.segment<3>(3 * f).dot(gb.segment<3>(3 * f));
  }
  return sum;
}

SparseMatrix weighted_stiffness(const TriMesh& mesh, const Eigen::VectorXd& weight) {
  return assemble_stiffness(mesh, &weight);
}

}  // namespace pfreq
