#include "pfreq/geometry.hpp"

#include "pfreq/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <sstream>

namespace pfreq {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_signed(double d, double period) {
  d = std::fmod(d, period);
  if (d > 0.5 * period) d -= period;
  if (d < -0.5 * period) d += period;
  return d;
}

double wrap_unit(double x, double period) {
  x = std::fmod(x, period);
  return x < 0.0 ? x + period : x;
}

double corner_angle(const Vec3& at, const Vec3& p, const Vec3& q) {
  const Vec3 u = p - at;
  const Vec3 v = q - at;
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

}  // namespace

std::string_view to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::FlatTorus:
      return "flat-torus";
    case GeometryKind::RoundSphere:
      return "round-sphere";
    case GeometryKind::Mesh:
      return "mesh";
  }
  return "unknown";
}

TriMesh icosphere(int subdivision, double radius) {
  if (subdivision < 0 || subdivision > 8) throw ParameterError("icosphere subdivision must be in [0, 8]");
  if (!(radius > 0.0)) throw ParameterError("icosphere radius must be positive");

  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh mesh;
  mesh.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                   {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : mesh.vertices) v.normalize();
  mesh.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                    {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                    {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

  for (int level = 0; level < subdivision; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int id = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back((mesh.vertices[static_cast<std::size_t>(a)] +
                               mesh.vertices[static_cast<std::size_t>(b)]).normalized());
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> refined;
    refined.reserve(mesh.triangles.size() * 4);
    for (const auto& [a, b, c] : mesh.triangles) {
      const int ab = mid(a, b);
      const int bc = mid(b, c);
      const int ca = mid(c, a);
      refined.push_back({a, ab, ca});
      refined.push_back({b, bc, ab});
      refined.push_back({c, ca, bc});
      refined.push_back({ab, bc, ca});
    }
    mesh.triangles = std::move(refined);
  }

  // Orient outward.
  for (auto& tri : mesh.triangles) {
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(tri[0])];
    const Vec3& b = mesh.vertices[static_cast<std::size_t>(tri[1])];
    const Vec3& c = mesh.vertices[static_cast<std::size_t>(tri[2])];
    if ((b - a).cross(c - a).dot(a + b + c) < 0.0) std::swap(tri[1], tri[2]);
  }
  for (auto& v : mesh.vertices) v *= radius;
  return mesh;
}

double triangle_area(const TriMesh& mesh, std::size_t f) {
  const auto& tri = mesh.triangles[f];
  const Vec3& a = mesh.vertices[static_cast<std::size_t>(tri[0])];
  const Vec3& b = mesh.vertices[static_cast<std::size_t>(tri[1])];
  const Vec3& c = mesh.vertices[static_cast<std::size_t>(tri[2])];
  return 0.5 * (b - a).cross(c - a).norm();
}

Eigen::VectorXd angle_defects(const TriMesh& mesh) {
  Eigen::VectorXd defect = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(mesh.vertices.size()), 2.0 * kPi);
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int i = tri[static_cast<std::size_t>(k)];
      const int j = tri[static_cast<std::size_t>((k + 1) % 3)];
      const int l = tri[static_cast<std::size_t>((k + 2) % 3)];
      defect[i] -= corner_angle(mesh.vertices[static_cast<std::size_t>(i)], mesh.vertices[static_cast<std::size_t>(j)],
                                mesh.vertices[static_cast<std::size_t>(l)]);
    }
  }
  return defect;
}

std::pair<Vec3, Vec3> tangent_basis(const Vec3& n) {
  Vec3 axis = Vec3::UnitX();
  if (std::abs(n.y()) < std::abs(n.x()) && std::abs(n.y()) <= std::abs(n.z())) {
    axis = Vec3::UnitY();
  } else if (std::abs(n.z()) < std::abs(n.x()) && std::abs(n.z()) < std::abs(n.y())) {
    axis = Vec3::UnitZ();
  }
  Vec3 e1 = (axis - axis.dot(n) * n).normalized();
  Vec3 e2 = n.cross(e1);
  return {e1, e2};
}

Geometry Geometry::flat_torus(double period_x, double period_y, int nx, int ny) {
  if (!(period_x > 0.0) || !(period_y > 0.0)) throw ParameterError("flat torus periods must be positive");
  if (nx < 8 || ny < 8) throw ParameterError("flat torus resolution must be at least 8 per dimension");

  Geometry g;
  g.kind_ = GeometryKind::FlatTorus;
  g.period_x_ = period_x;
  g.period_y_ = period_y;
  g.nx_ = nx;
  g.ny_ = ny;
  g.area_ = period_x * period_y;
  g.k_lower_ = 0.0;
  g.l_ricci_grad_ = 0.0;

  const double hx = period_x / nx;
  const double hy = period_y / ny;
  const auto n = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  g.positions_.reserve(n);
  g.neighbors_.resize(n);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      g.positions_.emplace_back(i * hx, j * hy, 0.0);
      auto& nb = g.neighbors_[static_cast<std::size_t>(i * ny + j)];
      nb = {((i + 1) % nx) * ny + j, ((i + nx - 1) % nx) * ny + j, i * ny + (j + 1) % ny, i * ny + (j + ny - 1) % ny};
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
  }
  g.normals_.assign(n, Vec3::UnitZ());
  g.frames_.assign(n, {Vec3::UnitX(), Vec3::UnitY()});
  g.lumped_mass_ = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), hx * hy);
  return g;
}

Geometry Geometry::round_sphere(double radius, int subdivision) {
  if (!(radius > 0.0)) throw ParameterError("round sphere radius must be positive");
  Geometry g;
  g.mesh_ = icosphere(subdivision, radius);
  g.kind_ = GeometryKind::RoundSphere;
  g.radius_ = radius;
  g.subdivision_ = subdivision;
  g.k_lower_ = 1.0 / (radius * radius);
  g.l_ricci_grad_ = 0.0;
  g.finish_mesh_data();
  g.area_ = 4.0 * kPi * radius * radius;
  // Exact normals, and weights rescaled to the exact area.
  for (std::size_t i = 0; i < g.positions_.size(); ++i) {
    g.normals_[i] = g.positions_[i] / radius;
    g.frames_[i] = tangent_basis(g.normals_[i]);
  }
  g.lumped_mass_ *= g.area_ / g.lumped_mass_.sum();
  return g;
}

Geometry Geometry::from_mesh(TriMesh mesh) {
  const auto nv = mesh.vertices.size();
  if (nv < 4 || mesh.triangles.size() < 4) throw MeshError("mesh too small to be a closed surface");
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    const auto& t = mesh.triangles[f];
    for (int v : t) {
      if (v < 0 || static_cast<std::size_t>(v) >= nv) {
        throw MeshError("triangle " + std::to_string(f) + " references vertex out of range");
      }
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw MeshError("triangle " + std::to_string(f) + " repeats a vertex");
    }
  }
  for (const auto& v : mesh.vertices) {
    if (!v.allFinite()) throw MeshError("mesh has non-finite vertex coordinates");
  }

  // Each undirected edge must be used by exactly two triangles with opposite orientation.
  std::map<std::pair<int, int>, std::vector<std::pair<std::size_t, bool>>> edges;
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    const auto& t = mesh.triangles[f];
    for (int k = 0; k < 3; ++k) {
      const int a = t[static_cast<std::size_t>(k)];
      const int b = t[static_cast<std::size_t>((k + 1) % 3)];
      edges[std::minmax(a, b)].emplace_back(f, a < b);
    }
  }
  std::size_t boundary = 0;
  std::ostringstream problems;
  for (const auto& [edge, uses] : edges) {
    if (uses.size() == 1) {
      if (boundary++ < 5) problems << " (" << edge.first << "," << edge.second << ")";
    } else if (uses.size() > 2) {
      throw MeshError("non-manifold edge (" + std::to_string(edge.first) + "," + std::to_string(edge.second) +
                      ") shared by " + std::to_string(uses.size()) + " triangles");
    } else if (uses[0].second == uses[1].second) {
      throw MeshError("inconsistent orientation across edge (" + std::to_string(edge.first) + "," +
                      std::to_string(edge.second) + ")");
    }
  }
  if (boundary > 0) {
    throw MeshError("open boundary: " + std::to_string(boundary) + " boundary edges, e.g." + problems.str() +
                    "; a closed surface is required");
  }

  // Vertex links must be single cycles.
  std::vector<std::vector<std::pair<int, int>>> link(nv);
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      link[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])].emplace_back(
          t[static_cast<std::size_t>((k + 1) % 3)], t[static_cast<std::size_t>((k + 2) % 3)]);
    }
  }
  for (std::size_t v = 0; v < nv; ++v) {
    const auto& l = link[v];
    if (l.empty()) throw MeshError("vertex " + std::to_string(v) + " is not used by any triangle");
    std::map<int, int> next;
    for (const auto& [a, b] : l) next[a] = b;
    int cur = l.front().first;
    std::size_t steps = 0;
    do {
      auto it = next.find(cur);
      if (it == next.end()) break;
      cur = it->second;
      ++steps;
    } while (cur != l.front().first && steps <= l.size());
    if (steps != l.size()) throw MeshError("non-manifold vertex " + std::to_string(v));
  }

  // Connectivity.
  std::vector<std::vector<int>> adj(nv);
  for (const auto& [edge, uses] : edges) {
    adj[static_cast<std::size_t>(edge.first)].push_back(edge.second);
    adj[static_cast<std::size_t>(edge.second)].push_back(edge.first);
  }
  std::vector<char> seen(nv, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  if (reached != nv) throw MeshError("mesh is not connected");

  Geometry g;
  g.kind_ = GeometryKind::Mesh;
  g.mesh_ = std::move(mesh);
  g.finish_mesh_data();
  g.area_ = g.lumped_mass_.sum();
  const ScalarField k = gaussian_curvature(g);
  g.k_lower_ = k.values.minCoeff();
  g.l_ricci_grad_ = 0.0;
  return g;
}

void Geometry::finish_mesh_data() {
  const auto nv = mesh_.vertices.size();
  positions_ = mesh_.vertices;
  normals_.assign(nv, Vec3::Zero());
  lumped_mass_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nv));
  std::map<std::pair<int, int>, int> edge_set;
  for (std::size_t f = 0; f < mesh_.triangles.size(); ++f) {
    const auto& t = mesh_.triangles[f];
    const Vec3& a = positions_[static_cast<std::size_t>(t[0])];
    const Vec3& b = positions_[static_cast<std::size_t>(t[1])];
    const Vec3& c = positions_[static_cast<std::size_t>(t[2])];
    const Vec3 n2 = (b - a).cross(c - a);
    const double area = 0.5 * n2.norm();
    for (int k = 0; k < 3; ++k) {
      const int v = t[static_cast<std::size_t>(k)];
      normals_[static_cast<std::size_t>(v)] += n2;
      lumped_mass_[v] += area / 3.0;
      edge_set.emplace(std::minmax(v, t[static_cast<std::size_t>((k + 1) % 3)]), 0);
    }
  }
  frames_.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    normals_[i].normalize();
    frames_[i] = tangent_basis(normals_[i]);
  }
  neighbors_.assign(nv, {});
  for (const auto& [edge, unused] : edge_set) {
    neighbors_[static_cast<std::size_t>(edge.first)].push_back(edge.second);
    neighbors_[static_cast<std::size_t>(edge.second)].push_back(edge.first);
  }
  for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());

  topology_.vertices = static_cast<int>(nv);
  topology_.edges = static_cast<int>(edge_set.size());
  topology_.faces = static_cast<int>(mesh_.triangles.size());
  topology_.euler_characteristic = topology_.vertices - topology_.edges + topology_.faces;
  topology_.genus = (2 - topology_.euler_characteristic) / 2;
}

Geometry Geometry::with_basepoint(int index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= sample_count()) {
    throw ParameterError("basepoint index " + std::to_string(index) + " out of range");
  }
  Geometry g = *this;
  g.basepoint_ = index;
  return g;
}

AnalyticModel Geometry::analytic() const {
  if (kind_ == GeometryKind::Mesh) throw ParameterError("closed-form metric requested on a mesh geometry");
  return AnalyticModel{kind_, period_x_, period_y_, radius_};
}

double AnalyticModel::distance(const Vec3& a, const Vec3& b) const {
  if (kind == GeometryKind::FlatTorus) {
    const double dx = wrap_signed(a.x() - b.x(), period_x);
    const double dy = wrap_signed(a.y() - b.y(), period_y);
    return std::hypot(dx, dy);
  }
  // atan2 form keeps accuracy near 0 and pi.
  return radius * std::atan2(a.cross(b).norm(), a.dot(b));
}

Vec3 AnalyticModel::geodesic_step(const Vec3& p, const Vec3& v) const {
  if (kind == GeometryKind::FlatTorus) {
    return {wrap_unit(p.x() + v.x(), period_x), wrap_unit(p.y() + v.y(), period_y), 0.0};
  }
  const double len = v.norm();
  if (len == 0.0) return p;
  const double rho = len / radius;
  return std::cos(rho) * p + std::sin(rho) * radius * (v / len);
}

std::pair<Vec3, Vec3> AnalyticModel::frame_at(const Vec3& p) const {
  if (kind == GeometryKind::FlatTorus) return {Vec3::UnitX(), Vec3::UnitY()};
  return tangent_basis(p.normalized());
}

nlohmann::json Geometry::to_json() const {
  nlohmann::json j;
  j["kind"] = std::string(to_string(kind_));
  j["dimension"] = 2;
  j["samples"] = sample_count();
  j["basepoint"] = basepoint_;
  j["area"] = area_;
  j["K_lower"] = k_lower_;
  j["L_ricci_grad"] = l_ricci_grad_;
  switch (kind_) {
    case GeometryKind::FlatTorus:
      j["params"] = {{"Lx", period_x_}, {"Ly", period_y_}, {"nx", nx_}, {"ny", ny_}};
      break;
    case GeometryKind::RoundSphere:
      j["params"] = {{"radius", radius_}, {"subdivision", subdivision_}};
      j["counts"] = {{"vertices", topology_.vertices}, {"edges", topology_.edges}, {"faces", topology_.faces}};
      break;
    case GeometryKind::Mesh:
      j["counts"] = {{"vertices", topology_.vertices},
                     {"edges", topology_.edges},
                     {"faces", topology_.faces},
                     {"euler_characteristic", topology_.euler_characteristic},
                     {"genus", topology_.genus}};
      break;
  }
  return j;
}

namespace {

// Candidate distance at c through the edge (a, b) of a planar-unfolded triangle.
double unfold_update(double da, double db, double ab, double ac, double bc) {
  if (std::abs(da - db) > ab) return std::numeric_limits<double>::infinity();
  const double cx = (ac * ac - bc * bc + ab * ab) / (2.0 * ab);
  const double cy = std::sqrt(std::max(0.0, ac * ac - cx * cx));
  const double sx = (da * da - db * db + ab * ab) / (2.0 * ab);
  const double sy = -std::sqrt(std::max(0.0, da * da - sx * sx));
  const double denom = cy - sy;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  const double cross = sx + (cx - sx) * (-sy) / denom;
  if (cross < 0.0 || cross > ab) return std::numeric_limits<double>::infinity();
  return std::hypot(cx - sx, cy - sy);
}

Eigen::VectorXd mesh_distance(const TriMesh& mesh, const std::vector<std::vector<int>>& neighbors, int source) {
  const auto nv = mesh.vertices.size();
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::VectorXd d = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(nv), inf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  d[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [dist, v] = heap.top();
    heap.pop();
    if (dist > d[v]) continue;
    for (int w : neighbors[static_cast<std::size_t>(v)]) {
      const double cand =
          dist + (mesh.vertices[static_cast<std::size_t>(v)] - mesh.vertices[static_cast<std::size_t>(w)]).norm();
      if (cand < d[w]) {
        d[w] = cand;
        heap.emplace(cand, w);
      }
    }
  }

  for (int sweep = 0; sweep < 200; ++sweep) {
    double change = 0.0;
    for (const auto& tri : mesh.triangles) {
      for (int k = 0; k < 3; ++k) {
        const int c = tri[static_cast<std::size_t>(k)];
        const int a = tri[static_cast<std::size_t>((k + 1) % 3)];
        const int b = tri[static_cast<std::size_t>((k + 2) % 3)];
        if (c == source) continue;
        const Vec3& pa = mesh.vertices[static_cast<std::size_t>(a)];
        const Vec3& pb = mesh.vertices[static_cast<std::size_t>(b)];
        const Vec3& pc = mesh.vertices[static_cast<std::size_t>(c)];
        const double cand = unfold_update(d[a], d[b], (pb - pa).norm(), (pc - pa).norm(), (pc - pb).norm());
        if (cand < d[c]) {
          change = std::max(change, d[c] - cand);
          d[c] = cand;
        }
      }
    }
    if (change <= 1e-14 * std::max(1.0, d.maxCoeff())) break;
  }
  return d;
}

}  // namespace

ScalarField geodesic_distance(const Geometry& g, int basepoint) {
  if (basepoint < 0 || static_cast<std::size_t>(basepoint) >= g.sample_count()) {
    throw ParameterError("basepoint index " + std::to_string(basepoint) + " out of range");
  }
  ScalarField out;
  const Vec3 o = g.position(static_cast<std::size_t>(basepoint));
  if (g.is_analytic()) {
    out.values.resize(static_cast<Eigen::Index>(g.sample_count()));
    for (std::size_t i = 0; i < g.sample_count(); ++i) {
      out.values[static_cast<Eigen::Index>(i)] = g.distance(g.position(i), o);
    }
    out.values[basepoint] = 0.0;
    out.exact = [model = g.analytic(), o](const Vec3& x) { return model.distance(x, o); };
    return out;
  }
  out.values = mesh_distance(g.mesh(), g.neighbors(), basepoint);
  return out;
}

ScalarField gaussian_curvature(const Geometry& g) {
  ScalarField out;
  const auto n = static_cast<Eigen::Index>(g.sample_count());
  switch (g.kind()) {
    case GeometryKind::FlatTorus:
      out.values = Eigen::VectorXd::Zero(n);
      out.exact = [](const Vec3&) { return 0.0; };
      break;
    case GeometryKind::RoundSphere: {
      const double k = 1.0 / (g.radius() * g.radius());
      out.values = Eigen::VectorXd::Constant(n, k);
      out.exact = [k](const Vec3&) { return k; };
      break;
    }
    case GeometryKind::Mesh:
      out.values = angle_defects(g.mesh()).cwiseQuotient(g.lumped_mass());
      break;
  }
  return out;
}

}  // namespace pfreq
