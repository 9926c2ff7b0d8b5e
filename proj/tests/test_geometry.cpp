#include "pfreq/error.hpp"
#include "pfreq/geometry.hpp"
#include "pfreq/mesh_io.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace pfreq;

namespace {

constexpr double kPi = std::numbers::pi;

// Embedded torus of revolution with an n x m quad grid split into triangles.
TriMesh revolution_torus(int n, int m, double big_r = 2.0, double small_r = 0.7) {
  TriMesh mesh;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const double u = 2 * kPi * i / n, v = 2 * kPi * j / m;
      mesh.vertices.emplace_back((big_r + small_r * std::cos(v)) * std::cos(u),
                                 (big_r + small_r * std::cos(v)) * std::sin(u), small_r * std::sin(v));
    }
  }
  auto id = [&](int i, int j) { return ((i + n) % n) * m + (j + m) % m; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return mesh;
}

}  // namespace

TEST_CASE("flat torus construction") {
  const Geometry g = Geometry::flat_torus(2 * kPi, 2 * kPi, 64, 64);
  CHECK(g.sample_count() == 4096);
  CHECK(g.area() == doctest::Approx(4 * kPi * kPi).epsilon(1e-14));
  CHECK(g.lumped_mass().sum() == doctest::Approx(g.area()).epsilon(1e-12));
  CHECK(g.curvature_lower_bound() == 0.0);
  CHECK(g.ricci_gradient_bound() == 0.0);
  CHECK_THROWS_AS(Geometry::flat_torus(-1.0, 1.0, 16, 16), ParameterError);
  CHECK_THROWS_AS(Geometry::flat_torus(1.0, 1.0, 4, 16), ParameterError);
}

TEST_CASE("round sphere construction") {
  const Geometry g = Geometry::round_sphere(1.0, 4);
  CHECK(g.sample_count() == 2562);
  double mesh_area = 0.0;
  for (std::size_t f = 0; f < g.mesh().triangles.size(); ++f) mesh_area += triangle_area(g.mesh(), f);
  CHECK(std::abs(mesh_area - 4 * kPi) < 0.005 * 4 * kPi);
  CHECK(g.curvature_lower_bound() == doctest::Approx(1.0));
  CHECK(g.topology().euler_characteristic == 2);
  CHECK_THROWS_AS(Geometry::round_sphere(0.0, 4), ParameterError);
  for (std::size_t i = 0; i < g.sample_count(); i += 97) CHECK(g.position(i).norm() == doctest::Approx(1.0));
}

TEST_CASE("closed-form distances") {
  const Geometry s = Geometry::round_sphere(1.0, 2);
  CHECK(s.distance(Vec3::UnitZ(), -Vec3::UnitZ()) == doctest::Approx(kPi).epsilon(1e-15));
  const Geometry t = Geometry::flat_torus(2 * kPi, 2 * kPi, 16, 16);
  CHECK(t.distance({kPi, kPi, 0}, {0, 0, 0}) == doctest::Approx(std::sqrt(2.0) * kPi).epsilon(1e-15));
  CHECK(t.distance({0.1, 0, 0}, {2 * kPi - 0.1, 0, 0}) == doctest::Approx(0.2).epsilon(1e-12));

  // Symmetry d(x, o) = d(o, x) on every sample pair drawn from the grid.
  const ScalarField d0 = geodesic_distance(t, 0);
  for (std::size_t i = 0; i < t.sample_count(); i += 7) {
    const ScalarField di = geodesic_distance(t, static_cast<int>(i));
    CHECK(d0.values[static_cast<Eigen::Index>(i)] == di.values[0]);
  }
  CHECK(d0.values[0] == 0.0);
  CHECK_THROWS_AS(geodesic_distance(t, -1), ParameterError);
}

TEST_CASE("mesh distance approximates great-circle distance") {
  const Geometry analytic = Geometry::round_sphere(1.0, 4);
  const Geometry mesh = Geometry::from_mesh(icosphere(4));
  const ScalarField exact = geodesic_distance(analytic, 0);
  const ScalarField approx = geodesic_distance(mesh, 0);
  const double err = (exact.values - approx.values).cwiseAbs().maxCoeff();
  CHECK(err < 0.02 * kPi);
}

TEST_CASE("Gauss-Bonnet on accepted meshes") {
  for (int s = 0; s <= 3; ++s) {
    const Geometry g = Geometry::from_mesh(icosphere(s, 1.7));
    CHECK(angle_defects(g.mesh()).sum() == doctest::Approx(4 * kPi).epsilon(1e-12));
    const ScalarField k = gaussian_curvature(g);
    CHECK(k.values.dot(g.lumped_mass()) == doctest::Approx(4 * kPi).epsilon(1e-10));
  }
  const Geometry torus = Geometry::from_mesh(revolution_torus(40, 24));
  CHECK(torus.topology().euler_characteristic == 0);
  CHECK(torus.topology().genus == 1);
  CHECK(std::abs(angle_defects(torus.mesh()).sum()) < 1e-8);
}

TEST_CASE("analytic curvature") {
  const Geometry t = Geometry::flat_torus(1.0, 2.0, 8, 8);
  CHECK(gaussian_curvature(t).values.cwiseAbs().maxCoeff() == 0.0);
  const Geometry s = Geometry::round_sphere(2.0, 1);
  CHECK(gaussian_curvature(s).values.minCoeff() == doctest::Approx(0.25));
  CHECK(gaussian_curvature(s).values.maxCoeff() == doctest::Approx(0.25));
}

TEST_CASE("OFF and OBJ readers") {
  std::ostringstream off;
  write_off(off, icosphere(0));
  std::istringstream in(off.str());
  const Geometry ico = load_mesh(in, MeshFormat::OFF);
  CHECK(ico.sample_count() == 12);
  CHECK(ico.topology().faces == 20);
  CHECK(ico.topology().euler_characteristic == 2);

  // Tetrahedron in OBJ with a missing face: boundary edges.
  std::istringstream open_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 2 3 4\n");
  CHECK_THROWS_AS(load_mesh(open_obj, MeshFormat::OBJ), MeshError);

  std::istringstream closed_obj("# tet\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 2 3 4\nf 3 1 4\n");
  CHECK(load_mesh(closed_obj, MeshFormat::OBJ).topology().euler_characteristic == 2);

  std::istringstream bad("OFF\n3 1 0\n0 0 0\n1 0\n");
  CHECK_THROWS_AS(load_mesh(bad, MeshFormat::OFF), ParseError);

  // Two tetrahedra sharing an edge: that edge has four incident faces.
  std::istringstream nonmanifold(
      "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nv 0 -1 0\nv 0 0 -1\n"
      "f 1 3 2\nf 1 2 4\nf 2 3 4\nf 3 1 4\nf 1 2 5\nf 1 6 2\nf 2 6 5\nf 1 5 6\n");
  CHECK_THROWS_AS(load_mesh(nonmanifold, MeshFormat::OBJ), MeshError);
}

TEST_CASE("geometry json and basepoint") {
  const Geometry g = Geometry::round_sphere(1.0, 2);
  const auto j = g.to_json();
  CHECK(j.at("kind") == "round-sphere");
  CHECK(g.with_basepoint(5).basepoint() == 5);
  CHECK_THROWS_AS(g.with_basepoint(100000), ParameterError);
}
