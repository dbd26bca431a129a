#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chordmink/polytope.hpp"
#include "chordmink/rng.hpp"
#include "test_support.hpp"

using namespace chordmink;
using namespace testsup;

namespace {

// Independent vertex oracle: solve every n-subset directly with full-pivot
// LU and filter by feasibility, no dedupe shortcuts shared with the library.
std::vector<Vector> enumerate_vertices_oracle(const Matrix& N, const Vector& z) {
  const int n = static_cast<int>(N.cols());
  const int m = static_cast<int>(N.rows());
  std::vector<Vector> out;
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::function<void(int, int)> rec = [&](int start, int k) {
    if (k == n) {
      Matrix A(n, n);
      Vector rhs(n);
      for (int r = 0; r < n; ++r) {
        A.row(r) = N.row(idx[static_cast<std::size_t>(r)]);
        rhs[r] = z[idx[static_cast<std::size_t>(r)]];
      }
      Eigen::FullPivLU<Matrix> lu(A);
      if (!lu.isInvertible()) return;
      Vector x = lu.solve(rhs);
      if (((N * x - z).array() <= 1e-8).all()) {
        for (const auto& w : out)
          if ((w - x).norm() < 1e-8) return;
        out.push_back(x);
      }
      return;
    }
    for (int i = start; i < m; ++i) {
      idx[static_cast<std::size_t>(k)] = i;
      rec(i + 1, k + 1);
    }
  };
  rec(0, 0);
  return out;
}

}  // namespace

TEST_CASE("square from cross normals") {
  Matrix N = cross_polytope_normals(2);
  Vector z = Vector::Constant(4, 1.0);
  Polytope P = wulff_shape(HalfspaceSpec(N, z));
  CHECK(P.vertices().size() == 4);
  CHECK(P.volume() == doctest::Approx(4.0));
  for (const Facet& f : P.facets()) CHECK(f.area == doctest::Approx(2.0));
  CHECK(P.minkowski_defect() < 1e-12);
}

TEST_CASE("cube geometry") {
  Polytope P = make_box(3);
  CHECK(P.vertices().size() == 8);
  CHECK(P.volume() == doctest::Approx(8.0));
  CHECK(P.surface_area() == doctest::Approx(24.0));
  for (const Facet& f : P.facets()) CHECK(f.area == doctest::Approx(4.0));
}

TEST_CASE("empty interior raises") {
  Matrix N = cross_polytope_normals(2);
  Vector z(4);
  z << 1, 1, 1, -2;
  CHECK_THROWS_AS(wulff_shape(HalfspaceSpec(N, z)), DegenerateShapeError);
}

TEST_CASE("unbounded normal set raises") {
  Matrix N(3, 2);
  N << 1, 0, -1, 0, 0, 1;  // concentrated in the closed hemisphere of e2
  Vector z = Vector::Constant(3, 1.0);
  CHECK_THROWS_AS(wulff_shape(HalfspaceSpec(N, z)), DegenerateShapeError);
}

TEST_CASE("support function on the square") {
  Polytope P = make_box(2);
  CHECK(P.support(vec2(1, 0)) == doctest::Approx(1.0));
  CHECK(P.support(vec2(1, 1).normalized()) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("support translation identity") {
  Polytope P = random_polygon(7, 42);
  auto rng = make_rng(7);
  Vector xi = vec2(0.17, -0.05);
  for (int k = 0; k < 16; ++k) {
    Vector v = random_unit_vector(rng, 2);
    // translate by -xi through the offsets
    Matrix N = P.spec().normals;
    Vector z = P.spec().offsets - N * xi;
    Polytope Q = wulff_shape(HalfspaceSpec(N, z));
    CHECK(Q.support(v) == doctest::Approx(P.support(v) - xi.dot(v)).epsilon(1e-9));
  }
}

TEST_CASE("tighten fixes slack offsets") {
  // square plus a diagonal halfplane far out: its offset drops to the
  // corner's support value, the active ones stay put
  Matrix N(5, 2);
  N << 1, 0, -1, 0, 0, 1, 0, -1, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  Vector z(5);
  z << 1, 1, 1, 1, 5;
  HalfspaceSpec spec(N, z);
  Vector zt = tighten(spec);
  for (int i = 0; i < 4; ++i) CHECK(zt[i] == doctest::Approx(1.0));
  CHECK(zt[4] == doctest::Approx(std::sqrt(2.0)));
  // unchanged when all constraints are active
  Matrix N4 = cross_polytope_normals(2);
  Vector z1 = Vector::Constant(4, 1.0);
  Vector zt1 = tighten(HalfspaceSpec(N4, z1));
  CHECK((zt1 - z1).norm() < 1e-12);
}

TEST_CASE("tighten against the vertex oracle on random 3d shapes") {
  auto rng = make_rng(99);
  std::uniform_real_distribution<double> off(0.8, 1.6);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix N(12, 3);
    for (int i = 0; i < 12; ++i) N.row(i) = random_unit_vector(rng, 3).transpose();
    if (!hemisphere_check(N)) {
      --trial;
      continue;
    }
    Vector z(12);
    for (int i = 0; i < 12; ++i) z[i] = off(rng);
    HalfspaceSpec spec(N, z);
    Vector zt;
    try {
      zt = tighten(spec);
    } catch (const DegenerateShapeError&) {
      --trial;
      continue;
    }
    auto verts = enumerate_vertices_oracle(N, z);
    REQUIRE(!verts.empty());
    for (int i = 0; i < 12; ++i) {
      double h = -1e30;
      for (const auto& x : verts) h = std::max(h, x.dot(N.row(i).transpose()));
      CHECK(zt[i] == doctest::Approx(h).epsilon(1e-9));
      CHECK(zt[i] <= z[i] + 1e-12);
    }
    // idempotent, same shape
    Vector zt2 = tighten(HalfspaceSpec(N, zt));
    CHECK((zt2 - zt).norm() < 1e-9);
    Polytope P1 = wulff_shape(spec);
    Polytope P2 = wulff_shape(HalfspaceSpec(N, zt));
    REQUIRE(P1.vertices().size() == P2.vertices().size());
    for (const auto& v1 : P1.vertices()) {
      double dmin = 1e30;
      for (const auto& v2 : P2.vertices()) dmin = std::min(dmin, (v1 - v2).norm());
      CHECK(dmin < 1e-9);
    }
  }
}

TEST_CASE("radial function") {
  Polytope P = make_box(2);
  Vector o = Vector::Zero(2);
  CHECK(P.radial(o, vec2(1, 0)) == doctest::Approx(1.0));
  CHECK(P.radial(o, vec2(1, 1).normalized()) == doctest::Approx(std::sqrt(2.0)));
  Polytope C = make_box(3);
  CHECK(C.radial(vec3(0.5, 0, 0), vec3(1, 0, 0)) == doctest::Approx(0.5));
  CHECK_THROWS_AS(C.radial(vec3(1.0, 0, 0), vec3(1, 0, 0)), DomainError);
}

TEST_CASE("radial endpoint sits on the boundary") {
  Polytope P = random_polytope3(10, 5);
  auto rng = make_rng(6);
  Vector x = P.interior_point();
  for (int k = 0; k < 32; ++k) {
    Vector u = random_unit_vector(rng, 3);
    double rho = P.radial(x, u);
    Vector y = x + rho * u;
    Vector s = P.spec().offsets - P.spec().normals * y;
    CHECK(s.minCoeff() > -1e-9);
    CHECK(s.minCoeff() < 1e-9);  // some constraint is active
  }
}

TEST_CASE("chebyshev center") {
  Polytope P = make_box(2);
  auto [c, r] = chebyshev_center(P.spec());
  CHECK(c.norm() < 1e-9);
  CHECK(r == doctest::Approx(1.0));

  Polytope U = make_unit_box(3);
  auto [c3, r3] = chebyshev_center(U.spec());
  CHECK((c3 - vec3(0.5, 0.5, 0.5)).norm() < 1e-9);
  CHECK(r3 == doctest::Approx(0.5));

  Polytope R = random_polytope3(12, 17);
  auto [cr, rr] = chebyshev_center(R.spec());
  Vector slack = R.spec().offsets - R.spec().normals * cr;
  CHECK(slack.minCoeff() >= rr - 1e-9);
}

TEST_CASE("facet samples stay on the facet and average to its centroid") {
  Polytope C = make_box(3);
  auto pts = facet_sample(C, 0, 10000, 77);  // facet with normal +e1
  Vector mean = Vector::Zero(3);
  for (const auto& p : pts) {
    CHECK(std::abs(p[0] - 1.0) < 1e-12);
    mean += p;
  }
  mean /= static_cast<double>(pts.size());
  // centroid (1,0,0), componentwise std error = (2/sqrt(12))/sqrt(K)
  double se = (2.0 / std::sqrt(12.0)) / std::sqrt(static_cast<double>(pts.size()));
  CHECK(std::abs(mean[1]) < 3 * se);
  CHECK(std::abs(mean[2]) < 3 * se);

  Polytope S = make_box(2);
  auto seg = facet_sample(S, 2, 100, 3);
  for (const auto& p : seg) CHECK(std::abs(p[1] - 1.0) < 1e-12);
}

TEST_CASE("triangle facet sub-areas match sampling frequencies") {
  // triangle in the plane: normals of a 3-gon
  Matrix N(3, 2);
  N << std::cos(0.3), std::sin(0.3), std::cos(2.5), std::sin(2.5), std::cos(4.4), std::sin(4.4);
  Vector z = Vector::Constant(3, 1.0);
  Polytope T = wulff_shape(HalfspaceSpec(N, z));
  // segment facet: empirical halves split 50/50
  auto pts = facet_sample(T, 0, 20000, 9);
  const Facet& f = T.facet(0);
  Vector a = T.vertices()[static_cast<std::size_t>(f.vertex_indices[0])];
  Vector b = T.vertices()[static_cast<std::size_t>(f.vertex_indices[1])];
  int low = 0;
  for (const auto& p : pts)
    if ((p - a).norm() < (p - b).norm()) ++low;
  double frac = static_cast<double>(low) / static_cast<double>(pts.size());
  CHECK(std::abs(frac - 0.5) < 3.0 * 0.5 / std::sqrt(20000.0));
}

TEST_CASE("volume and surface invariants") {
  Polytope U = make_unit_box(2);
  CHECK(U.volume() == doctest::Approx(1.0));
  CHECK(U.surface_area() == doctest::Approx(4.0));

  // translation invariance
  Polytope P = random_polygon(9, 8);
  Vector t = vec2(0.4, -1.2);
  Matrix N = P.spec().normals;
  Vector z = P.spec().offsets + N * t;
  Polytope Q = wulff_shape(HalfspaceSpec(N, z));
  CHECK(Q.volume() == doctest::Approx(P.volume()).epsilon(1e-10));
  CHECK(Q.surface_area() == doctest::Approx(P.surface_area()).epsilon(1e-10));

  // scaling degrees
  for (double t2 : {0.5, 2.0}) {
    Polytope S = wulff_shape(HalfspaceSpec(N, Vector(P.spec().offsets * t2)));
    CHECK(S.volume() == doctest::Approx(std::pow(t2, 2) * P.volume()).epsilon(1e-10));
    CHECK(S.support(vec2(0.3, 0.95).normalized()) ==
          doctest::Approx(t2 * P.support(vec2(0.3, 0.95).normalized())).epsilon(1e-10));
  }
}

TEST_CASE("minkowski relation on random shapes") {
  for (std::uint64_t seed : {21, 22, 23}) {
    Polytope P2 = random_polygon(8, seed);
    CHECK(P2.minkowski_defect() < 1e-7);
    Polytope P3 = random_polytope3(11, seed);
    CHECK(P3.minkowski_defect() < 1e-7);
  }
}

TEST_CASE("4d cross polytope box") {
  Polytope P = make_box(4);
  CHECK(P.vertices().size() == 16);
  CHECK(P.volume() == doctest::Approx(16.0));
  for (const Facet& f : P.facets()) CHECK(f.area == doctest::Approx(8.0));
  CHECK(P.minkowski_defect() < 1e-7);
}

TEST_CASE("subset budget error") {
  Tolerances tol;
  tol.subset_budget = 10;
  Matrix N = cross_polytope_normals(3);
  Vector z = Vector::Constant(6, 1.0);
  CHECK_THROWS_AS(Polytope(HalfspaceSpec(N, z), tol), BudgetError);
}

TEST_CASE("boundary cycle walks the polygon in order") {
  Polytope P = random_polygon(9, 4);
  auto cyc = boundary_cycle(P);
  REQUIRE(cyc.size() == P.vertices().size());
  // consecutive vertices share an edge: midpoint lies on some facet line
  const Matrix& N = P.spec().normals;
  const Vector& z = P.spec().offsets;
  for (std::size_t k = 0; k < cyc.size(); ++k) {
    Vector a = P.vertices()[static_cast<std::size_t>(cyc[k])];
    Vector b = P.vertices()[static_cast<std::size_t>(cyc[(k + 1) % cyc.size()])];
    Vector mid = 0.5 * (a + b);
    double best = 1e30;
    for (int i = 0; i < N.rows(); ++i) best = std::min(best, std::abs(z[i] - N.row(i).dot(mid)));
    CHECK(best < 1e-9);
  }
}
