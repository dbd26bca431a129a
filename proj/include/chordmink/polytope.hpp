#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "chordmink/types.hpp"

namespace chordmink {

/// Offsets z over a normal set. The normals must be unit vectors that are
/// not all contained in one closed hemisphere, which bounds the intersection
/// {x : x.v_i <= z_i} whenever it is nonempty.
struct HalfspaceSpec {
  Matrix normals;  // N x n, unit rows
  Vector offsets;  // N

  HalfspaceSpec(Matrix normals_in, Vector offsets_in, const Tolerances& tol = {});

  int dim() const { return static_cast<int>(normals.cols()); }
  int count() const { return static_cast<int>(normals.rows()); }
};

/// One bounding halfspace together with the face it supports. Facets that
/// degenerate to dimension < n-1 (or are never active) are reported empty:
/// no vertex indices, zero area, no triangulation.
struct Facet {
  int normal_index = 0;
  std::vector<int> vertex_indices;        // cycle-ordered for n <= 3
  double area = 0.0;                      // (n-1)-measure
  std::vector<std::vector<int>> simplices;  // point ids, n per simplex
};

/// Bounded halfspace intersection with full vertex/facet geometry.
/// Immutable after construction; all queries are pure.
class Polytope {
 public:
  Polytope(HalfspaceSpec spec, const Tolerances& tol = {});

  const HalfspaceSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim(); }
  int facet_count() const { return spec_.count(); }
  const std::vector<Vector>& vertices() const { return vertices_; }
  const std::vector<Facet>& facets() const { return facets_; }
  const Facet& facet(int i) const { return facets_[static_cast<std::size_t>(i)]; }
  double volume() const { return volume_; }
  double surface_area() const;
  const Vector& interior_point() const { return interior_point_; }
  double inner_radius() const { return inner_radius_; }
  double outer_radius() const;
  double minkowski_defect() const { return minkowski_defect_; }

  /// Point id resolution: ids < vertices().size() are vertices, the rest are
  /// synthetic triangulation points (facet centroids).
  const Vector& point(int id) const;

  /// h(v) = max over vertices of x.v; v need not be a unit vector.
  double support(const Vector& v) const;

  /// Distance to the boundary from a strictly interior x along unit u.
  double radial(const Vector& x, const Vector& u) const;

  /// Largest t >= 0 with x + t u still inside, for arbitrary interior-free x;
  /// returns 0 when the ray leaves immediately, negative infinity never.
  double ray_exit(const Vector& x, const Vector& u) const;

  bool contains(const Vector& x, double slack = 0.0) const;

  const Tolerances& tolerances() const { return tol_; }

 private:
  HalfspaceSpec spec_;
  Tolerances tol_;
  std::vector<Vector> vertices_;
  std::vector<Vector> extra_points_;
  std::vector<Facet> facets_;
  Vector interior_point_;
  double inner_radius_ = 0.0;
  double volume_ = 0.0;
  double minkowski_defect_ = 0.0;
};

/// Builds the full V-representation of {x : x.v_i <= z_i} by enumerating
/// n-subsets of the bounding hyperplanes. Throws DegenerateShapeError when no
/// interior point has slack above the feasibility tolerance, BudgetError when
/// C(N,n) exceeds the subset budget.
Polytope wulff_shape(const HalfspaceSpec& spec, const Tolerances& tol = {});

double support_function(const Polytope& P, const Vector& v);

/// Replaces each offset by the support value of the shape: z'_i = h(v_i).
/// Componentwise <= z, leaves the shape unchanged, idempotent.
Vector tighten(const HalfspaceSpec& spec, const Tolerances& tol = {});

double radial_function(const Polytope& P, const Vector& x, const Vector& u);

/// Center and radius of a largest inscribed ball, via the linear program
/// max r s.t. x.v_i + r <= z_i.
std::pair<Vector, double> chebyshev_center(const HalfspaceSpec& spec);

/// Uniform samples on facet i: area-weighted simplex selection from the
/// facet triangulation plus symmetric Dirichlet barycentric coordinates.
std::vector<Vector> facet_sample(const Polytope& P, int facet_index, int count,
                                 std::uint64_t seed);

double volume(const Polytope& P);
double surface_area(const Polytope& P);

/// Vertices of a polygon (n = 2) in boundary cycle order.
std::vector<int> boundary_cycle(const Polytope& P);

/// Uniform interior sampler backed by the fan decomposition into n-simplices.
class InteriorSampler {
 public:
  explicit InteriorSampler(const Polytope& P);
  Vector sample(std::mt19937_64& rng) const;

 private:
  const Polytope* poly_;
  std::vector<std::vector<int>> simplices_;  // apex (interior point) implied
  std::vector<double> cumulative_;
};

}  // namespace chordmink
