#pragma once

#include <vector>

#include "chordmink/types.hpp"

namespace chordmink {

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence. Cached per order.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

/// Fixed quadrature grid on S^{n-1}: a directions matrix (G x n) and weights
/// summing to the sphere's surface measure. A half-resolution companion grid
/// backs the reported error estimate.
struct SphereGrid {
  Matrix directions;
  Vector weights;

  /// Full-circle trapezoid rule, exact spacing 2*pi/count.
  static SphereGrid circle(int count);
  /// Product rule on S^2: Gauss-Legendre in the polar cosine, uniform in
  /// azimuth. 54 x 108 matches the accuracy class of the large published
  /// sphere rules at about 5.8k nodes.
  static SphereGrid sphere3(int polar, int azimuth);
  /// Seeded Monte Carlo directions for n >= 4, uniform weights.
  static SphereGrid monte_carlo(int dim, int count, std::uint64_t seed);

  /// Hemisphere {u : u.axis < 0} grids used by the boundary-measure
  /// quadrature; Gauss nodes stay interior, so no direction is tangent.
  static SphereGrid half_circle(const Vector& axis, int order);
  static SphereGrid half_sphere3(const Vector& axis, int polar, int azimuth);
  static SphereGrid half_monte_carlo(const Vector& axis, int count, std::uint64_t seed);
};

}  // namespace chordmink
