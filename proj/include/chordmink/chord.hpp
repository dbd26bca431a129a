#pragma once

#include <cstdint>
#include <vector>

#include "chordmink/polytope.hpp"
#include "chordmink/rng.hpp"
#include "chordmink/types.hpp"

namespace chordmink {

enum class Estimator { volume_form, line_form, quadrature };

/// Numerical value of a chord functional together with its uncertainty.
/// std_error is the standard error of the mean for Monte Carlo estimators
/// and a coarse-versus-fine difference for deterministic quadrature; it is
/// zero only on quadrature paths that resolve the integrand exactly.
struct ChordEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long long samples = 0;
  Estimator estimator = Estimator::quadrature;
};

/// Test-only fault dials. Each multiplies exactly one normalization constant
/// in this module so the verification suite can prove it would catch a
/// miscalibration; they stay at 1.0 outside of fault-injection tests.
namespace fault {
inline double omega_scale = 1.0;            // unit ball volume
inline double chord_measure_scale = 1.0;    // 2q/omega_n facet factor
inline double cone_normalization_scale = 1.0;  // 1/(n+q-1)
inline double line_measure_scale = 1.0;     // line-measure Haar normalization
}  // namespace fault

/// Volume of the unit ball in R^n.
double unit_ball_volume(int dim);

/// (omega_{n-1} / (n omega_n)) S(P): the chord integral at q = 0.
double closed_form_I0(const Polytope& P);

enum class DualVolumeMethod {
  /// Polar decomposition over the boundary triangulation: the sphere
  /// integral becomes a sum of smooth simplex integrals (rho equals the
  /// hit distance patchwise), handled by per-simplex Gauss rules. Exact to
  /// near machine precision away from the boundary; default for n <= 3.
  boundary_patch,
  /// Fixed sphere grids: full-circle trapezoid (n=2), Gauss x uniform
  /// product (n=3), seeded Monte Carlo directions (n=4). Cheap to reuse
  /// across many evaluation points but only second-order accurate across
  /// the kinks of rho.
  fixed_grid,
};

struct DualVolumeOptions {
  DualVolumeMethod method = DualVolumeMethod::boundary_patch;  // n=4 forces fixed_grid
  int circle_points = 4096;   // n = 2 fixed grid: full-circle trapezoid
  int sphere_polar = 54;      // n = 3 fixed grid: 54 x 108 = 5832 nodes
  int sphere_azimuth = 108;
  int patch_points = 16;      // per-axis Gauss order per boundary simplex
  long long mc_directions = 1'000'000;  // n = 4
  std::uint64_t seed = kDefaultSeed;
};

/// Dual quermassintegral (1/n) Int rho_{P,x}^q(u) du over the whole sphere;
/// requires x strictly interior.
ChordEstimate dual_volume(const Polytope& P, const Vector& x, double q,
                          const DualVolumeOptions& opts = {});

struct ChordIntegralOptions {
  DualVolumeOptions inner;  // grid for the dual volumes under the integral
  int shards = 64;
  double boundary_fraction = 0.1;   // stratum nearest the boundary, q < 1
  double boundary_boost = 2.0;      // sample-density multiplier in it
  ChordIntegralOptions() { inner.mc_directions = 20'000; }
};

/// I_q(P) = (q/omega_n) Int_P dual_volume_{q-1}(P, z) dz by Monte Carlo over
/// uniform interior points. For q < 1 the integrand is singular towards the
/// boundary, so sampling is stratified: the slab of P nearest the boundary
/// (boundary_fraction of the volume, split off by an exactly-computed inner
/// parallel body) receives boundary_boost times its proportional share of
/// samples. Throws for q <= 0 and points at closed_form_I0 instead.
ChordEstimate chord_integral(const Polytope& P, double q, long long samples,
                             std::uint64_t seed, const ChordIntegralOptions& opts = {});

/// Independent line-space estimator: direction u uniform on the sphere,
/// offset y uniform on a support-function bounding box of the shadow in
/// u-perp, chord by clipping the line against every halfspace. The Haar
/// normalization is fixed so I_1 = V exactly, under which the sphere-measure
/// factors cancel; lines that miss contribute zero, and at q = 0 a hitting
/// line counts one.
ChordEstimate chord_integral_lines(const Polytope& P, double q, long long samples,
                                   std::uint64_t seed, int shards = 64);

enum class FacetQuadrature { automatic, deterministic, monte_carlo };

struct ChordMeasureOptions {
  long long samples_per_facet = 2000;
  std::uint64_t seed = kDefaultSeed;
  FacetQuadrature mode = FacetQuadrature::automatic;  // deterministic for n=2
  int edge_points = 32;        // n = 2 deterministic path, Gauss points/edge
  int half_circle_points = 512;   // inner hemisphere grids
  int half_polar = 16;
  int half_azimuth = 64;
  long long half_mc_directions = 20'000;
  double pull_in = 1e-7;       // times inner radius
};

/// Chord measure F_q(P, v_i) per facet: (2q/omega_n) times the facet integral
/// of the dual volume of order q-1. The integrand is the boundary limit, an
/// integral of rho^{q-1} over the inward hemisphere {u . v_i < 0} evaluated
/// just inside the facet (rho from the boundary itself is directionally
/// degenerate); restricting to the hemisphere keeps every q > 0 finite and
/// makes q = 1 exact. Facets of lower dimension report zero.
std::vector<ChordEstimate> chord_measure(const Polytope& P, double q,
                                         const ChordMeasureOptions& opts = {});

/// L_p chord measure: h(v_i)^{1-p} F_q(P, v_i). Requires the origin in P
/// (p <= 1 keeps the exponent nonnegative). p = 1 reproduces chord_measure.
std::vector<ChordEstimate> lp_chord_measure(const Polytope& P, double p, double q,
                                            const ChordMeasureOptions& opts = {});

/// Cone chord measure G_q = F_{0,q}/(n+q-1); its total equals I_q.
std::vector<ChordEstimate> cone_chord_measure(const Polytope& P, double q,
                                              const ChordMeasureOptions& opts = {});

/// Cross-check path (n = 2): integrates rho^{q-1} over the positive support
/// hemisphere from points exactly on the facet, with chord lengths from ray
/// clipping instead of interior radial evaluation.
std::vector<double> chord_measure_boundary_2d(const Polytope& P, double q,
                                              int edge_points = 32,
                                              int half_circle_points = 512);

namespace chord_detail {

/// Precomputed per-direction candidate lists for radial evaluation of one
/// polytope over one fixed grid; rho(x, g) = min over candidates of
/// slack_i * recip_{i,g}. Shared read-only across threads.
class RadialTable {
 public:
  RadialTable(const Polytope& P, const Matrix& directions);

  /// Sum of w_g * rho(x, g)^e over the grid.
  double power_sum(const Vector& x, double e, const Vector& weights) const;

 private:
  const Polytope* poly_;
  int grid_size_ = 0;
  std::vector<int> start_;      // per direction, offset into entries
  std::vector<double> recip_;   // 1 / (v_i . u_g), positive entries only
  std::vector<std::int32_t> index_;
};

}  // namespace chord_detail

}  // namespace chordmink
