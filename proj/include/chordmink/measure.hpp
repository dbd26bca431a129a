#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "chordmink/rng.hpp"
#include "chordmink/types.hpp"

namespace chordmink {

struct Atom {
  Vector direction;  // unit vector
  double weight;     // > 0
};

/// Finite discrete measure on the unit sphere. Immutable after construction;
/// the constructor rejects non-unit directions, nonpositive weights and
/// duplicate directions (closer than 1e-12) instead of merging them, since
/// silent merging would change general-position semantics downstream.
class DiscreteMeasure {
 public:
  DiscreteMeasure(int dim, std::vector<Atom> atoms);

  int dim() const { return dim_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  int count() const { return static_cast<int>(atoms_.size()); }
  /// N x n matrix of atom directions, row per atom.
  Matrix directions() const;
  Vector weights() const;

 private:
  int dim_;
  std::vector<Atom> atoms_;
};

double total_mass(const DiscreteMeasure& mu);

/// True when the measure is NOT concentrated in any closed hemisphere.
/// Decided exactly by linear programming: the maximum of min_i v_i.u over
/// nonzero u is nonnegative iff some closed hemisphere holds every atom.
bool hemisphere_check(const DiscreteMeasure& mu);
bool hemisphere_check(const Matrix& directions);

struct EnumerationOptions {
  std::uint64_t subset_budget = 1'000'000;
  bool random_spot_check = false;  // fallback past the budget, opt-in
  int spot_check_samples = 100'000;
  std::uint64_t seed = kDefaultSeed;
};

/// True iff every n-subset of the directions is linearly independent
/// (|det| > 1e-10). Exhaustive up to the subset budget; beyond it, throws
/// unless the randomized spot-check mode is enabled.
bool general_position_check(const Matrix& directions, int dim,
                            const EnumerationOptions& opts = {});

struct SubspaceMassReport {
  bool passes = false;
  double worst_ratio = 0.0;   // mass fraction of the worst subspace
  int worst_dim = 0;
  Matrix worst_subspace;      // orthonormal basis, n x worst_dim
  Vector bound_lambda;        // lambda_i for i = 1..n-1
};

/// Checks mu(xi_i)/|mu| < (i + min(i, q-1)) / (n + q - 1) over every subspace
/// spanned by an i-subset of atom directions, i = 1..n-1. Spans of atom
/// subsets suffice for discrete measures: a maximizing subspace can be
/// replaced by the span of the atoms it contains without losing mass.
SubspaceMassReport subspace_mass_check(const DiscreteMeasure& mu, double q,
                                       const EnumerationOptions& opts = {});

// ---------------------------------------------------------------------------
// Discretization

/// Partition of S^{n-1} into angle boxes of Euclidean diameter < 1/m.
/// Latitude-longitude construction for n = 2, 3; one polar level is added
/// per extra dimension above that.
class SpherePartition {
 public:
  SpherePartition(int dim, int m);

  int dim() const { return dim_; }
  int cell_count() const { return static_cast<int>(cells_.size()); }

  /// Representative of cell i with continuous jitter, uniform in the cell's
  /// angle box.
  Vector representative(int cell, std::mt19937_64& rng) const;
  Vector cell_center(int cell) const;

  /// Integral of f over cell i with a fixed per-cell Gauss subgrid.
  double integrate_cell(int cell, const std::function<double(const Vector&)>& f) const;

  double cell_measure(int cell) const;

 private:
  struct Cell {
    std::vector<std::pair<double, double>> box;  // angle intervals, size n-1
  };
  Vector embed(const std::vector<double>& angles) const;

  int dim_;
  std::vector<Cell> cells_;
};

using DensityFn = std::function<double(const Vector&)>;

struct DiscretizeOptions {
  std::uint64_t seed = kDefaultSeed;
  int max_retries = 100;
  EnumerationOptions position_check;
};

/// Discretizes a density on S^{n-1} at resolution m: one jittered
/// representative per cell, weight = integral over the cell plus a 1/N^2
/// floor, then rescaled so the total mass matches the density's integral
/// exactly. The output passes the general-position check (re-drawn on
/// failure, up to the retry cap).
DiscreteMeasure discretize(const DensityFn& density, int dim, int m,
                           const DiscretizeOptions& opts = {});

using SamplerFn = std::function<Vector(std::mt19937_64&)>;

/// Same scheme with empirical cell masses from a measure sampler.
DiscreteMeasure discretize(const SamplerFn& sampler, double sampler_total_mass,
                           int sample_count, int dim, int m,
                           const DiscretizeOptions& opts = {});

/// Smallest m in [1, m_max] such that the all-ones Wulff shape over jittered
/// representatives is certified to sit between the unit ball and twice the
/// unit ball; certification is by the 1-Lipschitz covering bound on a dense
/// direction grid.
int sandwich_threshold(int dim, int m_max = 16, std::uint64_t seed = kDefaultSeed);

/// The certification predicate behind sandwich_threshold, usable on any
/// direction set.
bool ball_sandwich_holds(const Matrix& directions, std::uint64_t grid_seed = kDefaultSeed);

}  // namespace chordmink
