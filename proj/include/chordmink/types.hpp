#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace chordmink {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A construction or query violated a documented precondition.
struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(what) {}
};

/// A halfspace intersection has no interior point with usable slack.
struct DegenerateShapeError : Error {
  explicit DegenerateShapeError(const std::string& what) : Error(what) {}
};

/// A combinatorial enumeration would exceed its subset budget.
struct BudgetError : Error {
  explicit BudgetError(const std::string& what) : Error(what) {}
};

/// An iterative routine failed to converge within its iteration cap.
struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& what) : Error(what) {}
};

/// Central tolerance record shared by the geometric routines.
struct Tolerances {
  double unit_norm = 1e-12;        // |v|-1 allowed on unit vectors
  double det_threshold = 1e-10;    // n-subset independence cutoff
  double feasibility = 1e-9;       // vertex feasibility / facet incidence
  double vertex_merge = 1e-9;      // coincident-vertex merge radius
  double interior_slack = 1e-12;   // strict-interior slack for radial queries
  double minkowski_defect = 1e-7;  // |sum area_i v_i| allowed on a closed surface
  std::uint64_t subset_budget = 100'000'000;  // C(N,n) cap for vertex enumeration
};

inline std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    if (r > cap) return cap + 1;
    r = r * (n - i) / (i + 1);
  }
  return r > cap ? cap + 1 : r;
}

}  // namespace chordmink
