#include "chordmink/sphere_grid.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "chordmink/rng.hpp"

namespace chordmink {

namespace {

constexpr double kPi = 3.14159265358979323846;

GaussRule compute_gauss(int order) {
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  for (int i = 0; i < order; ++i) {
    // Chebyshev initial guess, then Newton on P_order.
    double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = order * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[static_cast<std::size_t>(order - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(order - 1 - i)] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return rule;
}

// Orthonormal completion of a unit axis; first column is the axis.
Matrix frame_of(const Vector& axis) {
  const int n = static_cast<int>(axis.size());
  Matrix M = Matrix::Identity(n, n);
  M.col(0) = axis;
  Eigen::HouseholderQR<Matrix> qr(M);
  Matrix Q = qr.householderQ();
  if (Q.col(0).dot(axis) < 0.0) Q = -Q;
  return Q;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gauss(order)).first;
  return it->second;
}

SphereGrid SphereGrid::circle(int count) {
  SphereGrid g;
  g.directions.resize(count, 2);
  g.weights = Vector::Constant(count, 2.0 * kPi / count);
  for (int i = 0; i < count; ++i) {
    double a = 2.0 * kPi * (i + 0.5) / count;
    g.directions(i, 0) = std::cos(a);
    g.directions(i, 1) = std::sin(a);
  }
  return g;
}

SphereGrid SphereGrid::sphere3(int polar, int azimuth) {
  const GaussRule& rule = gauss_legendre(polar);
  SphereGrid g;
  g.directions.resize(polar * azimuth, 3);
  g.weights.resize(polar * azimuth);
  int row = 0;
  for (int i = 0; i < polar; ++i) {
    double t = rule.nodes[static_cast<std::size_t>(i)];  // cos(theta)
    double s = std::sqrt(std::max(0.0, 1.0 - t * t));
    double wt = rule.weights[static_cast<std::size_t>(i)] * (2.0 * kPi / azimuth);
    for (int j = 0; j < azimuth; ++j) {
      double a = 2.0 * kPi * (j + 0.5) / azimuth;
      g.directions(row, 0) = s * std::cos(a);
      g.directions(row, 1) = s * std::sin(a);
      g.directions(row, 2) = t;
      g.weights[row] = wt;
      ++row;
    }
  }
  return g;
}

SphereGrid SphereGrid::monte_carlo(int dim, int count, std::uint64_t seed) {
  auto rng = make_rng(seed, 0xD17);
  SphereGrid g;
  g.directions.resize(count, dim);
  double area = 2.0 * std::pow(kPi, dim / 2.0) / std::tgamma(dim / 2.0);
  g.weights = Vector::Constant(count, area / count);
  for (int i = 0; i < count; ++i) g.directions.row(i) = random_unit_vector(rng, dim).transpose();
  return g;
}

SphereGrid SphereGrid::half_circle(const Vector& axis, int order) {
  const GaussRule& rule = gauss_legendre(order);
  Matrix F = frame_of(axis);
  SphereGrid g;
  g.directions.resize(order, 2);
  g.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    // angle from the inward axis, in (-pi/2, pi/2)
    double psi = rule.nodes[static_cast<std::size_t>(i)] * kPi / 2.0;
    Vector u = -std::cos(psi) * F.col(0) + std::sin(psi) * F.col(1);
    g.directions.row(i) = u.transpose();
    g.weights[i] = rule.weights[static_cast<std::size_t>(i)] * kPi / 2.0;
  }
  return g;
}

SphereGrid SphereGrid::half_sphere3(const Vector& axis, int polar, int azimuth) {
  const GaussRule& rule = gauss_legendre(polar);
  Matrix F = frame_of(axis);
  SphereGrid g;
  g.directions.resize(polar * azimuth, 3);
  g.weights.resize(polar * azimuth);
  int row = 0;
  for (int i = 0; i < polar; ++i) {
    double t = 0.5 * (rule.nodes[static_cast<std::size_t>(i)] + 1.0);  // -u.axis in (0,1)
    double s = std::sqrt(std::max(0.0, 1.0 - t * t));
    double wt = 0.5 * rule.weights[static_cast<std::size_t>(i)] * (2.0 * kPi / azimuth);
    for (int j = 0; j < azimuth; ++j) {
      double a = 2.0 * kPi * (j + 0.5) / azimuth;
      Vector u = -t * F.col(0) + s * (std::cos(a) * F.col(1) + std::sin(a) * F.col(2));
      g.directions.row(row) = u.transpose();
      g.weights[row] = wt;
      ++row;
    }
  }
  return g;
}

SphereGrid SphereGrid::half_monte_carlo(const Vector& axis, int count, std::uint64_t seed) {
  auto rng = make_rng(seed, 0xD18);
  const int dim = static_cast<int>(axis.size());
  SphereGrid g;
  g.directions.resize(count, dim);
  double area = std::pow(kPi, dim / 2.0) / std::tgamma(dim / 2.0);  // half sphere
  g.weights = Vector::Constant(count, area / count);
  for (int i = 0; i < count; ++i) {
    Vector u = random_unit_vector(rng, dim);
    double d = u.dot(axis);
    if (d > 0.0) u -= 2.0 * d * axis;  // reflect to the inward side
    g.directions.row(i) = u.transpose();
  }
  return g;
}

}  // namespace chordmink
