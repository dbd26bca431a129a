#include "chordmink/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "chordmink/linprog.hpp"
#include "chordmink/sphere_grid.hpp"

namespace chordmink {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool next_subset(std::vector<int>& idx, int n) {
  int k = static_cast<int>(idx.size());
  for (int i = k - 1; i >= 0; --i) {
    if (idx[static_cast<std::size_t>(i)] < n - (k - i)) {
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j)
        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

// Best small-denominator rational approximation of q, if q is (numerically)
// rational; lets the subspace bounds be formed without rounding.
std::optional<std::pair<long long, long long>> rational_of(double q, long long max_den = 1'000'000) {
  double x = q;
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int it = 0; it < 64; ++it) {
    double fl = std::floor(x);
    long long a = static_cast<long long>(fl);
    long long p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > max_den || q2 <= 0) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    double num = static_cast<double>(p1), den = static_cast<double>(q1);
    if (std::abs(q - num / den) < 1e-12) return std::make_pair(p1, q1);
    double frac = x - fl;
    if (frac < 1e-15) break;
    x = 1.0 / frac;
  }
  return std::nullopt;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(int dim, std::vector<Atom> atoms)
    : dim_(dim), atoms_(std::move(atoms)) {
  if (dim_ < 2) throw DomainError("measure: dimension must be >= 2");
  if (atoms_.empty()) throw DomainError("measure: atom list is empty");
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const Atom& a = atoms_[i];
    if (a.direction.size() != dim_)
      throw DomainError("measure: atom " + std::to_string(i) + " has wrong dimension");
    if (std::abs(a.direction.norm() - 1.0) > 1e-12)
      throw DomainError("measure: atom " + std::to_string(i) + " direction is not a unit vector");
    if (!(a.weight > 0.0))
      throw DomainError("measure: atom " + std::to_string(i) + " weight must be positive");
    for (std::size_t j = 0; j < i; ++j) {
      if ((atoms_[j].direction - a.direction).norm() < 1e-12)
        throw DomainError("measure: duplicate atom directions " + std::to_string(j) + " and " +
                          std::to_string(i));
    }
  }
}

Matrix DiscreteMeasure::directions() const {
  Matrix M(count(), dim_);
  for (int i = 0; i < count(); ++i) M.row(i) = atoms_[static_cast<std::size_t>(i)].direction.transpose();
  return M;
}

Vector DiscreteMeasure::weights() const {
  Vector w(count());
  for (int i = 0; i < count(); ++i) w[i] = atoms_[static_cast<std::size_t>(i)].weight;
  return w;
}

double total_mass(const DiscreteMeasure& mu) { return mu.weights().sum(); }

bool hemisphere_check(const Matrix& directions) {
  const int N = static_cast<int>(directions.rows());
  const int n = static_cast<int>(directions.cols());
  // Maximize min_i v_i.u over the boundary of the sup-norm box, one linear
  // program per box face so u = 0 cannot win. A hemisphere pole exists iff
  // the overall optimum is nonnegative.
  double best = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n && best < -1e-9; ++j) {
    for (int sgn = -1; sgn <= 1 && best < -1e-9; sgn += 2) {
      const int d = n;  // free coords + t
      Matrix A(N + 2 * (n - 1), d);
      Vector b(N + 2 * (n - 1));
      A.setZero();
      for (int i = 0; i < N; ++i) {
        int col = 0;
        for (int k = 0; k < n; ++k) {
          if (k == j) continue;
          A(i, col++) = -directions(i, k);
        }
        A(i, d - 1) = 1.0;  // t
        b[i] = sgn * directions(i, j);
      }
      int row = N;
      for (int k = 0; k < n - 1; ++k) {
        A(row, k) = 1.0;
        b[row++] = 1.0;
        A(row, k) = -1.0;
        b[row++] = 1.0;
      }
      Vector c = Vector::Zero(d);
      c[d - 1] = 1.0;
      lp::Result res = lp::maximize(A, b, c);
      if (res.status == lp::Status::optimal) best = std::max(best, res.objective);
    }
  }
  return best < -1e-9;
}

bool hemisphere_check(const DiscreteMeasure& mu) { return hemisphere_check(mu.directions()); }

bool general_position_check(const Matrix& directions, int dim, const EnumerationOptions& opts) {
  const int N = static_cast<int>(directions.rows());
  if (N == 0) throw DomainError("general position: empty direction list");
  if (N < dim) return true;  // no n-subset exists

  auto subset_independent = [&](const std::vector<int>& idx) {
    Matrix A(dim, dim);
    for (int r = 0; r < dim; ++r) A.row(r) = directions.row(idx[static_cast<std::size_t>(r)]);
    return std::abs(A.determinant()) > 1e-10;
  };

  std::uint64_t total =
      binomial_capped(static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(dim), opts.subset_budget);
  if (total > opts.subset_budget) {
    if (!opts.random_spot_check) {
      std::ostringstream msg;
      msg << "general position: C(" << N << "," << dim << ") exceeds the budget of "
          << opts.subset_budget << " subsets; enable the random spot-check mode to sample "
          << opts.spot_check_samples << " subsets instead";
      throw BudgetError(msg.str());
    }
    auto rng = make_rng(opts.seed, 0x6e);
    std::uniform_int_distribution<int> pick(0, N - 1);
    std::vector<int> idx(static_cast<std::size_t>(dim));
    for (int s = 0; s < opts.spot_check_samples; ++s) {
      for (int r = 0; r < dim;) {
        int cand = pick(rng);
        bool seen = false;
        for (int j = 0; j < r; ++j) seen = seen || idx[static_cast<std::size_t>(j)] == cand;
        if (!seen) idx[static_cast<std::size_t>(r++)] = cand;
      }
      if (!subset_independent(idx)) return false;
    }
    return true;
  }

  std::vector<int> idx(static_cast<std::size_t>(dim));
  std::iota(idx.begin(), idx.end(), 0);
  do {
    if (!subset_independent(idx)) return false;
  } while (next_subset(idx, N));
  return true;
}

SubspaceMassReport subspace_mass_check(const DiscreteMeasure& mu, double q,
                                       const EnumerationOptions& opts) {
  const int n = mu.dim();
  const int N = mu.count();
  if (!(q > 1.0 && q < n + 1.0))
    throw DomainError("subspace mass check: q must lie in (1, n+1)");
  if (!hemisphere_check(mu))
    throw DomainError("subspace mass check: measure is concentrated in a closed hemisphere");

  const Matrix dirs = mu.directions();
  const Vector w = mu.weights();
  const double mass = w.sum();

  auto rational = rational_of(q);
  SubspaceMassReport report;
  report.bound_lambda.resize(n - 1);
  std::vector<long double> lambda_exact(static_cast<std::size_t>(n - 1));
  for (int i = 1; i <= n - 1; ++i) {
    if (rational) {
      auto [num, den] = *rational;  // q = num/den
      long long li_num = static_cast<long long>(i) * den + std::min<long long>(static_cast<long long>(i) * den, num - den);
      long long li_den = static_cast<long long>(n) * den + num - den;
      lambda_exact[static_cast<std::size_t>(i - 1)] =
          static_cast<long double>(li_num) / static_cast<long double>(li_den);
    } else {
      lambda_exact[static_cast<std::size_t>(i - 1)] =
          (i + std::min<long double>(i, q - 1.0)) / (n + q - 1.0);
    }
    report.bound_lambda[i - 1] = static_cast<double>(lambda_exact[static_cast<std::size_t>(i - 1)]);
  }

  report.passes = true;
  double worst_margin = -std::numeric_limits<double>::infinity();

  auto inspect = [&](const std::vector<int>& idx, int i) {
    Matrix S(n, i);
    for (int c = 0; c < i; ++c) S.col(c) = dirs.row(idx[static_cast<std::size_t>(c)]).transpose();
    Eigen::ColPivHouseholderQR<Matrix> qr(S);
    qr.setThreshold(1e-10);
    if (qr.rank() < i) return;  // dependent subset; its span is covered at lower i
    Matrix Q = qr.householderQ() * Matrix::Identity(n, i);
    double m = 0.0;
    for (int a = 0; a < N; ++a) {
      Vector v = dirs.row(a).transpose();
      if ((v - Q * (Q.transpose() * v)).norm() <= 1e-9) m += w[a];
    }
    double ratio = m / mass;
    long double lam = lambda_exact[static_cast<std::size_t>(i - 1)];
    bool ok = rational ? (static_cast<long double>(ratio) < lam)
                       : (ratio < static_cast<double>(lam) - 1e-12);
    double margin = ratio - static_cast<double>(lam);
    if (margin > worst_margin) {
      worst_margin = margin;
      report.worst_ratio = ratio;
      report.worst_dim = i;
      report.worst_subspace = Q;
    }
    if (!ok) report.passes = false;
  };

  std::uint64_t total = 0;
  for (int i = 1; i <= n - 1; ++i)
    total += binomial_capped(static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(i),
                             opts.subset_budget);
  if (total > opts.subset_budget) {
    if (!opts.random_spot_check) {
      std::ostringstream msg;
      msg << "subspace mass check: subset count exceeds the budget of " << opts.subset_budget
          << "; enable the random spot-check mode";
      throw BudgetError(msg.str());
    }
    auto rng = make_rng(opts.seed, 0x5b);
    std::uniform_int_distribution<int> pick(0, N - 1);
    for (int i = 1; i <= n - 1; ++i) {
      std::vector<int> idx(static_cast<std::size_t>(i));
      for (int s = 0; s < opts.spot_check_samples / (n - 1); ++s) {
        for (int r = 0; r < i;) {
          int cand = pick(rng);
          bool seen = false;
          for (int j = 0; j < r; ++j) seen = seen || idx[static_cast<std::size_t>(j)] == cand;
          if (!seen) idx[static_cast<std::size_t>(r++)] = cand;
        }
        inspect(idx, i);
      }
    }
    return report;
  }

  for (int i = 1; i <= n - 1; ++i) {
    std::vector<int> idx(static_cast<std::size_t>(i));
    std::iota(idx.begin(), idx.end(), 0);
    if (N < i) continue;
    do {
      inspect(idx, i);
    } while (next_subset(idx, N));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Sphere partition

SpherePartition::SpherePartition(int dim, int m) : dim_(dim) {
  if (dim < 2 || dim > 4) throw DomainError("sphere partition: dimension must be in [2,4]");
  if (m < 1) throw DomainError("sphere partition: resolution must be >= 1");
  const int axes = dim - 1;
  const double w = 1.0 / (static_cast<double>(axes) * m);
  std::vector<int> counts(static_cast<std::size_t>(axes));
  std::vector<double> widths(static_cast<std::size_t>(axes));
  for (int j = 0; j < axes; ++j) {
    double range = (j == axes - 1) ? 2.0 * kPi : kPi;
    int K = static_cast<int>(std::floor(range / w)) + 1;
    counts[static_cast<std::size_t>(j)] = K;
    widths[static_cast<std::size_t>(j)] = range / K;
  }
  std::vector<int> idx(static_cast<std::size_t>(axes), 0);
  for (;;) {
    Cell cell;
    cell.box.resize(static_cast<std::size_t>(axes));
    for (int j = 0; j < axes; ++j) {
      double lo = idx[static_cast<std::size_t>(j)] * widths[static_cast<std::size_t>(j)];
      cell.box[static_cast<std::size_t>(j)] = {lo, lo + widths[static_cast<std::size_t>(j)]};
    }
    cells_.push_back(std::move(cell));
    int j = axes - 1;
    while (j >= 0 && ++idx[static_cast<std::size_t>(j)] == counts[static_cast<std::size_t>(j)]) {
      idx[static_cast<std::size_t>(j)] = 0;
      --j;
    }
    if (j < 0) break;
  }
}

Vector SpherePartition::embed(const std::vector<double>& angles) const {
  Vector x(dim_);
  double s = 1.0;
  for (int j = 0; j < dim_ - 2; ++j) {
    x[j] = s * std::cos(angles[static_cast<std::size_t>(j)]);
    s *= std::sin(angles[static_cast<std::size_t>(j)]);
  }
  x[dim_ - 2] = s * std::cos(angles[static_cast<std::size_t>(dim_ - 2)]);
  x[dim_ - 1] = s * std::sin(angles[static_cast<std::size_t>(dim_ - 2)]);
  return x;
}

Vector SpherePartition::representative(int cell, std::mt19937_64& rng) const {
  const Cell& c = cells_[static_cast<std::size_t>(cell)];
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  std::vector<double> angles(c.box.size());
  for (std::size_t j = 0; j < c.box.size(); ++j)
    angles[j] = c.box[j].first + unif(rng) * (c.box[j].second - c.box[j].first);
  return embed(angles);
}

Vector SpherePartition::cell_center(int cell) const {
  const Cell& c = cells_[static_cast<std::size_t>(cell)];
  std::vector<double> angles(c.box.size());
  for (std::size_t j = 0; j < c.box.size(); ++j) angles[j] = 0.5 * (c.box[j].first + c.box[j].second);
  return embed(angles);
}

double SpherePartition::integrate_cell(int cell, const DensityFn& f) const {
  const Cell& c = cells_[static_cast<std::size_t>(cell)];
  const int axes = dim_ - 1;
  const int order = dim_ == 2 ? 8 : (dim_ == 3 ? 6 : 5);
  const GaussRule& rule = gauss_legendre(order);
  std::vector<int> idx(static_cast<std::size_t>(axes), 0);
  std::vector<double> angles(static_cast<std::size_t>(axes));
  double sum = 0.0;
  for (;;) {
    double wt = 1.0;
    for (int j = 0; j < axes; ++j) {
      auto [lo, hi] = c.box[static_cast<std::size_t>(j)];
      double half = 0.5 * (hi - lo);
      double a = lo + half * (rule.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])] + 1.0);
      angles[static_cast<std::size_t>(j)] = a;
      wt *= rule.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])] * half;
      int sin_pow = dim_ - 2 - j;
      for (int e = 0; e < sin_pow; ++e) wt *= std::sin(a);
    }
    sum += wt * f(embed(angles));
    int j = axes - 1;
    while (j >= 0 && ++idx[static_cast<std::size_t>(j)] == order) {
      idx[static_cast<std::size_t>(j)] = 0;
      --j;
    }
    if (j < 0) break;
  }
  return sum;
}

double SpherePartition::cell_measure(int cell) const {
  return integrate_cell(cell, [](const Vector&) { return 1.0; });
}

// ---------------------------------------------------------------------------
// Discretization

namespace {

DiscreteMeasure assemble(const SpherePartition& part, const std::vector<double>& raw_masses,
                         double target_mass, int dim, const DiscretizeOptions& opts) {
  const int N = part.cell_count();
  if (!(target_mass > 0.0)) throw DomainError("discretize: input measure has no mass");
  const double floor_weight = 1.0 / (static_cast<double>(N) * static_cast<double>(N));
  auto rng = make_rng(opts.seed, 0xD15C);

  EnumerationOptions pos = opts.position_check;
  std::uint64_t subsets =
      binomial_capped(static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(dim), pos.subset_budget);
  if (subsets > pos.subset_budget) pos.random_spot_check = true;

  for (int attempt = 0; attempt < opts.max_retries; ++attempt) {
    std::vector<Atom> atoms;
    atoms.reserve(static_cast<std::size_t>(N));
    double provisional = 0.0;
    for (int i = 0; i < N; ++i) provisional += raw_masses[static_cast<std::size_t>(i)] + floor_weight;
    const double scale = target_mass / provisional;
    for (int i = 0; i < N; ++i) {
      atoms.push_back({part.representative(i, rng),
                       (raw_masses[static_cast<std::size_t>(i)] + floor_weight) * scale});
    }
    try {
      DiscreteMeasure mu(dim, std::move(atoms));
      pos.seed = substream(opts.seed, static_cast<std::uint64_t>(attempt) + 17);
      if (general_position_check(mu.directions(), dim, pos)) return mu;
    } catch (const DomainError&) {
      // duplicate jitter draw; redraw
    }
  }
  throw ConvergenceError("discretize: failed to reach general position within " +
                         std::to_string(opts.max_retries) + " retries");
}

}  // namespace

DiscreteMeasure discretize(const DensityFn& density, int dim, int m, const DiscretizeOptions& opts) {
  SpherePartition part(dim, m);
  const int N = part.cell_count();
  std::vector<double> raw(static_cast<std::size_t>(N));
  double total = 0.0;
  for (int i = 0; i < N; ++i) {
    double v = part.integrate_cell(i, density);
    if (v < 0.0) throw DomainError("discretize: density integrates negative over a cell");
    raw[static_cast<std::size_t>(i)] = v;
    total += v;
  }
  return assemble(part, raw, total, dim, opts);
}

DiscreteMeasure discretize(const SamplerFn& sampler, double sampler_total_mass, int sample_count,
                           int dim, int m, const DiscretizeOptions& opts) {
  SpherePartition part(dim, m);
  const int N = part.cell_count();
  std::vector<double> raw(static_cast<std::size_t>(N), 0.0);
  auto rng = make_rng(opts.seed, 0x5A17);

  // cell lookup by uniform angle grids
  const int axes = dim - 1;
  std::vector<int> counts(static_cast<std::size_t>(axes));
  std::vector<double> widths(static_cast<std::size_t>(axes));
  {
    const double w = 1.0 / (static_cast<double>(axes) * m);
    for (int j = 0; j < axes; ++j) {
      double range = (j == axes - 1) ? 2.0 * kPi : kPi;
      int K = static_cast<int>(std::floor(range / w)) + 1;
      counts[static_cast<std::size_t>(j)] = K;
      widths[static_cast<std::size_t>(j)] = range / K;
    }
  }
  const double per_sample = sampler_total_mass / sample_count;
  for (int s = 0; s < sample_count; ++s) {
    Vector x = sampler(rng);
    x /= x.norm();
    std::vector<double> angles(static_cast<std::size_t>(axes));
    double tail = 1.0;
    for (int j = 0; j < dim - 2; ++j) {
      double c = std::clamp(x[j] / std::max(tail, 1e-300), -1.0, 1.0);
      angles[static_cast<std::size_t>(j)] = std::acos(c);
      tail *= std::sin(angles[static_cast<std::size_t>(j)]);
    }
    double phi = std::atan2(x[dim - 1], x[dim - 2]);
    if (phi < 0.0) phi += 2.0 * kPi;
    angles[static_cast<std::size_t>(axes - 1)] = phi;
    int cell = 0;
    for (int j = 0; j < axes; ++j) {
      int k = std::min(counts[static_cast<std::size_t>(j)] - 1,
                       static_cast<int>(angles[static_cast<std::size_t>(j)] / widths[static_cast<std::size_t>(j)]));
      cell = cell * counts[static_cast<std::size_t>(j)] + k;
    }
    raw[static_cast<std::size_t>(cell)] += per_sample;
  }
  return assemble(part, raw, sampler_total_mass, dim, opts);
}

// ---------------------------------------------------------------------------
// Ball sandwich certification

bool ball_sandwich_holds(const Matrix& directions, std::uint64_t grid_seed) {
  const int n = static_cast<int>(directions.cols());
  // Inner inclusion is automatic for unit normals at offset one. The outer
  // inclusion rho <= 2 is equivalent to max_i u.v_i >= 1/2 for every u; the
  // left side is 1-Lipschitz in u, so a covering grid with margin certifies.
  Matrix grid;
  double margin = 0.0;
  if (n == 2) {
    const int G = 8192;
    grid.resize(G, 2);
    for (int i = 0; i < G; ++i) {
      double a = 2.0 * kPi * i / G;
      grid(i, 0) = std::cos(a);
      grid(i, 1) = std::sin(a);
    }
    margin = kPi / G;
  } else {
    const int G = n == 3 ? 40000 : 200000;
    auto rng = make_rng(grid_seed, 0xBA11);
    grid.resize(G, n);
    for (int i = 0; i < G; ++i) grid.row(i) = random_unit_vector(rng, n).transpose();
    margin = n == 3 ? 4.0 / std::sqrt(static_cast<double>(G)) : 0.05;
  }
  for (int g = 0; g < grid.rows(); ++g) {
    double best = (directions * grid.row(g).transpose()).maxCoeff();
    if (best < 0.5 + margin) return false;
  }
  return true;
}

int sandwich_threshold(int dim, int m_max, std::uint64_t seed) {
  int threshold = -1;
  for (int m = m_max; m >= 1; --m) {
    SpherePartition part(dim, m);
    auto rng = make_rng(seed, static_cast<std::uint64_t>(m));
    Matrix dirs(part.cell_count(), dim);
    for (int i = 0; i < part.cell_count(); ++i) dirs.row(i) = part.representative(i, rng).transpose();
    if (ball_sandwich_holds(dirs, seed)) {
      threshold = m;
    } else {
      break;  // keep only the suffix of passing resolutions
    }
  }
  if (threshold < 0)
    throw ConvergenceError("sandwich threshold: no resolution up to " + std::to_string(m_max) +
                           " certifies the ball sandwich");
  return threshold;
}

}  // namespace chordmink
