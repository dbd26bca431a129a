#include "chordmink/chord.hpp"

#include <algorithm>
#include <cmath>

#include "chordmink/parallel.hpp"
#include "chordmink/sphere_grid.hpp"

namespace chordmink {

namespace {

constexpr double kPi = 3.14159265358979323846;

enum class PowKind { zero, half, one, two, minus_half, general };

PowKind classify(double e) {
  auto near = [&](double v) { return std::abs(e - v) < 1e-14; };
  if (near(0.0)) return PowKind::zero;
  if (near(0.5)) return PowKind::half;
  if (near(1.0)) return PowKind::one;
  if (near(2.0)) return PowKind::two;
  if (near(-0.5)) return PowKind::minus_half;
  return PowKind::general;
}

inline double apply_pow(double x, double e, PowKind kind) {
  switch (kind) {
    case PowKind::zero: return 1.0;
    case PowKind::half: return std::sqrt(x);
    case PowKind::one: return x;
    case PowKind::two: return x * x;
    case PowKind::minus_half: return 1.0 / std::sqrt(x);
    case PowKind::general: return std::pow(x, e);
  }
  return 0.0;
}

struct MeanAccumulator {
  double sum = 0.0, sumsq = 0.0;
  long long count = 0;
  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++count;
  }
  void merge(const MeanAccumulator& o) {
    sum += o.sum;
    sumsq += o.sumsq;
    count += o.count;
  }
  double mean() const { return count > 0 ? sum / static_cast<double>(count) : 0.0; }
  double variance_of_mean() const {
    if (count < 2) return 0.0;
    double m = mean();
    double var = std::max(0.0, sumsq / static_cast<double>(count) - m * m);
    return var / static_cast<double>(count - 1);
  }
};

SphereGrid full_grid(const Polytope& P, const DualVolumeOptions& opts, int scale_down = 1) {
  switch (P.dim()) {
    case 2:
      return SphereGrid::circle(std::max(8, opts.circle_points / scale_down));
    case 3:
      return SphereGrid::sphere3(std::max(4, opts.sphere_polar / scale_down),
                                 std::max(8, opts.sphere_azimuth / scale_down));
    default:
      return SphereGrid::monte_carlo(P.dim(),
                                     static_cast<int>(std::max<long long>(1000, opts.mc_directions / scale_down)),
                                     opts.seed);
  }
}

SphereGrid half_grid(const Polytope& P, const Vector& axis, const ChordMeasureOptions& opts,
                     int scale_down = 1) {
  switch (P.dim()) {
    case 2:
      return SphereGrid::half_circle(axis, std::max(8, opts.half_circle_points / scale_down));
    case 3:
      return SphereGrid::half_sphere3(axis, std::max(4, opts.half_polar / scale_down),
                                      std::max(8, opts.half_azimuth / scale_down));
    default:
      return SphereGrid::half_monte_carlo(
          axis, static_cast<int>(std::max<long long>(1000, opts.half_mc_directions / scale_down)),
          opts.seed);
  }
}

}  // namespace

namespace chord_detail {

RadialTable::RadialTable(const Polytope& P, const Matrix& directions) : poly_(&P) {
  const int G = static_cast<int>(directions.rows());
  const int N = P.facet_count();
  grid_size_ = G;
  Matrix dots = P.spec().normals * directions.transpose();  // N x G
  start_.resize(static_cast<std::size_t>(G) + 1, 0);
  for (int g = 0; g < G; ++g) {
    int cnt = 0;
    for (int i = 0; i < N; ++i)
      if (dots(i, g) > 1e-14) ++cnt;
    start_[static_cast<std::size_t>(g) + 1] = start_[static_cast<std::size_t>(g)] + cnt;
  }
  recip_.resize(static_cast<std::size_t>(start_.back()));
  index_.resize(static_cast<std::size_t>(start_.back()));
  for (int g = 0; g < G; ++g) {
    int at = start_[static_cast<std::size_t>(g)];
    for (int i = 0; i < N; ++i) {
      if (dots(i, g) > 1e-14) {
        recip_[static_cast<std::size_t>(at)] = 1.0 / dots(i, g);
        index_[static_cast<std::size_t>(at)] = i;
        ++at;
      }
    }
  }
}

double RadialTable::power_sum(const Vector& x, double e, const Vector& weights) const {
  const Vector slack = poly_->spec().offsets - poly_->spec().normals * x;
  const double* s = slack.data();
  const double* w = weights.data();
  const PowKind kind = classify(e);
  double total = 0.0;
  for (int g = 0; g < grid_size_; ++g) {
    double rho = std::numeric_limits<double>::infinity();
    const int lo = start_[static_cast<std::size_t>(g)];
    const int hi = start_[static_cast<std::size_t>(g) + 1];
    for (int k = lo; k < hi; ++k) {
      double cand = s[index_[static_cast<std::size_t>(k)]] * recip_[static_cast<std::size_t>(k)];
      if (cand < rho) rho = cand;
    }
    total += w[g] * apply_pow(rho, e, kind);
  }
  return total;
}

}  // namespace chord_detail

double unit_ball_volume(int dim) {
  return fault::omega_scale * std::pow(kPi, dim / 2.0) / std::tgamma(dim / 2.0 + 1.0);
}

double closed_form_I0(const Polytope& P) {
  const int n = P.dim();
  return unit_ball_volume(n - 1) / (n * unit_ball_volume(n)) * P.surface_area();
}

namespace {

// Sum of w * rho^q over the sphere written as boundary simplex integrals:
// with y on the boundary seen from interior x at distance r along u(y),
// du = (v . (y-x)) r^{-n} dH^{n-1}(y) and rho(u(y)) = r, so each
// triangulation simplex contributes Int_S (v . (y-x)) r^{q-n} dy, a smooth
// integrand handled by a per-simplex Gauss rule.
double patch_power_integral(const Polytope& P, const Vector& x, double q, int order,
                            long long* evals) {
  const int n = P.dim();
  const GaussRule& rule = gauss_legendre(order);
  double total = 0.0;
  for (const Facet& f : P.facets()) {
    const Vector vn = P.spec().normals.row(f.normal_index).transpose();
    for (const auto& s : f.simplices) {
      if (n == 2) {
        const Vector a = P.point(s[0]), b = P.point(s[1]);
        for (int k = 0; k < order; ++k) {
          double t = 0.5 * (rule.nodes[static_cast<std::size_t>(k)] + 1.0);
          Vector y = a + t * (b - a);
          double r = (y - x).norm();
          total += 0.5 * rule.weights[static_cast<std::size_t>(k)] * (b - a).norm() *
                   vn.dot(y - x) * std::pow(r, q - n);
          ++*evals;
        }
      } else if (n == 3) {
        // Duffy map of the unit square onto the triangle
        const Vector p1 = P.point(s[0]), p2 = P.point(s[1]), p3 = P.point(s[2]);
        const Eigen::Vector3d e1 = p2 - p1, e2 = p3 - p1;
        double area2 = e1.cross(e2).norm();
        if (area2 <= 0.0) continue;
        for (int ks = 0; ks < order; ++ks) {
          double sx = 0.5 * (rule.nodes[static_cast<std::size_t>(ks)] + 1.0);
          double ws = 0.5 * rule.weights[static_cast<std::size_t>(ks)];
          for (int kt = 0; kt < order; ++kt) {
            double tx = 0.5 * (rule.nodes[static_cast<std::size_t>(kt)] + 1.0);
            double wt = 0.5 * rule.weights[static_cast<std::size_t>(kt)];
            Vector y = p1 + sx * (p2 - p1) + sx * tx * (p3 - p2);
            double r = (y - x).norm();
            total += ws * wt * area2 * sx * vn.dot(y - x) * std::pow(r, q - n);
            ++*evals;
          }
        }
      } else {
        throw DomainError("dual volume: boundary-patch quadrature supports n <= 3");
      }
    }
  }
  return total;
}

}  // namespace

ChordEstimate dual_volume(const Polytope& P, const Vector& x, double q,
                          const DualVolumeOptions& opts) {
  const int n = P.dim();
  Vector slack = P.spec().offsets - P.spec().normals * x;
  if (slack.minCoeff() < P.tolerances().interior_slack)
    throw DomainError("dual volume: evaluation point is not strictly interior");

  ChordEstimate est;
  if (n <= 3 && opts.method == DualVolumeMethod::boundary_patch) {
    long long evals = 0;
    double vf = patch_power_integral(P, x, q, opts.patch_points, &evals) / n;
    long long evals_c = 0;
    double vc = patch_power_integral(P, x, q, std::max(4, opts.patch_points / 2), &evals_c) / n;
    est.value = vf;
    est.std_error = std::abs(vf - vc);
    est.samples = evals;
    est.estimator = Estimator::quadrature;
  } else if (n <= 3) {
    SphereGrid fine = full_grid(P, opts);
    SphereGrid coarse = full_grid(P, opts, 2);
    chord_detail::RadialTable tf(P, fine.directions);
    chord_detail::RadialTable tc(P, coarse.directions);
    double vf = tf.power_sum(x, q, fine.weights) / n;
    double vc = tc.power_sum(x, q, coarse.weights) / n;
    est.value = vf;
    est.std_error = std::abs(vf - vc);
    est.samples = fine.directions.rows();
    est.estimator = Estimator::quadrature;
  } else {
    SphereGrid grid = full_grid(P, opts);
    MeanAccumulator acc;
    const PowKind kind = classify(q);
    for (int g = 0; g < grid.directions.rows(); ++g) {
      Vector u = grid.directions.row(g).transpose();
      acc.add(apply_pow(P.radial(x, u), q, kind));
    }
    double area = grid.weights.sum();
    est.value = area * acc.mean() / n;
    est.std_error = area * std::sqrt(acc.variance_of_mean()) / n;
    est.samples = acc.count;
    est.estimator = Estimator::volume_form;
  }
  return est;
}

// ---------------------------------------------------------------------------
// Chord integral, volume form

namespace {

struct StratumResult {
  MeanAccumulator acc;
};

// Mean of dual_volume_{q-1} over uniform samples of one stratum.
// keep_below: accept samples with min slack < threshold (or >= when false).
MeanAccumulator stratum_mean(const Polytope& P, const InteriorSampler& sampler,
                             const chord_detail::RadialTable& table, const Vector& weights,
                             double e, long long samples, std::uint64_t seed, int shards,
                             double threshold, int keep_mode /*0 all, 1 below, 2 at-or-above*/) {
  const int n = P.dim();
  std::vector<long long> quota(static_cast<std::size_t>(shards), samples / shards);
  for (long long r = 0; r < samples % shards; ++r) ++quota[static_cast<std::size_t>(r)];
  auto results = run_sharded<MeanAccumulator>(shards, [&](int s) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(s) + 1000);
    MeanAccumulator acc;
    long long want = quota[static_cast<std::size_t>(s)];
    long long guard = want * 1000 + 1000;
    while (acc.count < want && guard-- > 0) {
      Vector z = sampler.sample(rng);
      if (keep_mode != 0) {
        double m = (P.spec().offsets - P.spec().normals * z).minCoeff();
        if (keep_mode == 1 && !(m < threshold)) continue;
        if (keep_mode == 2 && !(m >= threshold)) continue;
      }
      acc.add(table.power_sum(z, e, weights) / n);
    }
    return acc;
  });
  MeanAccumulator total;
  for (const auto& r : results) total.merge(r);
  return total;
}

}  // namespace

ChordEstimate chord_integral(const Polytope& P, double q, long long samples, std::uint64_t seed,
                             const ChordIntegralOptions& opts) {
  if (!(q > 0.0))
    throw DomainError("chord integral: q must be positive; use closed_form_I0 for q = 0");
  const int n = P.dim();
  const double omega = unit_ball_volume(n);
  DualVolumeOptions inner = opts.inner;
  inner.seed = substream(seed, 0x9177);
  SphereGrid grid = full_grid(P, inner);
  chord_detail::RadialTable table(P, grid.directions);
  InteriorSampler sampler(P);

  ChordEstimate est;
  est.estimator = Estimator::volume_form;

  if (q >= 1.0) {
    MeanAccumulator acc = stratum_mean(P, sampler, table, grid.weights, q - 1.0, samples, seed,
                                       opts.shards, 0.0, 0);
    est.value = (q / omega) * P.volume() * acc.mean();
    est.std_error = (q / omega) * P.volume() * std::sqrt(acc.variance_of_mean());
    est.samples = acc.count;
    return est;
  }

  // q < 1: the dual volume of order q-1 blows up towards the boundary.
  // Split off the inner parallel body holding 1 - boundary_fraction of the
  // volume (exactly, via its own halfspace representation) and oversample
  // the boundary slab.
  const double V = P.volume();
  double lo = 0.0, hi = P.inner_radius();
  auto shrunk_volume = [&](double delta) {
    try {
      HalfspaceSpec inner_spec(P.spec().normals, Vector(P.spec().offsets.array() - delta),
                               P.tolerances());
      return Polytope(inner_spec, P.tolerances()).volume();
    } catch (const Error&) {
      return 0.0;
    }
  };
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (V - shrunk_volume(mid) < opts.boundary_fraction * V)
      lo = mid;
    else
      hi = mid;
  }
  const double delta = 0.5 * (lo + hi);
  const double vol_inner = shrunk_volume(delta);
  const double vol_slab = V - vol_inner;

  double slab_share = opts.boundary_boost * opts.boundary_fraction;
  slab_share = std::min(0.9, slab_share);
  long long n_slab = std::max<long long>(2, static_cast<long long>(slab_share * samples));
  long long n_core = std::max<long long>(2, samples - n_slab);

  MeanAccumulator slab = stratum_mean(P, sampler, table, grid.weights, q - 1.0, n_slab, seed,
                                      opts.shards, delta, 1);
  MeanAccumulator core = stratum_mean(P, sampler, table, grid.weights, q - 1.0, n_core,
                                      substream(seed, 0xC04E), opts.shards, delta, 2);
  est.value = (q / omega) * (vol_slab * slab.mean() + vol_inner * core.mean());
  est.std_error = (q / omega) * std::sqrt(vol_slab * vol_slab * slab.variance_of_mean() +
                                          vol_inner * vol_inner * core.variance_of_mean());
  est.samples = slab.count + core.count;
  return est;
}

// ---------------------------------------------------------------------------
// Chord integral, line form

ChordEstimate chord_integral_lines(const Polytope& P, double q, long long samples,
                                   std::uint64_t seed, int shards) {
  if (q < 0.0) throw DomainError("chord integral (lines): q must be nonnegative");
  const int n = P.dim();
  const Matrix& N = P.spec().normals;
  const Vector& z = P.spec().offsets;
  const PowKind kind = classify(q);
  const bool q_zero = kind == PowKind::zero;

  std::vector<long long> quota(static_cast<std::size_t>(shards), samples / shards);
  for (long long r = 0; r < samples % shards; ++r) ++quota[static_cast<std::size_t>(r)];

  auto results = run_sharded<MeanAccumulator>(shards, [&](int s) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(s) + 7000);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    MeanAccumulator acc;
    Matrix frame(n, n);
    for (long long k = 0; k < quota[static_cast<std::size_t>(s)]; ++k) {
      Vector u = random_unit_vector(rng, n);
      // orthonormal completion of u
      frame.setIdentity();
      frame.col(0) = u;
      Eigen::HouseholderQR<Matrix> qr(frame);
      Matrix Q = qr.householderQ();
      // shadow bounding box from support values
      double box_area = 1.0;
      Vector y = Vector::Zero(n);
      for (int j = 1; j < n; ++j) {
        Vector w = Q.col(j);
        double hi = P.support(w);
        double lo = -P.support(Vector(-w));
        box_area *= (hi - lo);
        y += (lo + unif(rng) * (hi - lo)) * w;
      }
      // clip the line y + t u against every halfspace
      double t_lo = -std::numeric_limits<double>::infinity();
      double t_hi = std::numeric_limits<double>::infinity();
      bool miss = false;
      for (int i = 0; i < N.rows() && !miss; ++i) {
        double d = N.row(i).dot(u);
        double s_i = z[i] - N.row(i).dot(y);
        if (d > 1e-14)
          t_hi = std::min(t_hi, s_i / d);
        else if (d < -1e-14)
          t_lo = std::max(t_lo, s_i / d);
        else if (s_i < 0.0)
          miss = true;
      }
      double chord = miss ? -1.0 : t_hi - t_lo;
      double contrib = 0.0;
      if (chord >= 0.0) contrib = q_zero ? box_area : box_area * apply_pow(std::max(chord, 0.0), q, kind);
      acc.add(contrib);
    }
    return acc;
  });
  MeanAccumulator total;
  for (const auto& r : results) total.merge(r);

  ChordEstimate est;
  est.estimator = Estimator::line_form;
  est.value = fault::line_measure_scale * total.mean();
  est.std_error = fault::line_measure_scale * std::sqrt(total.variance_of_mean());
  est.samples = total.count;
  return est;
}

// ---------------------------------------------------------------------------
// Chord measures

namespace {

// Dual volume of order e restricted to the inward hemisphere of one facet,
// evaluated at x just inside the facet. This is the boundary limit of the
// dual quermassintegral: rho from a boundary point is supported on exactly
// this hemisphere.
double hemisphere_power_integral(const chord_detail::RadialTable& table, const SphereGrid& grid,
                                 const Vector& x, double e, int dim) {
  return table.power_sum(x, e, grid.weights) / dim;
}

std::vector<Vector> deterministic_edge_nodes(const Polytope& P, const Facet& f, double q,
                                             int edge_points, std::vector<double>* weights) {
  // Composite Gauss rule along the segment; graded panels towards the
  // endpoints when q < 1, where the integrand has endpoint derivative
  // singularities.
  const Vector a = P.point(f.vertex_indices[0]);
  const Vector b = P.point(f.vertex_indices[1]);
  std::vector<double> breaks;
  if (q < 1.0)
    breaks = {0.0, 0.04, 0.2, 0.5, 0.8, 0.96, 1.0};
  else
    breaks = {0.0, 0.25, 0.5, 0.75, 1.0};
  int per_panel = std::max(2, edge_points / static_cast<int>(breaks.size() - 1));
  const GaussRule& rule = gauss_legendre(per_panel);
  std::vector<Vector> nodes;
  weights->clear();
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    double w0 = breaks[p], w1 = breaks[p + 1];
    for (int k = 0; k < per_panel; ++k) {
      double t = w0 + 0.5 * (rule.nodes[static_cast<std::size_t>(k)] + 1.0) * (w1 - w0);
      nodes.push_back(a + t * (b - a));
      weights->push_back(0.5 * rule.weights[static_cast<std::size_t>(k)] * (w1 - w0));
    }
  }
  return nodes;
}

}  // namespace

std::vector<ChordEstimate> chord_measure(const Polytope& P, double q,
                                         const ChordMeasureOptions& opts) {
  if (!(q > 0.0)) throw DomainError("chord measure: q must be positive");
  const int n = P.dim();
  const double omega = unit_ball_volume(n);
  const double factor = fault::chord_measure_scale * 2.0 * q / omega;
  const double eps = opts.pull_in * P.inner_radius();

  std::vector<ChordEstimate> out(static_cast<std::size_t>(P.facet_count()));

  // q = 1: the hemisphere integrand is constant, so every facet value is its
  // area exactly; this is the surface area measure.
  if (classify(q - 1.0) == PowKind::zero) {
    for (int i = 0; i < P.facet_count(); ++i) {
      out[static_cast<std::size_t>(i)].value = fault::chord_measure_scale * P.facet(i).area;
      out[static_cast<std::size_t>(i)].std_error = 0.0;
      out[static_cast<std::size_t>(i)].samples = 1;
      out[static_cast<std::size_t>(i)].estimator = Estimator::quadrature;
    }
    return out;
  }

  FacetQuadrature mode = opts.mode;
  if (mode == FacetQuadrature::automatic)
    mode = n == 2 ? FacetQuadrature::deterministic : FacetQuadrature::monte_carlo;
  if (mode == FacetQuadrature::deterministic && n != 2)
    throw DomainError("chord measure: deterministic facet quadrature is only available for n = 2");

  for (int i = 0; i < P.facet_count(); ++i) {
    const Facet& f = P.facet(i);
    ChordEstimate& est = out[static_cast<std::size_t>(i)];
    if (f.simplices.empty()) {
      est = ChordEstimate{0.0, 0.0, 1, Estimator::quadrature};
      continue;
    }
    const Vector vn = P.spec().normals.row(i).transpose();

    if (mode == FacetQuadrature::deterministic) {
      SphereGrid fine = half_grid(P, vn, opts);
      SphereGrid coarse = half_grid(P, vn, opts, 2);
      chord_detail::RadialTable tf(P, fine.directions);
      chord_detail::RadialTable tc(P, coarse.directions);
      std::vector<double> wts;
      auto nodes = deterministic_edge_nodes(P, f, q, opts.edge_points, &wts);
      std::vector<double> wts_c;
      auto nodes_c = deterministic_edge_nodes(P, f, q, opts.edge_points / 2, &wts_c);
      double sum_f = 0.0, sum_c = 0.0;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        Vector x = nodes[k] - eps * vn;
        sum_f += wts[k] * hemisphere_power_integral(tf, fine, x, q - 1.0, n);
      }
      for (std::size_t k = 0; k < nodes_c.size(); ++k) {
        Vector x = nodes_c[k] - eps * vn;
        sum_c += wts_c[k] * hemisphere_power_integral(tc, coarse, x, q - 1.0, n);
      }
      est.value = factor * f.area * sum_f;
      est.std_error = std::abs(factor * f.area * (sum_f - sum_c));
      est.samples = static_cast<long long>(nodes.size());
      est.estimator = Estimator::quadrature;
    } else {
      SphereGrid grid = half_grid(P, vn, opts);
      chord_detail::RadialTable table(P, grid.directions);
      auto pts = facet_sample(P, i, static_cast<int>(opts.samples_per_facet),
                              substream(opts.seed, static_cast<std::uint64_t>(i) + 31));
      MeanAccumulator acc;
      for (const Vector& p : pts) {
        Vector x = p - eps * vn;
        acc.add(hemisphere_power_integral(table, grid, x, q - 1.0, n));
      }
      est.value = factor * f.area * acc.mean();
      est.std_error = factor * f.area * std::sqrt(acc.variance_of_mean());
      est.samples = acc.count;
      est.estimator = Estimator::volume_form;
    }
  }
  return out;
}

std::vector<ChordEstimate> lp_chord_measure(const Polytope& P, double p, double q,
                                            const ChordMeasureOptions& opts) {
  if (p < 0.0 || p > 1.0)
    throw DomainError("lp chord measure: p must lie in [0, 1]");
  if (P.spec().offsets.minCoeff() < -P.tolerances().feasibility)
    throw DomainError("lp chord measure: origin lies outside the polytope");
  std::vector<ChordEstimate> base = chord_measure(P, q, opts);
  for (int i = 0; i < P.facet_count(); ++i) {
    double h = P.support(P.spec().normals.row(i).transpose());
    double scale = std::pow(std::max(h, 0.0), 1.0 - p);
    base[static_cast<std::size_t>(i)].value *= scale;
    base[static_cast<std::size_t>(i)].std_error *= scale;
  }
  return base;
}

std::vector<ChordEstimate> cone_chord_measure(const Polytope& P, double q,
                                              const ChordMeasureOptions& opts) {
  const double c = fault::cone_normalization_scale / (P.dim() + q - 1.0);
  std::vector<ChordEstimate> base = lp_chord_measure(P, 0.0, q, opts);
  for (auto& est : base) {
    est.value *= c;
    est.std_error *= c;
  }
  return base;
}

std::vector<double> chord_measure_boundary_2d(const Polytope& P, double q, int edge_points,
                                              int half_circle_points) {
  if (P.dim() != 2) throw DomainError("boundary chord measure: only implemented for n = 2");
  if (!(q > 0.0)) throw DomainError("boundary chord measure: q must be positive");
  const double omega = unit_ball_volume(2);
  const double factor = 2.0 * q / omega;
  std::vector<double> out(static_cast<std::size_t>(P.facet_count()), 0.0);
  for (int i = 0; i < P.facet_count(); ++i) {
    const Facet& f = P.facet(i);
    if (f.simplices.empty()) continue;
    const Vector vn = P.spec().normals.row(i).transpose();
    SphereGrid grid = SphereGrid::half_circle(vn, half_circle_points);
    std::vector<double> wts;
    auto nodes = deterministic_edge_nodes(P, f, q, edge_points, &wts);
    double sum = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      double inner = 0.0;
      for (int g = 0; g < grid.directions.rows(); ++g) {
        Vector u = grid.directions.row(g).transpose();
        double rho = P.ray_exit(nodes[k], u);
        inner += grid.weights[g] * std::pow(rho, q - 1.0);
      }
      sum += wts[k] * inner / 2.0;
    }
    out[static_cast<std::size_t>(i)] = factor * f.area * sum;
  }
  return out;
}

}  // namespace chordmink
