#include "chordmink/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chordmink/sphere_grid.hpp"

namespace chordmink {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_xi_feasible(const Vector& slack) {
  if (slack.minCoeff() < -1e-12)
    throw DomainError("phi: xi lies outside the shape");
}

Vector slacks(const Vector& z, const Matrix& dirs, const Vector& xi) {
  return z - dirs * xi;
}

HalfspaceSpec spec_of(const DiscreteMeasure& mu, const Vector& z) {
  return HalfspaceSpec(mu.directions(), z);
}

// Chord measure evaluation used inside the optimizer: deterministic edge
// quadrature for polygons, sample-average approximation with a seed fixed
// across iterations otherwise. q = 1 collapses to exact facet areas either
// way.
std::vector<ChordEstimate> loop_chord_measure(const Polytope& P, const SolverConfig& cfg,
                                              bool fine) {
  ChordMeasureOptions o;
  o.mode = P.dim() == 2 ? FacetQuadrature::deterministic : FacetQuadrature::monte_carlo;
  o.edge_points = fine ? cfg.edge_points : std::max(8, cfg.edge_points / 2);
  o.half_circle_points = fine ? cfg.half_circle_points : std::max(64, cfg.half_circle_points / 4);
  o.half_polar = fine ? cfg.half_polar : std::max(6, cfg.half_polar / 2);
  o.half_azimuth = fine ? cfg.half_azimuth : std::max(16, cfg.half_azimuth / 2);
  o.samples_per_facet = fine ? cfg.loop_samples_per_facet
                             : std::max<long long>(64, cfg.loop_samples_per_facet / 4);
  o.seed = substream(cfg.seed, 0xF00D);  // fixed: the optimizer sees one SAA surface
  return chord_measure(P, cfg.q, o);
}

struct IterationState {
  Vector z;        // tightened, recentered, constraint-satisfying offsets
  Vector xi;       // inner maximizer of the recentered data (near the origin)
  double energy = 0.0;
  Vector grad;     // dE/dz
  Vector F;        // F_q per facet
  double I = 0.0;  // sum h_i F_i / (n+q-1), equals |mu| after the rescale
  double I_se = 0.0;
};

Vector envelope_gradient(const Vector& s, const Vector& alpha, double p) {
  Vector g(s.size());
  if (p == 0.0) {
    for (int i = 0; i < s.size(); ++i) g[i] = alpha[i] / s[i];
  } else {
    for (int i = 0; i < s.size(); ++i) g[i] = p * alpha[i] * std::pow(s[i], p - 1.0);
  }
  return g;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("solver config: p must lie in [0, 1)");
  if (!(q > 0.0)) throw DomainError("solver config: q must be positive");
  if (!(inner_tol > 0.0 && outer_tol > 0.0)) throw DomainError("solver config: tolerances must be positive");
}

double phi(const Vector& z, const Vector& xi, const DiscreteMeasure& mu, double p) {
  if (p < 0.0 || p >= 1.0) throw DomainError("phi: p must lie in [0, 1)");
  const Matrix dirs = mu.directions();
  const Vector alpha = mu.weights();
  Vector s = slacks(z, dirs, xi);
  check_xi_feasible(s);
  double total = 0.0;
  if (p == 0.0) {
    for (int i = 0; i < s.size(); ++i) {
      double v = std::max(s[i], 0.0);
      if (v == 0.0) return -kInf;
      total += alpha[i] * std::log(v);
    }
  } else {
    for (int i = 0; i < s.size(); ++i) total += alpha[i] * std::pow(std::max(s[i], 0.0), p);
  }
  return total;
}

Vector xi_star(const Vector& z, const DiscreteMeasure& mu, double p, double tol, int max_iters) {
  if (p < 0.0 || p >= 1.0) throw DomainError("xi_star: p must lie in [0, 1)");
  const Matrix dirs = mu.directions();
  const Vector alpha = mu.weights();
  const int n = mu.dim();
  const double alpha_norm = alpha.norm();

  auto [xi, radius] = chebyshev_center(spec_of(mu, z));
  if (!(radius > 1e-9)) throw DegenerateShapeError("xi_star: shape has empty interior");

  auto objective = [&](const Vector& point) {
    Vector s = slacks(z, dirs, point);
    double total = 0.0;
    for (int i = 0; i < s.size(); ++i) {
      if (s[i] <= 0.0) return -kInf;
      total += p == 0.0 ? alpha[i] * std::log(s[i]) : alpha[i] * std::pow(s[i], p);
    }
    return total;
  };

  const double grad_scale = p == 0.0 ? 1.0 : p;
  for (int it = 0; it < max_iters; ++it) {
    Vector s = slacks(z, dirs, xi);
    Vector r = Vector::Zero(n);  // stationarity residual of eq-type sum s^{p-1} alpha v
    Matrix H = Matrix::Zero(n, n);
    for (int i = 0; i < dirs.rows(); ++i) {
      double sp1 = std::pow(s[i], p - 1.0);
      double sp2 = std::pow(s[i], p - 2.0);
      r += alpha[i] * sp1 * dirs.row(i).transpose();
      H += alpha[i] * sp2 * dirs.row(i).transpose() * dirs.row(i);
    }
    if (r.norm() < tol * alpha_norm) return xi;
    // Phi gradient = -grad_scale r, Hessian = grad_scale (p-1) H (negative definite)
    Vector step = H.ldlt().solve(r / (1.0 - p));  // = -(Hess)^{-1} grad
    // fraction to the boundary: keep slacks above 1% of the current minimum
    double floor = 0.01 * s.minCoeff();
    double tmax = 1.0;
    Vector ds = dirs * step;
    for (int i = 0; i < s.size(); ++i) {
      if (ds[i] > 0.0) tmax = std::min(tmax, (s[i] - floor) / ds[i]);
    }
    double f0 = objective(xi);
    double slope = grad_scale * r.dot(step);  // = -grad(Phi).step, positive for ascent
    double t = std::max(tmax, 0.0);
    bool accepted = false;
    for (int k = 0; k < 60 && !accepted; ++k) {
      Vector cand = xi + t * step;
      double f1 = objective(cand);
      if (f1 >= f0 + 1e-4 * t * slope) {
        xi = cand;
        accepted = true;
      } else {
        t *= 0.5;
      }
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "xi_star: no ascent step at iteration " << it << " (residual "
          << r.norm() / alpha_norm << ", tol " << tol << ")";
      throw ConvergenceError(msg.str());
    }
  }
  throw ConvergenceError("xi_star: Newton failed to converge within " +
                         std::to_string(max_iters) + " iterations");
}

OuterEval outer_objective_and_gradient(const Vector& z, const DiscreteMeasure& mu,
                                       const SolverConfig& cfg) {
  cfg.validate();
  const int n = mu.dim();
  Polytope P(spec_of(mu, z));
  OuterEval eval;
  eval.xi = xi_star(z, mu, cfg.p, cfg.inner_tol, cfg.max_inner_iters);
  eval.objective = phi(z, eval.xi, mu, cfg.p);
  Vector s = slacks(z, mu.directions(), eval.xi);
  eval.objective_grad = envelope_gradient(s, mu.weights(), cfg.p);

  auto F = loop_chord_measure(P, cfg, /*fine=*/true);
  eval.constraint_grad.resize(P.facet_count());
  double I = 0.0, var = 0.0;
  for (int i = 0; i < P.facet_count(); ++i) {
    double h = P.support(mu.atoms()[static_cast<std::size_t>(i)].direction);
    eval.constraint_grad[i] = F[static_cast<std::size_t>(i)].value;
    I += h * F[static_cast<std::size_t>(i)].value;
    var += h * h * F[static_cast<std::size_t>(i)].std_error * F[static_cast<std::size_t>(i)].std_error;
  }
  I /= (n + cfg.q - 1.0);
  eval.constraint = I - total_mass(mu);
  eval.constraint_std_error = std::sqrt(var) / (n + cfg.q - 1.0);
  return eval;
}

namespace {

// Builds the full iteration state at raw offsets: tighten against the built
// shape, recenter so the inner maximizer sits at the origin, then rescale
// exactly onto the constraint manifold using the homogeneity of both the
// estimator and the objective.
IterationState make_state(Vector z_raw, const DiscreteMeasure& mu, const SolverConfig& cfg,
                          bool fine) {
  const int n = mu.dim();
  const Matrix dirs = mu.directions();
  const Vector alpha = mu.weights();
  const double mass = total_mass(mu);

  Polytope P0(spec_of(mu, z_raw));
  Vector z(dirs.rows());
  for (int i = 0; i < dirs.rows(); ++i) z[i] = P0.support(dirs.row(i).transpose());  // tighten

  Vector xi = xi_star(z, mu, cfg.p, cfg.inner_tol, cfg.max_inner_iters);
  z -= dirs * xi;  // recenter: Phi and the shape are translation-compatible

  Polytope P(spec_of(mu, z));
  auto F = loop_chord_measure(P, cfg, fine);
  double I = 0.0, var = 0.0;
  for (int i = 0; i < P.facet_count(); ++i) {
    I += z[i] * F[static_cast<std::size_t>(i)].value;
    var += z[i] * z[i] * F[static_cast<std::size_t>(i)].std_error *
           F[static_cast<std::size_t>(i)].std_error;
  }
  I /= (n + cfg.q - 1.0);
  if (!(I > 0.0)) throw DegenerateShapeError("outer minimize: nonpositive chord integral");

  const double lambda = std::pow(mass / I, 1.0 / (n + cfg.q - 1.0));
  IterationState st;
  st.z = lambda * z;
  st.xi = Vector::Zero(n);  // recentering put the maximizer at the origin
  // analytic transport under z -> lambda z
  st.F.resize(P.facet_count());
  for (int i = 0; i < P.facet_count(); ++i)
    st.F[i] = std::pow(lambda, n + cfg.q - 2.0) * F[static_cast<std::size_t>(i)].value;
  st.I = mass;
  st.I_se = std::pow(lambda, n + cfg.q - 1.0) * std::sqrt(var) / (n + cfg.q - 1.0);
  Vector s = st.z;  // xi at origin after recentering; slacks are the offsets
  st.energy = phi(st.z, Vector::Zero(n), mu, cfg.p);
  st.grad = envelope_gradient(s, alpha, cfg.p);
  return st;
}

double kkt_residual(const IterationState& st, double* nu_out) {
  double nu = st.grad.dot(st.F) / std::max(st.F.dot(st.F), 1e-300);
  if (nu_out != nullptr) *nu_out = nu;
  return (st.grad - nu * st.F).norm() / std::max(st.grad.norm(), 1e-300);
}

}  // namespace

OuterResult outer_minimize(const DiscreteMeasure& mu, const SolverConfig& cfg,
                           std::uint64_t start_seed) {
  cfg.validate();
  if (!hemisphere_check(mu))
    throw DomainError("outer minimize: measure is concentrated in a closed hemisphere");
  const int N = mu.count();

  // all-ones start, optionally jittered for multi-start
  Vector z0 = Vector::Constant(N, 1.0);
  if (start_seed != 0) {
    auto rng = make_rng(cfg.seed, start_seed);
    std::normal_distribution<double> gauss(0.0, 0.3);
    for (int i = 0; i < N; ++i) z0[i] = std::exp(gauss(rng));
  }

  SolverConfig run_cfg = cfg;
  OuterResult res;
  IterationState st = make_state(z0, mu, run_cfg, /*fine=*/true);
  Vector prev_z, prev_d;
  double t_spectral = 0.0;
  int consecutive_failures = 0;

  for (int iter = 0; iter < cfg.max_outer_iters; ++iter) {
    double nu = 0.0;
    double kkt = kkt_residual(st, &nu);
    res.trace.push_back({iter, st.energy, kkt, st.I - total_mass(mu), t_spectral});
    res.iterations = iter;
    if (kkt < cfg.outer_tol) {
      res.converged = true;
      res.kkt = kkt;
      break;
    }
    Vector d = -(st.grad - nu * st.F);

    // spectral (Barzilai-Borwein) initial step, safeguarded
    double t0;
    if (prev_z.size() == N) {
      Vector dz = st.z - prev_z;
      Vector dg = prev_d - d;  // difference of projected descent directions
      double denom = dz.dot(dg);
      t0 = denom > 1e-300 ? dz.squaredNorm() / denom : t_spectral;
    } else {
      t0 = 0.1 * st.z.norm() / std::max(d.norm(), 1e-300);
    }
    if (!(t0 > 0.0) || !std::isfinite(t0)) t0 = 0.1 * st.z.norm() / std::max(d.norm(), 1e-300);
    t0 = std::clamp(t0, 1e-14 * st.z.norm() / std::max(d.norm(), 1e-300),
                    1e3 * st.z.norm() / std::max(d.norm(), 1e-300));

    prev_z = st.z;
    prev_d = d;

    bool accepted = false;
    double t = t0;
    IterationState trial;
    for (int k = 0; k < 45 && !accepted; ++k) {
      try {
        trial = make_state(st.z + t * d, mu, run_cfg, /*fine=*/false);
        if (trial.energy <= st.energy - cfg.sufficient_decrease * t * d.squaredNorm()) {
          accepted = true;
          break;
        }
      } catch (const Error&) {
        // degenerate trial shape; shrink
      }
      t *= cfg.backtrack_shrink;
    }
    t_spectral = t;

    if (!accepted) {
      ++consecutive_failures;
      if (consecutive_failures >= 2 && mu.dim() >= 3 && run_cfg.q != 1.0) {
        // noise-dominated regime: double the sample budget and refresh
        run_cfg.loop_samples_per_facet *= 2;
        st = make_state(st.z, mu, run_cfg, /*fine=*/true);
        consecutive_failures = 0;
        continue;
      }
      res.kkt = kkt;
      break;  // stalled; report unconverged at the current iterate
    }
    consecutive_failures = 0;
    st = make_state(trial.z, mu, run_cfg, /*fine=*/true);
  }
  if (res.trace.empty()) {
    double nu = 0.0;
    res.kkt = kkt_residual(st, &nu);
  } else if (!res.converged) {
    res.kkt = res.trace.back().kkt;
  }
  res.z = st.z;
  res.xi = st.xi;
  return res;
}

SolutionReport extract_solution(const Vector& z_star, const DiscreteMeasure& mu,
                                const SolverConfig& cfg) {
  cfg.validate();
  const int n = mu.dim();
  const double mass = total_mass(mu);
  const double degree = n + cfg.q - 1.0 - cfg.p;

  ChordMeasureOptions final_opts;
  final_opts.mode = n == 2 ? FacetQuadrature::deterministic : FacetQuadrature::monte_carlo;
  final_opts.samples_per_facet = cfg.chord_samples;
  final_opts.edge_points = std::max(cfg.edge_points, 48);
  final_opts.half_circle_points = std::max(cfg.half_circle_points, 1024);
  final_opts.seed = substream(cfg.seed, 0xFEA1);

  Polytope P0(spec_of(mu, z_star));
  auto F0 = lp_chord_measure(P0, cfg.p, cfg.q, final_opts);
  double total0 = 0.0;
  for (const auto& f : F0) total0 += f.value;
  if (!(total0 > 0.0))
    throw DomainError("extract solution: nonpositive total achieved measure");

  const double t_emp = std::pow(mass / total0, 1.0 / degree);
  double t_closed;
  if (cfg.p == 0.0) {
    t_closed = std::pow(1.0 / (n + cfg.q - 1.0), 1.0 / (n + cfg.q - 1.0));
  } else {
    double e = phi(z_star, Vector::Zero(n), mu, cfg.p);
    t_closed = std::pow(e / ((n + cfg.q - 1.0) * mass), 1.0 / degree);
  }

  SolutionReport rep;
  rep.z_star = t_emp * z_star;
  rep.scale_factor = t_emp;
  rep.scale_factor_closed_form = t_closed;
  rep.scale_discrepancy = std::abs(t_emp - t_closed) / t_closed;

  Polytope P(spec_of(mu, rep.z_star));
  auto achieved = lp_chord_measure(P, cfg.p, cfg.q, final_opts);
  rep.targets = mu.weights();
  rep.achieved.resize(mu.count());
  rep.residuals.resize(mu.count());
  double var = 0.0, total = 0.0;
  for (int i = 0; i < mu.count(); ++i) {
    rep.achieved[i] = achieved[static_cast<std::size_t>(i)].value;
    total += rep.achieved[i];
    var += achieved[static_cast<std::size_t>(i)].std_error *
           achieved[static_cast<std::size_t>(i)].std_error;
    rep.residuals[i] = std::abs(rep.achieved[i] - rep.targets[i]) / rep.targets[i];
  }
  rep.max_rel = rep.residuals.maxCoeff();
  rep.total_mass_rel = std::abs(total - mass) / mass;
  rep.combined_std_error = std::sqrt(var);
  rep.xi_star = xi_star(rep.z_star, mu, cfg.p, cfg.inner_tol, cfg.max_inner_iters);
  rep.diagnostics.inner_radius = P.inner_radius();
  rep.diagnostics.outer_radius = P.outer_radius();
  rep.polytope.emplace(std::move(P));
  return rep;
}

SolutionReport solve(const DiscreteMeasure& mu, const SolverConfig& cfg) {
  cfg.validate();
  if (!hemisphere_check(mu))
    throw DomainError("solve: measure is concentrated in a closed hemisphere");
  std::vector<std::string> warnings;
  if (cfg.p == 0.0) {
    if (!general_position_check(mu.directions(), mu.dim()))
      throw DomainError(
          "solve: p = 0 requires the atom directions in general position in dimension n");
    if (cfg.q > 1.0 && cfg.q < mu.dim() + 1.0) {
      auto rep = subspace_mass_check(mu, cfg.q);
      if (!rep.passes) {
        std::ostringstream msg;
        msg << "subspace mass inequality violated (worst ratio " << rep.worst_ratio
            << " in dimension " << rep.worst_dim
            << "); the sufficient condition fails but the solve proceeds";
        warnings.push_back(msg.str());
      }
    }
  }

  OuterResult best;
  std::vector<double> start_kkts;
  bool have = false;
  for (int k = 0; k < std::max(1, cfg.multi_start); ++k) {
    OuterResult run;
    try {
      run = outer_minimize(mu, cfg, static_cast<std::uint64_t>(k));
    } catch (const Error&) {
      continue;  // a jittered start may degenerate; other starts proceed
    }
    start_kkts.push_back(run.kkt);
    bool better = !have || (run.converged && !best.converged) ||
                  (run.converged == best.converged && run.kkt < best.kkt);
    if (better) {
      best = std::move(run);
      have = true;
    }
  }
  if (!have) throw ConvergenceError("solve: every start failed to produce an iterate");
  if (!best.converged)
    warnings.push_back("outer minimization stopped before reaching the KKT tolerance");

  SolutionReport rep = extract_solution(best.z, mu, cfg);
  rep.objective_trace = best.trace;
  rep.diagnostics.iterations = best.iterations;
  rep.diagnostics.converged = best.converged;
  rep.diagnostics.kkt_residual = best.kkt;
  rep.diagnostics.constraint_gap = best.trace.empty() ? 0.0 : best.trace.back().constraint_gap;
  rep.diagnostics.multi_start_kkt = start_kkts;
  rep.diagnostics.warnings = warnings;
  return rep;
}

std::vector<ContinuationStage> solve_continuous(const DensityFn& density, int dim,
                                                const std::vector<int>& resolutions,
                                                const SolverConfig& cfg) {
  std::vector<ContinuationStage> stages;
  for (std::size_t k = 0; k < resolutions.size(); ++k) {
    DiscretizeOptions dopts;
    dopts.seed = substream(cfg.seed, 0xD0 + k);
    DiscreteMeasure mu = discretize(density, dim, resolutions[k], dopts);
    ContinuationStage stage;
    stage.resolution = resolutions[k];
    stage.report = solve(mu, cfg);
    if (k > 0 && stage.report.polytope && stages.back().report.polytope) {
      stage.hausdorff_to_previous =
          hausdorff_distance(*stages.back().report.polytope, *stage.report.polytope);
    }
    stages.push_back(std::move(stage));
  }
  return stages;
}

double hausdorff_distance(const Polytope& A, const Polytope& B) {
  if (A.dim() != B.dim()) throw DomainError("hausdorff distance: dimension mismatch");
  SphereGrid grid = A.dim() == 2 ? SphereGrid::circle(4096)
                                 : (A.dim() == 3 ? SphereGrid::sphere3(40, 80)
                                                 : SphereGrid::monte_carlo(A.dim(), 20000, 1));
  double worst = 0.0;
  for (int g = 0; g < grid.directions.rows(); ++g) {
    Vector u = grid.directions.row(g).transpose();
    worst = std::max(worst, std::abs(A.support(u) - B.support(u)));
  }
  return worst;
}

}  // namespace chordmink
