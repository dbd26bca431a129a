#include "chordmink/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "chordmink/linprog.hpp"
#include "chordmink/rng.hpp"

namespace chordmink {

namespace {

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

// Orthonormal basis of the hyperplane orthogonal to unit v.
Matrix orthogonal_complement(const Vector& v) {
  const int n = static_cast<int>(v.size());
  Matrix M(n, n);
  M.col(0) = v;
  // complete with the coordinate axes least aligned with v
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::abs(v[a]) < std::abs(v[b]); });
  for (int k = 1; k < n; ++k) M.col(k) = Vector::Unit(n, order[static_cast<std::size_t>(k - 1)]);
  Eigen::HouseholderQR<Matrix> qr(M);
  Matrix Q = qr.householderQ();
  // Q.col(0) = +-v; drop it
  Matrix W(n, n - 1);
  W = Q.rightCols(n - 1);
  return W;
}

double simplex_measure(const std::vector<Vector>& pts) {
  const int k = static_cast<int>(pts.size()) - 1;
  if (k <= 0) return 0.0;
  Matrix M(pts[0].size(), k);
  for (int j = 0; j < k; ++j) M.col(j) = pts[static_cast<std::size_t>(j + 1)] - pts[0];
  double g = (M.transpose() * M).determinant();
  if (g <= 0.0) return 0.0;
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  return std::sqrt(g) / fact;
}

int affine_rank(const std::vector<Vector>& pts, double tol) {
  if (pts.size() <= 1) return 0;
  Matrix M(pts[0].size(), static_cast<Eigen::Index>(pts.size()) - 1);
  for (std::size_t j = 1; j < pts.size(); ++j) M.col(static_cast<Eigen::Index>(j - 1)) = pts[j] - pts[0];
  Eigen::JacobiSVD<Matrix> svd(M);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()[i] > tol) ++rank;
  }
  return rank;
}

}  // namespace

HalfspaceSpec::HalfspaceSpec(Matrix normals_in, Vector offsets_in, const Tolerances& tol)
    : normals(std::move(normals_in)), offsets(std::move(offsets_in)) {
  const int N = count();
  const int n = dim();
  if (n < 1) throw DomainError("halfspace spec: dimension must be >= 1");
  if (offsets.size() != N) throw DomainError("halfspace spec: offsets/normals size mismatch");
  if (N < n + 1) throw DomainError("halfspace spec: need at least n+1 halfspaces");
  for (int i = 0; i < N; ++i) {
    if (std::abs(normals.row(i).norm() - 1.0) > tol.unit_norm)
      throw DomainError("halfspace spec: normal " + std::to_string(i) + " is not a unit vector");
  }
}

// ---------------------------------------------------------------------------
// Construction

Polytope::Polytope(HalfspaceSpec spec, const Tolerances& tol) : spec_(std::move(spec)), tol_(tol) {
  const int N = spec_.count();
  const int n = spec_.dim();
  const Matrix& V = spec_.normals;
  const Vector& z = spec_.offsets;

  if (binomial_capped(static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(n),
                      tol_.subset_budget) > tol_.subset_budget) {
    std::ostringstream msg;
    msg << "wulff shape: C(" << N << "," << n << ") exceeds the vertex enumeration budget of "
        << tol_.subset_budget << " subsets";
    throw BudgetError(msg.str());
  }

  auto [center, radius] = chebyshev_center(spec_);
  if (!(radius > tol_.feasibility)) {
    throw DegenerateShapeError("wulff shape: no interior point with slack above " +
                               std::to_string(tol_.feasibility));
  }
  interior_point_ = center;
  inner_radius_ = radius;

  // Vertex enumeration over n-subsets of bounding hyperplanes.
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Matrix A(n, n);
  Vector rhs(n);
  bool more = N >= n;
  while (more) {
    for (int r = 0; r < n; ++r) {
      A.row(r) = V.row(idx[static_cast<std::size_t>(r)]);
      rhs[r] = z[idx[static_cast<std::size_t>(r)]];
    }
    Eigen::PartialPivLU<Matrix> lu(A);
    double det = std::abs(lu.determinant());
    if (det > tol_.det_threshold) {
      Vector x = lu.solve(rhs);
      if (((V * x - z).array() <= tol_.feasibility).all()) {
        bool dup = false;
        for (const Vector& w : vertices_) {
          if ((w - x).norm() <= tol_.vertex_merge) {
            dup = true;
            break;
          }
        }
        if (!dup) vertices_.push_back(x);
      }
    }
    more = next_subset(idx, N);
  }
  if (static_cast<int>(vertices_.size()) < n + 1)
    throw DegenerateShapeError("wulff shape: fewer than n+1 vertices enumerated");

  // Active constraint sets, recomputed against the full list so that
  // degeneracies beyond the defining subset are captured.
  const int nv = static_cast<int>(vertices_.size());
  std::vector<std::vector<char>> active(static_cast<std::size_t>(nv),
                                        std::vector<char>(static_cast<std::size_t>(N), 0));
  for (int vi = 0; vi < nv; ++vi) {
    Vector s = z - V * vertices_[static_cast<std::size_t>(vi)];
    for (int i = 0; i < N; ++i)
      active[static_cast<std::size_t>(vi)][static_cast<std::size_t>(i)] = s[i] <= tol_.feasibility;
  }

  facets_.resize(static_cast<std::size_t>(N));
  Vector area_normal_sum = Vector::Zero(n);
  volume_ = 0.0;

  for (int i = 0; i < N; ++i) {
    Facet& f = facets_[static_cast<std::size_t>(i)];
    f.normal_index = i;
    std::vector<int> incident;
    for (int vi = 0; vi < nv; ++vi) {
      if (active[static_cast<std::size_t>(vi)][static_cast<std::size_t>(i)]) incident.push_back(vi);
    }
    if (static_cast<int>(incident.size()) < n) continue;

    std::vector<Vector> pts;
    pts.reserve(incident.size());
    for (int vi : incident) pts.push_back(vertices_[static_cast<std::size_t>(vi)]);
    if (affine_rank(pts, tol_.vertex_merge) != n - 1) continue;  // face is a point or a ridge

    const Vector vn = V.row(i).transpose();
    if (n == 2) {
      // Segment: order along the edge direction, keep the extremes.
      Vector t(2);
      t << -vn[1], vn[0];
      std::sort(incident.begin(), incident.end(), [&](int a, int b) {
        return t.dot(vertices_[static_cast<std::size_t>(a)]) < t.dot(vertices_[static_cast<std::size_t>(b)]);
      });
      int a = incident.front(), b = incident.back();
      f.vertex_indices = {a, b};
      f.simplices.push_back({a, b});
      f.area = (vertices_[static_cast<std::size_t>(b)] - vertices_[static_cast<std::size_t>(a)]).norm();
    } else if (n == 3) {
      // Convex polygon: cycle order by angle around the centroid, fan
      // triangulate from a synthetic centroid point.
      Matrix W = orthogonal_complement(vn);
      Vector c = Vector::Zero(n);
      for (int vi : incident) c += vertices_[static_cast<std::size_t>(vi)];
      c /= static_cast<double>(incident.size());
      std::sort(incident.begin(), incident.end(), [&](int a, int b) {
        Vector da = vertices_[static_cast<std::size_t>(a)] - c;
        Vector db = vertices_[static_cast<std::size_t>(b)] - c;
        return std::atan2(W.col(1).dot(da), W.col(0).dot(da)) <
               std::atan2(W.col(1).dot(db), W.col(0).dot(db));
      });
      f.vertex_indices = incident;
      int cid = nv + static_cast<int>(extra_points_.size());
      extra_points_.push_back(c);
      const int k = static_cast<int>(incident.size());
      for (int e = 0; e < k; ++e) {
        int a = incident[static_cast<std::size_t>(e)];
        int b = incident[static_cast<std::size_t>((e + 1) % k)];
        double m = simplex_measure({c, vertices_[static_cast<std::size_t>(a)], vertices_[static_cast<std::size_t>(b)]});
        if (m <= 0.0) continue;
        f.simplices.push_back({cid, a, b});
        f.area += m;
      }
    } else {
      // n == 4: ridges are 2-faces shared with another active constraint;
      // fan each ridge polygon, then cone with the facet centroid.
      Vector c = Vector::Zero(n);
      for (int vi : incident) c += vertices_[static_cast<std::size_t>(vi)];
      c /= static_cast<double>(incident.size());
      int cid = nv + static_cast<int>(extra_points_.size());
      extra_points_.push_back(c);
      f.vertex_indices = incident;

      std::vector<std::vector<int>> ridges;
      for (int j = 0; j < N; ++j) {
        if (j == i) continue;
        std::vector<int> shared;
        for (int vi : incident) {
          if (active[static_cast<std::size_t>(vi)][static_cast<std::size_t>(j)]) shared.push_back(vi);
        }
        if (static_cast<int>(shared.size()) < n - 1) continue;
        std::vector<Vector> rpts;
        for (int vi : shared) rpts.push_back(vertices_[static_cast<std::size_t>(vi)]);
        if (affine_rank(rpts, tol_.vertex_merge) != n - 2) continue;
        std::sort(shared.begin(), shared.end());
        if (std::find(ridges.begin(), ridges.end(), shared) == ridges.end()) ridges.push_back(shared);
      }
      for (auto& ridge : ridges) {
        // order the ridge polygon by angle in its own plane
        Vector rc = Vector::Zero(n);
        for (int vi : ridge) rc += vertices_[static_cast<std::size_t>(vi)];
        rc /= static_cast<double>(ridge.size());
        std::vector<Vector> rpts;
        for (int vi : ridge) rpts.push_back(vertices_[static_cast<std::size_t>(vi)]);
        Matrix M(n, static_cast<Eigen::Index>(rpts.size()));
        for (std::size_t jj = 0; jj < rpts.size(); ++jj) M.col(static_cast<Eigen::Index>(jj)) = rpts[jj] - rc;
        Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU);
        Vector u0 = svd.matrixU().col(0), u1 = svd.matrixU().col(1);
        std::sort(ridge.begin(), ridge.end(), [&](int a, int b) {
          Vector da = vertices_[static_cast<std::size_t>(a)] - rc;
          Vector db = vertices_[static_cast<std::size_t>(b)] - rc;
          return std::atan2(u1.dot(da), u0.dot(da)) < std::atan2(u1.dot(db), u0.dot(db));
        });
        int rcid = nv + static_cast<int>(extra_points_.size());
        extra_points_.push_back(rc);
        const int k = static_cast<int>(ridge.size());
        for (int e = 0; e < k; ++e) {
          int a = ridge[static_cast<std::size_t>(e)];
          int b = ridge[static_cast<std::size_t>((e + 1) % k)];
          double m = simplex_measure({c, rc, vertices_[static_cast<std::size_t>(a)],
                                      vertices_[static_cast<std::size_t>(b)]});
          if (m <= 0.0) continue;
          f.simplices.push_back({cid, rcid, a, b});
          f.area += m;
        }
      }
    }

    area_normal_sum += f.area * vn;
    volume_ += f.area * (z[i] - vn.dot(interior_point_)) / static_cast<double>(n);
  }

  minkowski_defect_ = area_normal_sum.norm();
  if (!(volume_ > 0.0)) throw DegenerateShapeError("wulff shape: nonpositive volume");
}

double Polytope::surface_area() const {
  double s = 0.0;
  for (const Facet& f : facets_) s += f.area;
  return s;
}

double Polytope::outer_radius() const {
  double r = 0.0;
  for (const Vector& v : vertices_) r = std::max(r, v.norm());
  return r;
}

const Vector& Polytope::point(int id) const {
  const int nv = static_cast<int>(vertices_.size());
  if (id < nv) return vertices_[static_cast<std::size_t>(id)];
  return extra_points_[static_cast<std::size_t>(id - nv)];
}

double Polytope::support(const Vector& v) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const Vector& x : vertices_) best = std::max(best, x.dot(v));
  return best;
}

double Polytope::radial(const Vector& x, const Vector& u) const {
  Vector s = spec_.offsets - spec_.normals * x;
  if (s.minCoeff() < tol_.interior_slack)
    throw DomainError("radial function: evaluation point is not strictly interior");
  Vector d = spec_.normals * u;
  double rho = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.size(); ++i) {
    if (d[i] > 1e-14) rho = std::min(rho, s[i] / d[i]);
  }
  return rho;
}

double Polytope::ray_exit(const Vector& x, const Vector& u) const {
  Vector s = spec_.offsets - spec_.normals * x;
  Vector d = spec_.normals * u;
  double t = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.size(); ++i) {
    if (d[i] > 1e-14) t = std::min(t, s[i] / d[i]);
  }
  return std::max(t, 0.0);
}

bool Polytope::contains(const Vector& x, double slack) const {
  return ((spec_.offsets - spec_.normals * x).array() >= slack).all();
}

// ---------------------------------------------------------------------------
// Free functions

Polytope wulff_shape(const HalfspaceSpec& spec, const Tolerances& tol) { return Polytope(spec, tol); }

double support_function(const Polytope& P, const Vector& v) { return P.support(v); }

Vector tighten(const HalfspaceSpec& spec, const Tolerances& tol) {
  Polytope P(spec, tol);
  Vector out(spec.count());
  for (int i = 0; i < spec.count(); ++i) out[i] = P.support(spec.normals.row(i).transpose());
  return out;
}

double radial_function(const Polytope& P, const Vector& x, const Vector& u) { return P.radial(x, u); }

std::pair<Vector, double> chebyshev_center(const HalfspaceSpec& spec) {
  const int N = spec.count();
  const int n = spec.dim();
  Matrix A(N, n + 1);
  A.leftCols(n) = spec.normals;
  A.col(n).setOnes();
  Vector c = Vector::Zero(n + 1);
  c[n] = 1.0;
  lp::Result res = lp::maximize(A, spec.offsets, c);
  if (res.status != lp::Status::optimal)
    throw DegenerateShapeError("chebyshev center: normals do not bound the shape");
  return {res.x.head(n), res.x[n]};
}

std::vector<Vector> facet_sample(const Polytope& P, int facet_index, int count, std::uint64_t seed) {
  const Facet& f = P.facet(facet_index);
  if (f.simplices.empty()) throw DomainError("facet sample: facet is empty");
  const int n = P.dim();
  std::vector<double> cum;
  cum.reserve(f.simplices.size());
  double total = 0.0;
  for (const auto& s : f.simplices) {
    std::vector<Vector> pts;
    for (int id : s) pts.push_back(P.point(id));
    total += simplex_measure(pts);
    cum.push_back(total);
  }
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    double r = unif(rng) * total;
    std::size_t si = static_cast<std::size_t>(std::lower_bound(cum.begin(), cum.end(), r) - cum.begin());
    if (si >= f.simplices.size()) si = f.simplices.size() - 1;
    const auto& s = f.simplices[si];
    // symmetric Dirichlet barycentric coordinates
    Vector x = Vector::Zero(n);
    double wsum = 0.0;
    std::vector<double> w(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
      w[j] = expo(rng);
      wsum += w[j];
    }
    for (std::size_t j = 0; j < s.size(); ++j) x += (w[j] / wsum) * P.point(s[j]);
    out.push_back(x);
  }
  return out;
}

double volume(const Polytope& P) { return P.volume(); }
double surface_area(const Polytope& P) { return P.surface_area(); }

std::vector<int> boundary_cycle(const Polytope& P) {
  if (P.dim() != 2) throw DomainError("boundary cycle: only defined for polygons");
  std::vector<int> order(P.vertices().size());
  std::iota(order.begin(), order.end(), 0);
  const Vector c = P.interior_point();
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    Vector da = P.vertices()[static_cast<std::size_t>(a)] - c;
    Vector db = P.vertices()[static_cast<std::size_t>(b)] - c;
    return std::atan2(da[1], da[0]) < std::atan2(db[1], db[0]);
  });
  return order;
}

InteriorSampler::InteriorSampler(const Polytope& P) : poly_(&P) {
  double total = 0.0;
  for (const Facet& f : P.facets()) {
    for (const auto& s : f.simplices) {
      std::vector<Vector> pts;
      pts.push_back(P.interior_point());
      for (int id : s) pts.push_back(P.point(id));
      double m = simplex_measure(pts);
      if (m <= 0.0) continue;
      simplices_.push_back(s);
      total += m;
      cumulative_.push_back(total);
    }
  }
  if (simplices_.empty()) throw DegenerateShapeError("interior sampler: no simplices");
}

Vector InteriorSampler::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  double r = unif(rng) * cumulative_.back();
  std::size_t si =
      static_cast<std::size_t>(std::lower_bound(cumulative_.begin(), cumulative_.end(), r) - cumulative_.begin());
  if (si >= simplices_.size()) si = simplices_.size() - 1;
  const auto& s = simplices_[si];
  const int n = poly_->dim();
  Vector x = Vector::Zero(n);
  double wsum = 0.0;
  std::vector<double> w(s.size() + 1);
  for (std::size_t j = 0; j < w.size(); ++j) {
    w[j] = expo(rng);
    wsum += w[j];
  }
  x += (w[0] / wsum) * poly_->interior_point();
  for (std::size_t j = 0; j < s.size(); ++j) x += (w[j + 1] / wsum) * poly_->point(s[j]);
  return x;
}

}  // namespace chordmink
