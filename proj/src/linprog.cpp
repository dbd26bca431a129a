#include "chordmink/linprog.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace chordmink::lp {

namespace {

constexpr double kReducedCostTol = 1e-9;
constexpr double kPivotTol = 1e-11;

// Tableau simplex for  min f.lambda  s.t.  D lambda = g, lambda >= 0.
// Rows: d equality constraints; columns: M structural + d artificial.
class Simplex {
 public:
  Simplex(Matrix D, Vector g, const Vector& f)
      : d_(static_cast<int>(D.rows())), m_(static_cast<int>(D.cols())), f_(f) {
    // Nonnegative right-hand side so the artificial basis starts feasible.
    for (int r = 0; r < d_; ++r) {
      if (g[r] < 0.0) {
        D.row(r) = -D.row(r);
        g[r] = -g[r];
      }
    }
    T_.resize(d_, m_ + d_ + 1);
    T_.leftCols(m_) = D;
    T_.middleCols(m_, d_).setIdentity();
    T_.col(m_ + d_) = g;
    basis_.resize(d_);
    for (int r = 0; r < d_; ++r) basis_[r] = m_ + r;
  }

  bool phase1() {
    Eigen::RowVectorXd cost = Eigen::RowVectorXd::Zero(m_ + d_ + 1);
    cost.segment(m_, d_).setOnes();
    run(cost);
    double resid = 0.0;
    for (int r = 0; r < d_; ++r) {
      if (basis_[r] >= m_) resid += T_(r, m_ + d_);
    }
    return resid <= 1e-8;
  }

  // Returns false when the phase-2 objective is unbounded below.
  bool phase2() {
    Eigen::RowVectorXd cost = Eigen::RowVectorXd::Zero(m_ + d_ + 1);
    cost.head(m_) = f_.transpose();
    return run(cost);
  }

  const std::vector<int>& basis() const { return basis_; }

 private:
  // Price out the basic columns, then pivot with Bland's rule (smallest
  // entering index, smallest basic index on ratio ties) until no structural
  // column improves. Artificial columns never re-enter.
  bool run(Eigen::RowVectorXd cost) {
    Eigen::RowVectorXd z = cost;
    for (int r = 0; r < d_; ++r) {
      double cb = cost[basis_[r]];
      if (cb != 0.0) z -= cb * T_.row(r);
    }
    const long limit = 500000;
    for (long iter = 0; iter < limit; ++iter) {
      int enter = -1;
      for (int j = 0; j < m_; ++j) {
        if (z[j] < -kReducedCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < d_; ++r) {
        double a = T_(r, enter);
        if (a > kPivotTol) {
          double ratio = T_(r, m_ + d_) / a;
          bool better = leave < 0 || ratio < best - 1e-12;
          bool tie = leave >= 0 && std::abs(ratio - best) <= 1e-12 && basis_[r] < basis_[leave];
          if (better || tie) {
            best = std::min(best, ratio);
            leave = r;
          }
        }
      }
      if (leave < 0) return false;  // unbounded
      pivot(leave, enter, z);
    }
    throw ConvergenceError("lp: simplex iteration limit reached");
  }

  void pivot(int r, int c, Eigen::RowVectorXd& z) {
    T_.row(r) /= T_(r, c);
    for (int i = 0; i < d_; ++i) {
      if (i == r) continue;
      double a = T_(i, c);
      if (a != 0.0) T_.row(i) -= a * T_.row(r);
    }
    double a = z[c];
    if (a != 0.0) z -= a * T_.row(r);
    basis_[r] = c;
  }

  int d_, m_;
  Vector f_;
  Matrix T_;
  std::vector<int> basis_;
};

}  // namespace

Result maximize(const Matrix& A, const Vector& b, const Vector& c) {
  const int m = static_cast<int>(A.rows());
  const int d = static_cast<int>(A.cols());
  Result res;
  if (m == 0) {
    res.status = c.norm() < 1e-15 ? Status::optimal : Status::unbounded;
    res.x = Vector::Zero(d);
    return res;
  }

  // Dual:  min b.lambda  s.t.  A^T lambda = c, lambda >= 0.
  Simplex sx(A.transpose(), c, b);
  if (!sx.phase1()) {
    res.status = Status::unbounded;  // dual infeasible
    return res;
  }
  if (!sx.phase2()) {
    res.status = Status::infeasible;  // dual unbounded
    return res;
  }

  // Primal optimum = simplex multipliers of the final dual basis. Solving
  // A_B^T y = b_B against the unflipped rows absorbs the sign flips the
  // tableau applied; artificial columns pin y against +-e_r, and both signs
  // give the same zero equation.
  Matrix DB(d, d);
  Vector fB(d);
  const auto& basis = sx.basis();
  for (int r = 0; r < d; ++r) {
    int j = basis[r];
    if (j < m) {
      DB.col(r) = A.row(j).transpose();
      fB[r] = b[j];
    } else {
      DB.col(r) = Vector::Unit(d, j - m);
      fB[r] = 0.0;
    }
  }
  Vector y = DB.transpose().fullPivLu().solve(fB);
  res.status = Status::optimal;
  res.x = y;
  res.objective = c.dot(y);
  return res;
}

}  // namespace chordmink::lp
