#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "chordmink/linprog.hpp"
#include "chordmink/rng.hpp"

using namespace chordmink;

namespace {

// Brute-force oracle: the optimum of a feasible bounded LP sits on a vertex
// defined by d active rows.
lp::Result brute_force(const Matrix& A, const Vector& b, const Vector& c) {
  const int m = static_cast<int>(A.rows());
  const int d = static_cast<int>(A.cols());
  lp::Result best;
  best.status = lp::Status::infeasible;
  std::vector<int> idx(static_cast<std::size_t>(d));
  std::function<void(int, int)> rec = [&](int start, int k) {
    if (k == d) {
      Matrix M(d, d);
      Vector rhs(d);
      for (int r = 0; r < d; ++r) {
        M.row(r) = A.row(idx[static_cast<std::size_t>(r)]);
        rhs[r] = b[idx[static_cast<std::size_t>(r)]];
      }
      Eigen::FullPivLU<Matrix> lu(M);
      if (!lu.isInvertible()) return;
      Vector x = lu.solve(rhs);
      if (((A * x - b).array() <= 1e-8).all()) {
        double obj = c.dot(x);
        if (best.status != lp::Status::optimal || obj > best.objective) {
          best.status = lp::Status::optimal;
          best.objective = obj;
          best.x = x;
        }
      }
      return;
    }
    for (int i = start; i < m; ++i) {
      idx[static_cast<std::size_t>(k)] = i;
      rec(i + 1, k + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("unit box maximization") {
  Matrix A(4, 2);
  A << 1, 0, -1, 0, 0, 1, 0, -1;
  Vector b(4);
  b << 1, 1, 1, 1;
  Vector c(2);
  c << 1, 2;
  auto res = lp::maximize(A, b, c);
  REQUIRE(res.status == lp::Status::optimal);
  CHECK(res.objective == doctest::Approx(3.0));
  CHECK(res.x[0] == doctest::Approx(1.0));
  CHECK(res.x[1] == doctest::Approx(1.0));
}

TEST_CASE("unbounded and degenerate cases") {
  Matrix A(1, 2);
  A << 1, 0;
  Vector b(1);
  b << 1;
  Vector c(2);
  c << 0, 1;
  CHECK(lp::maximize(A, b, c).status == lp::Status::unbounded);

  // objective orthogonal to the unbounded direction is still optimal
  Vector c2(2);
  c2 << 1, 0;
  auto res = lp::maximize(A, b, c2);
  REQUIRE(res.status == lp::Status::optimal);
  CHECK(res.objective == doctest::Approx(1.0));
}

TEST_CASE("random LPs agree with the vertex oracle") {
  auto rng = make_rng(12345);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  for (int trial = 0; trial < 60; ++trial) {
    int d = 2 + static_cast<int>(trial % 3);
    int m = d + 4 + static_cast<int>(trial % 7);
    Matrix A(m + 2 * d, d);
    Vector b(m + 2 * d);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < d; ++j) A(i, j) = gauss(rng);
      b[i] = unif(rng);
    }
    // bounding box rows keep the problem bounded; origin stays feasible
    for (int j = 0; j < d; ++j) {
      A.row(m + 2 * j).setZero();
      A(m + 2 * j, j) = 1.0;
      b[m + 2 * j] = 3.0;
      A.row(m + 2 * j + 1).setZero();
      A(m + 2 * j + 1, j) = -1.0;
      b[m + 2 * j + 1] = 3.0;
    }
    Vector c(d);
    for (int j = 0; j < d; ++j) c[j] = gauss(rng);

    auto got = lp::maximize(A, b, c);
    auto want = brute_force(A, b, c);
    REQUIRE(got.status == lp::Status::optimal);
    REQUIRE(want.status == lp::Status::optimal);
    CHECK(got.objective == doctest::Approx(want.objective).epsilon(1e-7));
    CHECK(((A * got.x - b).array() <= 1e-7).all());
  }
}
