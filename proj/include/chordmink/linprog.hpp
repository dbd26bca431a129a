#pragma once

#include "chordmink/types.hpp"

namespace chordmink::lp {

enum class Status { optimal, unbounded, infeasible };

struct Result {
  Status status = Status::infeasible;
  double objective = 0.0;
  Vector x;  // optimizer, valid when status == optimal
};

/// Maximizes c.x subject to A x <= b with x free. Geared towards the shapes
/// this project produces: few variables (<= 5), many inequality rows. Solved
/// through the dual in standard form with a two-phase tableau simplex and
/// Bland's rule.
Result maximize(const Matrix& A, const Vector& b, const Vector& c);

}  // namespace chordmink::lp
