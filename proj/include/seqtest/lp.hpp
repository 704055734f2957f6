#pragma once

// Small dense linear programs: minimize c^T x subject to A x <= b with x
// free. Two-phase tableau simplex with Bland's rule; intended for the low
// dimensional polytopes used as parameter sets.

#include "seqtest/schemes.hpp"

namespace seqtest {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vector x;            // a vertex minimizer when Optimal
  double value = 0.0;  // c^T x
  double infeasibility = 0.0;  // phase-one residual (row-normalized units)
};

/// Rows with |a_i| = 0 are allowed and are checked against b_i directly.
/// `feasibility_tol` bounds the phase-one residual accepted as feasible.
LpResult solve_lp(const Vector& c, const Matrix& A, const Vector& b,
                  double feasibility_tol = 1e-9);

/// True when {x : A x <= b + tol} is nonempty.
bool lp_feasible(const Matrix& A, const Vector& b, double tol = 1e-9);

}  // namespace seqtest
