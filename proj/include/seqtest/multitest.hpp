#pragma once

// Aggregation of pairwise detectors into a test of N hypotheses: risk
// matrices D_ij = eps_ij^k C_ij, their spectral norm and the skew-symmetric
// shifts alpha_ij = ln g_j - ln g_i built from a Perron vector g.

#include <optional>
#include <span>
#include <vector>

#include "seqtest/pairwise.hpp"

namespace seqtest {

/// Checks shapes and entries: eps symmetric in (0, 1] with unit diagonal,
/// closeness symmetric 0/1 with zero diagonal.
void check_risk_matrices(const Matrix& eps, const Matrix& closeness);

struct PerronResult {
  double value = 0.0;  // dominant eigenvalue
  Vector vector;       // positive, unit norm
  int iterations = 0;
};

/// Dominant eigenpair of a symmetric entrywise nonnegative matrix by power
/// iteration on a shifted copy (restarted at random if the iterate
/// degenerates).
PerronResult perron_eigen(const Matrix& D);

/// ln ||D||_{2,2} with D_ij = eps_ij^k C_ij, computed without underflow.
/// Returns -infinity for the zero matrix.
double log_risk_matrix_norm(const Matrix& eps, const Matrix& closeness, std::int64_t k);

double risk_matrix_norm(const Matrix& eps, const Matrix& closeness, std::int64_t k);

struct ShiftResult {
  Matrix alpha;         // skew-symmetric
  double achieved = 0;  // shift_risk at alpha
  Vector perron;        // the vector g
};

/// eta defaults to 1e-9 (max_ij D_ij + 1).
ShiftResult optimal_shifts(const Matrix& eps, const Matrix& closeness, std::int64_t k,
                           std::optional<double> eta = std::nullopt);

/// alpha_ij = ln g_j - ln g_i.
Matrix shifts_from_vector(const Vector& g);

/// max_i sum_{j : C_ij = 1} eps_ij^k exp(alpha_ij).
double shift_risk(const Matrix& eps, const Matrix& closeness, std::int64_t k,
                  const Matrix& alpha);

/// Hypotheses i with values(i, j) > 0 for every j with C_ij = 1, where
/// values(i, j) is the shifted detector phi_ij(omega^K) - alpha_ij.
std::vector<int> accept_from_values(const Matrix& values, const Matrix& closeness);

/// The aggregated test on a K-sample: detectors[i][j] carries the shift
/// alpha_ij and is read only where C_ij = 1. Throws InputError when the
/// sample length differs from K.
std::vector<int> aggregate_accept(const std::vector<std::vector<Detector>>& detectors,
                                  const Matrix& closeness, std::span<const Observation> sample,
                                  std::int64_t K);

}  // namespace seqtest
