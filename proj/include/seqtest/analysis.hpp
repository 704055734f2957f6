#pragma once

// Separation of a family, the lower bound on the sample size of any
// reliable test, the worst-case stage budget and per-parameter stopping
// bounds s*(mu), sbar(mu).

#include "seqtest/sequential.hpp"

namespace seqtest {

struct SeparationReport {
  double d = 0.0;
  int argmin_j = -1;
  int argmin_j2 = -1;
  Matrix psi;  // psi(j, j') for cross-color pairs, 0 elsewhere
};

/// d = min over cross-color pairs of -psi_{jj'}. Throws AssumptionViolation
/// when some cross-color optimum is >= -1e-12.
SeparationReport separation(const HypothesisFamily& family, double tol = 1e-9, int threads = 1);

struct KPlus {
  double k_plus = 0.0;  // (1/2 ln(1/eps) - ln 2) / d
  double floor_bound = 0.0;  // ln(1/eps) / (4 d)
};

KPlus k_plus(double eps, double d);

struct WorstCaseBound {
  bool holds_premise = false;  // ln(1/d) <= kappa ln(J^2/eps)
  double bound = 0.0;          // max(1, 5 kappa ln(J^2/eps) / d)
};

WorstCaseBound worst_case_bound(int J, double eps, double d, double kappa = 5.0);

/// Smallest schedule stage s at which mu lies in the good cell of some body
/// containing it. Throws InputError when mu lies in no body.
int s_star(const ParameterPoint& mu, const SequentialTest& test, double tol = 1e-12);

/// Largest inscribed ball radius around mu over the bodies containing it.
double depth(const ParameterPoint& mu, const SequentialTest& test, double tol = 1e-12);

/// min{s <= S : r(s) <= d + sqrt(d/2) rho(mu)}. Gaussian schemes only.
int s_bar_gaussian(const ParameterPoint& mu, const SequentialTest& test,
                   const SeparationReport& sep);

}  // namespace seqtest
