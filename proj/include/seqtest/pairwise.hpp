#pragma once

// Detectors phi(omega) = 1/2 ln(p_mu*(omega) / p_nu*(omega)) built from
// saddle points, exact verification of their risks and the calculus of
// repeated observations.

#include <functional>
#include <span>

#include "seqtest/convexgeom.hpp"

namespace seqtest {

struct Detector {
  SchemeKind scheme;
  ParameterPoint mu_star;
  ParameterPoint nu_star;
  double shift = 0.0;
  double risk_log = 0.0;  // ln of the risk, the saddle value
  /// Closed form of 1/2 ln(p_mu* / p_nu*), without the shift.
  AffineFunctional affine;

  double operator()(const Observation& omega) const { return affine(omega) - shift; }
  double risk() const;
  Detector with_shift(double s) const;
  /// The detector for the swapped pair: -phi, with the shift negated too.
  Detector negated() const;
};

Detector build_detector(const SaddlePoint& saddle, const SchemeKind& scheme);

struct RiskCheck {
  double side1 = 0.0;  // sup over X1 of E_mu exp(-phi)
  double side2 = 0.0;  // sup over X2 of E_nu exp(+phi)
  ParameterPoint argmax1;
  ParameterPoint argmax2;
};

/// Both exponential moments maximized exactly (the exponent is concave in
/// the parameter) by conditional gradient over each body.
RiskCheck verify_detector_risk(const Detector& detector, const ConvexBody& X1,
                               const ConvexBody& X2, double tol = 1e-13);

/// phi^(K)(omega_1..omega_K) = sum_t phi_affine(omega_t) - shift.
class RepeatedDetector {
 public:
  RepeatedDetector(Detector base, std::int64_t K);

  std::int64_t K() const { return K_; }
  const Detector& base() const { return base_; }
  double risk_log() const { return static_cast<double>(K_) * base_.risk_log; }
  double risk() const;

  /// Throws InputError when the sample length differs from K.
  double operator()(std::span<const Observation> sample) const;

 private:
  Detector base_;
  std::int64_t K_;
};

RepeatedDetector repeated_detector(const Detector& detector, std::int64_t K);

/// Smallest K with eps_star^K <= eps_target.
std::int64_t sample_size_for_risk(double eps_star, double eps_target);

/// Ceil(2 Kbar / (1 - 2 ln 2 / ln(1/eps))), for eps in (0, 1/4).
std::int64_t near_optimality_factor(double eps, std::int64_t K_bar);

/// Detector induced by a simple test of risk eps_bar:
/// omega -> 1/2 ln((1 - eps_bar) / eps_bar) * test(omega).
struct TestDetector {
  std::function<int(const Observation&)> test;
  double magnitude = 0.0;
  double risk = 1.0;  // 2 sqrt(eps_bar (1 - eps_bar))

  double operator()(const Observation& omega) const;
};

TestDetector detector_from_test(std::function<int(const Observation&)> test, double eps_bar);

}  // namespace seqtest
