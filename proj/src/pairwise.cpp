#include "seqtest/pairwise.hpp"

#include <cmath>

#include "seqtest/errors.hpp"

namespace seqtest {

double Detector::risk() const { return std::exp(risk_log); }

Detector Detector::with_shift(double s) const {
  Detector out = *this;
  out.shift = s;
  return out;
}

Detector Detector::negated() const {
  Detector out = *this;
  std::swap(out.mu_star, out.nu_star);
  out.affine.a = -affine.a;
  out.affine.b = -affine.b;
  out.shift = -shift;
  return out;
}

Detector build_detector(const SaddlePoint& saddle, const SchemeKind& scheme) {
  check_parameter(scheme, saddle.mu_star);
  check_parameter(scheme, saddle.nu_star);
  Detector d;
  d.scheme = scheme;
  d.mu_star = saddle.mu_star;
  d.nu_star = saddle.nu_star;
  d.risk_log = std::min(0.0, saddle.opt);
  d.affine = half_log_ratio(scheme, saddle.mu_star, saddle.nu_star);
  return d;
}

namespace {

// max over the body of ln E_mu exp(phi).
std::pair<double, Vector> max_log_mgf(const SchemeKind& scheme, const AffineFunctional& phi,
                                      const ConvexBody& body, double tol) {
  ConcaveProgram program;
  program.blocks = {&body};
  program.value = [&](const BlockPoint& x) { return log_mgf(scheme, phi, x[0]); };
  program.gradient = [&](const BlockPoint& x, BlockPoint& g) {
    g[0] = log_mgf_gradient(scheme, phi, x[0]);
  };
  const FrankWolfeResult fw = maximize_concave(program, {tol, 100000});
  if (!fw.converged && fw.gap > 1e-9) {
    throw SolverFailure("exponential moment maximization did not converge", fw.gap);
  }
  return {fw.value, fw.x[0]};
}

}  // namespace

RiskCheck verify_detector_risk(const Detector& detector, const ConvexBody& X1,
                               const ConvexBody& X2, double tol) {
  check_body_in_domain(detector.scheme, X1);
  check_body_in_domain(detector.scheme, X2);
  const AffineFunctional minus{-detector.affine.a, -detector.affine.b + detector.shift};
  const AffineFunctional plus{detector.affine.a, detector.affine.b - detector.shift};
  RiskCheck out;
  auto [v1, x1] = max_log_mgf(detector.scheme, minus, X1, tol);
  auto [v2, x2] = max_log_mgf(detector.scheme, plus, X2, tol);
  out.side1 = std::exp(v1);
  out.side2 = std::exp(v2);
  out.argmax1 = std::move(x1);
  out.argmax2 = std::move(x2);
  return out;
}

RepeatedDetector::RepeatedDetector(Detector base, std::int64_t K)
    : base_(std::move(base)), K_(K) {
  if (K < 1) throw InputError("repetition count K must be >= 1");
}

double RepeatedDetector::risk() const { return std::exp(risk_log()); }

double RepeatedDetector::operator()(std::span<const Observation> sample) const {
  if (static_cast<std::int64_t>(sample.size()) != K_) {
    throw InputError("sample length " + std::to_string(sample.size()) +
                     " differs from K = " + std::to_string(K_));
  }
  double acc = 0.0;
  for (const Observation& w : sample) acc += base_.affine(w);
  return acc - base_.shift;
}

RepeatedDetector repeated_detector(const Detector& detector, std::int64_t K) {
  return RepeatedDetector(detector, K);
}

std::int64_t sample_size_for_risk(double eps_star, double eps_target) {
  if (!(eps_star > 0.0) || !(eps_star < 1.0)) {
    throw InputError("no sample size reaches the target: eps_star must lie in (0, 1)");
  }
  if (!(eps_target > 0.0) || !(eps_target < 1.0)) {
    throw InputError("target risk must lie in (0, 1)");
  }
  const double ls = std::log(eps_star), lt = std::log(eps_target);
  auto k = static_cast<std::int64_t>(std::ceil(lt / ls));
  k = std::max<std::int64_t>(k, 1);
  // the quotient can land one off in floating point
  while (k > 1 && static_cast<double>(k - 1) * ls <= lt) --k;
  while (static_cast<double>(k) * ls > lt) ++k;
  return k;
}

std::int64_t near_optimality_factor(double eps, std::int64_t K_bar) {
  if (!(eps > 0.0) || !(eps < 0.25)) throw InputError("eps must lie in (0, 1/4)");
  if (K_bar < 1) throw InputError("K_bar must be >= 1");
  const double denom = 1.0 - 2.0 * std::log(2.0) / std::log(1.0 / eps);
  return static_cast<std::int64_t>(std::ceil(2.0 * static_cast<double>(K_bar) / denom));
}

double TestDetector::operator()(const Observation& omega) const {
  return magnitude * static_cast<double>(test(omega));
}

TestDetector detector_from_test(std::function<int(const Observation&)> test, double eps_bar) {
  if (!(eps_bar > 0.0) || !(eps_bar < 0.5)) throw InputError("eps_bar must lie in (0, 1/2)");
  TestDetector d;
  d.test = std::move(test);
  d.magnitude = 0.5 * std::log((1.0 - eps_bar) / eps_bar);
  d.risk = 2.0 * std::sqrt(eps_bar * (1.0 - eps_bar));
  return d;
}

}  // namespace seqtest
