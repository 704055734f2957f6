#pragma once

// Good observation schemes: Gaussian (unit covariance), Poisson and
// Discrete. Each scheme provides its density, a sampler, the Hellinger
// rate function psi(mu, nu) = ln \int sqrt(p_mu p_nu) with exact gradients
// and the exponential-moment functional ln E_mu[exp(phi)] for affine phi.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace seqtest {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Parameter of a density p_mu: Gaussian mean, Poisson intensities or
/// Discrete probabilities.
using ParameterPoint = Vector;

/// Random source used everywhere randomness is needed. Always injected.
using Rng = std::mt19937_64;

enum class SchemeType { Gaussian, Poisson, Discrete };

struct SchemeKind {
  SchemeType type = SchemeType::Gaussian;
  int n = 1;  // parameter dimension; alphabet size for Discrete

  static SchemeKind gaussian(int n) { return {SchemeType::Gaussian, n}; }
  static SchemeKind poisson(int n) { return {SchemeType::Poisson, n}; }
  static SchemeKind discrete(int m) { return {SchemeType::Discrete, m}; }

  bool operator==(const SchemeKind&) const = default;
};

std::string to_string(SchemeType type);
SchemeType scheme_type_from_string(const std::string& name);

/// Smallest admissible Poisson intensity / Discrete probability.
inline constexpr double kDomainFloor = 1e-12;
/// Tolerance on |sum(mu) - 1| for Discrete parameters.
inline constexpr double kSimplexTolerance = 1e-12;

/// Discrete observation: a 0-based category index.
struct Category {
  int index = 0;
  bool operator==(const Category&) const = default;
};

/// Gaussian observations are real vectors, Poisson observations are count
/// vectors (stored as doubles holding integers), Discrete observations are
/// category indices.
using Observation = std::variant<Vector, Category>;

/// phi(omega) = a^T t(omega) + b, where t(omega) is omega itself for
/// Gaussian/Poisson and the indicator of the category for Discrete (so that
/// a is the value table and b a common offset).
struct AffineFunctional {
  Vector a;
  double b = 0.0;

  double operator()(const Observation& omega) const;
};

/// Throws InvalidParameter unless mu belongs to the scheme's domain.
void check_parameter(const SchemeKind& scheme, const ParameterPoint& mu);
bool is_valid_parameter(const SchemeKind& scheme, const ParameterPoint& mu);

/// Throws InputError unless omega is a legal observation for the scheme.
void check_observation(const SchemeKind& scheme, const Observation& omega);

double log_density(const SchemeKind& scheme, const ParameterPoint& mu,
                   const Observation& omega);

Observation sample_one(const SchemeKind& scheme, const ParameterPoint& mu,
                       Rng& rng);

std::vector<Observation> sample(const SchemeKind& scheme,
                                const ParameterPoint& mu, Rng& rng,
                                std::size_t count);

struct RateValue {
  double value = 0.0;
  Vector grad_mu;
  Vector grad_nu;
};

/// psi(mu, nu) and its partial gradients.
RateValue rate(const SchemeKind& scheme, const ParameterPoint& mu,
               const ParameterPoint& nu);

/// psi(mu, nu) only, without domain checks (hot loops of the solvers).
double rate_value_unchecked(const SchemeKind& scheme, const Vector& mu,
                            const Vector& nu);
/// Partial gradients of psi without domain checks.
void rate_gradients_unchecked(const SchemeKind& scheme, const Vector& mu,
                              const Vector& nu, Vector& grad_mu,
                              Vector& grad_nu);

/// ln E_mu[exp(phi(omega))], evaluated exactly.
double log_mgf(const SchemeKind& scheme, const AffineFunctional& phi,
               const ParameterPoint& mu);

/// Gradient of log_mgf with respect to mu.
Vector log_mgf_gradient(const SchemeKind& scheme, const AffineFunctional& phi,
                        const ParameterPoint& mu);

/// The affine form of 1/2 ln(p_mu / p_nu).
AffineFunctional half_log_ratio(const SchemeKind& scheme,
                                const ParameterPoint& mu,
                                const ParameterPoint& nu);

/// Sufficient statistic of an observation prefix: the sum of t(omega_t)
/// and the number of observations. Affine detectors summed over the prefix
/// depend on the sample only through it.
struct SampleStatistic {
  Vector sum;
  std::int64_t count = 0;

  explicit SampleStatistic(int n = 0) : sum(Vector::Zero(n)) {}
  void add(const Observation& omega);
};

}  // namespace seqtest
