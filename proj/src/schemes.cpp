#include "seqtest/schemes.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "seqtest/errors.hpp"

namespace seqtest {

std::string to_string(SchemeType type) {
  switch (type) {
    case SchemeType::Gaussian: return "gaussian";
    case SchemeType::Poisson: return "poisson";
    case SchemeType::Discrete: return "discrete";
  }
  return "unknown";
}

SchemeType scheme_type_from_string(const std::string& name) {
  if (name == "gaussian") return SchemeType::Gaussian;
  if (name == "poisson") return SchemeType::Poisson;
  if (name == "discrete") return SchemeType::Discrete;
  throw InputError("unknown observation scheme '" + name + "'");
}

namespace {

std::string describe(const Vector& v) {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

const Vector& vector_of(const Observation& omega) {
  return std::get<Vector>(omega);
}

}  // namespace

bool is_valid_parameter(const SchemeKind& scheme, const ParameterPoint& mu) {
  if (mu.size() != scheme.n || !mu.allFinite()) return false;
  switch (scheme.type) {
    case SchemeType::Gaussian:
      return true;
    case SchemeType::Poisson:
      return (mu.array() >= kDomainFloor).all();
    case SchemeType::Discrete:
      return (mu.array() >= kDomainFloor).all() &&
             std::abs(mu.sum() - 1.0) <= kSimplexTolerance;
  }
  return false;
}

void check_parameter(const SchemeKind& scheme, const ParameterPoint& mu) {
  if (scheme.n < 1) throw InvalidParameter("scheme dimension must be >= 1");
  if (!is_valid_parameter(scheme, mu)) {
    throw InvalidParameter("parameter " + describe(mu) +
                           " outside the domain of the " +
                           to_string(scheme.type) + " scheme (n=" +
                           std::to_string(scheme.n) + ")");
  }
}

void check_observation(const SchemeKind& scheme, const Observation& omega) {
  if (scheme.type == SchemeType::Discrete) {
    const auto* c = std::get_if<Category>(&omega);
    if (c == nullptr || c->index < 0 || c->index >= scheme.n) {
      throw InputError("discrete observation must be a category in [0, n)");
    }
    return;
  }
  const auto* v = std::get_if<Vector>(&omega);
  if (v == nullptr || v->size() != scheme.n) {
    throw InputError("observation must be a vector of length n");
  }
  if (scheme.type == SchemeType::Poisson) {
    for (double x : *v) {
      if (x < 0.0 || x != std::floor(x)) {
        throw InputError("poisson observation must be a nonnegative count");
      }
    }
  }
}

double AffineFunctional::operator()(const Observation& omega) const {
  if (const auto* c = std::get_if<Category>(&omega)) return a[c->index] + b;
  return a.dot(vector_of(omega)) + b;
}

double log_density(const SchemeKind& scheme, const ParameterPoint& mu,
                   const Observation& omega) {
  check_parameter(scheme, mu);
  check_observation(scheme, omega);
  switch (scheme.type) {
    case SchemeType::Gaussian: {
      const Vector& w = vector_of(omega);
      return -0.5 * scheme.n * std::log(2.0 * std::numbers::pi) -
             0.5 * (w - mu).squaredNorm();
    }
    case SchemeType::Poisson: {
      const Vector& w = vector_of(omega);
      double acc = 0.0;
      for (int i = 0; i < scheme.n; ++i) {
        acc += w[i] * std::log(mu[i]) - mu[i] - std::lgamma(w[i] + 1.0);
      }
      return acc;
    }
    case SchemeType::Discrete:
      return std::log(mu[std::get<Category>(omega).index]);
  }
  return 0.0;
}

Observation sample_one(const SchemeKind& scheme, const ParameterPoint& mu,
                       Rng& rng) {
  switch (scheme.type) {
    case SchemeType::Gaussian: {
      std::normal_distribution<double> normal(0.0, 1.0);
      Vector w(scheme.n);
      for (int i = 0; i < scheme.n; ++i) w[i] = mu[i] + normal(rng);
      return w;
    }
    case SchemeType::Poisson: {
      Vector w(scheme.n);
      for (int i = 0; i < scheme.n; ++i) {
        std::poisson_distribution<long long> poisson(mu[i]);
        w[i] = static_cast<double>(poisson(rng));
      }
      return w;
    }
    case SchemeType::Discrete: {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      double u = unif(rng) * mu.sum();
      int k = 0;
      for (; k + 1 < scheme.n; ++k) {
        u -= mu[k];
        if (u < 0.0) break;
      }
      return Category{k};
    }
  }
  return Vector{};
}

std::vector<Observation> sample(const SchemeKind& scheme,
                                const ParameterPoint& mu, Rng& rng,
                                std::size_t count) {
  check_parameter(scheme, mu);
  if (count == 0) throw InputError("sample count must be positive");
  std::vector<Observation> out;
  out.reserve(count);
  for (std::size_t t = 0; t < count; ++t) out.push_back(sample_one(scheme, mu, rng));
  return out;
}

double rate_value_unchecked(const SchemeKind& scheme, const Vector& mu,
                            const Vector& nu) {
  // Every term is symmetric in (mu_i, nu_i) in floating point, so the value
  // does not depend on argument order.
  switch (scheme.type) {
    case SchemeType::Gaussian:
      return -0.125 * (mu - nu).squaredNorm();
    case SchemeType::Poisson: {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < mu.size(); ++i) {
        const double d = std::sqrt(mu[i]) - std::sqrt(nu[i]);
        acc += d * d;
      }
      return -0.5 * acc;
    }
    case SchemeType::Discrete: {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < mu.size(); ++i) acc += std::sqrt(mu[i] * nu[i]);
      return std::log(acc);
    }
  }
  return 0.0;
}

void rate_gradients_unchecked(const SchemeKind& scheme, const Vector& mu,
                              const Vector& nu, Vector& grad_mu,
                              Vector& grad_nu) {
  const Eigen::Index n = mu.size();
  grad_mu.resize(n);
  grad_nu.resize(n);
  switch (scheme.type) {
    case SchemeType::Gaussian:
      grad_mu = -0.25 * (mu - nu);
      grad_nu = -grad_mu;
      return;
    case SchemeType::Poisson:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double sm = std::sqrt(mu[i]);
        const double sn = std::sqrt(nu[i]);
        grad_mu[i] = -0.5 * (1.0 - sn / sm);
        grad_nu[i] = -0.5 * (1.0 - sm / sn);
      }
      return;
    case SchemeType::Discrete: {
      double affinity = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) affinity += std::sqrt(mu[i] * nu[i]);
      for (Eigen::Index i = 0; i < n; ++i) {
        grad_mu[i] = 0.5 * std::sqrt(nu[i] / mu[i]) / affinity;
        grad_nu[i] = 0.5 * std::sqrt(mu[i] / nu[i]) / affinity;
      }
      return;
    }
  }
}

RateValue rate(const SchemeKind& scheme, const ParameterPoint& mu,
               const ParameterPoint& nu) {
  check_parameter(scheme, mu);
  check_parameter(scheme, nu);
  RateValue out;
  out.value = rate_value_unchecked(scheme, mu, nu);
  rate_gradients_unchecked(scheme, mu, nu, out.grad_mu, out.grad_nu);
  return out;
}

double log_mgf(const SchemeKind& scheme, const AffineFunctional& phi,
               const ParameterPoint& mu) {
  check_parameter(scheme, mu);
  switch (scheme.type) {
    case SchemeType::Gaussian:
      return phi.b + phi.a.dot(mu) + 0.5 * phi.a.squaredNorm();
    case SchemeType::Poisson:
      return (phi.a.array().exp() - 1.0).matrix().dot(mu) + phi.b;
    case SchemeType::Discrete: {
      // log-sum-exp over the categories
      const double top = phi.a.maxCoeff();
      double acc = 0.0;
      for (int w = 0; w < scheme.n; ++w) acc += std::exp(phi.a[w] - top) * mu[w];
      return phi.b + top + std::log(acc);
    }
  }
  return 0.0;
}

Vector log_mgf_gradient(const SchemeKind& scheme, const AffineFunctional& phi,
                        const ParameterPoint& mu) {
  switch (scheme.type) {
    case SchemeType::Gaussian:
      return phi.a;
    case SchemeType::Poisson:
      return (phi.a.array().exp() - 1.0).matrix();
    case SchemeType::Discrete: {
      const double top = phi.a.maxCoeff();
      Vector w = (phi.a.array() - top).exp().matrix();
      return w / w.dot(mu);
    }
  }
  return Vector{};
}

AffineFunctional half_log_ratio(const SchemeKind& scheme,
                                const ParameterPoint& mu,
                                const ParameterPoint& nu) {
  check_parameter(scheme, mu);
  check_parameter(scheme, nu);
  AffineFunctional phi;
  switch (scheme.type) {
    case SchemeType::Gaussian:
      // 1/4 (|w - nu|^2 - |w - mu|^2)
      phi.a = 0.5 * (mu - nu);
      phi.b = -0.25 * (mu.squaredNorm() - nu.squaredNorm());
      break;
    case SchemeType::Poisson:
      phi.a = 0.5 * (mu.array().log() - nu.array().log()).matrix();
      phi.b = -0.5 * (mu - nu).sum();
      break;
    case SchemeType::Discrete:
      phi.a = 0.5 * (mu.array().log() - nu.array().log()).matrix();
      phi.b = 0.0;
      break;
  }
  return phi;
}

void SampleStatistic::add(const Observation& omega) {
  if (const auto* c = std::get_if<Category>(&omega)) {
    sum[c->index] += 1.0;
  } else {
    sum += std::get<Vector>(omega);
  }
  ++count;
}

}  // namespace seqtest
