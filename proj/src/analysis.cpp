#include "seqtest/analysis.hpp"

#include <cmath>
#include <limits>

#include "parallel.hpp"
#include "seqtest/errors.hpp"

namespace seqtest {

SeparationReport separation(const HypothesisFamily& family, double tol, int threads) {
  validate_family(family);
  const int J = family.size();
  std::vector<std::pair<int, int>> work;
  for (int j = 0; j < J; ++j) {
    for (int j2 = j + 1; j2 < J; ++j2) {
      if (family.colors[j] != family.colors[j2]) work.emplace_back(j, j2);
    }
  }
  SeparationReport out;
  out.psi = Matrix::Zero(J, J);
  detail::parallel_for(work.size(), threads, [&](std::size_t w) {
    const auto [j, j2] = work[w];
    const double opt =
        solve_pairwise(family.scheme, family.bodies[j], family.bodies[j2], {tol}).opt;
    out.psi(j, j2) = out.psi(j2, j) = opt;
  });
  out.d = std::numeric_limits<double>::infinity();
  for (const auto& [j, j2] : work) {
    const double opt = out.psi(j, j2);
    if (opt >= -1e-12) {
      throw AssumptionViolation("parameter sets " + std::to_string(j) + " and " +
                                std::to_string(j2) +
                                " have different colors but are not separated");
    }
    if (-opt < out.d) {
      out.d = -opt;
      out.argmin_j = j;
      out.argmin_j2 = j2;
    }
  }
  return out;
}

KPlus k_plus(double eps, double d) {
  if (!(eps > 0.0) || !(eps < 0.25)) throw InputError("eps must lie in (0, 1/4)");
  if (!(d > 0.0)) throw InputError("d must be positive");
  const double L = std::log(1.0 / eps);
  return {(0.5 * L - std::log(2.0)) / d, L / (4.0 * d)};
}

WorstCaseBound worst_case_bound(int J, double eps, double d, double kappa) {
  if (!(eps > 0.0) || !(eps < 0.25)) throw InputError("eps must lie in (0, 1/4)");
  if (J < 2) throw InputError("J must be >= 2");
  if (!(kappa >= 1.0)) throw InputError("kappa must be >= 1");
  if (!(d > 0.0)) throw InputError("d must be positive");
  const double L = std::log(static_cast<double>(J) * J / eps);
  return {std::log(1.0 / d) <= kappa * L, std::max(1.0, 5.0 * kappa * L / d)};
}

int s_star(const ParameterPoint& mu, const SequentialTest& test, double tol) {
  const HypothesisFamily& f = test.family;
  std::vector<int> home;
  for (int j = 0; j < f.size(); ++j) {
    if (f.bodies[j].contains(mu, tol)) home.push_back(j);
  }
  if (home.empty()) throw InputError("parameter lies in none of the sets");
  for (const StageComponent& st : test.stages) {
    for (int j : home) {
      bool good = true;
      for (int j2 = 0; j2 < f.size() && good; ++j2) {
        if (f.colors[j2] != f.colors[j] && st.cuts[j][j2](mu) > 0.0) good = false;
      }
      if (good) return st.s;
    }
  }
  return test.schedule.S;
}

double depth(const ParameterPoint& mu, const SequentialTest& test, double tol) {
  double rho = -std::numeric_limits<double>::infinity();
  for (const ConvexBody& b : test.family.bodies) {
    if (b.contains(mu, tol)) rho = std::max(rho, b.inner_radius(mu));
  }
  if (!std::isfinite(rho)) throw InputError("parameter lies in none of the sets");
  return std::max(0.0, rho);
}

int s_bar_gaussian(const ParameterPoint& mu, const SequentialTest& test,
                   const SeparationReport& sep) {
  if (test.family.scheme.type != SchemeType::Gaussian) {
    throw Unsupported("sbar(mu) is defined for Gaussian observation schemes only");
  }
  const double rho = depth(mu, test);
  const double threshold = sep.d + std::sqrt(sep.d / 2.0) * rho;
  for (int s = 1; s <= test.schedule.S; ++s) {
    if (test.schedule.r_s[s - 1] <= threshold) return s;
  }
  return test.schedule.S;
}

}  // namespace seqtest
