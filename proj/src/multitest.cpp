#include "seqtest/multitest.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "seqtest/errors.hpp"

namespace seqtest {

void check_risk_matrices(const Matrix& eps, const Matrix& closeness) {
  const Eigen::Index N = eps.rows();
  if (eps.cols() != N || closeness.rows() != N || closeness.cols() != N) {
    throw InputError("risk and closeness matrices must be square of equal size");
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    if (closeness(i, i) != 0.0) throw InputError("closeness matrix must have zero diagonal");
    if (eps(i, i) != 1.0) throw InputError("risk matrix must have unit diagonal");
    for (Eigen::Index j = 0; j < N; ++j) {
      const double c = closeness(i, j);
      if ((c != 0.0 && c != 1.0) || c != closeness(j, i)) {
        throw InputError("closeness matrix must be symmetric with 0/1 entries");
      }
      if (!(eps(i, j) > 0.0) || eps(i, j) > 1.0 || eps(i, j) != eps(j, i)) {
        throw InputError("risks must be symmetric and lie in (0, 1]");
      }
    }
  }
}

PerronResult perron_eigen(const Matrix& D) {
  const Eigen::Index N = D.rows();
  PerronResult out;
  out.vector = Vector::Ones(N) / std::sqrt(static_cast<double>(N));
  const double scale = D.cwiseAbs().maxCoeff();
  if (N == 0 || scale == 0.0) return out;
  const Matrix A = D / scale;
  // Shift by half the largest row sum: all eigenvalues of A + sigma I become
  // nonnegative, so the iteration cannot oscillate between +lambda and -lambda.
  const double sigma = 0.5 * A.rowwise().sum().maxCoeff();
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unif(0.5, 1.5);

  Vector v = out.vector;
  double rq = v.dot(A * v);
  int stagnant = 0;
  constexpr int kMaxIterations = 200000;
  int it = 0;
  for (; it < kMaxIterations; ++it) {
    Vector w = A * v + sigma * v;
    const double norm = w.norm();
    if (!std::isfinite(norm) || norm <= std::numeric_limits<double>::min()) {
      for (Eigen::Index i = 0; i < N; ++i) w[i] = unif(rng);
      w.normalize();
    } else {
      w /= norm;
    }
    const Vector Aw = A * w;
    const double next = w.dot(Aw);
    // Collatz-Wielandt bracket on the support of w
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool positive = true;
    for (Eigen::Index i = 0; i < N; ++i) {
      if (w[i] <= 0.0) {
        positive = false;
        break;
      }
      lo = std::min(lo, Aw[i] / w[i]);
      hi = std::max(hi, Aw[i] / w[i]);
    }
    const double change = std::abs(next - rq);
    v = std::move(w);
    rq = next;
    if (positive && hi - lo <= 1e-15 * hi) break;
    if (change <= 1e-16 * std::abs(rq)) {
      if (++stagnant >= 20) break;
    } else {
      stagnant = 0;
    }
  }
  out.iterations = it;
  out.value = rq * scale;
  out.vector = v.cwiseAbs();
  return out;
}

namespace {

// k ln eps_ij where C_ij = 1, -infinity elsewhere.
Matrix log_entries(const Matrix& eps, const Matrix& closeness, std::int64_t k) {
  if (k < 1) throw InputError("sample count k must be >= 1");
  check_risk_matrices(eps, closeness);
  const Eigen::Index N = eps.rows();
  Matrix L(N, N);
  const double kd = static_cast<double>(k);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      L(i, j) = closeness(i, j) != 0.0 ? kd * std::log(eps(i, j))
                                       : -std::numeric_limits<double>::infinity();
    }
  }
  return L;
}

}  // namespace

double log_risk_matrix_norm(const Matrix& eps, const Matrix& closeness, std::int64_t k) {
  const Matrix L = log_entries(eps, closeness, k);
  const double M = L.size() ? L.maxCoeff() : -std::numeric_limits<double>::infinity();
  if (!std::isfinite(M)) return -std::numeric_limits<double>::infinity();
  const Matrix D = (L.array() - M).exp().matrix();
  return M + std::log(perron_eigen(D).value);
}

double risk_matrix_norm(const Matrix& eps, const Matrix& closeness, std::int64_t k) {
  return std::exp(log_risk_matrix_norm(eps, closeness, k));
}

Matrix shifts_from_vector(const Vector& g) {
  const Eigen::Index N = g.size();
  // g = m 2^e; exponent differences are kept apart from the mantissa logs so
  // that rescaling g by a power of two leaves alpha bit-identical
  Vector lm(N);
  std::vector<int> ex(static_cast<std::size_t>(N));
  for (Eigen::Index i = 0; i < N; ++i) lm[i] = std::log(std::frexp(g[i], &ex[i]));
  Matrix alpha(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      alpha(i, j) = (lm[j] - lm[i]) + (ex[j] - ex[i]) * std::numbers::ln2;
    }
  }
  return alpha;
}

double shift_risk(const Matrix& eps, const Matrix& closeness, std::int64_t k,
                  const Matrix& alpha) {
  const Matrix L = log_entries(eps, closeness, k);
  const Eigen::Index N = L.rows();
  if (alpha.rows() != N || alpha.cols() != N) throw InputError("shift matrix size mismatch");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
      if (closeness(i, j) != 0.0) row += std::exp(L(i, j) + alpha(i, j));
    }
    worst = std::max(worst, row);
  }
  return worst;
}

ShiftResult optimal_shifts(const Matrix& eps, const Matrix& closeness, std::int64_t k,
                           std::optional<double> eta) {
  const Matrix L = log_entries(eps, closeness, k);
  const Eigen::Index N = L.rows();
  double M = N ? L.maxCoeff() : 0.0;
  if (!std::isfinite(M)) M = 0.0;
  // D / e^M, so that large k does not underflow the whole matrix
  const Matrix D = (L.array() - M).exp().matrix();
  const double e = eta.value_or(1e-9 * (std::exp(M) + 1.0));
  if (!(e > 0.0)) throw InputError("perturbation eta must be positive");
  const double e_scaled = std::min(e * std::exp(-M), 1e300);
  Matrix Dp = D;
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      if (i != j && D(i, j) == 0.0) Dp(i, j) = e_scaled;
    }
  }
  ShiftResult out;
  out.perron = perron_eigen(Dp).vector;
  // entries can only vanish through underflow; keep logs finite
  out.perron = out.perron.cwiseMax(std::numeric_limits<double>::min());
  out.alpha = shifts_from_vector(out.perron);
  out.achieved = shift_risk(eps, closeness, k, out.alpha);
  return out;
}

std::vector<int> accept_from_values(const Matrix& values, const Matrix& closeness) {
  if (values.rows() != closeness.rows() || values.cols() != closeness.cols()) {
    throw InputError("detector value matrix and closeness matrix differ in size");
  }
  std::vector<int> accepted;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    bool ok = true;
    for (Eigen::Index j = 0; j < values.cols() && ok; ++j) {
      if (closeness(i, j) != 0.0 && !(values(i, j) > 0.0)) ok = false;
    }
    if (ok) accepted.push_back(static_cast<int>(i));
  }
  return accepted;
}

}  // namespace seqtest

namespace seqtest {

std::vector<int> aggregate_accept(const std::vector<std::vector<Detector>>& detectors,
                                  const Matrix& closeness, std::span<const Observation> sample,
                                  std::int64_t K) {
  if (static_cast<std::int64_t>(sample.size()) != K) {
    throw InputError("sample length " + std::to_string(sample.size()) +
                     " differs from K = " + std::to_string(K));
  }
  const Eigen::Index N = closeness.rows();
  if (static_cast<Eigen::Index>(detectors.size()) != N) {
    throw InputError("detector table and closeness matrix differ in size");
  }
  Matrix values = Matrix::Zero(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    if (static_cast<Eigen::Index>(detectors[i].size()) != N) {
      throw InputError("detector table must be square");
    }
    for (Eigen::Index j = 0; j < N; ++j) {
      if (closeness(i, j) == 0.0) continue;
      const Detector& d = detectors[i][j];
      double acc = 0.0;
      for (const Observation& w : sample) acc += d.affine(w);
      values(i, j) = acc - d.shift;
    }
  }
  return accept_from_values(values, closeness);
}

}  // namespace seqtest
