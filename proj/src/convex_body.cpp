#include "seqtest/convex_body.hpp"

#include <cmath>
#include <limits>

#include "seqtest/errors.hpp"
#include "seqtest/lp.hpp"

namespace seqtest {

namespace {

void append_rows(Matrix& A, Vector& b, const Matrix& extra_A, const Vector& extra_b) {
  const Eigen::Index r0 = A.rows();
  Matrix A2(r0 + extra_A.rows(), extra_A.cols());
  Vector b2(r0 + extra_b.size());
  if (r0 > 0) {
    A2.topRows(r0) = A;
    b2.head(r0) = b;
  }
  A2.bottomRows(extra_A.rows()) = extra_A;
  b2.tail(extra_b.size()) = extra_b;
  A = std::move(A2);
  b = std::move(b2);
}

void add_simplex_equality(Matrix& A, Vector& b, int n) {
  Matrix eq(2, n);
  eq.row(0).setOnes();
  eq.row(1).setConstant(-1.0);
  Vector rhs(2);
  rhs << 1.0, -1.0;
  append_rows(A, b, eq, rhs);
}

}  // namespace

ConvexBody ConvexBody::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw InputError("box bounds must be nonempty vectors of equal length");
  }
  if (!lower.allFinite() || !upper.allFinite()) throw InputError("box bounds must be finite");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (lower[i] > upper[i]) throw InputError("box lower bound exceeds upper bound");
  }
  ConvexBody body;
  body.is_box_ = true;
  const auto n = lower.size();
  body.A_.resize(2 * n, n);
  body.A_.setZero();
  body.b_.resize(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    body.A_(i, i) = 1.0;
    body.b_[i] = upper[i];
    body.A_(n + i, i) = -1.0;
    body.b_[n + i] = -lower[i];
  }
  body.lower_ = std::move(lower);
  body.upper_ = std::move(upper);
  body.bbox_lower_ = body.lower_;
  body.bbox_upper_ = body.upper_;
  return body;
}

ConvexBody ConvexBody::unchecked_polytope(Matrix A, Vector b, bool simplex, double margin) {
  if (A.rows() != b.size() || A.cols() == 0) {
    throw InputError("polytope rows and right-hand side must agree");
  }
  if (!A.allFinite() || !b.allFinite()) throw InputError("polytope data must be finite");
  ConvexBody body;
  body.simplex_ = simplex;
  body.margin_ = simplex ? margin : 0.0;
  body.user_A_ = A;
  body.user_b_ = b;
  body.A_ = std::move(A);
  body.b_ = std::move(b);
  if (simplex) {
    const auto n = body.A_.cols();
    append_rows(body.A_, body.b_, -Matrix::Identity(n, n), Vector::Constant(n, -margin));
  }
  return body;
}

ConvexBody ConvexBody::polytope(Matrix A, Vector b, bool simplex_restricted, double margin) {
  ConvexBody body = unchecked_polytope(std::move(A), std::move(b), simplex_restricted, margin);
  body.compute_bbox();
  return body;
}

void ConvexBody::compute_bbox() {
  const int n = static_cast<int>(A_.cols());
  const Matrix A = lp_A();
  const Vector b = lp_b();
  bbox_lower_.resize(n);
  bbox_upper_.resize(n);
  for (int i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      Vector c = Vector::Zero(n);
      c[i] = sign;
      const LpResult r = solve_lp(c, A, b);
      if (r.status == LpStatus::Infeasible) throw InputError("polytope is empty");
      if (r.status == LpStatus::Unbounded) throw InputError("polytope is unbounded");
      if (sign > 0) bbox_lower_[i] = r.value;
      else bbox_upper_[i] = -r.value;
    }
  }
}

Matrix ConvexBody::lp_A() const {
  Matrix A = A_;
  Vector b = b_;
  if (simplex_) add_simplex_equality(A, b, static_cast<int>(A_.cols()));
  return A;
}

Vector ConvexBody::lp_b() const {
  Matrix A = A_;
  Vector b = b_;
  if (simplex_) add_simplex_equality(A, b, static_cast<int>(A_.cols()));
  return b;
}

bool ConvexBody::contains(const Vector& x, double tol) const {
  if (x.size() != dim()) return false;
  if (((A_ * x - b_).array() > tol).any()) return false;
  if (simplex_ && std::abs(x.sum() - 1.0) > tol) return false;
  return true;
}

ConvexBody ConvexBody::with_constraint(const Vector& a, double beta) const {
  Matrix A = is_box_ ? A_ : user_A_;
  Vector b = is_box_ ? b_ : user_b_;
  append_rows(A, b, a.transpose(), Vector::Constant(1, beta));
  ConvexBody out = unchecked_polytope(std::move(A), std::move(b), simplex_, margin_);
  if (lp_feasible(out.lp_A(), out.lp_b())) {
    out.compute_bbox();
  } else {
    out.bbox_lower_ = bbox_lower_;
    out.bbox_upper_ = bbox_upper_;
  }
  return out;
}

double ConvexBody::inner_radius(const Vector& x) const {
  double radius = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < A_.rows(); ++i) {
    const double norm = A_.row(i).norm();
    if (norm == 0.0) continue;
    radius = std::min(radius, (b_[i] - A_.row(i).dot(x)) / norm);
  }
  return radius;
}

Vector linear_minimize(const ConvexBody& body, const Vector& direction) {
  if (direction.size() != body.dim() || !direction.allFinite()) {
    throw InputError("direction must be finite with the body's dimension");
  }
  if (body.is_box()) {
    Vector x(body.dim());
    for (int i = 0; i < body.dim(); ++i) {
      x[i] = direction[i] < 0.0 ? body.upper()[i] : body.lower()[i];
    }
    return x;
  }
  const LpResult r = solve_lp(direction, body.lp_A(), body.lp_b());
  if (r.status != LpStatus::Optimal) {
    throw SolverFailure("linear minimization over a validated polytope failed",
                        std::numeric_limits<double>::infinity());
  }
  return r.x;
}

bool is_nonempty(const Matrix& A, const Vector& b, bool simplex_restricted, double tol) {
  if (!simplex_restricted) return lp_feasible(A, b, tol);
  Matrix A2 = A;
  Vector b2 = b;
  add_simplex_equality(A2, b2, static_cast<int>(A.cols()));
  return lp_feasible(A2, b2, tol);
}

Vector sample_uniform(const ConvexBody& body, Rng& rng, int max_attempts) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = body.dim();
  if (body.is_box()) {
    Vector x(n);
    for (int i = 0; i < n; ++i) {
      x[i] = body.lower()[i] + unif(rng) * (body.upper()[i] - body.lower()[i]);
    }
    return x;
  }
  if (body.simplex_restricted()) {
    // Dirichlet(1, ..., 1) is uniform on the simplex; reject outside the body.
    std::exponential_distribution<double> expo(1.0);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
      Vector x(n);
      for (int i = 0; i < n; ++i) x[i] = expo(rng);
      x /= x.sum();
      if (body.contains(x, 1e-12)) return x;
    }
    throw SolverFailure("rejection sampling found no point of the body", 0.0);
  }
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Vector x(n);
    for (int i = 0; i < n; ++i) {
      x[i] = body.bbox_lower()[i] + unif(rng) * (body.bbox_upper()[i] - body.bbox_lower()[i]);
    }
    if (body.contains(x, 0.0)) return x;
  }
  throw SolverFailure("rejection sampling found no point of the body", 0.0);
}

}  // namespace seqtest
