#pragma once

#include <span>
#include <vector>

#include "seqtest/schemes.hpp"

namespace seqtest {

/// Affine form l(x) = normal^T x + offset. The retained ("good") side of a
/// cut is {l <= 0}; the discarded side is {l >= 0}.
struct Cut {
  Vector normal;
  double offset = 0.0;

  double operator()(const Vector& x) const { return normal.dot(x) + offset; }

  /// l(x) == -1 everywhere: retains the whole body.
  static Cut retain_all(int n) { return {Vector::Zero(n), -1.0}; }
  bool is_constant() const { return normal.isZero(0.0); }
};

/// A box or a bounded H-polytope {x : A x <= b}, optionally restricted to the
/// probability simplex (sum x = 1, x >= margin).
class ConvexBody {
 public:
  static ConvexBody box(Vector lower, Vector upper);

  /// Verifies nonemptiness and boundedness with 2n linear programs.
  static ConvexBody polytope(Matrix A, Vector b, bool simplex_restricted = false,
                             double margin = 1e-9);

  bool is_box() const { return is_box_; }
  bool simplex_restricted() const { return simplex_; }
  int dim() const { return static_cast<int>(bbox_lower_.size()); }

  /// Box bounds (valid for boxes only).
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  /// Inequality rows of the body: box faces, polytope rows and, for simplex
  /// restricted bodies, the margin rows. The equality sum x = 1 is separate.
  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  /// User-supplied rows (polytopes; empty for boxes).
  const Matrix& user_A() const { return user_A_; }
  const Vector& user_b() const { return user_b_; }
  double margin() const { return margin_; }

  /// Full inequality system handed to the LP solver (equality as two rows).
  Matrix lp_A() const;
  Vector lp_b() const;

  const Vector& bbox_lower() const { return bbox_lower_; }
  const Vector& bbox_upper() const { return bbox_upper_; }

  bool contains(const Vector& x, double tol = 1e-9) const;

  /// The body intersected with {a^T x <= beta}; always a polytope. The
  /// result is not checked for emptiness.
  ConvexBody with_constraint(const Vector& a, double beta) const;

  /// Smallest slack min_i (b_i - a_i^T x) / |a_i| over the inequality rows;
  /// the radius of the largest ball around x inside the body (negative when
  /// x is outside).
  double inner_radius(const Vector& x) const;

 private:
  ConvexBody() = default;
  static ConvexBody unchecked_polytope(Matrix A, Vector b, bool simplex, double margin);
  void compute_bbox();

  bool is_box_ = false;
  bool simplex_ = false;
  double margin_ = 0.0;
  Vector lower_, upper_;
  Matrix user_A_;
  Vector user_b_;
  Matrix A_;
  Vector b_;
  Vector bbox_lower_, bbox_upper_;
};

/// A minimizer of direction^T x over the body (a corner for boxes, an LP
/// vertex for polytopes). A zero direction yields some feasible point.
Vector linear_minimize(const ConvexBody& body, const Vector& direction);

/// Nonempty within the LP feasibility tolerance.
bool is_nonempty(const Matrix& A, const Vector& b, bool simplex_restricted,
                 double tol = 1e-9);

/// Uniform point of the body by rejection from its bounding box.
Vector sample_uniform(const ConvexBody& body, Rng& rng, int max_attempts = 1000000);

}  // namespace seqtest
