#pragma once

// Pairwise saddle problems max_{mu in X, nu in Y} psi(mu, nu), the
// opponent rate psi_Y(x) = max_{nu in Y} psi(x, nu), barrier-based cuts and
// Monte Carlo volumes of cut regions.

#include <optional>
#include <span>

#include "seqtest/convex_body.hpp"
#include "seqtest/frank_wolfe.hpp"

namespace seqtest {

struct SaddlePoint {
  ParameterPoint mu_star;
  ParameterPoint nu_star;
  double opt = 0.0;  // psi(mu_star, nu_star)
  Vector grad_mu;    // gradient of psi in mu at the saddle
  Vector grad_nu;
  double certified_gap = 0.0;
  int iterations = 0;
};

struct PairwiseOptions {
  double tol = 1e-9;
  int max_iterations = 100000;
  /// Use the exact per-coordinate solution for Gaussian box pairs.
  bool allow_closed_form = true;
};

/// Throws SolverFailure (with the last gap) when the iteration cap is hit,
/// InvalidParameter when a body leaves the scheme's parameter domain.
SaddlePoint solve_pairwise(const SchemeKind& scheme, const ConvexBody& X,
                           const ConvexBody& Y, const PairwiseOptions& options = {});

/// Checks that the vertices reachable by the solver are valid parameters.
void check_body_in_domain(const SchemeKind& scheme, const ConvexBody& body);

/// psi_Y(x) = max_{nu in Y} psi(x, nu) together with its gradient in x
/// (Danskin: the partial gradient at the maximizer).
class OpponentRate {
 public:
  OpponentRate(SchemeKind scheme, ConvexBody opponent, double tol = 1e-10);

  struct Value {
    double value = 0.0;
    Vector gradient;
    Vector maximizer;
  };
  Value operator()(const Vector& x) const;

  const ConvexBody& opponent() const { return opponent_; }
  const SchemeKind& scheme() const { return scheme_; }

 private:
  SchemeKind scheme_;
  ConvexBody opponent_;
  double tol_;
};

/// Logarithmic barrier -sum ln(b_i - a_i^T x) over the inequality rows of a
/// body, evaluated at a center point.
struct BarrierInfo {
  double theta = 0.0;  // number of logarithmic terms
  ParameterPoint center;
  Vector gradient;
  Matrix hessian;
  double rho = 0.0;    // theta + 2 sqrt(theta)
};

BarrierInfo barrier_at(const ConvexBody& body, const Vector& x);

/// Minimizer of the body's logarithmic barrier (within its affine hull for
/// simplex-restricted bodies).
Vector analytic_center(const ConvexBody& body);

struct SmartCut {
  Cut cut;
  BarrierInfo barrier;
  /// The region {x in X : psi_Y(x) >= -r} is empty; `cut` retains all of X.
  bool separating = false;
};

/// Cut through the barrier minimizer over {x in X : psi_Y(x) >= -r}. The
/// retained side {l <= 0} satisfies psi_Y <= -r. Throws CutInfeasible when
/// that region contains the analytic center of X (no cut from the barrier),
/// SolverFailure when Newton iterations stall.
SmartCut smart_cut(const SchemeKind& scheme, const ConvexBody& X,
                   const OpponentRate& opponent, double r, double tol = 1e-9);

struct VolumeEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  bool exact = false;
};

/// Volume of {x in body : l(x) >= 0 for every cut}. Exact for boxes with
/// axis-aligned cuts; otherwise hit-or-miss sampling over the bounding box
/// of the region.
VolumeEstimate region_volume(const ConvexBody& body, std::span<const Cut> discarded_cuts,
                             Rng& rng, std::int64_t samples);

}  // namespace seqtest
