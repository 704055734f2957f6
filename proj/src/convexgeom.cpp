#include "seqtest/convexgeom.hpp"

#include <cmath>
#include <limits>

#include "seqtest/errors.hpp"
#include "seqtest/lp.hpp"

namespace seqtest {

void check_body_in_domain(const SchemeKind& scheme, const ConvexBody& body) {
  if (body.dim() != scheme.n) {
    throw InvalidParameter("body dimension " + std::to_string(body.dim()) +
                           " does not match scheme dimension " + std::to_string(scheme.n));
  }
  switch (scheme.type) {
    case SchemeType::Gaussian:
      return;
    case SchemeType::Poisson:
      if ((body.bbox_lower().array() < kDomainFloor).any()) {
        throw InvalidParameter("poisson parameter set must lie in mu >= 1e-12");
      }
      return;
    case SchemeType::Discrete:
      if (body.is_box()) {
        if (body.lower() != body.upper() || !is_valid_parameter(scheme, body.lower())) {
          throw InvalidParameter(
              "discrete parameter sets must be simplex-restricted polytopes or single points");
        }
        return;
      }
      if (!body.simplex_restricted() || body.margin() < kDomainFloor) {
        throw InvalidParameter("discrete parameter sets must be simplex-restricted");
      }
      return;
  }
}

namespace {

SaddlePoint gaussian_boxes(const ConvexBody& X, const ConvexBody& Y) {
  const int n = X.dim();
  SaddlePoint sp;
  sp.mu_star.resize(n);
  sp.nu_star.resize(n);
  for (int i = 0; i < n; ++i) {
    const double lx = X.lower()[i], ux = X.upper()[i];
    const double ly = Y.lower()[i], uy = Y.upper()[i];
    if (ux < ly) {
      sp.mu_star[i] = ux;
      sp.nu_star[i] = ly;
    } else if (uy < lx) {
      sp.mu_star[i] = lx;
      sp.nu_star[i] = uy;
    } else {
      const double mid = 0.5 * (std::max(lx, ly) + std::min(ux, uy));
      sp.mu_star[i] = mid;
      sp.nu_star[i] = mid;
    }
  }
  return sp;
}

}  // namespace

SaddlePoint solve_pairwise(const SchemeKind& scheme, const ConvexBody& X,
                           const ConvexBody& Y, const PairwiseOptions& options) {
  if (!(options.tol > 0.0)) throw InputError("solver tolerance must be positive");
  check_body_in_domain(scheme, X);
  check_body_in_domain(scheme, Y);

  SaddlePoint sp;
  if (options.allow_closed_form && scheme.type == SchemeType::Gaussian && X.is_box() &&
      Y.is_box()) {
    sp = gaussian_boxes(X, Y);
  } else {
    ConcaveProgram program;
    program.blocks = {&X, &Y};
    program.value = [&](const BlockPoint& x) {
      return rate_value_unchecked(scheme, x[0], x[1]);
    };
    program.gradient = [&](const BlockPoint& x, BlockPoint& g) {
      rate_gradients_unchecked(scheme, x[0], x[1], g[0], g[1]);
    };
    const FrankWolfeResult fw =
        maximize_concave(program, {options.tol, options.max_iterations});
    if (!fw.converged) {
      throw SolverFailure("pairwise saddle problem did not reach gap " +
                              std::to_string(options.tol) + " (last gap " +
                              std::to_string(fw.gap) + ")",
                          fw.gap);
    }
    sp.mu_star = fw.x[0];
    sp.nu_star = fw.x[1];
    sp.iterations = fw.iterations;
  }
  sp.opt = rate_value_unchecked(scheme, sp.mu_star, sp.nu_star);
  rate_gradients_unchecked(scheme, sp.mu_star, sp.nu_star, sp.grad_mu, sp.grad_nu);
  const Vector s_mu = linear_minimize(X, -sp.grad_mu);
  const Vector s_nu = linear_minimize(Y, -sp.grad_nu);
  sp.certified_gap = std::max(0.0, sp.grad_mu.dot(s_mu - sp.mu_star)) +
                     std::max(0.0, sp.grad_nu.dot(s_nu - sp.nu_star));
  return sp;
}

OpponentRate::OpponentRate(SchemeKind scheme, ConvexBody opponent, double tol)
    : scheme_(scheme), opponent_(std::move(opponent)), tol_(tol) {
  check_body_in_domain(scheme_, opponent_);
}

OpponentRate::Value OpponentRate::operator()(const Vector& x) const {
  Value out;
  if (scheme_.type == SchemeType::Gaussian && opponent_.is_box()) {
    out.maximizer = x.cwiseMax(opponent_.lower()).cwiseMin(opponent_.upper());
  } else {
    ConcaveProgram program;
    program.blocks = {&opponent_};
    program.value = [&](const BlockPoint& y) { return rate_value_unchecked(scheme_, x, y[0]); };
    program.gradient = [&](const BlockPoint& y, BlockPoint& g) {
      Vector unused;
      rate_gradients_unchecked(scheme_, x, y[0], unused, g[0]);
    };
    const FrankWolfeResult fw = maximize_concave(program, {tol_, 100000});
    if (!fw.converged) {
      throw SolverFailure("opponent rate maximization did not converge", fw.gap);
    }
    out.maximizer = fw.x[0];
  }
  out.value = rate_value_unchecked(scheme_, x, out.maximizer);
  Vector unused;
  rate_gradients_unchecked(scheme_, x, out.maximizer, out.gradient, unused);
  return out;
}

// ---------------------------------------------------------------------------
// Barrier machinery

namespace {

// Orthonormal basis of the directions along which the body extends.
Matrix tangent_basis(const ConvexBody& body) {
  const int n = body.dim();
  if (!body.simplex_restricted()) return Matrix::Identity(n, n);
  Matrix ones = Vector::Ones(n);
  Eigen::HouseholderQR<Matrix> qr(ones);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  return q.rightCols(n - 1);
}

bool strictly_inside(const ConvexBody& body, const Vector& x) {
  return ((body.b() - body.A() * x).array() > 0.0).all();
}

double barrier_value(const ConvexBody& body, const Vector& x) {
  const Vector slack = body.b() - body.A() * x;
  if ((slack.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
  return -slack.array().log().sum();
}

// A point deep inside the body: the Chebyshev center within the affine hull.
Vector interior_point(const ConvexBody& body) {
  const int n = body.dim();
  const Matrix& A = body.A();
  const Vector& b = body.b();
  const Matrix Z = tangent_basis(body);
  const Eigen::Index m = A.rows();
  const bool simplex = body.simplex_restricted();
  Matrix lpA = Matrix::Zero(m + 1 + (simplex ? 2 : 0), n + 1);
  Vector lpb = Vector::Zero(lpA.rows());
  for (Eigen::Index i = 0; i < m; ++i) {
    lpA.row(i).head(n) = A.row(i);
    lpA(i, n) = (Z.transpose() * A.row(i).transpose()).norm();
    lpb[i] = b[i];
  }
  lpA(m, n) = 1.0;  // t <= 1 keeps the program bounded
  lpb[m] = 1.0;
  if (simplex) {
    lpA.row(m + 1).head(n).setOnes();
    lpb[m + 1] = 1.0;
    lpA.row(m + 2).head(n).setConstant(-1.0);
    lpb[m + 2] = -1.0;
  }
  Vector c = Vector::Zero(n + 1);
  c[n] = -1.0;
  const LpResult r = solve_lp(c, lpA, lpb);
  if (r.status != LpStatus::Optimal || r.x[n] <= 1e-12) {
    throw InputError("body has an empty interior; no barrier is defined");
  }
  return r.x.head(n);
}

}  // namespace

BarrierInfo barrier_at(const ConvexBody& body, const Vector& x) {
  BarrierInfo info;
  const Vector slack = body.b() - body.A() * x;
  if ((slack.array() <= 0.0).any()) throw InputError("barrier evaluated outside the interior");
  const Vector inv = slack.cwiseInverse();
  info.theta = static_cast<double>(body.A().rows());
  info.center = x;
  info.gradient = body.A().transpose() * inv;
  info.hessian = body.A().transpose() * inv.cwiseAbs2().asDiagonal() * body.A();
  info.rho = info.theta + 2.0 * std::sqrt(info.theta);
  return info;
}

Vector analytic_center(const ConvexBody& body) {
  const Matrix Z = tangent_basis(body);
  Vector x = interior_point(body);
  for (int iter = 0; iter < 200; ++iter) {
    const BarrierInfo info = barrier_at(body, x);
    const Vector g = Z.transpose() * info.gradient;
    const Matrix H = Z.transpose() * info.hessian * Z;
    const Vector step = Z * H.llt().solve(-g);
    const double decrement2 = -g.dot(Z.transpose() * step);
    if (decrement2 < 1e-22) break;
    double t = decrement2 > 0.0625 ? 1.0 / (1.0 + std::sqrt(decrement2)) : 1.0;
    const double f0 = barrier_value(body, x);
    while (t > 1e-16 && !(barrier_value(body, x + t * step) <= f0)) t *= 0.5;
    x += t * step;
  }
  return x;
}

namespace {

// Root of a function positive at `inside` and negative at `outside` along the
// segment; returns the bracketing point on the nonpositive side.
template <class F>
Vector crossing(const F& f, const Vector& inside, const Vector& outside) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-17; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(inside + mid * (outside - inside)) > 0.0) lo = mid;
    else hi = mid;
  }
  return inside + hi * (outside - inside);
}

}  // namespace

SmartCut smart_cut(const SchemeKind& scheme, const ConvexBody& X,
                   const OpponentRate& opponent, double r, double tol) {
  if (!(r > 0.0)) throw InputError("smart cuts need r > 0");
  check_body_in_domain(scheme, X);
  const int n = X.dim();
  const Matrix Z = tangent_basis(X);

  const SaddlePoint sp = solve_pairwise(scheme, X, opponent.opponent(), {tol});
  const Vector center = analytic_center(X);
  SmartCut out;
  if (sp.opt + sp.certified_gap < -r) {
    out.cut = Cut::retain_all(n);
    out.barrier = barrier_at(X, center);
    out.separating = true;
    return out;
  }

  auto g = [&](const Vector& x) { return opponent(x).value + r; };
  if (g(center) >= 0.0) {
    throw CutInfeasible(
        "cut infeasible: the region psi >= -r contains the analytic center of the body");
  }

  // Strictly feasible start between the saddle point and the center.
  Vector x = sp.mu_star;
  if (g(x) > 0.0) {
    const Vector edge = crossing(g, sp.mu_star, center);
    x = sp.mu_star + 0.5 * (edge - sp.mu_star);
  }
  if (!(g(x) > 0.0) || !strictly_inside(X, x)) {
    // The region only touches the boundary of X: the tangent at the saddle
    // point is already a valid cut.
    x = sp.mu_star;
  } else {
    auto phi = [&](const Vector& y, double tau) {
      const double gy = g(y);
      if (!(gy > 0.0)) return std::numeric_limits<double>::infinity();
      return barrier_value(X, y) - tau * std::log(gy);
    };
    for (double tau = 1.0; tau >= 1e-8 * 0.999; tau *= 0.1) {
      bool converged = false;
      for (int iter = 0; iter < 100; ++iter) {
        const BarrierInfo bi = barrier_at(X, x);
        const OpponentRate::Value ov = opponent(x);
        const double gx = ov.value + r;
        Vector grad = bi.gradient - tau * ov.gradient / gx;
        Matrix hess = bi.hessian + tau * ov.gradient * ov.gradient.transpose() / (gx * gx);
        // Curvature of -tau ln g from the concave part of g, by differences.
        Matrix curv(n, n);
        bool curvature_ok = true;
        const double h = 1e-6 * std::max(1.0, x.lpNorm<Eigen::Infinity>());
        for (int i = 0; i < n && curvature_ok; ++i) {
          Vector e = Vector::Zero(n);
          e[i] = h;
          if (!is_valid_parameter(scheme, x + e) || !is_valid_parameter(scheme, x - e)) {
            if (!(scheme.type == SchemeType::Discrete)) curvature_ok = false;
          }
          if (!curvature_ok) break;
          curv.col(i) = -(opponent(x + e).gradient - opponent(x - e).gradient) / (2.0 * h);
        }
        Matrix full = hess;
        if (curvature_ok && scheme.type != SchemeType::Discrete) {
          full += tau * 0.5 * (curv + curv.transpose()) / gx;
        }
        Matrix H = Z.transpose() * full * Z;
        Eigen::LLT<Matrix> llt(H);
        if (llt.info() != Eigen::Success) {
          H = Z.transpose() * hess * Z;
          llt.compute(H);
        }
        const Vector gz = Z.transpose() * grad;
        const Vector step = Z * llt.solve(-gz);
        const double decrement2 = -gz.dot(Z.transpose() * step);
        if (decrement2 < 1e-14) {
          converged = true;
          break;
        }
        const double f0 = phi(x, tau);
        double t = 1.0;
        while (t > 1e-14) {
          const Vector y = x + t * step;
          if (strictly_inside(X, y) && phi(y, tau) <= f0 - 1e-4 * t * decrement2) break;
          t *= 0.5;
        }
        if (t <= 1e-14) {
          converged = true;  // stalled at working precision
          break;
        }
        x += t * step;
      }
      if (!converged) {
        throw SolverFailure("barrier Newton iterations did not converge", 0.0);
      }
    }
    // Move onto the level set psi_Y = -r on the side facing the center.
    x = crossing(g, x, center);
  }

  const Vector grad_g = Z * (Z.transpose() * opponent(x).gradient);
  if (grad_g.norm() == 0.0) throw CutInfeasible("degenerate cut normal");
  out.barrier = strictly_inside(X, x) ? barrier_at(X, x) : barrier_at(X, center);
  out.barrier.center = x;
  const double scale = strictly_inside(X, x)
                           ? (Z.transpose() * out.barrier.gradient).norm() / grad_g.norm()
                           : 1.0;
  out.cut.normal = grad_g * (scale > 0.0 ? scale : 1.0);
  out.cut.offset = -out.cut.normal.dot(x);
  return out;
}

// ---------------------------------------------------------------------------

VolumeEstimate region_volume(const ConvexBody& body, std::span<const Cut> discarded_cuts,
                             Rng& rng, std::int64_t samples) {
  if (samples < 1000) throw InputError("region_volume needs at least 1000 samples");
  if (body.simplex_restricted()) {
    throw Unsupported("full-dimensional volume of a simplex-restricted body is zero");
  }
  const int n = body.dim();
  VolumeEstimate out;

  bool axis_aligned = body.is_box();
  for (const Cut& c : discarded_cuts) {
    if ((c.normal.array() != 0.0).count() > 1) axis_aligned = false;
  }
  if (axis_aligned) {
    Vector lo = body.lower(), hi = body.upper();
    for (const Cut& c : discarded_cuts) {
      Eigen::Index i = -1;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (c.normal[k] != 0.0) i = k;
      }
      if (i < 0) {
        if (c.offset < 0.0) hi = lo;  // l >= 0 never holds
        continue;
      }
      const double bound = -c.offset / c.normal[i];
      if (c.normal[i] > 0.0) lo[i] = std::max(lo[i], bound);
      else hi[i] = std::min(hi[i], bound);
    }
    out.estimate = (hi - lo).cwiseMax(0.0).prod();
    out.exact = true;
    return out;
  }

  ConvexBody region = body;
  for (const Cut& c : discarded_cuts) {
    if (c.is_constant()) {
      if (c.offset < 0.0) {
        out.exact = true;
        return out;
      }
      continue;
    }
    region = region.with_constraint(-c.normal, c.offset);
  }
  if (!lp_feasible(region.lp_A(), region.lp_b(), 0.0)) {
    out.exact = true;
    return out;
  }
  const Vector lo = region.bbox_lower(), hi = region.bbox_upper();
  const double box_volume = (hi - lo).cwiseMax(0.0).prod();
  if (box_volume == 0.0) {
    out.exact = true;
    return out;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::int64_t hits = 0;
  Vector x(n);
  for (std::int64_t k = 0; k < samples; ++k) {
    for (int i = 0; i < n; ++i) x[i] = lo[i] + unif(rng) * (hi[i] - lo[i]);
    if (region.contains(x, 0.0)) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  out.estimate = box_volume * p;
  out.stderr_ = box_volume * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  return out;
}

}  // namespace seqtest
