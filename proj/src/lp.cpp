#include "seqtest/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace seqtest {

namespace {

constexpr double kPivotTol = 1e-12;
constexpr int kMaxPivots = 50000;

class Tableau {
 public:
  Tableau(int rows, int cols) : t_(Matrix::Zero(rows + 1, cols + 1)), basis_(rows) {}

  double& at(int r, int c) { return t_(r, c); }
  double rhs(int r) const { return t_(r, t_.cols() - 1); }
  double& rhs(int r) { return t_(r, t_.cols() - 1); }
  int rows() const { return static_cast<int>(t_.rows()) - 1; }
  int cols() const { return static_cast<int>(t_.cols()) - 1; }
  int obj() const { return rows(); }
  std::vector<int>& basis() { return basis_; }

  void pivot(int r, int c) {
    t_.row(r) /= t_(r, c);
    for (int i = 0; i <= rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

  // Bland's rule. Returns false when the objective is unbounded below.
  bool optimize(const std::vector<bool>& allowed) {
    for (int iter = 0; iter < kMaxPivots; ++iter) {
      int enter = -1;
      for (int j = 0; j < cols(); ++j) {
        if (allowed[j] && t_(obj(), j) < -1e-11) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows(); ++r) {
        const double a = t_(r, enter);
        if (a <= kPivotTol) continue;
        const double ratio = rhs(r) / a;
        if (ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 && leave >= 0 && basis_[r] < basis_[leave])) {
          best = ratio;
          leave = r;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    return true;
  }

 private:
  Matrix t_;
  std::vector<int> basis_;
};

}  // namespace

LpResult solve_lp(const Vector& c, const Matrix& A, const Vector& b,
                  double feasibility_tol) {
  const int n = static_cast<int>(A.cols());
  LpResult result;
  result.x = Vector::Zero(n);

  // Normalize rows and drop empty ones.
  std::vector<int> keep;
  std::vector<double> scale;
  for (int i = 0; i < A.rows(); ++i) {
    const double s = A.row(i).cwiseAbs().maxCoeff();
    if (s == 0.0) {
      if (b[i] < -feasibility_tol) {
        result.status = LpStatus::Infeasible;
        result.infeasibility = -b[i];
        return result;
      }
      continue;
    }
    keep.push_back(i);
    scale.push_back(s);
  }
  const int m = static_cast<int>(keep.size());
  int artificials = 0;
  for (int k = 0; k < m; ++k) {
    if (b[keep[k]] / scale[k] < 0.0) ++artificials;
  }

  // Columns: p (n) | q (n) | slack (m) | artificial.
  const int p0 = 0, q0 = n, s0 = 2 * n, a0 = 2 * n + m;
  const int cols = a0 + artificials;
  Tableau tab(m, cols);
  std::vector<bool> is_art(cols, false);
  int next_art = a0;
  for (int k = 0; k < m; ++k) {
    const auto row = A.row(keep[k]) / scale[k];
    const double rhs = b[keep[k]] / scale[k];
    const double sign = rhs < 0.0 ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) {
      tab.at(k, p0 + j) = sign * row[j];
      tab.at(k, q0 + j) = -sign * row[j];
    }
    tab.at(k, s0 + k) = sign;
    tab.rhs(k) = sign * rhs;
    if (sign < 0.0) {
      tab.at(k, next_art) = 1.0;
      is_art[next_art] = true;
      tab.basis()[k] = next_art++;
    } else {
      tab.basis()[k] = s0 + k;
    }
  }

  std::vector<bool> allowed(cols, true);
  if (artificials > 0) {
    // Phase one: minimize the sum of artificials.
    for (int k = 0; k < m; ++k) {
      if (!is_art[tab.basis()[k]]) continue;
      for (int j = 0; j <= cols; ++j) {
        if (j < cols && is_art[j]) continue;
        const double v = j < cols ? tab.at(k, j) : tab.rhs(k);
        if (j < cols) tab.at(tab.obj(), j) -= v;
        else tab.rhs(tab.obj()) -= v;
      }
    }
    tab.optimize(allowed);
    result.infeasibility = std::max(0.0, -tab.rhs(tab.obj()));
    if (result.infeasibility > feasibility_tol) {
      result.status = LpStatus::Infeasible;
      return result;
    }
    // Drive remaining artificials out of the basis.
    for (int k = 0; k < m; ++k) {
      if (!is_art[tab.basis()[k]]) continue;
      int col = -1;
      double best = kPivotTol;
      for (int j = 0; j < a0; ++j) {
        if (std::abs(tab.at(k, j)) > best) {
          best = std::abs(tab.at(k, j));
          col = j;
        }
      }
      if (col >= 0) {
        tab.pivot(k, col);
      } else {
        // Redundant row: neutralize it.
        for (int j = 0; j <= cols; ++j) {
          if (j < cols) tab.at(k, j) = 0.0;
          else tab.rhs(k) = 0.0;
        }
        tab.at(k, tab.basis()[k]) = 1.0;
      }
    }
    for (int j = 0; j < cols; ++j) allowed[j] = !is_art[j];
  }

  // Phase two objective row.
  auto cost = [&](int j) -> double {
    if (j < q0) return c[j - p0];
    if (j < s0) return -c[j - q0];
    return 0.0;
  };
  for (int j = 0; j < cols; ++j) tab.at(tab.obj(), j) = cost(j);
  tab.rhs(tab.obj()) = 0.0;
  for (int k = 0; k < m; ++k) {
    const int bj = tab.basis()[k];
    const double cb = cost(bj);
    if (cb == 0.0) continue;
    for (int j = 0; j < cols; ++j) tab.at(tab.obj(), j) -= cb * tab.at(k, j);
    tab.rhs(tab.obj()) -= cb * tab.rhs(k);
  }
  if (!tab.optimize(allowed)) {
    result.status = LpStatus::Unbounded;
    return result;
  }
  for (int k = 0; k < m; ++k) {
    const int bj = tab.basis()[k];
    if (bj < q0) result.x[bj - p0] += tab.rhs(k);
    else if (bj < s0) result.x[bj - q0] -= tab.rhs(k);
  }
  result.status = LpStatus::Optimal;
  result.value = c.dot(result.x);
  return result;
}

bool lp_feasible(const Matrix& A, const Vector& b, double tol) {
  return solve_lp(Vector::Zero(A.cols()), A, b, tol).status != LpStatus::Infeasible;
}

}  // namespace seqtest
