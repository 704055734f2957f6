#pragma once

#include <initializer_list>
#include <random>

#include "seqtest/convex_body.hpp"

namespace testsupport {

inline seqtest::Vector vec(std::initializer_list<double> xs) {
  seqtest::Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline seqtest::ConvexBody random_box(int n, seqtest::Rng& rng, double lo = -2, double hi = 2) {
  std::uniform_real_distribution<double> u(lo, hi);
  seqtest::Vector a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = u(rng);
    b[i] = u(rng);
    if (a[i] > b[i]) std::swap(a[i], b[i]);
  }
  return seqtest::ConvexBody::box(a, b);
}

// -1/8 of the squared box-to-box distance, coordinate by coordinate
inline double gaussian_box_opt(const seqtest::ConvexBody& X, const seqtest::ConvexBody& Y) {
  double acc = 0.0;
  for (int i = 0; i < X.dim(); ++i) {
    const double gap =
        std::max({0.0, Y.lower()[i] - X.upper()[i], X.lower()[i] - Y.upper()[i]});
    acc += gap * gap;
  }
  return -acc / 8.0;
}

}  // namespace testsupport
