#include <doctest.h>

#include <cmath>

#include "seqtest/errors.hpp"
#include "seqtest/pairwise.hpp"
#include "support.hpp"

using namespace seqtest;
using testsupport::vec;

namespace {

SchemeKind g2 = SchemeKind::gaussian(2);

ConvexBody two_box_x1() { return ConvexBody::box(vec({0.1, 0.0}), vec({1.1, 1.0})); }
ConvexBody two_box_x2() { return ConvexBody::box(vec({-1.0, -1.0}), vec({0.0, 0.0})); }

Detector two_box_detector() {
  return build_detector(solve_pairwise(g2, two_box_x1(), two_box_x2()), g2);
}

}  // namespace

TEST_CASE("two-box detector has the expanded affine form") {
  const Detector det = two_box_detector();
  CHECK(det.affine.a[0] == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(std::abs(det.affine.a[1]) < 1e-12);
  CHECK(det.affine.b == doctest::Approx(-0.0025).epsilon(1e-10));
  CHECK(det.risk() == doctest::Approx(0.998751).epsilon(1e-6));
  CHECK(det.risk_log == doctest::Approx(-0.00125).epsilon(1e-10));
}

TEST_CASE("identical endpoints give the zero detector") {
  const ConvexBody p = ConvexBody::box(vec({0.3, 0.3}), vec({0.3, 0.3}));
  const Detector det = build_detector(solve_pairwise(g2, p, p), g2);
  CHECK(det.affine.a.norm() == 0.0);
  CHECK(det.affine.b == 0.0);
  CHECK(det.risk() == 1.0);
}

TEST_CASE("discrete detector is the half log-ratio table") {
  const SchemeKind d2 = SchemeKind::discrete(2);
  SaddlePoint sp;
  sp.mu_star = vec({0.5, 0.5});
  sp.nu_star = vec({0.9, 0.1});
  sp.opt = std::log(std::sqrt(0.45) + std::sqrt(0.05));
  const Detector det = build_detector(sp, d2);
  CHECK(det(Category{0}) == doctest::Approx(0.5 * std::log(0.5 / 0.9)).epsilon(1e-12));
  CHECK(det(Category{1}) == doctest::Approx(0.5 * std::log(0.5 / 0.1)).epsilon(1e-12));
  CHECK(det(Category{0}) == doctest::Approx(-0.2939).epsilon(1e-3));
  CHECK(det(Category{1}) == doctest::Approx(0.8047).epsilon(1e-3));
}

TEST_CASE("verify_detector_risk on the two-box detector") {
  const Detector det = two_box_detector();
  const RiskCheck rc = verify_detector_risk(det, two_box_x1(), two_box_x2());
  CHECK(rc.side1 == doctest::Approx(std::exp(-0.00125)).epsilon(1e-12));
  CHECK(rc.side2 == doctest::Approx(std::exp(-0.00125)).epsilon(1e-12));
  CHECK(rc.argmax1[0] == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(std::abs(rc.argmax2[0]) < 1e-9);

  SUBCASE("zero detector") {
    Detector zero = det;
    zero.affine.a.setZero();
    zero.affine.b = 0.0;
    const RiskCheck z = verify_detector_risk(zero, two_box_x1(), two_box_x2());
    CHECK(z.side1 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(z.side2 == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("shift multiplies the two sides by exp(+-s)") {
    const double s = 0.37;
    const RiskCheck sh = verify_detector_risk(det.with_shift(s), two_box_x1(), two_box_x2());
    CHECK(sh.side1 == doctest::Approx(rc.side1 * std::exp(s)).epsilon(1e-12));
    CHECK(sh.side2 == doctest::Approx(rc.side2 * std::exp(-s)).epsilon(1e-12));
  }
}

TEST_CASE("risk is attained exactly on random box pairs in every scheme") {
  Rng rng(404);
  for (int t = 0; t < 20; ++t) {
    const int n = 1 + t % 4;
    const SchemeKind g = SchemeKind::gaussian(n);
    const ConvexBody X = testsupport::random_box(n, rng);
    const ConvexBody Y = testsupport::random_box(n, rng);
    const SaddlePoint sp = solve_pairwise(g, X, Y);
    const Detector det = build_detector(sp, g);
    const RiskCheck rc = verify_detector_risk(det, X, Y);
    CHECK(rc.side1 == doctest::Approx(std::exp(sp.opt)).epsilon(1e-9));
    CHECK(rc.side2 == doctest::Approx(std::exp(sp.opt)).epsilon(1e-9));

    const SchemeKind p = SchemeKind::poisson(n);
    const ConvexBody Xp = testsupport::random_box(n, rng, 0.5, 6.0);
    const ConvexBody Yp = testsupport::random_box(n, rng, 0.5, 6.0);
    const SaddlePoint spp = solve_pairwise(p, Xp, Yp);
    const RiskCheck rp = verify_detector_risk(build_detector(spp, p), Xp, Yp);
    CHECK(rp.side1 == doctest::Approx(std::exp(spp.opt)).epsilon(1e-7));
    CHECK(rp.side2 == doctest::Approx(std::exp(spp.opt)).epsilon(1e-7));
  }
}

TEST_CASE("negated detector serves the swapped pair") {
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    const ConvexBody X = testsupport::random_box(3, rng);
    const ConvexBody Y = testsupport::random_box(3, rng);
    const SchemeKind g = SchemeKind::gaussian(3);
    const Detector det = build_detector(solve_pairwise(g, X, Y), g);
    const Detector neg = det.negated();
    const Observation w = Vector(Vector::Random(3));
    CHECK(neg(w) == doctest::Approx(-det(w)).epsilon(1e-14));
    CHECK(neg.risk_log == det.risk_log);
    const RiskCheck rc = verify_detector_risk(neg, Y, X);
    CHECK(rc.side1 == doctest::Approx(det.risk()).epsilon(1e-9));
    CHECK(rc.side2 == doctest::Approx(det.risk()).epsilon(1e-9));
    CHECK(solve_pairwise(g, Y, X).opt == doctest::Approx(solve_pairwise(g, X, Y).opt).epsilon(1e-9));
  }
}

TEST_CASE("Monte Carlo test error stays below the risk") {
  Rng rng(77);
  const ConvexBody X = ConvexBody::box(vec({0.5, -0.2}), vec({1.0, 0.4}));
  const ConvexBody Y = ConvexBody::box(vec({-0.8, 0.0}), vec({-0.2, 1.0}));
  const Detector det = build_detector(solve_pairwise(g2, X, Y), g2);
  const int N = 100000;
  int miss1 = 0, miss2 = 0;
  for (int i = 0; i < N; ++i) {
    miss1 += det(sample_one(g2, det.mu_star, rng)) <= 0.0;
    miss2 += det(sample_one(g2, det.nu_star, rng)) >= 0.0;
  }
  const double eps = det.risk();
  const double se = std::sqrt(eps * (1 - eps) / N);
  CHECK(miss1 / double(N) <= eps + 4 * se);
  CHECK(miss2 / double(N) <= eps + 4 * se);
}

TEST_CASE("repeated detector") {
  const Detector det = two_box_detector();
  const RepeatedDetector one = repeated_detector(det, 1);
  Rng rng(1);
  const std::vector<Observation> w1 = sample(g2, vec({0.5, 0.5}), rng, 1);
  CHECK(one(w1) == det(w1[0]));
  CHECK(one.risk() == det.risk());
  CHECK(repeated_detector(det, 2).risk() == doctest::Approx(0.997504).epsilon(1e-6));
  const RepeatedDetector r = repeated_detector(det, 3685);
  CHECK(r.risk() == doctest::Approx(std::exp(-3685 * 0.00125)).epsilon(1e-12));
  CHECK(r.risk() <= 0.01);
  CHECK(r.risk() == doctest::Approx(0.00995).epsilon(1e-3));

  const std::vector<Observation> w3 = sample(g2, vec({0.5, 0.5}), rng, 3);
  const RepeatedDetector three = repeated_detector(det, 3);
  CHECK(three(w3) == doctest::Approx(det(w3[0]) + det(w3[1]) + det(w3[2])).epsilon(1e-14));
  CHECK_THROWS_AS(three(w1), InputError);
  CHECK_THROWS_AS(repeated_detector(det, 0), InputError);
}

TEST_CASE("tensorized risk bounds the K-sample error") {
  // Poisson pair with risk near 0.8, K = 10
  const SchemeKind p = SchemeKind::poisson(1);
  const ConvexBody X = ConvexBody::box(vec({3.0}), vec({4.0}));
  const ConvexBody Y = ConvexBody::box(vec({1.0}), vec({1.5}));
  const Detector det = build_detector(solve_pairwise(p, X, Y), p);
  const RepeatedDetector rep = repeated_detector(det, 10);
  const double log1 = log_mgf(p, AffineFunctional{-det.affine.a, -det.affine.b}, det.mu_star);
  CHECK(10 * log1 == doctest::Approx(rep.risk_log()).epsilon(1e-12));
  Rng rng(99);
  const int N = 20000;
  int miss = 0;
  for (int i = 0; i < N; ++i) {
    const std::vector<Observation> w = sample(p, det.mu_star, rng, 10);
    miss += rep(w) <= 0.0;
  }
  const double eps = rep.risk();
  CHECK(miss / double(N) <= eps + 4 * std::sqrt(eps * (1 - eps) / N));
}

TEST_CASE("sample_size_for_risk") {
  CHECK(sample_size_for_risk(0.3, 0.3) == 1);
  CHECK(sample_size_for_risk(0.5, 0.01) == 7);
  CHECK(sample_size_for_risk(std::exp(-0.00125), 0.01) == 3685);
  CHECK_THROWS_AS(sample_size_for_risk(1.0, 0.01), InputError);
  CHECK_THROWS_AS(sample_size_for_risk(0.0, 0.01), InputError);
}

TEST_CASE("near_optimality_factor") {
  CHECK(near_optimality_factor(0.01, 100) == 287);
  CHECK(near_optimality_factor(1e-8, 100) == 217);
  CHECK(near_optimality_factor(0.01, 1) == 3);
  CHECK_THROWS(near_optimality_factor(0.3, 10));
}

TEST_CASE("detector_from_test") {
  const auto test = [](const Observation& w) { return std::get<Vector>(w)[0] > 0 ? 1 : -1; };
  const TestDetector td = detector_from_test(test, 0.25);
  CHECK(td.magnitude == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-12));
  CHECK(td.risk == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
  CHECK(td(Observation{vec({1.0})}) == doctest::Approx(td.magnitude));
  CHECK(td(Observation{vec({-1.0})}) == doctest::Approx(-td.magnitude));
  CHECK(detector_from_test(test, 0.01).risk == doctest::Approx(2 * std::sqrt(0.0099)).epsilon(1e-12));
  const TestDetector nearly = detector_from_test(test, 0.5 - 1e-9);
  CHECK(nearly.magnitude < 1e-8);
  CHECK(nearly.risk == doctest::Approx(1.0).epsilon(1e-12));
}
