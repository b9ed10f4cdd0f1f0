#include <doctest.h>

#include <cmath>
#include <random>

#include "approx.hpp"
#include "cauchylab/planar.hpp"

using namespace cauchylab;
using namespace cauchylab::planar;

namespace {

Mat2 random_elliptic(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ang(0.0, kPi), lam(0.2, 4.0), skew(-0.5, 0.5);
  double t = ang(rng), c = std::cos(t), s = std::sin(t);
  Mat2 R{c, -s, s, c};
  Mat2 A = R * Mat2::diag(lam(rng), lam(rng)) * R.transpose();
  double b = skew(rng);
  return {A.a11, A.a12 + b, A.a21 - b, A.a22};
}

}  // namespace

TEST_SUITE("planar") {
  TEST_CASE("two sided constant") {
    CHECK(two_sided_K(Mat2::identity()) == 1.0);
    CHECK(two_sided_K(Mat2::diag(4.0, 0.5)) == approx(4.0));
    CHECK(two_sided_K(Mat2::diag(2.0, 2.0)) == approx(2.0));
    CHECK(two_sided_K(Mat2::diag(0.25, 1.0)) == approx(4.0));
    CHECK_THROWS_AS(two_sided_K(Mat2::diag(1.0, -1.0)), Error);
    CHECK_THROWS_AS(two_sided_K(Mat2{1, 1, 1, 1}), Error);
  }

  TEST_CASE("Beltrami coefficients of diagonal matrices") {
    // diag(K, 1/K): nu = 0 and |mu| = (K-1)/(K+1)
    for (double K : {1.0, 2.0, 5.0}) {
      auto p = beltrami_from_matrix(Mat2::diag(K, 1.0 / K));
      CHECK(std::abs(p.nu) < 1e-14);
      CHECK(std::abs(p.mu) == approx((K - 1) / (K + 1)));
      CHECK(K_from_k(p.k) == approx(K));
    }
    // a I: mu = 0, nu = (1-a)/(1+a)
    auto q = beltrami_from_matrix(Mat2::diag(3.0, 3.0));
    CHECK(std::abs(q.mu) < 1e-14);
    CHECK(q.nu.real() == approx(-0.5));
    CHECK(k_bound(1.0) == 0.0);
    CHECK(k_bound(2.0) == approx((1 + std::sqrt(3.0)) / (3 + std::sqrt(3.0))));
  }

  TEST_CASE("Beltrami round trip and ellipticity bound on random matrices") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 200; ++t) {
      Mat2 A = random_elliptic(rng);
      auto p = beltrami_from_matrix(A);
      Mat2 B = matrix_from_beltrami(p);
      CHECK(std::abs(B.a11 - A.a11) < 1e-12);
      CHECK(std::abs(B.a12 - A.a12) < 1e-12);
      CHECK(std::abs(B.a21 - A.a21) < 1e-12);
      CHECK(std::abs(B.a22 - A.a22) < 1e-12);
      CHECK(p.k < 1.0);
      CHECK(p.k <= k_bound(two_sided_K(A)) + 1e-12);
    }
  }

  TEST_CASE("subharmonic matrix") {
    cplx mu(0.2, 0.1), nu(0.1, -0.05);
    // fz = 0 falls back to mu
    Mat2 a = subharmonic_matrix(mu, nu, 0.0);
    Mat2 b = matrix_from_beltrami(mu, 0.0);
    CHECK(a.a11 == approx(b.a11));
    CHECK(a.a12 == approx(b.a12));
    // fz real and positive: mu1 = mu + nu
    Mat2 c = subharmonic_matrix(mu, nu, 2.0);
    Mat2 d = matrix_from_beltrami(mu + nu, 0.0);
    CHECK(c.a11 == approx(d.a11));
    CHECK(c.a22 == approx(d.a22));
    CHECK(c.det() == approx(1.0));
  }

  TEST_CASE("closed forms") {
    CHECK(schwarz_bound(1.0, 0.0) == 0.0);
    CHECK(schwarz_bound(2.0, 0.5) == approx(4.0 / kPi * std::log(3.0)));
    CHECK(interior_cauchy_bound(4.0, 1.0, 0.5) == approx(2.0));
    CHECK(interior_cauchy_bound(3.0, 1e-4, 0.0) == approx(3.0));
    CHECK(interior_cauchy_bound(3.0, 1e-4, 1.0) == approx(1e-4));
  }

  TEST_CASE("three circle exponents") {
    auto t = three_circles_exponents(1.0, 2.0, 4.0);
    CHECK(t.alpha_holo == approx(0.5));
    CHECK(t.alpha_harm > 0.0);
    CHECK(t.alpha_harm < t.alpha_holo);
    // conformal case: the distorted radii are the scaled ones
    CHECK(t.r1_tilde == approx(0.25));
    CHECK(t.r2_tilde == approx(0.5));
    CHECK(t.alpha_qc == approx(t.alpha_holo));
    CHECK(t.C2 == approx(2.0 / kPi * std::log(3.0)));
    auto q = three_circles_exponents(1.0, 2.0, 4.0, 1.5, 0.8);
    CHECK(q.alpha_qc < t.alpha_qc);
    CHECK(q.C3_qc > t.C3);
    CHECK_THROWS_AS(three_circles_exponents(2.0, 1.0, 4.0), Error);
    CHECK_THROWS_AS(three_circles_exponents(1.0, 2.0, 4.0, 0.5), Error);
  }

  TEST_CASE("harmonic measure of the inner circle of an annulus") {
    auto ann = geometry::Domain::annulus(1.0, 4.0);
    geometry::LipschitzPortion sig(ann, 1, 0.0, 2 * kPi, 1.0, 1.0, 1.0, {1.0, 0.0});
    auto hm = harmonic_measure(ann, sig, pde::CoefficientField::identity(), 1e-3, geometry::grid_for(ann, 128));
    double err = 0.0;
    for (double r : {1.5, 2.0, 3.0})
      for (double t = 0.0; t < 2 * kPi; t += 0.5) {
        double w = hm.value({r * std::cos(t), r * std::sin(t)});
        err = std::max(err, std::abs(w - std::log(4.0 / r) / std::log(4.0)));
        CHECK(w >= 0.0);
        CHECK(w <= 1.0);
      }
    CHECK(err < 2e-2);
  }

  TEST_CASE("mollified indicator") {
    auto ann = geometry::Domain::annulus(1.0, 4.0);
    geometry::LipschitzPortion sig(ann, 1, 0.0, 2 * kPi, 1.0, 1.0, 1.0, {1.0, 0.0});
    CHECK(mollified_indicator(sig, {1.0, 0.0}, 0.01) == approx(1.0));
    CHECK(mollified_indicator(sig, {4.0, 0.0}, 0.01) == approx(0.0));
  }

  TEST_CASE("stream function of a linear solution") {
    // u = x with A = I: J grad u is a constant rotation of e_x, so v is linear in y
    auto sq = geometry::Domain::rectangle(1, 1);
    auto u = pde::solve_dirichlet(sq, pde::CoefficientField::identity(), pde::ZeroOrderTerm::zero(), {},
                                  [](Vec2 p) { return p.x; }, geometry::grid_for(sq, 32), {1e-13, 0});
    auto s = stream_function(u, pde::CoefficientField::identity(), Vec2{0.5, 0.5});
    CHECK(s.flux_residual < 1e-8);
    double v1 = s.v.value({0.5, 0.75}), v0 = s.v.value({0.5, 0.5});
    CHECK(std::abs(v0) < 1e-10);
    CHECK(std::abs(v1) == approx(0.25).epsilon(1e-6));
    CHECK(std::abs(s.v.value({0.2, 0.5})) < 1e-8);
  }

  TEST_CASE("Hoelder bound on the annulus for holomorphic data") {
    for (const auto& c : std::vector<std::vector<cplx>>{{1.0}, {0.0, 1.0}, {0.5, cplx(0, 0.3), 0.1}}) {
      auto h = annulus_holder_case(c, 128, 0.05);
      CHECK(h.ok);
      CHECK(h.measured <= h.bound * 1.05);
      CHECK(h.eta <= h.E);
    }
  }
}
