#include <doctest.h>

#include <cmath>
#include <sstream>

#include "approx.hpp"
#include "cauchylab/frequency.hpp"

using namespace cauchylab;
using namespace cauchylab::frequency;

namespace {

GridFunction sampled(const ScalarField& f, int n) {
  auto g = geometry::grid_for(geometry::Domain::rectangle(2, 2, {-1, -1}), n);
  std::vector<double> v(g.size());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) v[g.index(i, j)] = f.value(g.node(i, j));
  return {g, v};
}

}  // namespace

TEST_SUITE("frequency") {
  TEST_CASE("quadrature rules") {
    CHECK(circle_integral([](Vec2 p) { return p.x * p.x; }, {}, 0.7, 256) ==
          approx(kPi * std::pow(0.7, 3)).epsilon(1e-12));
    CHECK(disc_integral([](Vec2 p) { return p.x * p.x; }, {0.3, -0.2}, 0.5, 128) ==
          approx(kPi * std::pow(0.5, 4) / 4 + 0.09 * kPi * 0.25).epsilon(1e-10));
    CHECK(disc_integral([](Vec2) { return 1.0; }, {}, 2.0) == approx(4 * kPi));
  }

  TEST_CASE("frequency of Re z^m is m") {
    auto I = pde::CoefficientField::identity();
    for (int m = 1; m <= 5; ++m) {
      auto p = radial_profile(monomial_field(m), I, {}, {0.1, 0.3, 0.5, 0.9});
      for (std::size_t k = 0; k < p.r.size(); ++k) {
        // H = pi r^{2m+1}, I = m pi r^{2m}
        CHECK(p.H[k] == approx(kPi * std::pow(p.r[k], 2 * m + 1)).epsilon(1e-10));
        CHECK(p.I[k] == approx(m * kPi * std::pow(p.r[k], 2 * m)).epsilon(1e-8));
        CHECK(p.N[k] == approx(m).epsilon(1e-8));
      }
      CHECK_FALSE(p.transformed);
    }
  }

  TEST_CASE("frequency of a constant is zero and of zero is undefined") {
    auto I = pde::CoefficientField::identity();
    auto p = radial_profile(constant_field(2.0), I, {}, {0.2, 0.4});
    CHECK(p.N[0] == approx(0.0));
    auto z = radial_profile(constant_field(0.0), I, {}, {0.2, 0.4});
    CHECK_FALSE(z.defined[0]);
    CHECK(std::isnan(z.N[1]));
  }

  TEST_CASE("sum of harmonics: N between the lowest and highest degree and increasing") {
    auto u = holomorphic_field({0.0, 1.0, 0.0, 0.5});
    auto p = radial_profile(u, pde::CoefficientField::identity(), {}, {0.1, 0.2, 0.4, 0.6, 0.8, 1.0});
    for (std::size_t k = 0; k < p.r.size(); ++k) {
      // H = pi (r^3 + r^7/4), I = pi (r^2 + 3 r^6/4)
      double r = p.r[k];
      double oracle = r * (r * r + 0.75 * std::pow(r, 6)) / (std::pow(r, 3) + 0.25 * std::pow(r, 7));
      CHECK(p.N[k] == approx(oracle).epsilon(1e-8));
      if (k) CHECK(p.N[k] > p.N[k - 1]);
    }
    auto m = frequency_monotonicity_check(p);
    CHECK(m.ok);
    CHECK(m.C == 0.0);
  }

  TEST_CASE("constant anisotropic coefficient through the ellipse change of variables") {
    // a u_xx + b u_yy = 0 for u = b x^2 - a y^2; in y coordinates it is ab Re y^2
    const double a = 3.0, b = 0.5;
    auto A = pde::CoefficientField::constant(Mat2{a, 0, 0, b});
    AnalyticField u([&](Vec2 p) { return b * p.x * p.x - a * p.y * p.y; },
                    [&](Vec2 p) { return Vec2{2 * b * p.x, -2 * a * p.y}; });
    auto p = radial_profile(u, A, {}, {0.1, 0.2, 0.3});
    CHECK(p.transformed);
    for (double N : p.N) CHECK(N == approx(2.0).epsilon(1e-8));

    auto e = ellipsoid_transform(Mat2{a, 0, 0, b});
    CHECK(e.K == approx(3.0));
    Mat2 prod = e.J * e.J * Mat2{a, 0, 0, b};
    CHECK(prod.a11 == approx(1.0));
    CHECK(prod.a22 == approx(1.0));
    CHECK(std::abs(prod.a12) < 1e-12);
    CHECK(e.inner(1.0) * e.outer(1.0) == approx(1.0));
    // E_r sits between B_{r/sqrt K} and B_{sqrt K r}
    for (double t = 0; t < 2 * kPi; t += 0.1) {
      Vec2 in{0.99 * e.inner(1.0) * std::cos(t), 0.99 * e.inner(1.0) * std::sin(t)};
      Vec2 out{1.01 * e.outer(1.0) * std::cos(t), 1.01 * e.outer(1.0) * std::sin(t)};
      CHECK(e.in_ellipse(in, {}, 1.0));
      CHECK_FALSE(e.in_ellipse(out, {}, 1.0));
    }
  }

  TEST_CASE("rotated coefficient") {
    double c = std::cos(0.4), s = std::sin(0.4);
    Mat2 R{c, -s, s, c};
    Mat2 A0 = R * Mat2{4, 0, 0, 1} * R.transpose();
    auto e = ellipsoid_transform(A0);
    Mat2 prod = e.J_inv * e.J_inv;
    CHECK(prod.a11 == approx(A0.a11));
    CHECK(prod.a12 == approx(A0.a12));
    CHECK(prod.a22 == approx(A0.a22));
    CHECK(e.K == approx(4.0));
  }

  TEST_CASE("frequency on a grid function") {
    auto u = sampled(monomial_field(2), 256);
    auto p = radial_profile(u, pde::CoefficientField::identity(), {}, {0.3, 0.5, 0.7});
    for (double N : p.N) CHECK(N == approx(2.0).epsilon(1e-2));
  }

  TEST_CASE("circles must stay in the region") {
    ProfileOptions opt;
    opt.region = ball_region({}, 0.5);
    CHECK_NOTHROW(radial_profile(monomial_field(1), pde::CoefficientField::identity(), {}, {0.4}, opt));
    CHECK_THROWS_AS(radial_profile(monomial_field(1), pde::CoefficientField::identity(), {}, {0.6}, opt), Error);
    CHECK_THROWS_AS(radial_profile(monomial_field(1), pde::CoefficientField::identity(), {}, {0.4, 0.2}), Error);
  }

  TEST_CASE("monotonicity constant against a hand computed oracle") {
    RadialProfile p;
    p.r = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    p.N = {1.0, 0.9, 0.95, 0.7, 0.8, 0.85};
    p.H = std::vector<double>(6, 1.0);
    p.I = p.N;
    p.defined = std::vector<std::uint8_t>(6, 1);
    auto m = frequency_monotonicity_check(p, 0.0);
    double oracle = std::max(std::log(1.0 / 0.9), std::log(0.95 / 0.7)) / 0.1;
    CHECK(m.C == approx(oracle));
    CHECK(m.ok);
    // with the correction e^{Cr} N(r) is nondecreasing
    for (std::size_t k = 0; k + 1 < p.r.size(); ++k)
      CHECK(std::exp(m.C * p.r[k + 1]) * p.N[k + 1] >= std::exp(m.C * p.r[k]) * p.N[k] * (1 - 1e-12));

    p.defined[2] = 0;
    p.defined[3] = 0;
    auto few = frequency_monotonicity_check(p, 0.0);
    CHECK(few.excluded.size() == 2);
    CHECK_FALSE(few.ok);
  }

  TEST_CASE("three spheres for monomials is an equality with sup norms") {
    auto I = pde::CoefficientField::identity();
    for (int m = 1; m <= 4; ++m) {
      auto r = three_spheres_verify(monomial_field(m), I, {}, {0.25, 0.5, 1.0}, NormKind::sup);
      CHECK(r.alpha == approx(0.5));
      CHECK(r.Q == approx(1.0).epsilon(1e-10));
      CHECK(r.pass);
    }
  }

  TEST_CASE("three spheres quotient stays below one for a harmonic polynomial") {
    // for a sum of Re z^k with positive coefficients the sup on |z| = r is attained at z = r
    auto u = holomorphic_field({1.0, 0.5, 0.25, 0.125});
    auto I = pde::CoefficientField::identity();
    for (auto kind : {NormKind::sup, NormKind::sphere_L2, NormKind::ball_L2}) {
      auto r = three_spheres_verify(u, I, {}, {0.3, 0.9, 2.0}, kind);
      CHECK(r.Q <= 1.0 + 1e-9);
    }
  }

  TEST_CASE("norms on circles and balls") {
    auto u = monomial_field(3);
    CHECK(circle_norm(u, {}, 0.5, NormKind::sup) == approx(0.125).epsilon(1e-12));
    CHECK(circle_norm(u, {}, 0.5, NormKind::sphere_L2) == approx(std::sqrt(kPi * std::pow(0.5, 7))));
    CHECK(circle_norm(u, {}, 0.5, NormKind::ball_L2) == approx(std::sqrt(kPi * std::pow(0.5, 8) / 8)));
  }

  TEST_CASE("restricted exponent") {
    SphereTriple t{0.1, 0.2, 1.0, true};
    double K = 2.0;
    double oracle = std::log(1.0 / 0.4) / (std::log(1.0 / 0.4) + 1.5 * std::log(4.0));
    CHECK(restricted_alpha(t, K, 1.5) == approx(oracle));
    // K = 1, C = 1 reduces to the free exponent
    CHECK(restricted_alpha(t, 1.0, 1.0) == approx(std::log(5.0) / std::log(10.0)));
    auto A = pde::CoefficientField::constant(Mat2{2, 0, 0, 1});
    CHECK_THROWS_AS(three_spheres_verify(monomial_field(1), A, {}, {0.1, 0.6, 1.0, true}, NormKind::sup), Error);
    CHECK_THROWS_AS(three_spheres_verify(monomial_field(1), A, {}, {0.5, 0.2, 1.0}, NormKind::sup), Error);
  }

  TEST_CASE("doubling ratios for monomials") {
    auto I = pde::CoefficientField::identity();
    for (int m = 0; m <= 3; ++m) {
      auto rep = doubling_check(monomial_field(m), I, {}, {0.1, 0.2, 0.4});
      for (const auto& row : rep.rows) {
        CHECK(row.mass_ratio == approx(std::pow(2.0, 2 * m + 2)).epsilon(1e-8));
        CHECK(row.H_ratio == approx(std::pow(2.0, 2 * m + 1)).epsilon(1e-8));
      }
      CHECK(rep.bounded);
      CHECK(rep.growth_exponent == approx(2 * m + 2).epsilon(1e-8));
    }
  }

  TEST_CASE("profile csv") {
    auto p = radial_profile(monomial_field(1), pde::CoefficientField::identity(), {}, {0.5});
    std::stringstream ss;
    write_profile_csv(ss, p);
    std::string head, row;
    std::getline(ss, head);
    std::getline(ss, row);
    CHECK(head == "r,H,I,N");
    CHECK(row.rfind("0.5,", 0) == 0);
  }
}
