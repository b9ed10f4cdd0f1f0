#include <doctest.h>

#include <cmath>
#include <sstream>

#include "approx.hpp"
#include "cauchylab/smallness.hpp"

using namespace cauchylab;
using namespace cauchylab::smallness;

TEST_SUITE("smallness") {
  TEST_CASE("radii and exponents") {
    auto r = radii_from_h(0.3, 2.0);
    CHECK(r.r1 == approx(0.005));
    CHECK(r.r2 == approx(0.015));
    CHECK(r.r3 == approx(0.15));
    // r3/r2 = 5K, r3/r1 = 15K
    CHECK(holo_alpha(r.r1, r.r2, r.r3) == approx(std::log(10.0) / std::log(30.0)));
    CHECK(holo_alpha(1, 2, 4) == approx(0.5));
    for (int n = 1; n <= 6; ++n)
      CHECK(unit_ball_volume(n) == approx(std::pow(kPi, n / 2.0) / std::tgamma(n / 2.0 + 1)));
    CHECK(unit_ball_volume(2) == approx(kPi));
    CHECK(unit_ball_volume(3) == approx(4 * kPi / 3));
  }

  TEST_CASE("exponent budget") {
    auto b = make_budget(0.5, 2.0, 1.0, 1.0, 0.1);
    // C1 = Q^{1/(1-alpha)} (n^{n/2} (15K)^n)^{1/2}, C2 = (30K)^n / pi
    CHECK(b.C1 == approx(4.0 * std::sqrt(2.0 * 225.0)));
    CHECK(b.C2 == approx(900.0 / kPi));
    CHECK(b.C() == approx(b.C1 * 10.0));
    // underflows at h = 0.1
    CHECK(b.delta_lower() == 0.0);
    auto c = make_budget(0.5, 1.0, 1.0, 1.0, 1.0);
    CHECK(c.delta_lower() == approx(std::pow(0.5, 900.0 / kPi)));
  }

  TEST_CASE("chain along a segment") {
    auto c = build_chain_along({{0, 0}, {1, 0}}, 0.05);
    REQUIRE(c.centers.size() >= 2);
    CHECK(c.centers.front().x == approx(0.0));
    CHECK(c.centers.back().x == approx(1.0));
    for (std::size_t k = 0; k + 2 < c.centers.size(); ++k)
      CHECK(dist(c.centers[k], c.centers[k + 1]) == approx(0.1));
    CHECK(dist(c.centers[c.centers.size() - 2], c.centers.back()) <= 0.1 + 1e-12);
    CHECK(c.N == 10);
    CHECK(c.path_length == approx(1.0));
  }

  TEST_CASE("chain invariants in a square and an L-shape") {
    auto sq = geometry::Domain::rectangle(1, 1);
    auto L = geometry::Domain::polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
    double h = 0.1;
    auto rad = radii_from_h(h, 1.0);
    for (const auto& [dom, a, b] : std::vector<std::tuple<geometry::Domain, Vec2, Vec2>>{
             {sq, {0.2, 0.2}, {0.8, 0.7}}, {L, {1.8, 0.5}, {0.5, 1.8}}}) {
      auto G = geometry::interior_envelope(dom, h, geometry::grid_for(dom, 128));
      auto plan = build_chain(G, a, b, rad.r1);
      plan.radii = rad;
      check_chain(plan, dom);
      CHECK(plan.ok());
      CHECK(plan.N <= dom.area() / (kPi * rad.r1 * rad.r1));
      CHECK(plan.path_length >= dist(a, b) - 1e-9);
      std::stringstream ss;
      write_chain_csv(ss, plan);
      CHECK_FALSE(ss.str().empty());
    }
  }

  TEST_CASE("chain check flags a ball leaving the domain") {
    auto sq = geometry::Domain::rectangle(1, 1);
    auto plan = build_chain_along({{0.02, 0.5}, {0.5, 0.5}}, 0.01);
    plan.radii = {0.01, 0.03, 0.05};
    check_chain(plan, sq);
    CHECK_FALSE(plan.ok());
  }

  TEST_CASE("ball norm") {
    CHECK(ball_norm(constant_field(2.0), {0.3, 0.3}, 0.5, 1.0) == approx(2.0 * std::sqrt(kPi * 0.25)));
    CHECK(ball_norm(constant_field(2.0), {}, 0.5, 0.5) == approx(4.0 * std::sqrt(kPi * 0.25)));
  }

  TEST_CASE("interior propagation on a harmonic solution") {
    auto sq = geometry::Domain::rectangle(1, 1);
    auto grid = geometry::grid_for(sq, 64);
    auto exact = [](Vec2 p) { return p.x * p.x - p.y * p.y + 0.3 * p.x; };
    auto u = pde::solve_dirichlet(sq, pde::CoefficientField::identity(), pde::ZeroOrderTerm::zero(), {}, exact, grid,
                                  {1e-12, 0});
    double h = 0.1;
    auto G = geometry::interior_envelope(sq, h, grid);
    auto rep = interior_propagation(u, {}, {0.5, 0.5}, 0.2, G, h);
    CHECK(rep.invariants_ok);
    CHECK(rep.measured <= rep.bound);
    CHECK(rep.pass);
    CHECK(rep.eta == approx(ball_norm(u, {0.5, 0.5}, 0.2, u.rho0)).epsilon(1e-4));
    CHECK(rep.alpha == approx(std::log(5.0) / std::log(15.0)));
    CHECK(rep.N_realized <= rep.N_max);
    CHECK(rep.delta >= rep.delta_lower);
    CHECK(rep.delta <= 1.0);
  }

  TEST_CASE("cone chain closed forms") {
    const double rho0 = 1.0, M0 = 1.0, h1 = 0.05, root = std::sqrt(2.0);
    auto c = cone_chain({0, 0}, {0, 1}, rho0, M0, h1);
    CHECK(c.t0 == approx(root / (1 + root) * 0.95));
    CHECK(c.s0 == approx(0.25 * (0.95 / (1 + root) - 0.05)));
    CHECK(c.identity_residual < 1e-14);
    CHECK(c.tangency_residual < 1e-12);
    CHECK(cone_balls_contained(c));
    // neighbours tangent, radii geometric with ratio q
    for (int k = 0; k + 1 < c.N(); ++k) {
      CHECK(dist(c.y[k], c.y[k + 1]) == approx(c.radius[k] + c.radius[k + 1]).epsilon(1e-10));
      CHECK(c.radius[k + 1] / c.radius[k] == approx(c.q));
    }
    double sum = 0.0;
    for (double r : c.radius) sum += 2 * r;
    CHECK(sum <= c.geometric_sum() + 1e-12);
    CHECK(c.radius.back() >= 1e-4 * c.s0 * c.q);
    CHECK_THROWS_AS(cone_chain({0, 0}, {0, 1}, 1.0, 1.0, 0.4), Error);
    CHECK_THROWS_AS(cone_chain({0, 0}, {0, 1}, 1.0, 0.5, 0.01), Error);
  }

  TEST_CASE("phi minimizer against a dense scan") {
    for (double vt : {0.5, 1.0, 2.0})
      for (double sg : {0.1, 0.5, 1.0})
        for (double lz : {-5.0, -50.0}) {
          auto r = phi_minimize_log(vt, sg, lz, 1.0);
          double best = 1e300;
          for (int k = 0; k <= 200000; ++k) {
            double tau = std::exp(-30.0 + 30.0 * k / 200000.0);
            best = std::min(best, phi(tau, vt, sg, lz));
          }
          CHECK(r.brute_inf == approx(best).epsilon(1e-3));
          CHECK(r.l == approx(1 / (1 + vt + sg)));
          CHECK(r.mu == approx(vt / (1 + vt + sg)));
          CHECK(r.bound >= r.brute_inf * (1 - 1e-12));
        }
    CHECK(phi(0.5, 1.0, 1.0, 0.0) == approx(0.5 + 2.0));
    CHECK_THROWS_AS(phi_minimize(1.0, 1.0, 2.0, 1.0), Error);
  }

  TEST_CASE("loglog modulus against a dense scan of the integrand") {
    LogLogParams prm;
    prm.vartheta = 2.0;
    prm.p = 4.0;
    const double D = (2.0 / 2) * (0.5 - 0.25);
    for (double lt : {-10.0, -100.0, -1000.0}) {
      auto v = loglog_modulus(prm, lt);
      double best = 1e300;
      for (int k = 0; k <= 100000; ++k) {
        double s = std::exp(-27.0 * k / 100000.0);
        double e = std::pow(0.5, 1.0 / s);
        best = std::min(best, std::exp(-0.5 * std::log(s) + lt * e) + std::pow(s, D));
      }
      CHECK(v.value == approx(best).epsilon(1e-3));
      CHECK(v.value <= std::pow(prm.s0, D) + std::exp(lt * 0.5) + 1e-12);
    }
    CHECK(loglog_modulus(prm, -1000.0).value < loglog_modulus(prm, -10.0).value);
    CHECK_THROWS_AS(loglog_modulus(prm, -0.5), Error);
  }

  TEST_CASE("loglog fit recovers a synthetic rate") {
    std::vector<double> lt, v;
    for (double t : {-10.0, -100.0, -1e3, -1e4, -1e5}) {
      lt.push_back(t);
      v.push_back(3.0 * std::pow(std::log(-t), -0.7));
    }
    auto f = fit_loglog(lt, v);
    CHECK(f.S == approx(0.7));
    CHECK(f.C == approx(3.0));
    CHECK(f.dominated);
    CHECK_THROWS_AS(fit_loglog({-1.0, -2.0}, {1.0, 1.0}), Error);
  }
}
