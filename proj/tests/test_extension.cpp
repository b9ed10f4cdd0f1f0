#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "approx.hpp"
#include "cauchylab/experiment.hpp"
#include "cauchylab/extension.hpp"

using namespace cauchylab;
using namespace cauchylab::extension;

namespace {

struct Setup {
  geometry::Domain dom = geometry::Domain::rectangle(1, 1);
  AugmentedDomain aug;
  geometry::GridSpec grid;
  Setup() : aug(make()) {
    experiment::ExperimentConfig cfg;
    cfg.grid = 64;
    grid = experiment::probe_grid(cfg);
  }
  AugmentedDomain make() {
    auto sigma = geometry::rectangle_side(dom, "bottom", 0.5, 1.0, 0.35);
    return augment(sigma, sigma.P());
  }
  pde::DiscreteSolution solve(const std::function<double(Vec2)>& bc, const pde::SourceData& src = {}) const {
    return pde::solve_dirichlet(dom, pde::CoefficientField::identity(), pde::ZeroOrderTerm::zero(), src, bc, grid,
                                {1e-13, 0});
  }
};

}  // namespace

TEST_SUITE("extension") {
  TEST_CASE("bump") {
    CHECK(bump(0.0) == 1.0);
    CHECK(bump(0.25) == 1.0);
    CHECK(bump(0.375) == approx(0.5));
    CHECK(bump(0.5) == 0.0);
    CHECK(bump(3.0) == 0.0);
    CHECK_THROWS_AS(bump(-0.1), Error);
  }

  TEST_CASE("lowered graph of a flat boundary") {
    std::vector<double> xs, zs;
    for (int k = -200; k <= 200; ++k) {
      xs.push_back(k / 400.0);
      zs.push_back(0.0);
    }
    const double rho0 = 0.5, rho1 = 0.35, M0 = 1.0;
    auto lg = lowered_graph(xs, zs, rho0, rho1, M0);
    for (std::size_t k = 0; k < xs.size(); ++k)
      CHECK(lg.z_minus[k] == approx(-0.5 * rho1 * bump(M0 * std::abs(xs[k]) / rho1)));
    // the bump ramp has slope 2 M0
    CHECK(lg.max_added_slope == approx(2 * M0).epsilon(1e-9));
    CHECK(lg.norm <= lg.bound);
    CHECK(lg.bound == approx(3.5 * rho0 * M0));
    CHECK(lg.ok);
  }

  TEST_CASE("local frame round trip") {
    LocalFrame f;
    f.P = {0.3, -0.2};
    f.e2 = {0.6, 0.8};
    f.e1 = {0.8, -0.6};
    for (Vec2 x : {Vec2{0, 0}, Vec2{1, 2}, Vec2{-0.5, 0.25}}) {
      Vec2 y = f.to_global(f.to_local(x));
      CHECK(y.x == approx(x.x));
      CHECK(y.y == approx(x.y));
    }
    CHECK(f.to_local(f.P + f.e2).y == approx(1.0));
  }

  TEST_CASE("augmented domain invariants and predicates") {
    Setup s;
    const auto& a = s.aug;
    CHECK(a.ok());
    CHECK(a.r0 > 0.0);
    // the anchor ball sits below the boundary, outside the domain
    CHECK_FALSE(s.dom.contains(a.x0));
    CHECK(a.in_omega_tilde(a.x0));
    CHECK(a.in_omega_tilde({0.5, 0.5}));
    CHECK(a.on_sigma0({0.5, 0.0}));
    CHECK_FALSE(a.on_sigma0({0.5, 0.1}));
    CHECK(a.Z_at(0.0) == approx(0.0));
    CHECK(a.Z_minus_at(0.0) == approx(-0.5 * a.rho1));
  }

  TEST_CASE("augmented domain text round trip") {
    Setup s;
    std::stringstream ss;
    write_augmented(ss, s.aug);
    auto b = read_augmented(ss);
    CHECK(b.rho1 == approx(s.aug.rho1));
    CHECK(b.r0 == approx(s.aug.r0));
    CHECK(b.x0.y == approx(s.aug.x0.y));
    CHECK(b.omega.area() == approx(s.aug.omega.area()));
  }

  TEST_CASE("Cauchy data of linear solutions") {
    Setup s;
    auto pg = patch_grid(s.aug, s.grid);
    REQUIRE(pg.sigma_nodes.size() > 4);
    CHECK(pg.length == approx(0.7));
    auto ux = s.solve([](Vec2 p) { return p.x; });
    auto cx = cauchy_data(ux, pde::CoefficientField::identity(), pde::ZeroOrderTerm::zero(), {}, pg, 0.5);
    for (std::size_t k = 0; k < pg.sigma_nodes.size(); ++k) {
      Vec2 p = s.grid.node(pg.sigma_nodes[k] % s.grid.nx, pg.sigma_nodes[k] / s.grid.nx);
      CHECK(cx.g[k] == approx(p.x));
      CHECK(std::abs(cx.psi[k]) < 1e-8);
    }
    // u = y: zero trace, outward flux -1
    auto uy = s.solve([](Vec2 p) { return p.y; });
    auto cy = cauchy_data(uy, pde::CoefficientField::identity(), pde::ZeroOrderTerm::zero(), {}, pg, 0.5);
    for (std::size_t k = 0; k < pg.sigma_nodes.size(); ++k) {
      CHECK(std::abs(cy.g[k]) < 1e-12);
      CHECK(cy.psi[k] == approx(-1.0).epsilon(1e-6));
    }
    CHECK(cy.g_half < 1e-12);
    CHECK(cy.psi_minus_half > 0.0);
  }

  TEST_CASE("extension of constant data is constant") {
    Setup s;
    auto pg = patch_grid(s.aug, s.grid);
    auto e = extend_cauchy_data([](Vec2) { return 1.0; }, s.aug, pg);
    for (std::size_t k = 0; k < e.v.values.size(); ++k)
      if (e.v.inside[k]) CHECK(e.v.values[k] == approx(1.0).epsilon(1e-8));
    CHECK(e.constant > 0.0);
  }

  TEST_CASE("nodal extension matches quadrature of the interpolated data") {
    Setup s;
    auto pg = patch_grid(s.aug, s.grid);
    std::vector<double> xs, g;
    for (int k : pg.sigma_nodes) {
      double x = s.aug.frame.to_local(s.grid.node(k % s.grid.nx, k / s.grid.nx)).x;
      xs.push_back(x);
      g.push_back(std::sin(3 * x) + x * x);
    }
    auto lin = [&](Vec2 p) {
      double x = s.aug.frame.to_local(p).x;
      if (x <= xs.front()) return g.front();
      if (x >= xs.back()) return g.back();
      std::size_t k = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
      double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
      return (1 - t) * g[k - 1] + t * g[k];
    };
    auto a = extend_cauchy_data(g, s.aug, pg);
    auto b = extend_cauchy_data(lin, s.aug, pg);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.v.values.size(); ++k)
      if (pg.gamma_minus.contains(s.grid.node(static_cast<int>(k % s.grid.nx), static_cast<int>(k / s.grid.nx))))
        worst = std::max(worst, std::abs(a.v.values[k] - b.v.values[k]));
    CHECK(worst < 1e-8);
    CHECK(a.v_H1 == approx(b.v_H1).epsilon(1e-8));
  }

  TEST_CASE("Riesz pair of zero flux vanishes and data scale linearly") {
    Setup s;
    auto pg = patch_grid(s.aug, s.grid);
    auto r0 = riesz_source(std::vector<double>(pg.sigma_nodes.size(), 0.0), pg, *s.aug.omega1, 0.5);
    CHECK(r0.f1_norm == approx(0.0));
    CHECK(r0.F1_norm == approx(0.0));
    std::vector<double> psi(pg.sigma_nodes.size());
    for (std::size_t k = 0; k < psi.size(); ++k) psi[k] = std::sin(0.3 * k);
    auto r1 = riesz_source(psi, pg, *s.aug.omega1, 0.5);
    for (double& v : psi) v *= 3.0;
    auto r3 = riesz_source(psi, pg, *s.aug.omega1, 0.5);
    CHECK(r3.F1_norm == approx(3 * r1.F1_norm).epsilon(1e-6));
    CHECK(r3.constant == approx(r1.constant).epsilon(1e-6));
  }

  TEST_CASE("pipeline on a solution with sources") {
    Setup s;
    pde::SourceData src;
    src.f = [](Vec2 p) { return 0.5 + p.x * p.y; };
    src.F = [](Vec2 p) { return Vec2{0.3 * p.y, -0.2 * p.x}; };
    src.eps = 0.3;
    auto u = s.solve([](Vec2 p) { return std::cos(2 * p.x + p.y); }, src);
    auto P = run_pipeline(u, pde::CoefficientField::identity(), pde::ZeroOrderTerm::zero(), src, s.aug);
    CHECK(P.ext_sol.identical_in_omega);
    CHECK(P.ext_sol.residual <= 1e-6);
    CHECK(P.cd.eta > 0.0);
    CHECK(P.ext_sol.source_norm > 0.0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int t = 0; t < 5; ++t) {
      double a1 = 2 + 4 * U(rng), a2 = 2 + 4 * U(rng);
      std::vector<double> phi(s.grid.size(), 0.0);
      for (std::size_t k = 0; k < phi.size(); ++k)
        if (P.riesz.unknown[k]) {
          Vec2 p = s.grid.node(static_cast<int>(k % s.grid.nx), static_cast<int>(k / s.grid.nx));
          phi[k] = std::sin(a1 * p.x) * std::cos(a2 * p.y);
        }
      CHECK(std::abs(P.riesz.duality_residual(phi, P.cd.psi, P.pg)) <= 1e-8);
    }
    std::stringstream ss;
    write_report_csv(ss, P);
    CHECK_FALSE(ss.str().empty());
  }
}
