#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "approx.hpp"
#include "cauchylab/pde.hpp"

using namespace cauchylab;
using namespace cauchylab::pde;
using geometry::Domain;
using geometry::grid_for;

namespace {

double max_error(const DiscreteSolution& u, const std::function<double(Vec2)>& exact) {
  double e = 0.0;
  for (int j = 0; j < u.grid.ny; ++j)
    for (int i = 0; i < u.grid.nx; ++i) {
      int k = u.grid.index(i, j);
      if (u.inside[k]) e = std::max(e, std::abs(u.values[k] - exact(u.grid.node(i, j))));
    }
  return e;
}

// 5.0 cells of padding off an aligned square grid
geometry::GridSpec square_grid(double w, double hgt, int cells) {
  geometry::GridSpec g;
  g.h = w / cells;
  g.origin = {-2 * g.h, -2 * g.h};
  g.nx = cells + 5;
  g.ny = static_cast<int>(std::ceil(hgt / g.h)) + 5;
  return g;
}

const auto none = SourceData::none();

}  // namespace

TEST_SUITE("pde") {
  TEST_CASE("linear data is reproduced exactly") {
    auto sq = Domain::rectangle(1, 1);
    auto lin = [](Vec2 p) { return p.x; };
    auto u = solve_dirichlet(sq, CoefficientField::identity(), ZeroOrderTerm::zero(), none, lin, grid_for(sq, 40),
                             {1e-13, 0});
    CHECK(max_error(u, lin) < 1e-10);
    auto u2 = solve_dirichlet(sq, CoefficientField::constant(Mat2::diag(2, 2)), ZeroOrderTerm::zero(), none, lin,
                              grid_for(sq, 40), {1e-13, 0});
    CHECK(max_error(u2, lin) < 1e-10);
    // cut faces on a disc too
    auto d = Domain::disc(1.0);
    auto u3 = solve_dirichlet(d, CoefficientField::identity(), ZeroOrderTerm::zero(), none,
                              [](Vec2 p) { return 2 * p.x - p.y; }, grid_for(d, 37), {1e-13, 0});
    CHECK(max_error(u3, [](Vec2 p) { return 2 * p.x - p.y; }) < 1e-9);
  }

  TEST_CASE("second order convergence on a manufactured solution") {
    auto dom = Domain::rectangle(kPi, 1.0);
    auto exact = [](Vec2 p) { return std::sin(p.x) * std::sinh(p.y); };
    std::vector<double> err;
    for (int n : {32, 64, 128}) {
      auto u = solve_dirichlet(dom, CoefficientField::identity(), ZeroOrderTerm::zero(), none, exact,
                               grid_for(dom, n), {1e-13, 0});
      err.push_back(max_error(u, exact));
    }
    for (std::size_t k = 0; k + 1 < err.size(); ++k) {
      CHECK(err[k] / err[k + 1] >= 3.5);
      CHECK(err[k] / err[k + 1] <= 4.5);
    }
  }

  TEST_CASE("variable coefficients converge at second order") {
    // div((1+x) grad u) = f with u = x^2 y + y^3
    auto dom = Domain::rectangle(1, 1);
    auto A = CoefficientField::scalar([](Vec2 p) { return 1 + p.x; }, 2.0, 1.0);
    SourceData src;
    src.f = [](Vec2 p) { return 2 * p.x * p.y + (1 + p.x) * (2 * p.y + 6 * p.y); };
    auto exact = [](Vec2 p) { return p.x * p.x * p.y + p.y * p.y * p.y; };
    std::vector<double> err;
    for (int n : {32, 64, 128}) {
      auto u = solve_dirichlet(dom, A, ZeroOrderTerm::zero(), src, exact, square_grid(1, 1, n), {1e-13, 0});
      err.push_back(max_error(u, exact));
    }
    CHECK(err[0] / err[1] >= 3.0);
    CHECK(err[1] / err[2] >= 3.0);
    CHECK(err[1] / err[2] <= 4.5);
  }

  TEST_CASE("reported residual is below the solver tolerance") {
    auto d = Domain::disc(1.0);
    auto u = solve_dirichlet(d, CoefficientField::identity(), ZeroOrderTerm::zero(), none,
                             [](Vec2 p) { return std::exp(p.x) * std::cos(p.y); }, grid_for(d, 64));
    CHECK(u.residual <= 1e-10);
    CHECK(u.iterations > 0);
  }

  TEST_CASE("discrete maximum principle for c <= 0") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1, 1);
    auto d = Domain::disc(1.0);
    auto g = grid_for(d, 32);
    for (int t = 0; t < 50; ++t) {
      double b = 0.5 * (U(rng) + 1) * 0.8, kx = 3 * U(rng), ky = 3 * U(rng), cc = -2.0 * (U(rng) + 1);
      auto A = CoefficientField::scalar([=](Vec2 p) { return 1 + b * std::sin(kx * p.x + ky * p.y); }, 1 / (1 - b), 5);
      double f1 = U(rng), f2 = U(rng);
      auto bc = [=](Vec2 p) { return f1 * p.x + f2 * p.y * p.y; };
      auto u = solve_dirichlet(d, A, ZeroOrderTerm::constant(cc), none, bc, g, {1e-12, 0});
      double bmax = 0.0;
      for (int k = 0; k < 2048; ++k) {
        double th = 2 * kPi * k / 2048;
        bmax = std::max(bmax, bc({std::cos(th), std::sin(th)}));
      }
      double imax = -1e300;
      for (std::size_t k = 0; k < u.values.size(); ++k)
        if (u.inside[k]) imax = std::max(imax, u.values[k]);
      CHECK(imax <= std::max(bmax, 0.0) + 1e-9);
    }
  }

  TEST_CASE("ellipticity violations are rejected") {
    auto bad = CoefficientField::constant(Mat2::diag(1, -1));
    auto sq = Domain::rectangle(1, 1);
    CHECK_THROWS_AS(solve_dirichlet(sq, bad, ZeroOrderTerm::zero(), none, [](Vec2) { return 0.0; }, grid_for(sq, 8)),
                    Error);
  }

  TEST_CASE("normalized norms") {
    auto sq = Domain::rectangle(1, 1);
    auto g = square_grid(1, 1, 200);
    auto R = region_of(sq);
    auto one = constant_field(1.0);
    CHECK(norm_L2(one, g, R, 1.0).value == approx(1.0).epsilon(1e-9));
    CHECK(norm_L2(one, g, R, 2.0).value == approx(0.5).epsilon(1e-9));
    AnalyticField x([](Vec2 p) { return p.x; }, [](Vec2) { return Vec2{1, 0}; });
    CHECK(norm_L2(x, g, R, 1.0).value == approx(1 / std::sqrt(3.0)).epsilon(1e-4));
    // H1 of x: (1/3 + 1)^{1/2}
    CHECK(norm_H1(x, g, R, 1.0).value == approx(std::sqrt(4.0 / 3.0)).epsilon(1e-4));
    auto empty = norm_L2(one, g, [](Vec2) { return false; }, 1.0);
    CHECK(empty.value == 0.0);
    CHECK(empty.empty_region);
  }

  TEST_CASE("normalized norms are invariant under joint scaling") {
    auto f = [](double s) {
      return AnalyticField([s](Vec2 p) { return std::sin(p.x / s) * std::exp(p.y / s); },
                           [s](Vec2 p) {
                             return Vec2{std::cos(p.x / s) * std::exp(p.y / s) / s, std::sin(p.x / s) * std::exp(p.y / s) / s};
                           });
    };
    double l2 = 0, h1 = 0;
    for (double s : {1.0, 2.0, 0.5}) {
      auto g = square_grid(s, s, 128);
      g.origin = {0, 0};
      g.nx = g.ny = 129;
      auto R = region_of(Domain::rectangle(s, s));
      double a = norm_L2(f(s), g, R, s), b = norm_H1(f(s), g, R, s);
      if (s == 1.0) {
        l2 = a;
        h1 = b;
      } else {
        CHECK(a == approx(l2).epsilon(1e-12));
        CHECK(b == approx(h1).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("trace norms on sine modes") {
    const int N = 255;
    std::vector<double> zero(N, 0.0), g(N), psi(N);
    auto t0 = trace_norms(zero, zero, kPi, 1.0);
    CHECK(t0.h_half == 0.0);
    CHECK(t0.h_minus_half == 0.0);
    for (int j = 0; j < N; ++j) g[j] = std::sin(kPi * (j + 1) / (N + 1));
    auto t = trace_norms(g, {}, kPi, 1.0);
    CHECK(t.h_half == approx(std::pow(2.0, 0.25) * std::sqrt(kPi / 2)).epsilon(1e-10));
    double prev = 1e300;
    for (int n = 1; n <= 20; ++n) {
      for (int j = 0; j < N; ++j) psi[j] = std::sin(n * kPi * (j + 1) / (N + 1));
      double v = trace_norms({}, psi, kPi, 1.0).h_minus_half;
      CHECK(v < prev);
      CHECK(v == approx(std::pow(1.0 + n * n, -0.25) * std::sqrt(kPi / 2)).epsilon(1e-10));
      prev = v;
    }
    CHECK_THROWS_AS(trace_norms({1, 2, 3}, {}, 1.0, 1.0), Error);
  }

  TEST_CASE("trace norm duality inequality") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> G;
    const int N = 64;
    const double L = 1.7;
    for (int t = 0; t < 100; ++t) {
      std::vector<double> g(N), psi(N);
      for (int j = 0; j < N; ++j) {
        g[j] = G(rng);
        psi[j] = G(rng);
      }
      double ip = 0.0;
      for (int j = 0; j < N; ++j) ip += g[j] * psi[j] * L / (N + 1);
      auto tn = trace_norms(g, psi, L, 1.0);
      CHECK(std::abs(ip) <= tn.h_half * tn.h_minus_half * (1 + 1e-12));
    }
  }

  TEST_CASE("positive multiplier") {
    auto I = CoefficientField::identity();
    auto m0 = positive_multiplier(I, ZeroOrderTerm::zero(), 0.5, 1.0);
    CHECK(m0.max_deviation < 1e-7);

    auto c = ZeroOrderTerm::constant(1.0);
    double d1 = positive_multiplier(I, c, 0.4, 1.0, {}, 128).max_deviation;
    double d2 = positive_multiplier(I, c, 0.2, 1.0, {}, 128).max_deviation;
    CHECK(d1 / d2 == approx(4.0).epsilon(0.05));

    // div grad w = -c w: c <= 0 makes w subharmonic, so w <= 1; c >= 0 gives w >= 1
    auto neg = positive_multiplier(I, ZeroOrderTerm::constant(-3.0), 0.5, 1.0);
    auto pos = positive_multiplier(I, ZeroOrderTerm::constant(3.0), 0.5, 1.0);
    for (std::size_t k = 0; k < neg.w.values.size(); ++k)
      if (neg.w.inside[k]) {
        CHECK(neg.w.values[k] <= 1.0 + 1e-9);
        CHECK(pos.w.values[k] >= 1.0 - 1e-9);
      }

    CHECK_THROWS_AS(positive_multiplier(I, ZeroOrderTerm::constant(1.0), 2.0, 0.1), Error);
    auto fit = fit_multiplier_radius(I, ZeroOrderTerm::constant(1.0), 2.0, 0.1);
    CHECK(fit.R0 < 2.0);
    CHECK(fit.max_deviation <= 0.01 + 1e-12);
  }

  TEST_CASE("reduction to pure principal part") {
    auto I = CoefficientField::identity();
    auto d = Domain::disc(0.5);
    auto g = grid_for(d, 64);
    auto u = solve_dirichlet(d, I, ZeroOrderTerm::zero(), none, [](Vec2 p) { return p.x * p.y; }, g);
    auto w1 = solve_dirichlet(d, I, ZeroOrderTerm::zero(), none, [](Vec2) { return 1.0; }, g);
    auto r1 = reduce_zero_order(u, w1, I);
    CHECK(max_error(r1.v, [&](Vec2 p) { return u.value(p); }) < 1e-9);

    auto c = ZeroOrderTerm::constant(2.0);
    auto w = positive_multiplier(I, c, 0.5, 1.0, {}, g).w;
    auto same = reduce_zero_order(w, w, I);
    CHECK(max_error(same.v, [](Vec2) { return 1.0; }) < 1e-14);
    CHECK(same.residual_v < 1e-12);

    auto uc = solve_dirichlet(d, I, c, none, [](Vec2 p) { return std::cos(p.x) + p.y; }, g, {1e-12, 0});
    auto red = reduce_zero_order(uc, w, I);
    CHECK(red.ellipticity_ok);
    CHECK(red.residual_ok);

    auto negw = w;
    for (auto& v : negw.values) v = -v;
    CHECK_THROWS_AS(reduce_zero_order(uc, negw, I), Error);
  }

  TEST_CASE("particular solution subtraction") {
    auto I = CoefficientField::identity();
    auto d = Domain::disc(1.0);
    std::vector<double> errs;
    for (int n : {32, 64}) {
      auto g = grid_for(d, n);
      auto u = solve_dirichlet(d, I, ZeroOrderTerm::zero(), none, [](Vec2 p) { return p.x; }, g);
      auto same = subtract_particular(u, I, ZeroOrderTerm::zero(), none, 1.0);
      CHECK(max_error(same.difference, [](Vec2 p) { return p.x; }) < 1e-9);

      // div grad u0 = f, u0 = 0 on the circle: u0 = f (|x|^2 - R^2) / 4
      SourceData src;
      src.f = [](Vec2) { return 3.0; };
      auto p = subtract_particular(u, I, ZeroOrderTerm::zero(), src, 1.0);
      errs.push_back(max_error(p.u0, [](Vec2 q) { return 3.0 * (dot(q, q) - 1.0) / 4.0; }));

      SourceData src2;
      src2.f = [](Vec2) { return 6.0; };
      auto p2 = subtract_particular(u, I, ZeroOrderTerm::zero(), src2, 1.0);
      CHECK(norm_L2(p2.u0).value == approx(2.0 * norm_L2(p.u0).value).epsilon(1e-9));
    }
    // quadratics are reproduced by the cut-arm scheme
    CHECK(errs[0] < 1e-8);
    CHECK(errs[1] < 1e-8);
  }

  TEST_CASE("grid functions export as CSV") {
    geometry::GridSpec g;
    g.nx = g.ny = 2;
    g.h = 0.5;
    std::stringstream ss;
    write_csv(ss, GridFunction(g, {1, 2, 3, 4}));
    std::string header;
    std::getline(ss, header);
    CHECK(header == "x,y,value");
    int lines = 0;
    for (std::string l; std::getline(ss, l);) ++lines;
    CHECK(lines == 4);
  }
}
