#include <doctest.h>

#include <cmath>
#include <queue>
#include <random>
#include <sstream>

#include "approx.hpp"
#include "cauchylab/geometry.hpp"

using namespace cauchylab;
using namespace cauchylab::geometry;

namespace {

// per-pixel area of {x : dist(x, boundary) > h}, exact distance per cell center
double brute_envelope_area(const Domain& d, double h, int n) {
  auto b = d.bbox();
  double dx = (b.hi.x - b.lo.x) / n, dy = (b.hi.y - b.lo.y) / n, a = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      Vec2 p{b.lo.x + (i + 0.5) * dx, b.lo.y + (j + 0.5) * dy};
      if (d.contains(p) && d.boundary_distance(p) > h) a += dx * dy;
    }
  return a;
}

Domain l_shape() { return Domain::polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}); }

// 8-connected Dijkstra on the mask, edge lengths h and h sqrt2
double bfs_distance(const GridMask& m, int src, int dst) {
  const auto& g = m.grid;
  std::vector<double> d(g.size(), 1e300);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
  d[src] = 0;
  q.push({0, src});
  while (!q.empty()) {
    auto [dk, k] = q.top();
    q.pop();
    if (dk > d[k]) continue;
    if (k == dst) return dk;
    int i = k % g.nx, j = k / g.nx;
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b) {
        if (!a && !b) continue;
        if (!m.at(i + a, j + b)) continue;
        int n = g.index(i + a, j + b);
        double w = (a && b) ? g.h * std::sqrt(2.0) : g.h;
        if (dk + w < d[n]) {
          d[n] = dk + w;
          q.push({d[n], n});
        }
      }
  }
  return 1e300;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("interior envelope of the unit square is the inner square") {
    auto sq = Domain::rectangle(1, 1);
    auto m = interior_envelope(sq, 0.25, grid_for(sq, 256));
    CHECK(m.area() == approx(0.25).epsilon(0.02));
    for (std::size_t k = 0; k < m.inside.size(); ++k)
      if (m.inside[k]) {
        Vec2 p = m.grid.node(static_cast<int>(k % m.grid.nx), static_cast<int>(k / m.grid.nx));
        CHECK(sq.boundary_distance(p) > 0.25);
      }
  }

  TEST_CASE("interior envelope of the disc is the smaller disc") {
    auto d = Domain::disc(1.0);
    auto m = interior_envelope(d, 0.5, grid_for(d, 256));
    CHECK(m.area() == approx(kPi * 0.25).epsilon(0.02));
  }

  TEST_CASE("interior envelope of an L-shape matches a per-pixel distance oracle") {
    auto L = l_shape();
    auto m = interior_envelope(L, 0.1, grid_for(L, 512));
    double oracle = brute_envelope_area(L, 0.1, 1000);
    CHECK(m.area() == approx(oracle).epsilon(0.02));
  }

  TEST_CASE("interior envelope rejects nonpositive h and may be empty") {
    auto sq = Domain::rectangle(1, 1);
    CHECK_THROWS_AS(interior_envelope(sq, 0.0), Error);
    CHECK_THROWS_AS(interior_envelope(sq, -1.0), Error);
    CHECK(interior_envelope(sq, 0.6, grid_for(sq, 64)).empty());
  }

  TEST_CASE("interior envelope is antitone in h") {
    auto L = l_shape();
    auto g = grid_for(L, 128);
    auto prev = interior_envelope(L, 0.02, g);
    for (double h : {0.05, 0.1, 0.2, 0.3}) {
      auto cur = interior_envelope(L, h, g);
      CHECK(cur.subset_of(prev));
      prev = cur;
    }
  }

  TEST_CASE("envelopes below the connectivity threshold are connected") {
    for (const auto& d : {Domain::rectangle(1, 1), Domain::disc(1.0), l_shape(), Domain::annulus(0.5, 1.5)}) {
      double h0 = connectivity_threshold(0.5, 1.0).h0;
      for (double h : {h0, 0.5 * h0, 0.25 * h0}) {
        auto m = interior_envelope(d, h, grid_for(d, 256));
        CHECK(m.connected());
      }
    }
  }

  TEST_CASE("rho of a point") {
    // bottom side of the unit square, P at its midpoint: r(P) = 1/2
    auto sq = Domain::rectangle(1, 1);
    auto s = rectangle_side(sq, "bottom", 0.5, 1.0, 0.3);
    CHECK(rho_of_point(s, {0.5, 0.0}) == approx(0.5 / std::sqrt(2.0)).epsilon(1e-9));

    auto s2 = rectangle_side(sq, "bottom", 1.0, 2.0, 0.3);
    CHECK(rho_of_point(s2, {0.5, 0.0}) == approx(1.0 / std::sqrt(5.0)).epsilon(1e-9));

    auto wide = Domain::rectangle(40, 40);
    auto s3 = rectangle_side(wide, "bottom", 1.0, 3.0, 0.5);
    CHECK(rho_of_point(s3, {20.0, 0.0}) == approx(1.0));

    CHECK_THROWS_AS(rho_of_point(s, {0.5, 0.5}), Error);
  }

  TEST_CASE("geodesic path on a convex mask is straight") {
    auto sq = Domain::rectangle(2, 1, {-0.5, -0.5});
    auto g = grid_for(sq, 256);
    auto m = rasterize(sq, g);
    auto p = geodesic_path(m, {0, 0}, {1, 0});
    CHECK(std::abs(p.length - 1.0) <= g.h);
    auto same = geodesic_path(m, {0.3, 0.1}, {0.3, 0.1});
    CHECK(same.length == 0.0);
  }

  TEST_CASE("geodesic path lengths against a Dijkstra oracle") {
    auto L = l_shape();
    auto g = grid_for(L, 96);
    auto m = rasterize(L, g);
    std::mt19937_64 rng(11);
    std::vector<int> cells;
    for (std::size_t k = 0; k < m.inside.size(); ++k)
      if (m.inside[k]) cells.push_back(static_cast<int>(k));
    std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
    for (int t = 0; t < 100; ++t) {
      int a = cells[pick(rng)], b = cells[pick(rng)];
      Vec2 pa = g.node(a % g.nx, a / g.nx), pb = g.node(b % g.nx, b / g.nx);
      auto p = geodesic_path(m, pa, pb);
      double oracle = bfs_distance(m, a, b);
      CHECK(p.length >= dist(pa, pb) - 1e-12);
      CHECK(p.length <= oracle + g.h * std::sqrt(2.0));
      for (std::size_t k = 0; k + 1 < p.points.size(); ++k) CHECK(dist(p.points[k], p.points[k + 1]) <= g.h * 1.5);
    }
  }

  TEST_CASE("geodesic path between components fails") {
    auto sq = Domain::rectangle(1, 1);
    auto g = grid_for(sq, 64);
    auto m = mask_from(g, [](Vec2 p) { return p.x > 0 && p.x < 1 && p.y > 0 && p.y < 1 && std::abs(p.x - 0.5) > 0.1; });
    CHECK_THROWS_AS(geodesic_path(m, {0.2, 0.5}, {0.8, 0.5}), Error);
  }

  TEST_CASE("Lipschitz graph check uses the normalized norm") {
    std::vector<double> xs;
    for (int k = -100; k <= 100; ++k) xs.push_back(k / 100.0);
    std::vector<double> zero(xs.size(), 0.0);
    for (double M0 : {1.0, 2.0, 5.0}) CHECK(verify_lipschitz_graph(xs, zero, 1.0, M0));

    // Z = x' on x' > 0 over |x'| < 1: sup 1 plus slope 1 exceeds 1
    std::vector<double> half;
    for (double x : xs) half.push_back(std::max(0.0, x));
    CHECK_FALSE(verify_lipschitz_graph(xs, half, 1.0, 1.0));

    // Z = |x'| on |x'| < 1/2 with M0 = 2: 1/2 + 1 <= 2
    std::vector<double> xs2, v;
    for (int k = -100; k <= 100; ++k) {
      xs2.push_back(k / 200.0);
      v.push_back(std::abs(k / 200.0));
    }
    CHECK(verify_lipschitz_graph(xs2, v, 1.0, 2.0));
  }

  TEST_CASE("boundary layer measure closed forms") {
    CHECK(boundary_layer_measure(Domain::rectangle(1, 1), 0.1) == approx(0.36));
    CHECK(boundary_layer_measure(Domain::disc(1.0), 0.1) == approx(0.19 * kPi));
    auto L = l_shape();
    double oracle = L.area() - brute_envelope_area(L, 0.1, 1000);
    CHECK(boundary_layer_measure(L, 0.1) == approx(oracle).epsilon(0.02));
  }

  TEST_CASE("boundary layer measure over h stays bounded") {
    auto L = l_shape();
    double h0 = connectivity_threshold(1.0, 1.0).h0;
    double first = boundary_layer_measure(L, h0) / h0;
    for (double h = h0; h > 1e-3; h *= 0.5) CHECK(boundary_layer_measure(L, h) / h <= 1.5 * first);
  }

  TEST_CASE("connectivity threshold") {
    CHECK(connectivity_threshold(1, 1).h0 == approx(1.0 / (4 * (1 + std::sqrt(2.0)))));
    CHECK(connectivity_threshold(1, 1).h0 == approx(0.10355).epsilon(1e-4));
    CHECK(connectivity_threshold(2, 1).h0 == approx(2 * connectivity_threshold(1, 1).h0));
    CHECK(connectivity_threshold(1, 2).h0 == approx(0.03863).epsilon(1e-3));
    CHECK(connectivity_threshold(1, 2).d0 == approx(0.25));
    CHECK_THROWS_AS(connectivity_threshold(1, 0.5), Error);
  }

  TEST_CASE("mask area converges to the domain area") {
    auto d = Domain::disc(1.0);
    double prev = 1e9;
    for (int n : {32, 64, 128, 256}) {
      double err = std::abs(rasterize(d, grid_for(d, n)).area() - kPi);
      CHECK(err <= prev * 1.05);
      prev = err;
    }
    CHECK(prev < 0.05);
  }

  TEST_CASE("domain invariants are enforced") {
    CHECK_THROWS_AS(Domain::annulus(1.0, 0.5), Error);
    CHECK_THROWS_AS(Domain::polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), Error);
    CHECK_THROWS_AS(LipschitzPortion(Domain::rectangle(1, 1), 0, 0, 1, 1.0, 0.5, 0.5, {0.5, 0}), Error);
  }

  TEST_CASE("domain text format round trip") {
    for (const auto& d : {Domain::rectangle(2, 1, {0.5, -1}), Domain::disc(1.5, {1, 2}), Domain::annulus(1, 4), l_shape()}) {
      std::stringstream ss;
      write_domain(ss, d);
      CHECK(ss.str().rfind("domain ", 0) == 0);
      auto e = read_domain(ss);
      CHECK(e.variant_name() == d.variant_name());
      CHECK(e.area() == approx(d.area()));
      for (Vec2 p : {Vec2{0.7, 0.4}, Vec2{1.2, 1.9}, Vec2{-1, 0.1}}) CHECK(e.contains(p) == d.contains(p));
    }
  }

  TEST_CASE("mask exports as P2") {
    auto d = Domain::disc(1.0);
    std::stringstream ss;
    write_pgm(ss, rasterize(d, grid_for(d, 16)));
    std::string magic;
    ss >> magic;
    CHECK(magic == "P2");
  }
}
