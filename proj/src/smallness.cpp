#include "cauchylab/smallness.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <random>

#include "cauchylab/hadamard.hpp"

namespace cauchylab::smallness {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kGridPoints = 10000;
}  // namespace

Radii radii_from_h(double h, double K) {
  require(h > 0.0, ErrorKind::parameter, "h must be positive");
  require(K >= 1.0, ErrorKind::parameter, "K must be at least 1");
  return {h / (30.0 * K), h / (10.0 * K), h / 2.0};
}

double holo_alpha(double r1, double r2, double r3) {
  require(0.0 < r1 && r1 < r2 && r2 < r3, ErrorKind::parameter, "radii must satisfy 0 < r1 < r2 < r3");
  return std::log(r3 / r2) / std::log(r3 / r1);
}

double unit_ball_volume(int n) {
  require(n >= 1, ErrorKind::parameter, "dimension must be positive");
  return std::pow(kPi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

// ---- interior chains ----

bool ChainPlan::ok() const {
  auto all = [](const std::vector<std::uint8_t>& v) {
    return std::all_of(v.begin(), v.end(), [](std::uint8_t b) { return b != 0; });
  };
  return all(r1_ok) && all(disjoint_ok) && all(contained_ok) && volume_ok;
}

namespace {

// largest t in [0,1] with |a + t(b-a) - x| = R, or -1
double last_crossing(Vec2 a, Vec2 b, Vec2 x, double R) {
  Vec2 d = b - a, e = a - x;
  double A = dot(d, d), B = 2.0 * dot(e, d), C = dot(e, e) - R * R;
  if (A == 0.0) return std::abs(C) <= 1e-15 * R * R ? 0.0 : -1.0;
  double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return -1.0;
  double sq = std::sqrt(disc);
  for (double t : {(-B + sq) / (2.0 * A), (-B - sq) / (2.0 * A)})
    if (t >= -1e-12 && t <= 1.0 + 1e-12) return std::clamp(t, 0.0, 1.0);
  return -1.0;
}

}  // namespace

ChainPlan build_chain_along(const std::vector<Vec2>& path, double r1) {
  require(r1 > 0.0, ErrorKind::parameter, "r1 must be positive");
  require(!path.empty(), ErrorKind::propagation_domain, "empty path");
  ChainPlan plan;
  plan.x0 = path.front();
  plan.y = path.back();
  plan.path_length = geometry::polyline_length(path);
  plan.radii = {r1, 3.0 * r1, 15.0 * r1};
  const double step = 2.0 * r1;
  Vec2 x = plan.x0;
  plan.centers.push_back(x);
  std::size_t cap = static_cast<std::size_t>(plan.path_length / step) + 3;
  while (dist(x, plan.y) > step * (1.0 + 1e-12)) {
    require(plan.centers.size() <= cap, ErrorKind::propagation_domain, "chain does not advance along the path");
    Vec2 next = x;
    bool found = false;
    for (std::size_t s = path.size() - 1; s-- > 0 && !found;) {
      double t = last_crossing(path[s], path[s + 1], x, step);
      if (t >= 0.0) {
        next = path[s] + t * (path[s + 1] - path[s]);
        found = true;
      }
    }
    require(found, ErrorKind::propagation_domain, "no path point at distance 2 r1");
    x = next;
    plan.centers.push_back(x);
  }
  plan.N = static_cast<int>(plan.centers.size());
  plan.centers.push_back(plan.y);
  return plan;
}

ChainPlan build_chain(const geometry::GridMask& mask, Vec2 x0, Vec2 y, double r1) {
  geometry::Path p;
  try {
    p = geometry::geodesic_path(mask, x0, y);
  } catch (const Error& e) {
    throw Error(ErrorKind::propagation_domain, std::string("no chain path: ") + e.what());
  }
  return build_chain_along(p.points, r1);
}

void check_chain(ChainPlan& plan, const geometry::Domain& domain, int n) {
  const double r1 = plan.radii.r1, r3 = plan.radii.r3;
  const std::size_t total = plan.centers.size();
  plan.r1_ok.assign(total, 1);
  plan.disjoint_ok.assign(total, 1);
  plan.contained_ok.assign(total, 1);
  for (std::size_t k = 0; k + 1 < total; ++k) {
    double d = dist(plan.centers[k], plan.centers[k + 1]);
    bool terminal = static_cast<int>(k + 1) == plan.N;
    plan.r1_ok[k] = terminal ? d <= 2 * r1 * (1 + 1e-12) : std::abs(d - 2 * r1) <= 1e-9 * r1;
  }
  for (int k = 0; k < plan.N; ++k) {
    for (int j = 0; j < plan.N; ++j)
      if (j != k && dist(plan.centers[j], plan.centers[k]) < 2 * r1 * (1 - 1e-9)) plan.disjoint_ok[k] = 0;
    Vec2 c = plan.centers[k];
    plan.contained_ok[k] = domain.contains(c) && domain.boundary_distance(c) >= r3 * (1 - 1e-9);
  }
  plan.volume_ok = plan.N <= domain.area() / (unit_ball_volume(n) * std::pow(r1, n));
}

void write_chain_csv(std::ostream& os, const ChainPlan& plan) {
  os.precision(12);
  os << "k,x,y,r1_ok,disjoint_ok,step_Q\n";
  for (std::size_t k = 0; k < plan.centers.size(); ++k) {
    auto flag = [k](const std::vector<std::uint8_t>& v) { return k < v.size() ? int(v[k]) : 1; };
    os << k << ',' << plan.centers[k].x << ',' << plan.centers[k].y << ',' << flag(plan.r1_ok) << ','
       << flag(plan.disjoint_ok) << ',';
    if (k < plan.step_Q.size()) os << plan.step_Q[k];
    os << '\n';
  }
}

ExponentBudget make_budget(double alpha, double Q, double K, double area, double h, int n) {
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::parameter, "alpha must lie in (0,1)");
  require(Q >= 1.0, ErrorKind::parameter, "Q must be at least 1");
  require(area > 0.0 && h > 0.0, ErrorKind::parameter, "area and h must be positive");
  ExponentBudget b;
  b.alpha = alpha;
  b.Q = Q;
  b.area = area;
  b.h = h;
  b.n = n;
  b.C1 = std::pow(Q, 1.0 / (1.0 - alpha)) * std::sqrt(std::pow(n, n / 2.0) * std::pow(15.0 * K, n));
  b.C2 = std::pow(30.0 * K, n) / unit_ball_volume(n);
  return b;
}

double ball_norm(const ScalarField& u, Vec2 c, double r, double rho0, int angular_nodes) {
  double I = disc_integral([&u](Vec2 p) { double v = u.value(p); return v * v; }, c, r, angular_nodes);
  return std::sqrt(std::max(0.0, I) / (rho0 * rho0));
}

namespace {

double step_ratio(double n1, double n2, double n3, double alpha, double eps) {
  double den = std::pow(n1 + eps, alpha) * std::pow(n3 + eps, 1.0 - alpha);
  if (den <= 0.0) return n2 + eps == 0.0 ? 1.0 : kInf;
  return (n2 + eps) / den;
}

long long count_cubes(const geometry::GridMask& G, double l) {
  const auto& g = G.grid;
  int ci = static_cast<int>(std::ceil(g.nx * g.h / l)) + 1, cj = static_cast<int>(std::ceil(g.ny * g.h / l)) + 1;
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(ci) * cj, 0);
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      if (!(G.at(i, j) && G.at(i + 1, j) && G.at(i, j + 1) && G.at(i + 1, j + 1))) continue;
      double x0 = i * g.h, y0 = j * g.h;
      int a0 = static_cast<int>(std::floor(x0 / l)), a1 = static_cast<int>(std::ceil((x0 + g.h) / l)) - 1;
      int b0 = static_cast<int>(std::floor(y0 / l)), b1 = static_cast<int>(std::ceil((y0 + g.h) / l)) - 1;
      for (int b = b0; b <= b1; ++b)
        for (int a = a0; a <= a1; ++a) hit[static_cast<std::size_t>(b) * ci + a] = 1;
    }
  return std::count(hit.begin(), hit.end(), 1);
}

}  // namespace

PropagationReport interior_propagation(const pde::DiscreteSolution& u, const pde::SourceData& src, Vec2 x0,
                                       double r0, const geometry::GridMask& G, double h,
                                       const InteriorOptions& opt) {
  require(u.domain != nullptr, ErrorKind::parameter, "solution carries no domain");
  const auto& dom = *u.domain;
  const double rho0 = u.rho0;
  const int n = opt.n;
  require(h > 0.0 && r0 > 0.0, ErrorKind::parameter, "h and r0 must be positive");
  require(h <= r0 / 2 * (1 + 1e-12) && h <= 2 * opt.C0 * rho0, ErrorKind::parameter,
          "h must not exceed min(r0/2, 2 C0 rho0)");
  require(!G.empty(), ErrorKind::parameter, "target set G is empty");
  require(dom.contains(x0) && dom.boundary_distance(x0) >= r0 * (1 - 1e-9), ErrorKind::propagation_domain,
          "source ball leaves the domain");
  const auto& g = G.grid;
  std::vector<int> nodes;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (G.at(i, j)) {
        Vec2 p = g.node(i, j);
        require(dom.contains(p) && dom.boundary_distance(p) >= h * (1 - 1e-9), ErrorKind::propagation_domain,
                "G comes closer than h to the boundary");
        nodes.push_back(g.index(i, j));
      }
  for (int a = 0; a < 64; ++a)
    for (double rr : {0.0, r0 / 4, r0 / 2}) {
      double t = 2 * kPi * a / 64;
      Vec2 p{x0.x + rr * std::cos(t), x0.y + rr * std::sin(t)};
      int i = static_cast<int>(std::lround((p.x - g.origin.x) / g.h));
      int j = static_cast<int>(std::lround((p.y - g.origin.y) / g.h));
      require(G.at(i, j), ErrorKind::propagation_domain, "B_{r0/2}(x0) is not inside G");
    }

  PropagationReport rep;
  Radii rad = radii_from_h(h, opt.K);
  rep.alpha = holo_alpha(rad.r1, rad.r2, rad.r3);
  rep.eps = src.eps;
  rep.eta = opt.eta ? *opt.eta : ball_norm(u, x0, r0, rho0, 128);
  rep.E0 = opt.E0 ? *opt.E0 : pde::norm_L2(u).value;

  geometry::GridMask Gr = geometry::dilate(G, rad.r1);
  int source = Gr.nearest_inside(x0, 2);
  require(source >= 0, ErrorKind::propagation_domain, "x0 is not in G");
  auto tree = geometry::distance_tree(Gr, source);
  double far = 0.0;
  int far_node = source;
  for (std::size_t k = 0; k < Gr.inside.size(); ++k)
    if (Gr.inside[k]) {
      require(std::isfinite(tree.dist[k]), ErrorKind::propagation_domain, "G is not connected");
      if (tree.dist[k] > far) far = tree.dist[k], far_node = static_cast<int>(k);
    }
  const double step = 2 * rad.r1;
  rep.N_max = static_cast<int>(std::floor(far * g.h / step)) +
              static_cast<int>(std::ceil(g.h * std::sqrt(2.0) / 2 / step)) + 1;

  std::vector<int> targets{far_node};
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
  for (int t = 0; t < opt.sample_targets; ++t) targets.push_back(nodes[pick(rng)]);

  double Qmax = 1.0;
  for (std::size_t c = 0; c < targets.size(); ++c) {
    int k = targets[c];
    ChainPlan plan = build_chain(Gr, x0, g.node(k % g.nx, k / g.nx), rad.r1);
    plan.radii = rad;
    check_chain(plan, dom, n);
    if (!plan.ok()) rep.invariants_ok = false;
    rep.N_realized = std::max(rep.N_realized, plan.N);
    for (std::size_t b = 0; b < plan.centers.size(); ++b) {
      Vec2 x = plan.centers[b];
      double n1 = ball_norm(u, x, rad.r1, rho0, opt.ball_nodes);
      double n2 = ball_norm(u, x, rad.r2, rho0, opt.ball_nodes);
      double n3 = ball_norm(u, x, rad.r3, rho0, opt.ball_nodes);
      double q = step_ratio(n1, n2, n3, rep.alpha, rep.eps);
      plan.step_Q.push_back(q);
      Qmax = std::max(Qmax, q);
      bool bad = q > opt.Q_cap || (opt.Q && q > *opt.Q * (1 + 1e-12));
      if (bad && rep.steps_ok) {
        rep.steps_ok = false;
        rep.offending_chain = static_cast<int>(c);
        rep.offending_ball = static_cast<int>(b);
      }
    }
    rep.chains.push_back(std::move(plan));
  }
  if (rep.N_realized > rep.N_max) rep.invariants_ok = false;
  rep.Q = opt.Q ? *opt.Q : std::min(Qmax, opt.Q_cap);

  rep.J = count_cubes(G, step / std::sqrt(static_cast<double>(n)));
  rep.J_bound = std::pow(n, n / 2.0) * dom.area() / std::pow(step, n);
  rep.budget = make_budget(rep.alpha, rep.Q, opt.K, dom.area(), h, n);
  rep.C = rep.budget.C();
  rep.C_realized = std::sqrt(static_cast<double>(rep.J)) * std::pow(rep.Q, 1.0 / (1.0 - rep.alpha));
  rep.delta = std::pow(rep.alpha, rep.N_max);
  rep.delta_lower = rep.budget.delta_lower();
  if (rep.N_max > rep.budget.C2 * dom.area() / std::pow(h, n) || rep.delta < rep.delta_lower) rep.invariants_ok = false;
  if (rep.J > rep.J_bound) rep.invariants_ok = false;

  rep.measured = pde::norm_L2(u, G).value;
  rep.bound = rep.C * std::pow(rep.eta + rep.eps, rep.delta) * std::pow(rep.E0 + rep.eps, 1.0 - rep.delta);
  rep.pass = rep.steps_ok && rep.invariants_ok && rep.measured <= rep.bound;
  return rep;
}

// ---- cone chains ----

ConeChainPlan cone_chain(Vec2 w, Vec2 axis, double rho0, double M0, double h1, double target) {
  require(M0 >= 1.0, ErrorKind::parameter, "M0 must be at least 1");
  require(rho0 > 0.0 && h1 > 0.0, ErrorKind::parameter, "rho0 and h1 must be positive");
  require(norm(axis) > 0.0, ErrorKind::parameter, "axis must be nonzero");
  ConeChainPlan c;
  c.w = w;
  c.axis = axis / norm(axis);
  c.rho0 = rho0;
  c.M0 = M0;
  c.h1 = h1;
  const double root = std::sqrt(1.0 + M0 * M0);
  c.t0 = root / (1.0 + root) * (rho0 - M0 * h1);
  c.s0 = 0.25 * ((rho0 - M0 * h1) / (1.0 + root) - h1);
  if (!(c.s0 > 0.0)) throw Error(ErrorKind::geometry, "h1 too large: s0 is not positive", c.s0);
  c.s = c.s0 / c.t0;
  c.q = (1.0 - c.s) / (1.0 + c.s);
  c.identity_residual = std::abs(4.0 * c.s0 + h1 - c.t0 / root);
  if (target <= 0.0) target = 1e-4 * c.s0;
  for (int k = 0; k < 100000; ++k) {
    double qk = std::pow(c.q, k);
    double sk = qk * c.s0;
    if (k > 0 && sk < target) break;
    c.t.push_back(qk * c.t0);
    c.radius.push_back(sk);
    c.y.push_back(w + qk * c.t0 * c.axis);
  }
  // tangency against the two boundary rays of the cone
  const double th = std::asin(c.s);
  Vec2 ray1{c.axis.x * std::cos(th) - c.axis.y * std::sin(th), c.axis.x * std::sin(th) + c.axis.y * std::cos(th)};
  Vec2 ray2{c.axis.x * std::cos(th) + c.axis.y * std::sin(th), -c.axis.x * std::sin(th) + c.axis.y * std::cos(th)};
  const double far = 4.0 * c.t0;
  for (std::size_t k = 0; k < c.y.size(); ++k) {
    double d1 = geometry::segment_distance(c.y[k], w, w + far * ray1);
    double d2 = geometry::segment_distance(c.y[k], w, w + far * ray2);
    double r = std::max(std::abs(d1 - c.radius[k]), std::abs(d2 - c.radius[k]));
    if (k + 1 < c.y.size()) r = std::max(r, std::abs(dist(c.y[k], c.y[k + 1]) - c.radius[k] - c.radius[k + 1]));
    c.tangency_residual = std::max(c.tangency_residual, r);
  }
  return c;
}

bool cone_balls_contained(const ConeChainPlan& plan, int samples) {
  const double tan_th = plan.s / std::sqrt(1.0 - plan.s * plan.s);
  for (std::size_t k = 0; k < plan.y.size(); ++k)
    for (int a = 0; a < samples; ++a) {
      double t = 2 * kPi * a / samples;
      Vec2 p = plan.y[k] + plan.radius[k] * Vec2{std::cos(t), std::sin(t)};
      Vec2 v = p - plan.w;
      double along = dot(v, plan.axis), across = std::abs(cross(plan.axis, v));
      if (along < 0.0) return false;
      if (across > along * tan_th * (1 + 1e-9) + 1e-12) return false;
    }
  return true;
}

// ---- Phi minimization ----

double phi(double tau, double vartheta, double sigma, double log_zeta) {
  return std::pow(tau, vartheta) + std::exp(-sigma * std::log(tau) + tau * log_zeta);
}

PhiResult phi_minimize_log(double vartheta, double sigma, double log_zeta, double tau0) {
  require(vartheta > 0.0 && sigma > 0.0, ErrorKind::parameter, "vartheta and sigma must be positive");
  require(log_zeta <= 0.0 && std::isfinite(log_zeta), ErrorKind::parameter, "zeta must lie in (0,1]");
  require(tau0 > 0.0 && tau0 <= 1.0, ErrorKind::parameter, "tau0 must lie in (0,1]");
  PhiResult r;
  r.l = 1.0 / (1.0 + vartheta + sigma);
  r.mu = vartheta * r.l;
  double tau_c = kInf;
  if (log_zeta < 0.0) tau_c = std::pow(-1.0 / log_zeta, r.l);
  r.tau_closed = std::min(tau_c, tau0);

  double lo = std::log(r.tau_closed * 1e-8), hi = std::log(tau0);
  r.brute_inf = kInf;
  auto consider = [&](double tau) {
    double v = phi(tau, vartheta, sigma, log_zeta);
    if (v < r.brute_inf) r.brute_inf = v, r.tau_star = tau;
  };
  for (int k = 0; k < kGridPoints; ++k) consider(std::exp(lo + (hi - lo) * k / (kGridPoints - 1)));
  consider(r.tau_closed);

  if (tau_c <= tau0) {
    r.bound = 2.0 * std::pow(-1.0 / log_zeta, r.mu);
  } else if (log_zeta < 0.0) {
    r.fallback = true;
    r.bound = phi(tau0, vartheta, sigma, log_zeta);
  } else {
    r.fallback = true;
    r.bound = r.brute_inf;
  }
  return r;
}

PhiResult phi_minimize(double vartheta, double sigma, double zeta, double tau0) {
  require(zeta > 0.0 && zeta < 1.0, ErrorKind::parameter, "zeta must lie in (0,1)");
  return phi_minimize_log(vartheta, sigma, std::log(zeta), tau0);
}

// ---- global propagation ----

GlobalReport global_propagation(const pde::DiscreteSolution& u, const pde::SourceData& src, Vec2 x0, double r0,
                                double M0, const GlobalOptions& opt) {
  require(u.domain != nullptr, ErrorKind::parameter, "solution carries no domain");
  require(opt.p > 2.0, ErrorKind::parameter, "p must exceed 2");
  const auto& dom = *u.domain;
  const double rho0 = u.rho0;
  const int n = opt.interior.n;
  GlobalReport rep;
  auto ct = geometry::connectivity_threshold(rho0, M0);
  rep.h1 = std::min({ct.h0 / 2, r0 / 2, 2 * opt.interior.C0 * rho0});
  rep.E = opt.E ? *opt.E : pde::norm_H1(u).value;
  rep.eta = opt.eta ? *opt.eta : ball_norm(u, x0, r0, rho0, 128);
  rep.eps = src.eps;
  rep.measured = pde::norm_L2(u).value;

  InteriorOptions io = opt.interior;
  io.eta = rep.eta;
  io.E0 = rep.E;
  geometry::GridMask G = geometry::interior_envelope(dom, rep.h1, u.grid);
  rep.interior = interior_propagation(u, src, x0, r0, G, rep.h1, io);

  ConeChainPlan ref = cone_chain({0, 0}, {0, 1}, rho0, M0, rep.h1);
  rep.t0 = ref.t0;
  rep.s0 = ref.s0;
  rep.q = ref.q;
  rep.alpha_cone = holo_alpha(1.0, 3.0, 4.0);

  // calibrate the cone step constant on chains from sampled boundary points
  auto loops = dom.boundary_loops(1024);
  const auto& loop = loops.front();
  std::vector<double> cum(loop.size() + 1, 0.0);
  for (std::size_t k = 0; k < loop.size(); ++k) cum[k + 1] = cum[k] + dist(loop[k], loop[(k + 1) % loop.size()]);
  const double hg = u.grid.h;
  for (int m = 0; m < opt.cone_samples; ++m) {
    double s = cum.back() * (m + 0.5) / opt.cone_samples;
    std::size_t seg = std::upper_bound(cum.begin(), cum.end(), s) - cum.begin() - 1;
    Vec2 a = loop[seg], b = loop[(seg + 1) % loop.size()];
    Vec2 tang = (b - a) / norm(b - a);
    Vec2 w = a + (s - cum[seg]) * tang;
    Vec2 nrm = perp(tang);
    if (!dom.contains(w + 1e-6 * rho0 * nrm)) nrm = -nrm;
    ConeChainPlan c = cone_chain(w, nrm, rho0, M0, rep.h1);
    for (int k = 0; k < c.N(); ++k) {
      double sk = c.radius[k];
      if (sk < 2 * hg) break;
      if (!dom.contains(c.y[k]) || dom.boundary_distance(c.y[k]) < 4 * sk) continue;
      double n1 = ball_norm(u, c.y[k], sk, rho0), n2 = ball_norm(u, c.y[k], 3 * sk, rho0),
             n3 = ball_norm(u, c.y[k], 4 * sk, rho0);
      rep.Q_cone = std::max(rep.Q_cone, step_ratio(n1, n2, n3, rep.alpha_cone, rep.eps));
    }
  }

  rep.D = std::log(rep.alpha_cone) / std::log(rep.q);
  rep.vartheta = (1.0 / rep.D) * (0.5 - 1.0 / opt.p);
  rep.sigma = n / (2.0 * rep.D);
  rep.gamma = rep.alpha_cone * rep.interior.delta;
  const double Eeps = rep.E + rep.eps, eeps = rep.eta + rep.eps;
  rep.log_zeta = Eeps > 0.0 && eeps > 0.0 ? std::min(0.0, rep.gamma * std::log(eeps / Eeps)) : 0.0;
  rep.tau0 = std::min(1.0, std::pow(rep.h1 / rep.t0, rep.D));
  rep.phi = phi_minimize_log(rep.vartheta, rep.sigma, rep.log_zeta, rep.tau0);
  rep.mu = rep.phi.mu;

  const double area = dom.area();
  double C_cone = std::pow(rep.Q_cone, 1.0 / (1.0 - rep.alpha_cone)) * (rep.interior.C + 1.0) *
                  std::sqrt(std::pow(n, n / 2.0) * area / std::pow(2.0 * rep.q * rep.s0, n));
  rep.C_exp = rep.interior.C + C_cone;
  for (int k = 0; k < 6; ++k) {
    double r = rep.h1 * std::pow(0.5, k);
    rep.C_AR = std::max(rep.C_AR, geometry::boundary_layer_measure(dom, r) * rho0 / (area * r));
  }
  rep.Lp = pde::norm_Lp(u, u.grid, u.region(), rho0, opt.p, n).value;
  rep.C_layer = Eeps > 0.0 ? std::pow(rep.C_AR * area / std::pow(rho0, n), 0.5 - 1.0 / opt.p) * rep.Lp / Eeps : 0.0;
  rep.C_global = std::max(rep.C_exp, rep.C_layer);
  rep.bound = Eeps * rep.C_global * rep.phi.bound;
  if (Eeps > eeps && eeps > 0.0)
    rep.C_modulus = rep.bound / (Eeps * std::pow(1.0 / std::log(Eeps / eeps), rep.mu));
  rep.pass = rep.interior.steps_ok && rep.interior.invariants_ok && rep.measured <= rep.bound;
  return rep;
}

// ---- log-log modulus ----

double loglog_integrand(const LogLogParams& prm, double s, double log_tau) {
  const double D = (prm.vartheta / prm.n) * (0.5 - 1.0 / prm.p);
  double expo = prm.printed_exponent ? std::exp(-prm.C2 * s * std::log(prm.alpha))
                                     : std::exp(prm.C2 / s * std::log(prm.alpha));
  return std::exp(-0.5 * std::log(s) + log_tau * expo) + std::pow(s, D);
}

LogLogValue loglog_modulus(const LogLogParams& prm, double log_tau) {
  require(log_tau < -1.0, ErrorKind::parameter, "tau must lie in (0, 1/e)");
  require(prm.s0 > 0.0 && prm.s0 <= 1.0, ErrorKind::parameter, "s0 must lie in (0,1]");
  require(prm.alpha > 0.0 && prm.alpha < 1.0, ErrorKind::parameter, "alpha must lie in (0,1)");
  require(prm.C2 > 0.0 && prm.vartheta > 0.0 && prm.p > 2.0, ErrorKind::parameter,
          "C2, vartheta must be positive and p > 2");
  LogLogValue best{kInf, prm.s0};
  double lo = std::log(prm.s0 * 1e-12), hi = std::log(prm.s0);
  for (int k = 0; k < kGridPoints; ++k) {
    double s = std::exp(lo + (hi - lo) * k / (kGridPoints - 1));
    double v = loglog_integrand(prm, s, log_tau);
    if (v < best.value) best = {v, s};
  }
  return best;
}

LogLogFit fit_loglog(const std::vector<double>& log_tau, const std::vector<double>& values) {
  require(log_tau.size() == values.size() && values.size() >= 2, ErrorKind::fit, "need at least two points");
  std::vector<double> x, y;
  for (std::size_t k = 0; k < values.size(); ++k) {
    require(log_tau[k] < -std::exp(1.0), ErrorKind::fit, "log|log tau| must be positive");
    require(values[k] > 0.0, ErrorKind::fit, "values must be positive");
    x.push_back(std::log(std::log(-log_tau[k])));
    y.push_back(std::log(values[k]));
  }
  auto line = hadamard::least_squares(x, y);
  LogLogFit f;
  f.S = -line.slope;
  for (std::size_t k = 0; k < values.size(); ++k)
    f.C = std::max(f.C, values[k] * std::pow(std::log(-log_tau[k]), f.S));
  f.dominated = true;
  for (std::size_t k = 0; k < values.size(); ++k)
    if (values[k] > f.C * std::pow(std::log(-log_tau[k]), -f.S) * (1 + 1e-12)) f.dominated = false;
  return f;
}

}  // namespace cauchylab::smallness
