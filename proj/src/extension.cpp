#include "cauchylab/extension.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cstring>
#include <istream>
#include <map>
#include <tuple>
#include <ostream>
#include <random>
#include <sstream>

namespace cauchylab::extension {

double bump(double t) {
  require(t >= 0.0, ErrorKind::parameter, "bump argument must be nonnegative");
  if (t <= 0.25) return 1.0;
  if (t <= 0.5) return 4.0 * (0.5 - t);
  return 0.0;
}

LoweredGraph lowered_graph(const std::vector<double>& xs, const std::vector<double>& zs, double rho0, double rho1,
                           double M0) {
  require(xs.size() == zs.size() && xs.size() >= 2, ErrorKind::parameter, "graph samples must match");
  require(M0 >= 1.0 && rho1 > 0.0 && rho1 <= rho0, ErrorKind::parameter, "need M0 >= 1 and 0 < rho1 <= rho0");
  LoweredGraph lg;
  lg.xs = xs;
  lg.z = zs;
  lg.z_minus.resize(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k)
    lg.z_minus[k] = zs[k] - 0.5 * rho1 * bump(M0 * std::abs(xs[k]) / rho1);
  for (std::size_t k = 1; k < xs.size(); ++k) {
    double db = 0.5 * rho1 * (bump(M0 * std::abs(xs[k]) / rho1) - bump(M0 * std::abs(xs[k - 1]) / rho1));
    lg.max_added_slope = std::max(lg.max_added_slope, std::abs(db / (xs[k] - xs[k - 1])));
  }
  lg.norm = geometry::lipschitz_norm(xs, lg.z_minus, rho0);
  lg.bound = 3.5 * rho0 * M0;
  lg.ok = lg.norm <= lg.bound * (1 + 1e-12) && lg.max_added_slope <= 2 * M0 * (1 + 1e-9);
  return lg;
}

// ---- augmented domain ----

namespace {

double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t k = it - xs.begin();
  double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return (1 - t) * ys[k - 1] + t * ys[k];
}

std::vector<Vec2> densify(const std::vector<Vec2>& loop, double maxlen) {
  std::vector<Vec2> out;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    Vec2 a = loop[k], b = loop[(k + 1) % loop.size()];
    int m = std::max(1, static_cast<int>(std::ceil(dist(a, b) / maxlen)));
    for (int s = 0; s < m; ++s) out.push_back(a + (static_cast<double>(s) / m) * (b - a));
  }
  return out;
}

std::vector<Vec2> drop_collinear(const std::vector<Vec2>& v) {
  std::vector<Vec2> out;
  const std::size_t n = v.size();
  for (std::size_t k = 0; k < n; ++k) {
    Vec2 a = v[(k + n - 1) % n], b = v[k], c = v[(k + 1) % n];
    double scale = dist(a, b) * dist(b, c);
    if (scale == 0.0) continue;
    if (std::abs(cross(b - a, c - b)) > 1e-12 * scale) out.push_back(b);
  }
  return out;
}

}  // namespace

double AugmentedDomain::Z_at(double xp) const { return interp(xs, Z, xp); }

double AugmentedDomain::Z_minus_at(double xp) const {
  return Z_at(xp) - 0.5 * rho1 * bump(M0 * std::abs(xp) / rho1);
}

bool AugmentedDomain::in_gamma(Vec2 x, double a, double b) const {
  Vec2 l = frame.to_local(x);
  return std::abs(l.x) < a && std::abs(l.y) < b;
}

bool AugmentedDomain::in_A(Vec2 x) const {
  Vec2 l = frame.to_local(x);
  if (!(std::abs(l.x) < rho0 / M0 && std::abs(l.y) < rho0)) return false;
  return Z_minus_at(l.x) < l.y && l.y < Z_at(l.x);
}

bool AugmentedDomain::on_sigma0(Vec2 x, double tol) const {
  Vec2 l = frame.to_local(x);
  return std::abs(l.x) < rho1 / (2 * M0) && std::abs(l.y - Z_at(l.x)) <= tol * rho0;
}

bool AugmentedDomain::in_omega_tilde(Vec2 x) const { return omega.contains(x) || in_A(x) || on_sigma0(x); }

bool AugmentedDomain::in_gamma_minus(Vec2 x) const {
  Vec2 l = frame.to_local(x);
  return std::abs(l.x) < rho1 / M0 && std::abs(l.y) < rho1 && l.y < Z_at(l.x);
}

bool AugmentedDomain::in_omega1(Vec2 x) const {
  // Gamma_{rho1/M0, rho1} lies in Omega1 entirely
  return omega.contains(x) || in_gamma(x, rho1 / M0, rho1);
}

bool AugmentedDomain::in_cone_minus(Vec2 x, double r) const {
  Vec2 l = frame.to_local(x);
  return -r < l.y && l.y < -M0 * std::abs(l.x);
}

bool AugmentedDomain::in_cone_plus(Vec2 x, double r) const {
  Vec2 l = frame.to_local(x);
  return M0 * std::abs(l.x) < l.y && l.y < r;
}

namespace {

LocalFrame frame_at(const geometry::LipschitzPortion& s, Vec2 P) {
  const auto& pts = s.sigma();
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    double d = geometry::segment_distance(P, pts[k], pts[k + 1]);
    if (d < bd) bd = d, best = k;
  }
  Vec2 t = pts[best + 1] - pts[best];
  t = t / norm(t);
  Vec2 n = perp(t);
  double probe = 1e-6 * s.rho1();
  if (!s.domain().contains(P + probe * n)) n = -n;
  require(s.domain().contains(P + probe * n), ErrorKind::geometry, "no inward normal at P");
  LocalFrame f;
  f.P = P;
  f.e2 = n;
  f.e1 = -perp(n);
  return f;
}

// boundary loop with the part inside |x'| < W, |x_n| < H replaced by `insert` (local coordinates)
std::vector<Vec2> splice(const std::vector<Vec2>& loop, const LocalFrame& fr, double W, double H,
                         const std::vector<Vec2>& insert_local) {
  const std::size_t n = loop.size();
  auto inside = [&](std::size_t k) {
    Vec2 l = fr.to_local(loop[k % n]);
    return std::abs(l.x) < W && std::abs(l.y) < H;
  };
  std::size_t start = n;
  for (std::size_t k = 0; k < n; ++k)
    if (inside(k) && !inside(k + n - 1)) {
      require(start == n, ErrorKind::geometry, "boundary enters the patch window more than once");
      start = k;
    }
  require(start < n, ErrorKind::geometry, "boundary does not cross the patch window");
  std::size_t len = 0;
  while (inside(start + len)) ++len;
  Vec2 first = fr.to_local(loop[start]), last = fr.to_local(loop[(start + len - 1) % n]);
  bool forward = first.x < last.x;
  std::vector<Vec2> ins = insert_local;
  if (!forward) std::reverse(ins.begin(), ins.end());
  std::vector<Vec2> out;
  for (std::size_t k = start + len; k < start + n; ++k) out.push_back(loop[k % n]);
  for (Vec2 l : ins) out.push_back(fr.to_global(l));
  return out;
}

}  // namespace

AugmentedDomain augment(const geometry::LipschitzPortion& sigma, Vec2 P, int samples, unsigned long long seed) {
  const double rho0 = sigma.rho0(), M0 = sigma.M0(), rho1 = sigma.rho1();
  double rhoP = geometry::rho_of_point(sigma, P);
  if (rhoP < rho1 * (1 - 1e-12)) throw Error(ErrorKind::size, "rho(P) is below rho1", rhoP);
  AugmentedDomain a(sigma);
  a.rho0 = rho0;
  a.M0 = M0;
  a.rho1 = rho1;
  a.frame = frame_at(sigma, P);
  const auto& dom = a.omega;

  const int m = 2049;
  const double X = rho0 / M0 * (1 - 1e-9);
  for (int k = 0; k < m; ++k) {
    double xp = -X + 2 * X * k / (m - 1);
    Vec2 top = a.frame.to_global({xp, rho0 * (1 - 1e-6)}), bot = a.frame.to_global({xp, -rho0});
    require(dom.contains(top), ErrorKind::geometry, "boundary is not a graph over the patch");
    double t = dom.exit_fraction(top, bot);
    a.xs.push_back(xp);
    a.Z.push_back(a.frame.to_local(top + t * (bot - top)).y);
  }
  auto lg = lowered_graph(a.xs, a.Z, rho0, rho1, M0);
  a.Z_minus = lg.z_minus;
  a.r0 = rho1 / (8 * (std::sqrt(1 + M0 * M0) + 1));
  a.x0_local = {0.0, a.r0 - rho1 / 8};
  a.x0 = a.frame.to_global(a.x0_local);

  // Lipschitz character of the lowered boundary around (0, Z-(0)), scale rho0/2
  {
    std::vector<double> xs2, zs2;
    double R = (rho0 / 2) / (3.5 * M0);
    for (std::size_t k = 0; k < a.xs.size(); ++k)
      if (std::abs(a.xs[k]) < R) {
        xs2.push_back(a.xs[k]);
        zs2.push_back(a.Z_minus[k] - a.Z_minus_at(0.0));
      }
    a.lipschitz_ok = lg.ok && geometry::verify_lipschitz_graph(xs2, zs2, rho0 / 2, 3.5 * M0);
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  a.contains_gamma_ok = a.A_contains_cone_ok = a.ball_in_cone_ok = a.anchor_ok = true;
  for (int s = 0; s < samples; ++s) {
    double u1 = U(rng), u2 = U(rng);
    Vec2 g = a.frame.to_global({u1 * rho1 / (4 * M0), u2 * rho1 / 4});
    if (!a.in_omega_tilde(g)) a.contains_gamma_ok = false;
    // cone C-_{rho1/4}: x_n in (-rho1/4, 0), |x'| < -x_n / M0
    double xn = -0.25 * rho1 * (0.5 * (u2 + 1.0));
    Vec2 c = a.frame.to_global({u1 * (-xn) / M0, xn});
    if (a.in_cone_minus(c, rho1 / 4) && !a.in_A(c)) a.A_contains_cone_ok = false;
    double rr = a.r0 * std::sqrt(0.5 * (u2 + 1.0)), th = kPi * u1;
    Vec2 b = a.frame.to_global(a.x0_local + Vec2{rr * std::cos(th), rr * std::sin(th)});
    if (!a.in_cone_minus(b, rho1 / 8)) a.ball_in_cone_ok = false;
    Vec2 bh = a.frame.to_global(a.x0_local + 0.5 * Vec2{rr * std::cos(th), rr * std::sin(th)});
    if (!(a.in_A(bh) && a.in_gamma(bh, rho1 / (8 * M0), rho1 / 8))) a.anchor_ok = false;
  }

  auto loops = dom.boundary_loops(1024);
  if (loops.size() == 1) {
    auto loop = densify(loops.front(), rho1 / (256 * M0));
    // Omega1: replace the graph inside the window by the bottom of the box
    const double W = rho1 / M0;
    auto cut = [&](double xp) { return Vec2{xp, a.Z_at(xp)}; };
    a.omega1 = geometry::Domain::polygon(
        drop_collinear(splice(loop, a.frame, W, rho1, {cut(-W), {-W, -rho1}, {W, -rho1}, cut(W)})));
    // Omega~: lowered graph over |x'| < rho1/(2M0)
    const double w2 = rho1 / (2 * M0);
    std::vector<Vec2> low;
    const int q = 512;
    for (int k = 0; k <= q; ++k) {
      double xp = -w2 + 2 * w2 * k / q;
      low.push_back({xp, a.Z_minus_at(xp)});
    }
    a.omega_tilde = geometry::Domain::polygon(drop_collinear(splice(loop, a.frame, w2, rho0, low)));
  }
  return a;
}

void write_augmented(std::ostream& os, const AugmentedDomain& a) {
  geometry::write_domain(os, a.omega);
  os.precision(17);
  os << "patch\n";
  os << "loop = " << a.sigma.loop() << "\ns_begin = " << a.sigma.s_begin() << "\ns_end = " << a.sigma.s_end()
     << "\nrho0 = " << a.rho0 << "\nM0 = " << a.M0 << "\nrho1 = " << a.rho1 << "\nPx = " << a.frame.P.x
     << "\nPy = " << a.frame.P.y << "\n";
}

AugmentedDomain read_augmented(std::istream& is) {
  std::string text, line;
  std::ostringstream head;
  std::map<std::string, double> kv;
  bool in_patch = false;
  while (std::getline(is, line)) {
    std::string t = line.substr(0, line.find('#'));
    t.erase(0, t.find_first_not_of(" \t\r"));
    t.erase(t.find_last_not_of(" \t\r") + 1);
    if (t == "patch") {
      in_patch = true;
      continue;
    }
    if (!in_patch) {
      head << line << "\n";
      continue;
    }
    if (t.empty()) continue;
    auto eq = t.find('=');
    require(eq != std::string::npos, ErrorKind::parameter, "bad patch line '" + t + "'");
    std::string key = t.substr(0, eq), val = t.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    try {
      kv[key] = std::stod(val);
    } catch (const std::exception&) {
      throw Error(ErrorKind::parameter, "bad value for patch key '" + key + "'");
    }
  }
  require(in_patch, ErrorKind::parameter, "missing patch section");
  for (const char* k : {"loop", "s_begin", "s_end", "rho0", "M0", "rho1", "Px", "Py"})
    require(kv.count(k) > 0, ErrorKind::parameter, std::string("missing patch key '") + k + "'");
  auto dom = geometry::parse_domain(head.str());
  Vec2 P{kv["Px"], kv["Py"]};
  geometry::LipschitzPortion s(dom, static_cast<int>(kv["loop"]), kv["s_begin"], kv["s_end"], kv["rho0"], kv["M0"],
                               kv["rho1"], P);
  return augment(s, P);
}

// ---- discrete pipeline ----

namespace {

double harmonic_mean(double a, double b) { return 2.0 * a * b / (a + b); }

double axis_coefficient(const pde::CoefficientField& A, Vec2 p, bool xdir) {
  Mat2 m = A(p);
  return xdir ? m.a11 : m.a22;
}

std::vector<double> trace_positions(const AugmentedDomain& a, const PatchGrid& pg) {
  std::vector<double> s;
  for (int k : pg.sigma_nodes) s.push_back(a.frame.to_local(pg.grid.node(k % pg.grid.nx, k / pg.grid.nx)).x);
  return s;
}

}  // namespace

PatchGrid patch_grid(const AugmentedDomain& a, const geometry::GridSpec& g) {
  PatchGrid pg;
  pg.grid = g;
  const double h = g.h;
  Vec2 e2 = a.frame.e2;
  require(std::abs(e2.x) < 1e-12 || std::abs(e2.y) < 1e-12, ErrorKind::parameter,
          "discrete pipeline needs an axis-aligned patch");
  pg.ni = static_cast<int>(std::lround(e2.x));
  pg.nj = static_cast<int>(std::lround(e2.y));
  const double W = a.rho1 / a.M0;
  for (std::size_t k = 0; k < a.xs.size(); ++k)
    if (std::abs(a.xs[k]) <= W)
      require(std::abs(a.Z[k]) <= 1e-9 * a.rho0, ErrorKind::parameter, "discrete pipeline needs a flat patch");
  double off = pg.ni != 0 ? (a.frame.P.x - g.origin.x) / h : (a.frame.P.y - g.origin.y) / h;
  require(std::abs(off - std::round(off)) < 1e-9, ErrorKind::parameter, "Sigma must lie on a grid line");
  std::vector<std::pair<double, int>> nodes;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      Vec2 l = a.frame.to_local(g.node(i, j));
      if (std::abs(l.y) < 1e-9 * h && std::abs(l.x) < W - 1e-9 * h) nodes.push_back({l.x, g.index(i, j)});
    }
  require(!nodes.empty(), ErrorKind::resolution, "no grid node on Sigma inside the patch");
  std::sort(nodes.begin(), nodes.end());
  for (auto [x, k] : nodes) pg.sigma_nodes.push_back(k);
  Vec2 c1 = a.frame.to_global({-W, -a.rho1}), c2 = a.frame.to_global({W, 0.0});
  Vec2 lo{std::min(c1.x, c2.x), std::min(c1.y, c2.y)}, hi{std::max(c1.x, c2.x), std::max(c1.y, c2.y)};
  pg.gamma_minus = geometry::Domain::rectangle(hi.x - lo.x, hi.y - lo.y, lo);
  pg.length = 2 * W;
  return pg;
}

CauchyData cauchy_data(const std::vector<double>& g, const std::vector<double>& psi, const PatchGrid& pg,
                       double rho0) {
  require(g.size() == pg.sigma_nodes.size() && psi.size() == g.size(), ErrorKind::parameter,
          "Cauchy data must live on the Sigma nodes");
  CauchyData cd;
  cd.g = g;
  cd.psi = psi;
  auto tn = pde::trace_norms(g, psi, pg.length, rho0);
  cd.g_half = tn.h_half;
  cd.psi_minus_half = tn.h_minus_half;
  cd.eta = pde::cauchy_data_size(tn, rho0);
  return cd;
}

CauchyData cauchy_data(const pde::DiscreteSolution& u, const pde::CoefficientField& A, const pde::ZeroOrderTerm& c,
                       const pde::SourceData& src, const PatchGrid& pg, double rho0) {
  const auto& g = pg.grid;
  require(g.nx == u.grid.nx && g.ny == u.grid.ny && g.h == u.grid.h, ErrorKind::parameter,
          "solution and patch grid differ");
  const double h = g.h;
  const bool xdir = pg.ni != 0;
  const Vec2 e2{static_cast<double>(pg.ni), static_cast<double>(pg.nj)};
  std::vector<double> gv, psi;
  for (int k : pg.sigma_nodes) {
    int up = k + pg.nj * g.nx + pg.ni;
    Vec2 p = g.node(k % g.nx, k / g.nx), q = g.node(up % g.nx, up / g.nx);
    double a_up = harmonic_mean(axis_coefficient(A, p, xdir), axis_coefficient(A, q, xdir));
    double gi = u.values[k];
    double f = src.f ? src.f(p) : 0.0;
    double Fup = src.F ? dot(src.F(0.5 * (p + q)), e2) : 0.0;
    double r = a_up * (u.values[up] - gi) + 0.5 * c(p) * gi * h * h - 0.5 * f * h * h - h * Fup;
    gv.push_back(gi);
    psi.push_back(-r / h);
  }
  return cauchy_data(gv, psi, pg, rho0);
}

namespace {

// Dirichlet solve on Gamma- with the given half-plane extension as boundary values
Extension extend_with(const std::function<double(Vec2)>& poisson, const AugmentedDomain& a, const PatchGrid& pg) {
  Extension e;
  int count = 0;
  for (int j = 0; j < pg.grid.ny; ++j)
    for (int i = 0; i < pg.grid.nx; ++i) count += pg.gamma_minus.contains(pg.grid.node(i, j));
  if (count == 0) throw Error(ErrorKind::geometry, "Gamma- has no grid nodes");
  e.v = pde::solve_dirichlet(pg.gamma_minus, pde::CoefficientField::identity(a.rho0), pde::ZeroOrderTerm::zero(),
                             pde::SourceData::none(), poisson, pg.grid, {1e-12, 0});
  e.v_H1 = pde::norm_H1(e.v).value;
  std::vector<double> gs;
  for (int k : pg.sigma_nodes) gs.push_back(e.v.values[k]);
  e.g_half = pde::trace_norms(gs, std::vector<double>(gs.size(), 0.0), pg.length, a.rho0).h_half;
  e.constant = e.g_half > 0.0 ? e.v_H1 / e.g_half : 0.0;
  return e;
}

}  // namespace

Extension extend_cauchy_data(const std::function<double(Vec2)>& g, const AugmentedDomain& a, const PatchGrid& pg) {
  const double W = a.rho1 / a.M0;
  auto g_local = [&](double t) { return g(a.frame.to_global({std::clamp(t, -W, W), 0.0})); };
  const double gl = g_local(-W), gr = g_local(W);
  auto poisson = [&](Vec2 x) {
    Vec2 l = a.frame.to_local(x);
    double d = -l.y;
    if (d <= 1e-12 * a.rho1) return g_local(l.x);
    auto kern = [&](double t) { return g_local(t) * d / ((t - l.x) * (t - l.x) + d * d); };
    double mid = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(kern, -W, W, 12, 1e-12);
    double tails = gl * (std::atan((-W - l.x) / d) + kPi / 2) + gr * (kPi / 2 - std::atan((W - l.x) / d));
    return (mid + tails) / kPi;
  };
  return extend_with(poisson, a, pg);
}

Extension extend_cauchy_data(const std::vector<double>& g_nodes, const AugmentedDomain& a, const PatchGrid& pg) {
  require(g_nodes.size() == pg.sigma_nodes.size(), ErrorKind::parameter, "g must live on the Sigma nodes");
  require(!g_nodes.empty(), ErrorKind::parameter, "no Sigma nodes");
  const auto s = trace_positions(a, pg);
  const std::size_t m = s.size();
  // piecewise linear data, constant beyond the end nodes: the Poisson integral is exact per segment
  auto poisson = [&](Vec2 x) {
    Vec2 l = a.frame.to_local(x);
    double d = -l.y;
    if (d <= 1e-12 * a.rho1) return interp(s, g_nodes, l.x);
    double v = g_nodes.front() * (std::atan((s.front() - l.x) / d) + kPi / 2) +
               g_nodes.back() * (kPi / 2 - std::atan((s.back() - l.x) / d));
    for (std::size_t k = 0; k + 1 < m; ++k) {
      double u0 = s[k] - l.x, u1 = s[k + 1] - l.x;
      double b = (g_nodes[k + 1] - g_nodes[k]) / (s[k + 1] - s[k]);
      double alpha = g_nodes[k] - b * u0;  // g = alpha + b u
      v += alpha * (std::atan(u1 / d) - std::atan(u0 / d)) +
           0.5 * b * d * std::log((u1 * u1 + d * d) / (u0 * u0 + d * d));
    }
    return v / kPi;
  };
  return extend_with(poisson, a, pg);
}

// ---- Riesz representation ----

double RieszPair::h1_norm(const std::vector<double>& phi) const {
  const double h = grid.h;
  double mass = 0.0, grad = 0.0;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      int k = grid.index(i, j);
      mass += h * h * phi[k] * phi[k];
      if (i + 1 < grid.nx && (unknown[k] || unknown[k + 1])) grad += std::pow(phi[k + 1] - phi[k], 2);
      if (j + 1 < grid.ny && (unknown[k] || unknown[k + grid.nx])) grad += std::pow(phi[k + grid.nx] - phi[k], 2);
    }
  return std::sqrt((mass + rho0 * rho0 * grad) / (rho0 * rho0));
}

double RieszPair::duality_residual(const std::vector<double>& phi, const std::vector<double>& psi,
                                   const PatchGrid& pg) const {
  const double h = grid.h;
  double Psi = 0.0;
  for (std::size_t s = 0; s < pg.sigma_nodes.size(); ++s) Psi += h * psi[s] * phi[pg.sigma_nodes[s]];
  double rep = 0.0;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      int k = grid.index(i, j);
      rep += h * h * f1[k] * phi[k];
      if (i + 1 < grid.nx) rep -= h * F1x[k] * (phi[k + 1] - phi[k]);
      if (j + 1 < grid.ny) rep -= h * F1y[k] * (phi[k + grid.nx] - phi[k]);
    }
  return Psi - rep;
}

RieszPair riesz_source(const std::vector<double>& psi, const PatchGrid& pg, const geometry::Domain& omega1,
                       double rho0, double tol) {
  require(psi.size() == pg.sigma_nodes.size(), ErrorKind::parameter, "psi must live on the Sigma nodes");
  const auto& g = pg.grid;
  const double h = g.h;
  const std::size_t N = g.size();
  RieszPair r;
  r.grid = g;
  r.rho0 = rho0;
  pde::StencilSystem s;
  s.grid = g;
  s.unknown.assign(N, 0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (omega1.contains(g.node(i, j))) {
        require(i > 0 && j > 0 && i + 1 < g.nx && j + 1 < g.ny, ErrorKind::geometry,
                "Omega1 touches the edge of the grid");
        s.unknown[g.index(i, j)] = 1;
      }
  s.diag.assign(N, 0.0);
  s.east.assign(N, 0.0);
  s.north.assign(N, 0.0);
  s.rhs.assign(N, 0.0);
  const double r2 = rho0 * rho0;
  for (std::size_t k = 0; k < N; ++k) {
    if (!s.unknown[k]) continue;
    s.diag[k] = (h * h + 4.0 * r2) / r2;
    if (s.unknown[k + 1]) s.east[k] = 1.0;
    if (s.unknown[k + g.nx]) s.north[k] = 1.0;
  }
  for (std::size_t q = 0; q < psi.size(); ++q) {
    int k = pg.sigma_nodes[q];
    require(s.unknown[k] != 0, ErrorKind::geometry, "Sigma node is not interior to Omega1");
    s.rhs[k] = h * psi[q];
  }
  r.w.assign(N, 0.0);
  bool any = std::any_of(psi.begin(), psi.end(), [](double v) { return v != 0.0; });
  if (any) r.iterations = pde::solve_cg(s, r.w, {tol, 0}).iterations;
  r.unknown = s.unknown;
  r.f1.assign(N, 0.0);
  r.F1x.assign(N, 0.0);
  r.F1y.assign(N, 0.0);
  double fsum = 0.0, Fsum = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      int k = g.index(i, j);
      r.f1[k] = r.w[k] / r2;
      fsum += h * h * r.f1[k] * r.f1[k];
      if (i + 1 < g.nx && (r.unknown[k] || r.unknown[k + 1])) {
        r.F1x[k] = -(r.w[k + 1] - r.w[k]) / h;
        Fsum += h * h * r.F1x[k] * r.F1x[k];
      }
      if (j + 1 < g.ny && (r.unknown[k] || r.unknown[k + g.nx])) {
        r.F1y[k] = -(r.w[k + g.nx] - r.w[k]) / h;
        Fsum += h * h * r.F1y[k] * r.F1y[k];
      }
    }
  r.f1_norm = std::sqrt(fsum) / rho0;
  r.F1_norm = std::sqrt(Fsum) / rho0;
  double psi_norm = pde::trace_norms(std::vector<double>(psi.size(), 0.0), psi, pg.length, rho0).h_minus_half;
  r.constant = psi_norm > 0.0 ? (rho0 * r.f1_norm + r.F1_norm) * rho0 / (rho0 * psi_norm) : 0.0;
  return r;
}

// ---- extended equation ----

ExtendedSolution extended_equation(const pde::DiscreteSolution& u, const CauchyData& cd, const Extension& ext,
                                   const RieszPair& riesz, const pde::SourceData& src, const pde::CoefficientField& A,
                                   const pde::ZeroOrderTerm& c, const AugmentedDomain& a, const PatchGrid& pg,
                                   bool verify, double tol) {
  require(a.omega1.has_value(), ErrorKind::geometry, "Omega1 polygon is unavailable");
  const auto& g = pg.grid;
  const double h = g.h, rho0 = a.rho0;
  const std::size_t N = g.size();
  const auto& U = riesz.unknown;
  const double W = a.rho1 / a.M0;
  ExtendedSolution es;

  std::vector<std::int8_t> sigma_index(N, 0);
  for (int k : pg.sigma_nodes) sigma_index[k] = 1;
  std::vector<double> ut(u.values);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      int k = g.index(i, j);
      Vec2 p = g.node(i, j);
      if (a.omega.contains(p)) continue;
      Vec2 l = a.frame.to_local(p);
      if (sigma_index[k]) continue;
      if (l.y < 0.0 && std::abs(l.x) <= W * (1 + 1e-12) && l.y >= -a.rho1 * (1 + 1e-12)) ut[k] = ext.v.values[k];
    }
  for (std::size_t q = 0; q < pg.sigma_nodes.size(); ++q) ut[pg.sigma_nodes[q]] = cd.g[q];
  es.identical_in_omega = true;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      int k = g.index(i, j);
      if (a.omega.contains(g.node(i, j)) && std::memcmp(&ut[k], &u.values[k], sizeof(double)) != 0)
        es.identical_in_omega = false;
    }

  // nodal source
  es.f_tilde.assign(N, 0.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      int k = g.index(i, j);
      if (!U[k]) continue;
      Vec2 p = g.node(i, j);
      double f = src.f ? src.f(p) : 0.0;
      if (sigma_index[k])
        es.f_tilde[k] = 0.5 * f + 0.5 * c(p) * ut[k] - riesz.f1[k];
      else if (a.omega.contains(p))
        es.f_tilde[k] = f - riesz.f1[k];
      else
        es.f_tilde[k] = c(p) * ut[k] - riesz.f1[k];
    }
  // face fluxes, east and north
  es.F_tilde_x.assign(N, 0.0);
  es.F_tilde_y.assign(N, 0.0);
  std::vector<double> af_x(N, 0.0), af_y(N, 0.0);
  auto face = [&](int k, int kk, bool xdir, double F1) {
    Vec2 p = g.node(k % g.nx, k / g.nx), q = g.node(kk % g.nx, kk / g.nx), m = 0.5 * (p + q);
    double af = harmonic_mean(axis_coefficient(A, p, xdir), axis_coefficient(A, q, xdir));
    Vec2 l = a.frame.to_local(m);
    double Fp;
    if (a.omega.contains(m))
      Fp = src.F ? (xdir ? src.F(m).x : src.F(m).y) : 0.0;
    else if (std::abs(l.y) < 1e-9 * h && (std::abs(l.x) < W || sigma_index[k] || sigma_index[kk]))
      Fp = af * (ut[kk] - ut[k]) / h;
    else if (pg.gamma_minus.contains(m))
      Fp = af * (ut[kk] - ut[k]) / h;
    else
      Fp = 0.0;
    return std::pair{af, Fp - F1};
  };
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      int k = g.index(i, j);
      if (U[k] || U[k + 1]) std::tie(af_x[k], es.F_tilde_x[k]) = face(k, k + 1, true, riesz.F1x[k]);
      if (U[k] || U[k + g.nx]) std::tie(af_y[k], es.F_tilde_y[k]) = face(k, k + g.nx, false, riesz.F1y[k]);
    }

  double fs = 0.0, Fs = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    if (U[k]) fs += h * h * es.f_tilde[k] * es.f_tilde[k];
    Fs += h * h * (es.F_tilde_x[k] * es.F_tilde_x[k] + es.F_tilde_y[k] * es.F_tilde_y[k]);
  }
  es.f_norm = std::sqrt(fs) / rho0;
  es.F_norm = std::sqrt(Fs) / rho0;
  es.source_norm = es.f_norm + es.F_norm / rho0;
  double data = src.eps + cd.eta;
  es.constant = data > 0.0 ? es.source_norm * rho0 * rho0 / data : 0.0;

  // weak residual of div(A grad u~) + c u~ = f~ + div F~ at interior nodes with uncut stencils
  double rmax = 0.0, scale = 0.0;
  for (int j = 1; j + 1 < g.ny; ++j)
    for (int i = 1; i + 1 < g.nx; ++i) {
      int k = g.index(i, j);
      if (!U[k]) continue;
      const int nb[4] = {k + 1, k - 1, k + g.nx, k - g.nx};
      bool cut = false;
      for (int kk : nb)
        if (!U[kk] && a.omega1->boundary_distance(g.node(kk % g.nx, kk / g.nx)) > 1e-9 * h) cut = true;
      if (cut) continue;
      Vec2 p = g.node(i, j);
      double r = c(p) * ut[k] * h * h - h * h * es.f_tilde[k];
      double s = std::abs(c(p) * ut[k] * h * h) + std::abs(h * h * es.f_tilde[k]);
      const double a4[4] = {af_x[k], af_x[k - 1], af_y[k], af_y[k - g.nx]};
      for (int d = 0; d < 4; ++d) {
        r += a4[d] * (ut[nb[d]] - ut[k]);
        s += std::abs(a4[d] * (ut[nb[d]] - ut[k]));
      }
      double F4 = -h * es.F_tilde_x[k] + h * es.F_tilde_x[k - 1] - h * es.F_tilde_y[k] + h * es.F_tilde_y[k - g.nx];
      r += F4;
      s += h * (std::abs(es.F_tilde_x[k]) + std::abs(es.F_tilde_x[k - 1]) + std::abs(es.F_tilde_y[k]) +
                std::abs(es.F_tilde_y[k - g.nx]));
      rmax = std::max(rmax, std::abs(r));
      scale = std::max(scale, s);
    }
  es.max_residual = rmax;
  es.residual = scale > 0.0 ? rmax / scale : 0.0;
  if (verify && es.residual > tol)
    throw Error(ErrorKind::extension_consistency, "extended equation residual above tolerance", es.residual);

  es.u_tilde.grid = g;
  es.u_tilde.values = ut;
  es.u_tilde.inside = U;
  es.u_tilde.domain = std::make_shared<geometry::Domain>(*a.omega1);
  es.u_tilde.rho0 = rho0;
  double anchor = std::sqrt(std::max(0.0, disc_integral([&](Vec2 p) { double v = es.u_tilde.value(p); return v * v; },
                                                        a.x0, a.r0, 128)) /
                            (rho0 * rho0));
  es.ball_constant = cd.eta > 0.0 ? anchor / cd.eta : 0.0;
  return es;
}

Pipeline run_pipeline(const pde::DiscreteSolution& u, const pde::CoefficientField& A, const pde::ZeroOrderTerm& c,
                      const pde::SourceData& src, const AugmentedDomain& a, bool verify) {
  require(a.omega1.has_value(), ErrorKind::geometry, "Omega1 polygon is unavailable");
  Pipeline p;
  p.pg = patch_grid(a, u.grid);
  p.cd = cauchy_data(u, A, c, src, p.pg, a.rho0);
  p.ext = extend_cauchy_data(p.cd.g, a, p.pg);
  p.riesz = riesz_source(p.cd.psi, p.pg, *a.omega1, a.rho0);
  p.ext_sol = extended_equation(u, p.cd, p.ext, p.riesz, src, A, c, a, p.pg, verify);
  return p;
}

void write_report_csv(std::ostream& os, const Pipeline& p) {
  os.precision(12);
  os << "quantity,value\n";
  os << "eta," << p.cd.eta << "\ng_half," << p.cd.g_half << "\npsi_minus_half," << p.cd.psi_minus_half << "\n";
  os << "extension_constant," << p.ext.constant << "\nv_H1," << p.ext.v_H1 << "\n";
  os << "f1_norm," << p.riesz.f1_norm << "\nF1_norm," << p.riesz.F1_norm << "\nriesz_constant," << p.riesz.constant
     << "\n";
  os << "source_norm," << p.ext_sol.source_norm << "\nsource_constant," << p.ext_sol.constant << "\n";
  os << "ball_constant," << p.ext_sol.ball_constant << "\nweak_residual," << p.ext_sol.residual << "\n";
  os << "identical_in_omega," << (p.ext_sol.identical_in_omega ? 1 : 0) << "\n";
}

}  // namespace cauchylab::extension
