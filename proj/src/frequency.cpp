#include "cauchylab/frequency.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>

namespace cauchylab::frequency {

std::vector<double> Ellipsoid::schedule(double r1, double r2, double r3) const {
  return {r1 / std::sqrt(K), std::sqrt(K) * r2, r3 / std::sqrt(K)};
}

Ellipsoid ellipsoid_transform(const Mat2& A0) {
  if (std::abs(A0.a12 - A0.a21) > 1e-12 * (std::abs(A0.a11) + std::abs(A0.a22)))
    throw Error(ErrorKind::algebra, "ellipsoid transform needs a symmetric matrix");
  SymEigen e = sym_eigen(A0);
  if (!(e.lmin > 0.0)) throw Error(ErrorKind::algebra, "ellipsoid transform needs a positive definite matrix");
  auto fn = [&](double (*f)(double)) {
    double a = f(e.lmin), b = f(e.lmax);
    Vec2 u = e.vmin, v = e.vmax;
    return Mat2{a * u.x * u.x + b * v.x * v.x, a * u.x * u.y + b * v.x * v.y, a * u.x * u.y + b * v.x * v.y,
                a * u.y * u.y + b * v.y * v.y};
  };
  Ellipsoid el;
  el.J = fn([](double l) { return 1.0 / std::sqrt(l); });
  el.J_inv = fn([](double l) { return std::sqrt(l); });
  el.lmin = e.lmin;
  el.lmax = e.lmax;
  el.K = std::max(e.lmax, 1.0 / e.lmin);
  return el;
}

namespace {

bool is_identity(const Mat2& m) {
  return std::abs(m.a11 - 1) <= 1e-12 && std::abs(m.a22 - 1) <= 1e-12 && std::abs(m.a12) <= 1e-12 &&
         std::abs(m.a21) <= 1e-12;
}

double energy_density(const Mat2& A, Vec2 g) { return dot(A * g, g); }

// int_{B_r(c)} A grad u . grad u on the grid cells of u, fractional coverage on straddling cells
double cell_energy(const GridFunction& u, const std::function<Mat2(Vec2)>& A, Vec2 c, double r, int sub) {
  const auto& g = u.grid;
  const double h = g.h;
  int i0 = std::max(0, static_cast<int>(std::floor((c.x - r - g.origin.x) / h)));
  int i1 = std::min(g.nx - 2, static_cast<int>(std::floor((c.x + r - g.origin.x) / h)));
  int j0 = std::max(0, static_cast<int>(std::floor((c.y - r - g.origin.y) / h)));
  int j1 = std::min(g.ny - 2, static_cast<int>(std::floor((c.y + r - g.origin.y) / h)));
  double s = 0.0;
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      Vec2 lo = g.node(i, j);
      Vec2 hi{lo.x + h, lo.y + h};
      Vec2 nearest{std::clamp(c.x, lo.x, hi.x), std::clamp(c.y, lo.y, hi.y)};
      if (dist(nearest, c) >= r) continue;
      double far = std::max(std::hypot(std::max(std::abs(lo.x - c.x), std::abs(hi.x - c.x)),
                                       std::max(std::abs(lo.y - c.y), std::abs(hi.y - c.y))),
                            0.0);
      if (far < r) {
        Vec2 m{lo.x + 0.5 * h, lo.y + 0.5 * h};
        s += energy_density(A(m), u.gradient(m)) * h * h;
        continue;
      }
      const double d = h / sub;
      for (int b = 0; b < sub; ++b)
        for (int a = 0; a < sub; ++a) {
          Vec2 p{lo.x + (a + 0.5) * d, lo.y + (b + 0.5) * d};
          if (dist(p, c) < r) s += energy_density(A(p), u.gradient(p)) * d * d;
        }
    }
  return s;
}

void check_circle(const std::optional<Region>& region, const std::function<Vec2(Vec2)>& to_x, double r, int nodes) {
  if (!region) return;
  for (int k = 0; k < nodes; ++k) {
    double t = 2.0 * kPi * k / nodes;
    Vec2 x = to_x({r * std::cos(t), r * std::sin(t)});
    if (!(*region)(x)) throw Error(ErrorKind::geometry, "circle of radius " + std::to_string(r) + " leaves the region");
  }
}

}  // namespace

RadialProfile radial_profile(const ScalarField& u, const pde::CoefficientField& A, Vec2 center,
                             const std::vector<double>& radii, const ProfileOptions& opt) {
  require(!radii.empty(), ErrorKind::parameter, "no radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(radii[i] > 0.0, ErrorKind::parameter, "radii must be positive");
    if (i > 0) require(radii[i] > radii[i - 1], ErrorKind::parameter, "radii must be strictly increasing");
  }
  RadialProfile p;
  p.rho0 = opt.rho0;
  p.angular_nodes = opt.angular_nodes;
  Mat2 A0 = A(center);
  const bool transform = !is_identity(A0);
  p.transformed = transform;
  Ellipsoid el = transform ? ellipsoid_transform(A0) : Ellipsoid{Mat2::identity(), Mat2::identity(), 1, 1, 1};
  TransformedField ut(u, center, el);
  auto to_x = [&](Vec2 y) { return center + el.J_inv * y; };
  // coefficient in y coordinates centered at 0
  std::function<Mat2(Vec2)> At = [&](Vec2 y) { return el.J * A(to_x(y)) * el.J; };
  const auto* grid_u = dynamic_cast<const GridFunction*>(&u);
  for (double r : radii) {
    check_circle(opt.region, to_x, r, opt.angular_nodes);
    double H = circle_integral(
        [&](Vec2 y) {
          double n2 = dot(y, y);
          double mu = n2 > 0.0 ? dot(At(y) * y, y) / n2 : 1.0;
          double v = ut.value(y);
          return mu * v * v;
        },
        {}, r, opt.angular_nodes);
    double I;
    if (grid_u && !transform) {
      I = cell_energy(*grid_u, A.A, center, r, opt.subsamples);
    } else {
      I = disc_integral([&](Vec2 y) { return energy_density(At(y), ut.gradient(y)); }, {}, r, opt.angular_nodes);
    }
    p.r.push_back(r);
    p.H.push_back(H);
    p.I.push_back(I);
  }
  double hmax = *std::max_element(p.H.begin(), p.H.end());
  for (std::size_t i = 0; i < p.r.size(); ++i) {
    bool ok = p.H[i] > 1e-14 * hmax && p.H[i] > 0.0;
    p.defined.push_back(ok ? 1 : 0);
    p.N.push_back(ok ? p.r[i] * p.I[i] / p.H[i] : std::numeric_limits<double>::quiet_NaN());
  }
  return p;
}

RadialProfile radial_profile(const pde::DiscreteSolution& u, const pde::CoefficientField& A, Vec2 center,
                             const std::vector<double>& radii, ProfileOptions opt) {
  if (!opt.region) opt.region = u.region();
  opt.rho0 = u.rho0;
  return radial_profile(static_cast<const ScalarField&>(u), A, center, radii, opt);
}

MonotonicityReport frequency_monotonicity_check(const RadialProfile& p, double tol) {
  MonotonicityReport rep;
  std::vector<double> r, N;
  for (std::size_t i = 0; i < p.r.size(); ++i) {
    if (p.defined[i]) {
      r.push_back(p.r[i]);
      N.push_back(p.N[i]);
    } else {
      rep.excluded.push_back(p.r[i]);
    }
  }
  rep.used = r.size();
  if (!rep.excluded.empty())
    rep.note = "H vanishes at " + std::to_string(rep.excluded.size()) +
               " radii; u vanishes identically there (r' < r), radii excluded";
  if (r.size() < 5) {
    rep.note += rep.note.empty() ? "" : "; ";
    rep.note += "fewer than 5 usable radii";
    rep.ok = false;
    return rep;
  }
  double C = 0.0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    double lhs = N[i] * (1.0 - tol);
    if (lhs <= N[i + 1] || lhs <= 0.0) continue;
    if (N[i + 1] <= 0.0) {
      C = std::numeric_limits<double>::infinity();
      break;
    }
    C = std::max(C, p.rho0 * std::log(lhs / N[i + 1]) / (r[i + 1] - r[i]));
  }
  rep.C = C;
  rep.ok = std::isfinite(C);
  return rep;
}

double restricted_alpha(const SphereTriple& t, double K, double C) {
  double a = std::log(t.r3 / (K * t.r2));
  return a / (a + C * std::log(K * t.r2 / t.r1));
}

double circle_norm(const ScalarField& u, Vec2 c, double r, NormKind kind, int nodes) {
  switch (kind) {
    case NormKind::sphere_L2:
      return std::sqrt(circle_integral([&](Vec2 p) { return std::pow(u.value(p), 2); }, c, r, nodes));
    case NormKind::ball_L2:
      return std::sqrt(disc_integral([&](Vec2 p) { return std::pow(u.value(p), 2); }, c, r, nodes));
    case NormKind::sup: {
      // sampled on the circle and on concentric interior circles
      double m = 0.0;
      const int rings = 32;
      for (int q = 1; q <= rings; ++q) {
        double rr = r * q / rings;
        for (int k = 0; k < nodes; ++k) {
          double t = 2.0 * kPi * k / nodes;
          m = std::max(m, std::abs(u.value({c.x + rr * std::cos(t), c.y + rr * std::sin(t)})));
        }
      }
      return std::max(m, std::abs(u.value(c)));
    }
  }
  return 0.0;
}

ThreeSpheresReport three_spheres_verify(const ScalarField& u, const pde::CoefficientField& A, Vec2 center,
                                        const SphereTriple& t, NormKind kind, const ThreeSpheresOptions& opt) {
  require(t.r1 > 0.0 && t.r1 < t.r2 && t.r2 < t.r3, ErrorKind::parameter, "need 0 < r1 < r2 < r3");
  const double K = A.K;
  if (t.restricted) require(t.r2 < t.r3 / K, ErrorKind::parameter, "restricted mode needs r2 < r3/K");
  if (opt.region) check_circle(opt.region, [&](Vec2 y) { return center + y; }, t.r3, opt.angular_nodes);
  ThreeSpheresReport rep;
  rep.n1 = circle_norm(u, center, t.r1, kind, opt.angular_nodes);
  rep.n2 = circle_norm(u, center, t.r2, kind, opt.angular_nodes);
  rep.n3 = circle_norm(u, center, t.r3, kind, opt.angular_nodes);
  if (opt.alpha)
    rep.alpha = *opt.alpha;
  else if (t.restricted)
    rep.alpha = restricted_alpha(t, K, opt.C);
  else
    rep.alpha = std::log(t.r3 / t.r2) / std::log(t.r3 / t.r1);
  double denom = std::pow(rep.n1, rep.alpha) * std::pow(rep.n3, 1.0 - rep.alpha);
  if (rep.n2 == 0.0)
    rep.Q = 0.0;
  else
    rep.Q = denom > 0.0 ? rep.n2 / denom : std::numeric_limits<double>::infinity();
  rep.pass = rep.Q <= opt.Q_cap;
  return rep;
}

DoublingReport doubling_check(const ScalarField& u, const pde::CoefficientField& A, Vec2 center,
                              const std::vector<double>& r_list, const ProfileOptions& opt) {
  require(!r_list.empty(), ErrorKind::parameter, "no radii");
  std::vector<double> all;
  for (double r : r_list) {
    all.push_back(r);
    all.push_back(2.0 * r);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end(), [](double a, double b) { return std::abs(a - b) < 1e-15; }),
            all.end());
  RadialProfile p = radial_profile(u, A, center, all, opt);
  auto H_at = [&](double r) {
    auto it = std::min_element(p.r.begin(), p.r.end(),
                                [r](double a, double b) { return std::abs(a - r) < std::abs(b - r); });
    return p.H[it - p.r.begin()];
  };
  auto mass = [&](double r) {
    return disc_integral([&](Vec2 q) { return std::pow(u.value(q), 2); }, center, r, opt.angular_nodes);
  };
  DoublingReport rep;
  std::vector<double> lr, lm;
  for (double r : r_list) {
    double m1 = mass(r), m2 = mass(2.0 * r);
    DoublingRow row{r, H_at(2.0 * r) / H_at(r), m2 / m1};
    rep.rows.push_back(row);
    rep.max_H_ratio = std::max(rep.max_H_ratio, row.H_ratio);
    rep.max_mass_ratio = std::max(rep.max_mass_ratio, row.mass_ratio);
    if (m1 > 0.0) {
      lr.push_back(std::log(r));
      lm.push_back(std::log(m1));
    }
  }
  rep.bounded = std::isfinite(rep.max_H_ratio) && std::isfinite(rep.max_mass_ratio);
  if (lr.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lr.size(); ++i) {
      mx += lr[i];
      my += lm[i];
    }
    mx /= lr.size();
    my /= lr.size();
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lr.size(); ++i) {
      sxx += (lr[i] - mx) * (lr[i] - mx);
      sxy += (lr[i] - mx) * (lm[i] - my);
    }
    rep.growth_exponent = sxx > 0 ? sxy / sxx : 0.0;
  }
  return rep;
}

void write_profile_csv(std::ostream& os, const RadialProfile& p) {
  os << "r,H,I,N\n";
  char buf[160];
  for (std::size_t i = 0; i < p.r.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.12g,%.12g,%.12g\n", p.r[i], p.H[i], p.I[i], p.N[i]);
    os << buf;
  }
}

}  // namespace cauchylab::frequency
