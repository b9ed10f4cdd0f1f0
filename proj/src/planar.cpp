#include "cauchylab/planar.hpp"

#include <algorithm>
#include <limits>

namespace cauchylab::planar {

using geometry::Domain;
using geometry::GridSpec;

double two_sided_K(const Mat2& A) {
  double d = A.det();
  if (d == 0.0) throw Error(ErrorKind::ellipticity, "singular coefficient matrix");
  double l1 = sym_eigen(A).lmin, l2 = sym_eigen(A.inverse()).lmin;
  if (l1 <= 0.0 || l2 <= 0.0) throw Error(ErrorKind::ellipticity, "matrix is not elliptic");
  return std::max({1.0, 1.0 / l1, 1.0 / l2});
}

double k_bound(double K) {
  require(K >= 1.0, ErrorKind::parameter, "K must be >= 1");
  double s = K + std::sqrt(K * K - 1.0);
  return (s - 1.0) / (s + 1.0);
}

double K_from_k(double k) {
  require(k >= 0.0 && k < 1.0, ErrorKind::parameter, "k must lie in [0,1)");
  return (1.0 + k) / (1.0 - k);
}

BeltramiPair beltrami_from_matrix(const Mat2& A) {
  const double D = A.det() + A.trace() + 1.0;
  if (!(D > 0.0)) throw Error(ErrorKind::ellipticity, "denominator det A + tr A + 1 is not positive", D);
  BeltramiPair p;
  p.mu = cplx(A.a22 - A.a11, -(A.a12 + A.a21)) / D;
  p.nu = cplx(A.a12 * A.a21 - A.a11 * A.a22 + 1.0, A.a12 - A.a21) / D;
  p.k = std::abs(p.mu) + std::abs(p.nu);
  return p;
}

Mat2 matrix_from_beltrami(cplx mu, cplx nu) {
  const double den = std::norm(1.0 + nu) - std::norm(mu);
  if (std::abs(den) < 1e-15) throw Error(ErrorKind::singular, "|1+nu|^2 = |mu|^2");
  return {(std::norm(1.0 - mu) - std::norm(nu)) / den, 2.0 * (nu - mu).imag() / den, -2.0 * (mu + nu).imag() / den,
          (std::norm(1.0 + mu) - std::norm(nu)) / den};
}

Mat2 subharmonic_matrix(cplx mu, cplx nu, cplx fz) {
  cplx mu1 = std::abs(fz) > 1e-12 ? mu + nu * std::conj(fz) / fz : mu;
  return matrix_from_beltrami(mu1, 0.0);
}

StreamFunction stream_function(const pde::DiscreteSolution& u, const pde::CoefficientField& A,
                               std::optional<Vec2> anchor) {
  const GridSpec& g = u.grid;
  geometry::GridMask m = u.mask();
  require(!m.empty(), ErrorKind::parameter, "empty solution mask");
  if (count_holes(m) > 0) throw Error(ErrorKind::topology, "mask is not simply connected; v would be multivalued");
  require(count_components(m) == 1, ErrorKind::topology, "mask is not connected");
  const int nx = g.nx;
  const double h = g.h;
  int a = -1;
  if (anchor) {
    a = m.nearest_inside(*anchor, 4);
    require(a >= 0, ErrorKind::parameter, "anchor is not inside the mask");
  } else {
    Vec2 c{};
    std::size_t cnt = 0;
    for (std::size_t k = 0; k < m.inside.size(); ++k)
      if (m.inside[k]) {
        c = c + g.node(static_cast<int>(k % nx), static_cast<int>(k / nx));
        ++cnt;
      }
    a = m.nearest_inside(c / static_cast<double>(cnt), std::max(g.nx, g.ny));
  }
  const auto& U = u.values;
  // W = J A grad u at face midpoints, times h
  auto d_east = [&](int k) {
    Vec2 mid = g.node(k % nx, k / nx) + Vec2{0.5 * h, 0.0};
    double ux = (U[k + 1] - U[k]) / h;
    double uy = 0.25 * ((U[k + nx] - U[k - nx]) + (U[k + 1 + nx] - U[k + 1 - nx])) / h;
    Mat2 M = A(mid);
    return -h * (M.a21 * ux + M.a22 * uy);
  };
  auto d_north = [&](int k) {
    Vec2 mid = g.node(k % nx, k / nx) + Vec2{0.0, 0.5 * h};
    double uy = (U[k + nx] - U[k]) / h;
    double ux = 0.25 * ((U[k + 1] - U[k - 1]) + (U[k + nx + 1] - U[k + nx - 1])) / h;
    Mat2 M = A(mid);
    return h * (M.a11 * ux + M.a12 * uy);
  };
  auto sys = std::make_shared<pde::StencilSystem>();
  sys->grid = g;
  const std::size_t N = g.size();
  sys->unknown.assign(N, 0);
  sys->diag.assign(N, 0.0);
  sys->east.assign(N, 0.0);
  sys->north.assign(N, 0.0);
  sys->rhs.assign(N, 0.0);
  for (std::size_t k = 0; k < N; ++k) sys->unknown[k] = (m.inside[k] && static_cast<int>(k) != a) ? 1 : 0;
  std::vector<double> de(N, 0.0), dn(N, 0.0);
  std::vector<std::uint8_t> fe(N, 0), fn(N, 0);
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      int k = g.index(i, j);
      if (!m.inside[k]) continue;
      if (m.inside[k + 1]) {
        fe[k] = 1;
        de[k] = d_east(k);
        sys->diag[k] += 1.0;
        sys->diag[k + 1] += 1.0;
        sys->rhs[k] -= de[k];
        sys->rhs[k + 1] += de[k];
        if (sys->unknown[k] && sys->unknown[k + 1]) sys->east[k] = 1.0;
      }
      if (m.inside[k + nx]) {
        fn[k] = 1;
        dn[k] = d_north(k);
        sys->diag[k] += 1.0;
        sys->diag[k + nx] += 1.0;
        sys->rhs[k] -= dn[k];
        sys->rhs[k + nx] += dn[k];
        if (sys->unknown[k] && sys->unknown[k + nx]) sys->north[k] = 1.0;
      }
    }
  for (std::size_t k = 0; k < N; ++k)
    if (!sys->unknown[k]) sys->rhs[k] = 0.0;
  std::vector<double> x(N, 0.0);
  pde::CgResult res;
  bool trivial = true;
  for (std::size_t k = 0; k < N; ++k) trivial = trivial && !sys->unknown[k];
  if (!trivial) res = pde::solve_cg(*sys, x, {1e-11, 0});
  StreamFunction out;
  out.anchor = a;
  out.v.grid = g;
  out.v.values = x;
  out.v.values[a] = 0.0;
  out.v.inside = m.inside;
  out.v.domain = u.domain;
  out.v.system = sys;
  out.v.rho0 = u.rho0;
  out.v.residual = res.relative_residual;
  out.v.iterations = res.iterations;
  const auto& V = out.v.values;
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    if (fe[k]) {
      num += std::pow(V[k + 1] - V[k] - de[k], 2);
      den += de[k] * de[k];
    }
    if (fn[k]) {
      num += std::pow(V[k + nx] - V[k] - dn[k], 2);
      den += dn[k] * dn[k];
    }
  }
  out.flux_residual = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  // div(B grad v) with B = A^T / det A, diagonal part
  std::vector<double> bx(N, 0.0), by(N, 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    Mat2 M = A(g.node(static_cast<int>(k % nx), static_cast<int>(k / nx)));
    double d = M.det();
    bx[k] = M.a11 / d;
    by[k] = M.a22 / d;
  }
  double rmax = 0.0, smax = 0.0;
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      int k = g.index(i, j);
      int nb[4] = {k + 1, k - 1, k + nx, k - nx};
      bool full = m.inside[k];
      for (int q : nb) full = full && m.inside[q];
      if (!full) continue;
      double r = 0.0, s = 0.0;
      for (int d = 0; d < 4; ++d) {
        double b = d < 2 ? 2 * bx[k] * bx[nb[d]] / (bx[k] + bx[nb[d]]) : 2 * by[k] * by[nb[d]] / (by[k] + by[nb[d]]);
        r += b * (V[nb[d]] - V[k]);
        s += b * std::abs(V[nb[d]] - V[k]);
      }
      rmax = std::max(rmax, std::abs(r));
      smax = std::max(smax, s);
    }
  out.b_residual = smax > 0.0 ? rmax / smax : 0.0;
  return out;
}

double schwarz_bound(double E, double abs_z) {
  require(abs_z >= 0.0 && abs_z < 1.0, ErrorKind::parameter, "|z| must lie in [0,1)");
  return 2.0 * E / kPi * std::log((1.0 + abs_z) / (1.0 - abs_z));
}

double mollified_indicator(const geometry::LipschitzPortion& sigma, Vec2 x, double width) {
  double ds = sigma.distance_to_sigma(x), dc = sigma.distance_to_complement(x);
  if (width <= 0.0) return ds <= dc ? 1.0 : 0.0;
  return std::clamp(0.5 + (dc - ds) / (2.0 * width), 0.0, 1.0);
}

HarmonicMeasureField harmonic_measure(const Domain& domain, const geometry::LipschitzPortion& sigma,
                                      const pde::CoefficientField& A1, double smoothing, const GridSpec& grid) {
  require(smoothing >= 0.0, ErrorKind::parameter, "smoothing width must be nonnegative");
  if (sigma.length() <= 0.0) throw Error(ErrorKind::degenerate_measure, "Sigma has zero length");
  double comp = 0.0;
  for (const auto& c : sigma.complement()) comp += geometry::polyline_length(c);
  if (comp <= 0.0) throw Error(ErrorKind::degenerate_measure, "the complement of Sigma has zero length");
  HarmonicMeasureField hm;
  hm.smoothing = smoothing;
  hm.omega = pde::solve_dirichlet(domain, A1, pde::ZeroOrderTerm::zero(A1.rho0), pde::SourceData::none(),
                                  [&](Vec2 x) { return mollified_indicator(sigma, x, smoothing); }, grid);
  for (std::size_t k = 0; k < hm.omega.values.size(); ++k) {
    double& w = hm.omega.values[k];
    if (w < 0.0) {
      hm.max_clamp = std::max(hm.max_clamp, -w);
      w = 0.0;
    } else if (w > 1.0) {
      hm.max_clamp = std::max(hm.max_clamp, w - 1.0);
      w = 1.0;
    }
  }
  return hm;
}

double interior_cauchy_bound(double E, double eta, double omega) {
  require(eta > 0.0 && eta <= E, ErrorKind::parameter, "need 0 < eta <= E");
  require(omega >= 0.0 && omega <= 1.0, ErrorKind::parameter, "omega must lie in [0,1]");
  return std::pow(E, 1.0 - omega) * std::pow(eta, omega);
}

namespace {

double harm_alpha(double s1, double s2) {
  // s1 = r1/r3, s2 = r2/r3
  return std::log(0.5 + 0.5 / s2) / std::log((1.0 + s2) / s1);
}

double harm_C3(double s2) { return 2.0 / kPi * std::log((3.0 + s2) / (1.0 - s2)); }

}  // namespace

ThreeCircles three_circles_exponents(double r1, double r2, double r3, double C1, double beta) {
  require(r1 > 0.0 && r1 < r2 && r2 < r3, ErrorKind::parameter, "need 0 < r1 < r2 < r3");
  require(C1 >= 1.0 && beta > 0.0 && beta <= 1.0, ErrorKind::parameter, "need C1 >= 1 and beta in (0,1]");
  ThreeCircles t;
  t.alpha_holo = std::log(r3 / r2) / std::log(r3 / r1);
  t.alpha_harm = harm_alpha(r1 / r3, r2 / r3);
  t.C2 = 2.0 / kPi * std::log(3.0);
  t.C3 = harm_C3(r2 / r3);
  t.r1_tilde = std::pow(r1 / (C1 * r3), 1.0 / beta);
  t.r2_tilde = 1.0 - std::pow((1.0 - r2 / r3) / C1, 1.0 / beta);
  require(t.r1_tilde < t.r2_tilde, ErrorKind::parameter, "distorted radii are not ordered");
  t.alpha_qc = std::log(1.0 / t.r2_tilde) / std::log(1.0 / t.r1_tilde);
  t.alpha_harm_qc = harm_alpha(t.r1_tilde, t.r2_tilde);
  t.C3_qc = harm_C3(t.r2_tilde);
  return t;
}

HolderCase annulus_holder_case(const std::vector<cplx>& coeffs, int cells, double slack) {
  Domain ann = Domain::annulus(1.0, 4.0);
  auto f = [&](Vec2 p) {
    cplx z(p.x, p.y), s = 0.0, zk = 1.0;
    for (cplx a : coeffs) {
      s += a * zk;
      zk *= z;
    }
    return s;
  };
  auto circle_max = [&](double r, auto&& fn) {
    double m = 0.0;
    const int n = 4096;
    for (int k = 0; k < n; ++k) {
      double t = 2.0 * kPi * k / n;
      m = std::max(m, fn(Vec2{r * std::cos(t), r * std::sin(t)}));
    }
    return m;
  };
  auto absf = [&](Vec2 p) { return std::abs(f(p)); };
  HolderCase c;
  c.eta = circle_max(1.0, absf);
  c.E = std::max(circle_max(4.0, absf), c.eta);
  auto u = pde::solve_dirichlet(ann, pde::CoefficientField::identity(), pde::ZeroOrderTerm::zero(),
                                pde::SourceData::none(), [&](Vec2 p) { return f(p).real(); },
                                geometry::grid_for(ann, cells));
  c.measured = circle_max(2.0, [&](Vec2 p) { return std::abs(u.value(p)); });
  double omega = std::log(4.0 / 2.0) / std::log(4.0);
  c.bound = interior_cauchy_bound(c.E, c.eta, omega);
  c.ok = c.measured <= c.bound * (1.0 + slack);
  return c;
}

}  // namespace cauchylab::planar
