#include "cauchylab/pde.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>
#include <ostream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

namespace cauchylab::pde {

using geometry::Domain;
using geometry::GridMask;
using geometry::GridSpec;

double ellipticity_of(const Mat2& a) {
  SymEigen e = sym_eigen(a);
  if (e.lmin <= 0.0) return std::numeric_limits<double>::infinity();
  return std::max(e.lmax, 1.0 / e.lmin);
}

CoefficientField CoefficientField::identity(double rho0) {
  return {[](Vec2) { return Mat2::identity(); }, 1.0, 0.0, rho0, true};
}

CoefficientField CoefficientField::constant(const Mat2& m, double rho0) {
  return {[m](Vec2) { return m; }, ellipticity_of(m), 0.0, rho0, true};
}

CoefficientField CoefficientField::scalar(std::function<double(Vec2)> a, double K, double L, double rho0) {
  return {[a](Vec2 p) { return Mat2::identity().scaled(a(p)); }, K, L, rho0, true};
}

CoefficientField CoefficientField::diagonal(std::function<double(Vec2)> a11, std::function<double(Vec2)> a22,
                                            double K, double L, double rho0) {
  return {[a11, a22](Vec2 p) { return Mat2::diag(a11(p), a22(p)); }, K, L, rho0, true};
}

bool CoefficientField::check(const std::vector<Vec2>& samples) const {
  const double tol = 1e-12;
  for (Vec2 p : samples) {
    SymEigen e = sym_eigen(A(p));
    if (e.lmin < 1.0 / K - tol || e.lmax > K + tol) return false;
  }
  if (lipschitz) {
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
      Mat2 d = A(samples[i]);
      Mat2 e = A(samples[i + 1]);
      double diff = std::sqrt(std::pow(d.a11 - e.a11, 2) + std::pow(d.a12 - e.a12, 2) + std::pow(d.a21 - e.a21, 2) +
                              std::pow(d.a22 - e.a22, 2));
      if (diff > (L / rho0) * dist(samples[i], samples[i + 1]) * (1.0 + 1e-9) + tol) return false;
    }
  }
  return true;
}

ZeroOrderTerm ZeroOrderTerm::zero(double rho0) { return {{}, 0.0, rho0}; }

ZeroOrderTerm ZeroOrderTerm::constant(double value, double rho0) {
  return {[value](Vec2) { return value; }, std::abs(value) * rho0 * rho0, rho0};
}

bool ZeroOrderTerm::check(const std::vector<Vec2>& samples) const {
  for (Vec2 p : samples)
    if (std::abs((*this)(p)) > kappa / (rho0 * rho0) * (1.0 + 1e-12)) return false;
  return true;
}

void StencilSystem::apply(const std::vector<double>& x, std::vector<double>& y) const {
  const int nx = grid.nx;
  const int N = static_cast<int>(grid.size());
  y.assign(N, 0.0);
  for (int k = 0; k < N; ++k) {
    if (!unknown[k]) continue;
    y[k] = diag[k] * x[k] - east[k] * x[k + 1] - west_of(k) * x[k - 1] - north[k] * x[k + nx] -
           south_of(k) * x[k - nx];
  }
}

namespace {

double dot_unknown(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double harmonic_mean(double a, double b) { return 2.0 * a * b / (a + b); }

}  // namespace

namespace {

// cut-cell rows are not symmetric: BiCGSTAB with an incomplete LU
CgResult solve_bicgstab(const StencilSystem& s, std::vector<double>& x, const SolveOptions& opt, int cap) {
  const int N = static_cast<int>(s.grid.size()), nx = s.grid.nx;
  std::vector<int> id(N, -1);
  int n = 0;
  for (int k = 0; k < N; ++k)
    if (s.unknown[k]) id[k] = n++;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(5 * static_cast<std::size_t>(n));
  Eigen::VectorXd b(n), x0(n);
  for (int k = 0; k < N; ++k) {
    if (id[k] < 0) continue;
    // rows scaled to unit diagonal: arms near 0 give diagonals near 1e12
    const double sc = 1.0 / s.diag[k];
    t.emplace_back(id[k], id[k], 1.0);
    const int nb[4] = {k + 1, k - 1, k + nx, k - nx};
    const double a[4] = {s.east[k], s.west_of(k), s.north[k], s.south_of(k)};
    for (int d = 0; d < 4; ++d)
      if (id[nb[d]] >= 0 && a[d] != 0.0) t.emplace_back(id[k], id[nb[d]], -a[d] * sc);
    b[id[k]] = s.rhs[k] * sc;
    x0[id[k]] = x[k];
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> M(n, n);
  M.setFromTriplets(t.begin(), t.end());
  Eigen::BiCGSTAB<Eigen::SparseMatrix<double, Eigen::RowMajor>, Eigen::IncompleteLUT<double>> solver;
  solver.preconditioner().setDroptol(1e-4);
  solver.setTolerance(opt.tol);
  solver.setMaxIterations(cap);
  solver.compute(M);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::solver, "incomplete LU factorization failed");
  Eigen::VectorXd sol = solver.solveWithGuess(b, x0);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::solver, "BiCGSTAB did not converge within " + std::to_string(cap) + " iterations",
                static_cast<double>(solver.iterations()));
  for (int k = 0; k < N; ++k) x[k] = id[k] >= 0 ? sol[id[k]] : 0.0;
  double rel = (b - M * sol).norm() / b.norm();
  return {static_cast<int>(solver.iterations()), rel};
}

}  // namespace

CgResult solve_cg(const StencilSystem& s, std::vector<double>& x, const SolveOptions& opt) {
  const std::size_t N = s.grid.size();
  std::size_t n_unknown = 0;
  for (std::size_t k = 0; k < N; ++k) {
    if (!s.unknown[k]) {
      x[k] = 0.0;
      continue;
    }
    ++n_unknown;
    if (s.diag[k] <= 0.0) throw Error(ErrorKind::indefinite, "non-positive diagonal in the assembled operator");
  }
  int cap = opt.max_iter > 0 ? opt.max_iter : static_cast<int>(50.0 * std::sqrt(static_cast<double>(n_unknown)));
  double bnorm = std::sqrt(dot_unknown(s.rhs, s.rhs));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {0, 0.0};
  }
  if (!s.symmetric()) return solve_bicgstab(s, x, opt, cap);
  std::vector<double> r(N), z(N, 0.0), p(N, 0.0), q(N);
  s.apply(x, q);
  for (std::size_t k = 0; k < N; ++k) r[k] = s.unknown[k] ? s.rhs[k] - q[k] : 0.0;
  for (std::size_t k = 0; k < N; ++k) z[k] = s.unknown[k] ? r[k] / s.diag[k] : 0.0;
  p = z;
  double rz = dot_unknown(r, z);
  double rnorm = std::sqrt(dot_unknown(r, r));
  if (rnorm <= opt.tol * bnorm) return {0, rnorm / bnorm};
  for (int it = 1; it <= cap; ++it) {
    s.apply(p, q);
    double pq = dot_unknown(p, q);
    if (pq <= 0.0)
      throw Error(ErrorKind::indefinite, "CG breakdown (p'Mp <= 0): operator is not positive definite", it);
    double alpha = rz / pq;
    for (std::size_t k = 0; k < N; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * q[k];
    }
    rnorm = std::sqrt(dot_unknown(r, r));
    if (rnorm <= opt.tol * bnorm) {
      // report the true residual
      s.apply(x, q);
      double t = 0.0;
      for (std::size_t k = 0; k < N; ++k)
        if (s.unknown[k]) t += (s.rhs[k] - q[k]) * (s.rhs[k] - q[k]);
      return {it, std::sqrt(t) / bnorm};
    }
    for (std::size_t k = 0; k < N; ++k) z[k] = s.unknown[k] ? r[k] / s.diag[k] : 0.0;
    double rz_new = dot_unknown(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t k = 0; k < N; ++k) p[k] = z[k] + beta * p[k];
  }
  throw Error(ErrorKind::solver, "CG did not converge within " + std::to_string(cap) + " iterations", cap);
}

StencilSystem assemble_dirichlet(const Domain& domain, const CoefficientField& A, const ZeroOrderTerm& c,
                                 const SourceData& src, const BoundaryValues& bc, const GridSpec& grid) {
  StencilSystem s;
  s.grid = grid;
  const std::size_t N = grid.size();
  s.unknown.assign(N, 0);
  s.diag.assign(N, 0.0);
  s.east.assign(N, 0.0);
  s.north.assign(N, 0.0);
  s.rhs.assign(N, 0.0);
  const double h = grid.h;
  std::size_t count = 0;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      if (domain.contains(grid.node(i, j))) {
        require(i > 0 && j > 0 && i < grid.nx - 1 && j < grid.ny - 1, ErrorKind::geometry,
                "domain touches the edge of the grid");
        s.unknown[grid.index(i, j)] = 1;
        ++count;
      }
  require(count > 0, ErrorKind::resolution, "no grid node inside the domain");
  std::vector<double> ax(N, 0.0), ay(N, 0.0);
  auto diag_entries = [&](Vec2 p, double& a11, double& a22) {
    Mat2 m = A(p);
    double scale = std::abs(m.a11) + std::abs(m.a22);
    require(std::abs(m.a12) <= 1e-12 * scale && std::abs(m.a21) <= 1e-12 * scale, ErrorKind::parameter,
            "the five-point solver needs a diagonal coefficient matrix");
    a11 = m.a11;
    a22 = m.a22;
  };
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      int k = grid.index(i, j);
      bool near = s.unknown[k] || (i > 0 && s.unknown[k - 1]) || (i + 1 < grid.nx && s.unknown[k + 1]) ||
                  (j > 0 && s.unknown[k - grid.nx]) || (j + 1 < grid.ny && s.unknown[k + grid.nx]);
      if (near) diag_entries(grid.node(i, j), ax[k], ay[k]);
    }
  const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
  // cut arms (Shortley-Weller): each direction divided by its mean arm (th_+ + th_-)/2
  bool cut = false;
  std::vector<double> west(N, 0.0), south(N, 0.0);
  for (int j = 1; j < grid.ny - 1; ++j)
    for (int i = 1; i < grid.nx - 1; ++i) {
      int k = grid.index(i, j);
      if (!s.unknown[k]) continue;
      Vec2 p = grid.node(i, j);
      double th[4] = {1.0, 1.0, 1.0, 1.0};
      for (int d = 0; d < 4; ++d)
        if (!s.unknown[grid.index(i + di[d], j + dj[d])]) {
          th[d] = std::max(domain.exit_fraction(p, grid.node(i + di[d], j + dj[d])), 1e-6);
          if (th[d] != 1.0) cut = true;
        }
      const double ex = 0.5 * (th[0] + th[1]), ey = 0.5 * (th[2] + th[3]);
      double diag = -c(p) * h * h;
      double rhs = 0.0;
      if (src.f) rhs -= src.f(p) * h * h;
      if (src.F) {
        double fx = src.F({p.x + 0.5 * th[0] * h, p.y}).x - src.F({p.x - 0.5 * th[1] * h, p.y}).x;
        double fy = src.F({p.x, p.y + 0.5 * th[2] * h}).y - src.F({p.x, p.y - 0.5 * th[3] * h}).y;
        rhs -= h * (fx / ex + fy / ey);
      }
      for (int d = 0; d < 4; ++d) {
        int kk = grid.index(i + di[d], j + dj[d]);
        bool xdir = di[d] != 0;
        double a_here = xdir ? ax[k] : ay[k];
        double scale = 1.0 / (th[d] * (xdir ? ex : ey));
        if (s.unknown[kk]) {
          double af = harmonic_mean(a_here, xdir ? ax[kk] : ay[kk]) * scale;
          diag += af;
          (d == 0 ? s.east : d == 1 ? west : d == 2 ? s.north : south)[k] = af;
        } else {
          Vec2 q = grid.node(i + di[d], j + dj[d]);
          Vec2 xb = p + th[d] * (q - p);
          double b11, b22;
          diag_entries(xb, b11, b22);
          double af = harmonic_mean(a_here, xdir ? b11 : b22) * scale;
          diag += af;
          rhs += af * bc(xb);
        }
      }
      s.diag[k] = diag;
      s.rhs[k] = rhs;
    }
  if (cut) {
    s.west = std::move(west);
    s.south = std::move(south);
  }
  return s;
}

std::vector<double> nodal_residual(const StencilSystem& s, const std::vector<double>& u) {
  std::vector<double> y;
  std::vector<double> x(u);
  for (std::size_t k = 0; k < x.size(); ++k)
    if (!s.unknown[k]) x[k] = 0.0;
  s.apply(x, y);
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = s.unknown[k] ? y[k] - s.rhs[k] : 0.0;
  return y;
}

GridMask DiscreteSolution::mask() const { return {grid, inside, std::vector<std::uint8_t>(inside.size(), 0)}; }

Region DiscreteSolution::region() const {
  if (domain) return region_of(*domain);
  return region_of(mask());
}

DiscreteSolution solve_dirichlet(const Domain& domain, const CoefficientField& A, const ZeroOrderTerm& c,
                                 const SourceData& src, const BoundaryValues& bc, const GridSpec& grid,
                                 const SolveOptions& opt) {
  auto sys = std::make_shared<StencilSystem>(assemble_dirichlet(domain, A, c, src, bc, grid));
  std::vector<double> x(grid.size(), 0.0);
  CgResult res = solve_cg(*sys, x, opt);
  DiscreteSolution u;
  u.grid = grid;
  u.values.assign(grid.size(), 0.0);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      int k = grid.index(i, j);
      u.values[k] = sys->unknown[k] ? x[k] : bc(grid.node(i, j));
    }
  u.inside = sys->unknown;
  u.domain = std::make_shared<Domain>(domain);
  u.system = sys;
  u.rho0 = A.rho0;
  u.residual = res.relative_residual;
  u.iterations = res.iterations;
  u.flags.zero_order = static_cast<bool>(c.c);
  u.flags.source = !src.empty();
  return u;
}

// ---- norms ----

namespace {

template <class Integrand>
NormResult cell_sum(const geometry::GridSpec& g, const Region& region, Integrand&& f) {
  double sum = 0.0;
  bool any = false;
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      Vec2 c{g.origin.x + (i + 0.5) * g.h, g.origin.y + (j + 0.5) * g.h};
      if (!region(c)) continue;
      any = true;
      sum += f(c);
    }
  return {sum * g.h * g.h, !any};
}

}  // namespace

NormResult norm_L2(const ScalarField& u, const GridSpec& cells, const Region& region, double rho0, int n) {
  NormResult r = cell_sum(cells, region, [&](Vec2 c) {
    double v = u.value(c);
    return v * v;
  });
  r.value = std::pow(rho0, -0.5 * n) * std::sqrt(r.value);
  return r;
}

NormResult norm_H1(const ScalarField& u, const GridSpec& cells, const Region& region, double rho0, int n) {
  NormResult r = cell_sum(cells, region, [&](Vec2 c) {
    double v = u.value(c);
    Vec2 g = u.gradient(c);
    return v * v + rho0 * rho0 * dot(g, g);
  });
  r.value = std::pow(rho0, -0.5 * n) * std::sqrt(r.value);
  return r;
}

NormResult norm_Lp(const ScalarField& u, const GridSpec& cells, const Region& region, double rho0, double p, int n) {
  NormResult r = cell_sum(cells, region, [&](Vec2 c) { return std::pow(std::abs(u.value(c)), p); });
  r.value = std::pow(rho0, -n / p) * std::pow(r.value, 1.0 / p);
  return r;
}

NormResult norm_L2(const DiscreteSolution& u, const Region& region) { return norm_L2(u, u.grid, region, u.rho0); }
NormResult norm_H1(const DiscreteSolution& u, const Region& region) { return norm_H1(u, u.grid, region, u.rho0); }
NormResult norm_L2(const DiscreteSolution& u) { return norm_L2(u, u.region()); }
NormResult norm_H1(const DiscreteSolution& u) { return norm_H1(u, u.region()); }
NormResult norm_L2(const DiscreteSolution& u, const GridMask& region) { return norm_L2(u, region_of(region)); }
NormResult norm_H1(const DiscreteSolution& u, const GridMask& region) { return norm_H1(u, region_of(region)); }

// ---- trace norms ----

TraceNorms trace_norms(const std::vector<double>& g, const std::vector<double>& psi, double length, double rho0) {
  const std::size_t N = std::max(g.size(), psi.size());
  require(N >= 4, ErrorKind::resolution, "trace norms need at least 4 boundary samples");
  require((g.empty() || g.size() == N) && (psi.empty() || psi.size() == N), ErrorKind::parameter,
          "g and psi must have the same number of samples");
  require(length > 0.0 && rho0 > 0.0, ErrorKind::parameter, "arc length and rho0 must be positive");
  const double ds = length / (N + 1);
  const double c = std::sqrt(2.0 / length) * ds;
  double sg = 0.0, sp = 0.0;
  for (std::size_t k = 1; k <= N; ++k) {
    double gk = 0.0, pk = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      double sn = std::sin(kPi * static_cast<double>(k * (j + 1)) / (N + 1));
      if (!g.empty()) gk += g[j] * sn;
      if (!psi.empty()) pk += psi[j] * sn;
    }
    gk *= c;
    pk *= c;
    double lam = std::pow(kPi * k / length, 2);
    double w = std::sqrt(1.0 + rho0 * rho0 * lam);
    sg += w * gk * gk;
    sp += pk * pk / w;
  }
  // boundary dimension n-1 = 1
  return {std::sqrt(sg / rho0), std::sqrt(sp / rho0)};
}

TraceNorms trace_norms(const std::vector<double>& g, const std::vector<double>& psi,
                       const geometry::LipschitzPortion& sigma) {
  return trace_norms(g, psi, sigma.length(), sigma.rho0());
}

std::vector<Vec2> trace_sample_points(const geometry::LipschitzPortion& sigma, int N) {
  require(N >= 4, ErrorKind::resolution, "trace norms need at least 4 boundary samples");
  std::vector<Vec2> pts(N);
  double L = sigma.length();
  for (int j = 0; j < N; ++j) pts[j] = sigma.at((j + 1) * L / (N + 1));
  return pts;
}

double cauchy_data_size(const TraceNorms& t, double rho0) { return t.h_half + rho0 * t.h_minus_half; }

// ---- reductions ----

Multiplier positive_multiplier(const CoefficientField& A, const ZeroOrderTerm& c, double R, double delta_mult,
                               Vec2 center, const GridSpec& grid) {
  require(R > 0.0 && delta_mult > 0.0, ErrorKind::parameter, "radius and delta must be positive");
  Domain ball = Domain::disc(R, center);
  Multiplier m;
  m.w = solve_dirichlet(ball, A, c, SourceData::none(), [](Vec2) { return 1.0; }, grid);
  m.R0 = R;
  const double lo = 1.0 / (1.0 + delta_mult * delta_mult), hi = 1.0 + delta_mult * delta_mult;
  bool ok = true;
  for (std::size_t k = 0; k < m.w.values.size(); ++k) {
    if (!m.w.inside[k]) continue;
    double v = m.w.values[k];
    m.max_deviation = std::max(m.max_deviation, std::abs(v - 1.0));
    if (v < lo || v > hi) ok = false;
  }
  if (!ok)
    throw Error(ErrorKind::radius_too_large,
                "multiplier leaves [" + std::to_string(lo) + ", " + std::to_string(hi) + "]", m.max_deviation);
  return m;
}

Multiplier positive_multiplier(const CoefficientField& A, const ZeroOrderTerm& c, double R, double delta_mult,
                               Vec2 center, int cells) {
  return positive_multiplier(A, c, R, delta_mult, center, grid_for(Domain::disc(R, center), cells));
}

Multiplier fit_multiplier_radius(const CoefficientField& A, const ZeroOrderTerm& c, double R, double delta_mult,
                                 Vec2 center, int cells) {
  double bad = -1.0, good = R;
  for (int it = 0; it < 60; ++it) {
    try {
      positive_multiplier(A, c, good, delta_mult, center, cells);
      break;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::radius_too_large && e.kind() != ErrorKind::indefinite) throw;
      bad = good;
      good *= 0.5;
    }
  }
  if (bad > 0.0) {
    for (int it = 0; it < 12; ++it) {
      double mid = 0.5 * (good + bad);
      try {
        positive_multiplier(A, c, mid, delta_mult, center, cells);
        good = mid;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::radius_too_large && e.kind() != ErrorKind::indefinite) throw;
        bad = mid;
      }
    }
  }
  return positive_multiplier(A, c, good, delta_mult, center, cells);
}

Reduction reduce_zero_order(const DiscreteSolution& u, const DiscreteSolution& w, const CoefficientField& A) {
  const GridSpec& g = u.grid;
  require(g.nx == w.grid.nx && g.ny == w.grid.ny && g.h == w.grid.h && g.origin.x == w.grid.origin.x &&
              g.origin.y == w.grid.origin.y,
          ErrorKind::parameter, "u and w must live on the same grid");
  const std::size_t N = g.size();
  Reduction red;
  red.v.grid = g;
  red.v.values.assign(N, 0.0);
  red.v.inside.assign(N, 0);
  red.v.rho0 = u.rho0;
  red.v.domain = u.domain;
  double umax = 0.0, wmax = 0.0, vmax = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    bool common = u.inside[k] && w.inside[k];
    if (common && w.values[k] <= 0.0) throw Error(ErrorKind::factorization, "multiplier w is not positive");
    if (w.values[k] > 0.0) red.v.values[k] = u.values[k] / w.values[k];
    red.v.inside[k] = common ? 1 : 0;
    if (common) {
      umax = std::max(umax, std::abs(u.values[k]));
      wmax = std::max(wmax, std::abs(w.values[k]));
      vmax = std::max(vmax, std::abs(red.v.values[k]));
    }
  }
  GridFunction wf(g, w.values);
  red.A_tilde = {[A, wf](Vec2 p) {
                   double s = wf.value(p);
                   return A(p).scaled(s * s);
                 },
                 4.0 * A.K, 0.0, A.rho0, false};
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      int k = g.index(i, j);
      if (!red.v.inside[k]) continue;
      SymEigen e = sym_eigen(A(g.node(i, j)).scaled(w.values[k] * w.values[k]));
      if (e.lmin < 1.0 / (4.0 * A.K) - 1e-12 || e.lmax > 4.0 * A.K + 1e-12) red.ellipticity_ok = false;
    }
  if (u.system && w.system) {
    auto ru = nodal_residual(*u.system, u.values);
    auto rw = nodal_residual(*w.system, w.values);
    const auto& s = *u.system;
    for (int j = 1; j < g.ny - 1; ++j)
      for (int i = 1; i < g.nx - 1; ++i) {
        int k = g.index(i, j);
        int nb[4] = {k + 1, k - 1, k + g.nx, k - g.nx};
        bool full = red.v.inside[k];
        for (int q : nb) full = full && u.inside[q] && w.inside[q];
        if (!full) continue;
        double a[4] = {s.east[k], s.west_of(k), s.north[k], s.south_of(k)};
        double r = 0.0;
        for (int d = 0; d < 4; ++d)
          r += a[d] * w.values[k] * w.values[nb[d]] * (red.v.values[nb[d]] - red.v.values[k]);
        red.residual_v = std::max(red.residual_v, std::abs(r));
        red.residual_u = std::max(red.residual_u, std::abs(ru[k]));
        red.residual_w = std::max(red.residual_w, std::abs(rw[k]));
      }
    double scale = std::max({1.0, umax, wmax, vmax});
    red.residual_ok = red.residual_v <= 10.0 * std::max(red.residual_u, red.residual_w) * scale + 1e-14 * scale;
  }
  return red;
}

Particular subtract_particular(const DiscreteSolution& u, const CoefficientField& A, const ZeroOrderTerm& c,
                               const SourceData& src, double R0, Vec2 center) {
  require(R0 > 0.0, ErrorKind::parameter, "R0 must be positive");
  Particular p;
  if (src.empty()) {
    p.difference = u;
    p.u0 = u;
    std::fill(p.u0.values.begin(), p.u0.values.end(), 0.0);
    return p;
  }
  Domain ball = Domain::disc(R0, center);
  p.u0 = solve_dirichlet(ball, A, c, src, [](Vec2) { return 0.0; }, u.grid);
  p.difference = u;
  p.difference.domain = std::make_shared<Domain>(ball);
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    p.difference.values[k] = u.values[k] - p.u0.values[k];
    p.difference.inside[k] = (u.inside[k] && p.u0.inside[k]) ? 1 : 0;
  }
  Region ballr = region_of(ball);
  double n0 = norm_L2(p.u0, ballr);
  double nf = 0.0, nF = 0.0;
  if (src.f) nf = norm_L2(AnalyticField(src.f, [](Vec2) { return Vec2{}; }), u.grid, ballr, u.rho0);
  if (src.F) {
    auto Fx = AnalyticField([&](Vec2 q) { return norm(src.F(q)); }, [](Vec2) { return Vec2{}; });
    nF = norm_L2(Fx, u.grid, ballr, u.rho0);
  }
  double denom = R0 * R0 * nf + R0 * nF;
  p.constant = denom > 0.0 ? n0 / denom : 0.0;
  return p;
}

void write_csv(std::ostream& os, const GridFunction& u, const std::vector<std::uint8_t>* only) {
  os << "x,y,value\n";
  char buf[128];
  for (int j = 0; j < u.grid.ny; ++j)
    for (int i = 0; i < u.grid.nx; ++i) {
      int k = u.grid.index(i, j);
      if (only && !(*only)[k]) continue;
      Vec2 p = u.grid.node(i, j);
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.12g\n", p.x, p.y, u.values[k]);
      os << buf;
    }
}

}  // namespace cauchylab::pde
