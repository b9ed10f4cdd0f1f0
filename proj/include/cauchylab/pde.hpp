#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "cauchylab/core.hpp"
#include "cauchylab/field.hpp"
#include "cauchylab/geometry.hpp"

namespace cauchylab::pde {

// K with K^{-1}|xi|^2 <= A xi.xi <= K |xi|^2, symmetric part
double ellipticity_of(const Mat2& a);

struct CoefficientField {
  std::function<Mat2(Vec2)> A;
  double K = 1.0;
  double L = 0.0;
  double rho0 = 1.0;
  bool lipschitz = false;

  Mat2 operator()(Vec2 p) const { return A(p); }

  static CoefficientField identity(double rho0 = 1.0);
  static CoefficientField constant(const Mat2& m, double rho0 = 1.0);
  // a(x) Identity with declared bounds
  static CoefficientField scalar(std::function<double(Vec2)> a, double K, double L, double rho0 = 1.0);
  static CoefficientField diagonal(std::function<double(Vec2)> a11, std::function<double(Vec2)> a22, double K,
                                   double L, double rho0 = 1.0);

  // ellipticity and (if flagged) Lipschitz bounds on the given sample points
  bool check(const std::vector<Vec2>& samples) const;
};

struct ZeroOrderTerm {
  std::function<double(Vec2)> c;
  double kappa = 0.0;
  double rho0 = 1.0;

  double operator()(Vec2 p) const { return c ? c(p) : 0.0; }
  static ZeroOrderTerm zero(double rho0 = 1.0);
  static ZeroOrderTerm constant(double value, double rho0 = 1.0);
  bool check(const std::vector<Vec2>& samples) const;
};

struct SourceData {
  std::function<double(Vec2)> f;
  std::function<Vec2(Vec2)> F;
  double eps = 0.0;

  static SourceData none() { return {}; }
  bool empty() const { return !f && !F; }
};

using BoundaryValues = std::function<double(Vec2)>;

// five-point operator on a grid; couplings are -east[k] to k+1 and -north[k] to k+nx.
// west/south hold the couplings to k-1 and k-nx when the rows are not symmetric (cut cells), else empty
struct StencilSystem {
  geometry::GridSpec grid;
  std::vector<std::uint8_t> unknown;
  std::vector<double> diag, east, north, rhs;
  std::vector<double> west, south;

  bool symmetric() const { return west.empty(); }
  double west_of(int k) const { return west.empty() ? east[k - 1] : west[k]; }
  double south_of(int k) const { return south.empty() ? north[k - grid.nx] : south[k]; }
  void apply(const std::vector<double>& x, std::vector<double>& y) const;
};

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 0;  // 0: 50 sqrt(#unknowns)
};

// Jacobi preconditioned CG; x carries the initial guess on unknown nodes
CgResult solve_cg(const StencilSystem& s, std::vector<double>& x, const SolveOptions& opt = {});

struct EquationFlags {
  bool principal = true;
  bool zero_order = false;
  bool source = false;
};

class DiscreteSolution : public GridFunction {
 public:
  std::vector<std::uint8_t> inside;
  std::shared_ptr<const geometry::Domain> domain;
  std::shared_ptr<const StencilSystem> system;
  double rho0 = 1.0;
  double residual = 0.0;
  int iterations = 0;
  EquationFlags flags;

  geometry::GridMask mask() const;
  // cells inside the solution domain (domain predicate, else all-corner mask rule)
  Region region() const;
};

DiscreteSolution solve_dirichlet(const geometry::Domain& domain, const CoefficientField& A, const ZeroOrderTerm& c,
                                 const SourceData& src, const BoundaryValues& bc, const geometry::GridSpec& grid,
                                 const SolveOptions& opt = {});

StencilSystem assemble_dirichlet(const geometry::Domain& domain, const CoefficientField& A, const ZeroOrderTerm& c,
                                 const SourceData& src, const BoundaryValues& bc, const geometry::GridSpec& grid);

// algebraic residual M u - b per node (zero on non-unknown nodes)
std::vector<double> nodal_residual(const StencilSystem& s, const std::vector<double>& u);

struct NormResult {
  double value = 0.0;
  bool empty_region = false;
  operator double() const { return value; }
};

// rho0-normalized norms by midpoint quadrature on grid cells whose centers lie in the region
NormResult norm_L2(const ScalarField& u, const geometry::GridSpec& cells, const Region& region, double rho0,
                   int n = 2);
NormResult norm_H1(const ScalarField& u, const geometry::GridSpec& cells, const Region& region, double rho0,
                   int n = 2);
NormResult norm_L2(const DiscreteSolution& u, const Region& region);
NormResult norm_H1(const DiscreteSolution& u, const Region& region);
NormResult norm_L2(const DiscreteSolution& u);
NormResult norm_H1(const DiscreteSolution& u);
NormResult norm_L2(const DiscreteSolution& u, const geometry::GridMask& region);
NormResult norm_H1(const DiscreteSolution& u, const geometry::GridMask& region);
// L^p norm, same conventions
NormResult norm_Lp(const ScalarField& u, const geometry::GridSpec& cells, const Region& region, double rho0,
                   double p, int n = 2);

struct TraceNorms {
  double h_half = 0.0;
  double h_minus_half = 0.0;
};

// samples at s_j = (j+1) l/(N+1), j = 0..N-1, along an arc of length l
TraceNorms trace_norms(const std::vector<double>& g, const std::vector<double>& psi, double length, double rho0);
TraceNorms trace_norms(const std::vector<double>& g, const std::vector<double>& psi,
                       const geometry::LipschitzPortion& sigma);
std::vector<Vec2> trace_sample_points(const geometry::LipschitzPortion& sigma, int N);
double cauchy_data_size(const TraceNorms& t, double rho0);

struct Multiplier {
  DiscreteSolution w;
  double R0 = 0.0;
  double max_deviation = 0.0;  // max |w - 1|
};

// w solving div(A grad w) + c w = 0 in B_R(center), w = 1 on the circle
Multiplier positive_multiplier(const CoefficientField& A, const ZeroOrderTerm& c, double R, double delta_mult,
                               Vec2 center = {}, int cells = 128);
Multiplier positive_multiplier(const CoefficientField& A, const ZeroOrderTerm& c, double R, double delta_mult,
                               Vec2 center, const geometry::GridSpec& grid);
// shrink R by bisection until the multiplier bounds hold
Multiplier fit_multiplier_radius(const CoefficientField& A, const ZeroOrderTerm& c, double R, double delta_mult,
                                 Vec2 center = {}, int cells = 128);

struct Reduction {
  DiscreteSolution v;
  CoefficientField A_tilde;
  double residual_v = 0.0;  // max nodal residual of div(A~ grad v) on checked nodes
  double residual_u = 0.0;
  double residual_w = 0.0;
  bool ellipticity_ok = true;
  bool residual_ok = true;
};

// u and w on the same grid
Reduction reduce_zero_order(const DiscreteSolution& u, const DiscreteSolution& w, const CoefficientField& A);

struct Particular {
  DiscreteSolution difference;  // u - u0 on the ball
  DiscreteSolution u0;
  double constant = 0.0;        // ||u0|| / (R0^2 ||f|| + R0 ||F||)
};

Particular subtract_particular(const DiscreteSolution& u, const CoefficientField& A, const ZeroOrderTerm& c,
                               const SourceData& src, double R0, Vec2 center = {});

void write_csv(std::ostream& os, const GridFunction& u, const std::vector<std::uint8_t>* only = nullptr);

}  // namespace cauchylab::pde
