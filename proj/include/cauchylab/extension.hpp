#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "cauchylab/geometry.hpp"
#include "cauchylab/pde.hpp"

namespace cauchylab::extension {

// 1 on [0,1/4], 4(1/2 - t) on [1/4,1/2], 0 beyond
double bump(double t);

struct LoweredGraph {
  std::vector<double> xs, z, z_minus;
  double norm = 0.0;             // ||Z-||_inf + rho0 ||grad Z-||_inf
  double bound = 0.0;            // 7/2 rho0 M0
  double max_added_slope = 0.0;  // of the bump term, at most 2 M0
  bool ok = false;
};

// Z-(x') = Z(x') - (rho1/2) bump(M0 |x'| / rho1)
LoweredGraph lowered_graph(const std::vector<double>& xs, const std::vector<double>& zs, double rho0, double rho1,
                           double M0);

// origin P, e2 the inward normal, e1 = -perp(e2)
struct LocalFrame {
  Vec2 P{}, e1{1, 0}, e2{0, 1};
  Vec2 to_local(Vec2 x) const { return {dot(x - P, e1), dot(x - P, e2)}; }
  Vec2 to_global(Vec2 l) const { return P + l.x * e1 + l.y * e2; }
};

struct AugmentedDomain {
  explicit AugmentedDomain(geometry::LipschitzPortion s) : omega(s.domain()), sigma(std::move(s)) {}

  geometry::Domain omega;
  geometry::LipschitzPortion sigma;
  LocalFrame frame;
  double rho0 = 1.0, M0 = 1.0, rho1 = 1.0;
  std::vector<double> xs, Z, Z_minus;  // samples over |x'| < rho0/M0
  double r0 = 0.0;
  Vec2 x0_local{}, x0{};
  // polygons, built when omega has a single boundary loop
  std::optional<geometry::Domain> omega_tilde, omega1;

  // invariant checks by sampling
  bool lipschitz_ok = false;
  bool contains_gamma_ok = false;    // Gamma_{rho1/(4M0), rho1/4} in Omega~
  bool A_contains_cone_ok = false;   // C-_{rho1/4} in A
  bool ball_in_cone_ok = false;      // B_{r0}(x0) in C-_{rho1/8}
  bool anchor_ok = false;            // B_{r0/2}(x0) in A and Gamma_{rho1/(8M0), rho1/8}
  bool ok() const { return lipschitz_ok && contains_gamma_ok && A_contains_cone_ok && ball_in_cone_ok && anchor_ok; }

  double Z_at(double xp) const;
  double Z_minus_at(double xp) const;
  // predicates in global coordinates
  bool in_A(Vec2 x) const;
  bool on_sigma0(Vec2 x, double tol = 1e-12) const;
  bool in_omega_tilde(Vec2 x) const;
  bool in_gamma(Vec2 x, double a, double b) const;  // |x'| < a, |x_n| < b
  bool in_gamma_minus(Vec2 x) const;                // Gamma_{rho1/M0, rho1} below the graph
  bool in_omega1(Vec2 x) const;
  bool in_cone_minus(Vec2 x, double r) const;
  bool in_cone_plus(Vec2 x, double r) const;
};

// rho(P) >= rho1 is required; samples per invariant
AugmentedDomain augment(const geometry::LipschitzPortion& sigma, Vec2 P, int samples = 10000,
                        unsigned long long seed = 7);

// geometry text format plus a `patch` section
void write_augmented(std::ostream& os, const AugmentedDomain& a);
AugmentedDomain read_augmented(std::istream& is);

// ---- discrete pipeline on an axis-aligned flat patch ----

struct PatchGrid {
  geometry::GridSpec grid;
  int ni = 0, nj = 1;            // grid step along the inward normal
  std::vector<int> sigma_nodes;  // open Sigma cap Gamma nodes, ordered along e1
  geometry::Domain gamma_minus = geometry::Domain::rectangle(1, 1);
  double length = 0.0;           // 2 rho1 / M0
};

// flat patch with e2 along a grid axis and Sigma on a grid line
PatchGrid patch_grid(const AugmentedDomain& a, const geometry::GridSpec& g);

struct CauchyData {
  std::vector<double> g, psi;  // at the Sigma nodes; psi = A grad u . outward normal, discrete flux
  double g_half = 0.0, psi_minus_half = 0.0;
  double eta = 0.0;  // ||g||_{H1/2} + rho0 ||psi||_{H-1/2}
};

CauchyData cauchy_data(const pde::DiscreteSolution& u, const pde::CoefficientField& A, const pde::ZeroOrderTerm& c,
                       const pde::SourceData& src, const PatchGrid& pg, double rho0);
CauchyData cauchy_data(const std::vector<double>& g, const std::vector<double>& psi, const PatchGrid& pg,
                       double rho0);

struct Extension {
  pde::DiscreteSolution v;
  double v_H1 = 0.0, g_half = 0.0;
  double constant = 0.0;  // ||v||_{H1} / ||g||_{H1/2}
};

// Dirichlet problem on Gamma-: g on Sigma, half-plane Poisson extension of g on the other sides
Extension extend_cauchy_data(const std::function<double(Vec2)>& g, const AugmentedDomain& a, const PatchGrid& pg);
Extension extend_cauchy_data(const std::vector<double>& g_nodes, const AugmentedDomain& a, const PatchGrid& pg);

struct RieszPair {
  geometry::GridSpec grid;
  std::vector<std::uint8_t> unknown;  // interior nodes of Omega1
  std::vector<double> w, f1, F1x, F1y;  // F1 on east and north faces
  double rho0 = 1.0;
  double f1_norm = 0.0, F1_norm = 0.0;
  double constant = 0.0;  // (rho0 ||f1|| + ||F1||) rho0 / (rho0 ||psi||_{H-1/2})
  int iterations = 0;

  // Psi(phi) - (int f1 phi - F1 . grad phi) for nodal phi vanishing off the unknowns
  double duality_residual(const std::vector<double>& phi, const std::vector<double>& psi, const PatchGrid& pg) const;
  double h1_norm(const std::vector<double>& phi) const;
};

RieszPair riesz_source(const std::vector<double>& psi, const PatchGrid& pg, const geometry::Domain& omega1,
                       double rho0, double tol = 1e-13);

struct ExtendedSolution {
  pde::DiscreteSolution u_tilde;  // domain Omega1, inside = its interior nodes
  std::vector<double> f_tilde, F_tilde_x, F_tilde_y;
  double f_norm = 0.0, F_norm = 0.0;
  double source_norm = 0.0;      // ||f~|| + ||F~|| / rho0
  double constant = 0.0;         // source_norm rho0^2 / (eps + eta)
  double ball_constant = 0.0;    // ||u~||_{L2(B_r0(x0))} / eta
  double residual = 0.0;         // max nodal weak residual relative to the operator scale
  double max_residual = 0.0;
  bool identical_in_omega = false;
};

ExtendedSolution extended_equation(const pde::DiscreteSolution& u, const CauchyData& cd, const Extension& ext,
                                   const RieszPair& riesz, const pde::SourceData& src, const pde::CoefficientField& A,
                                   const pde::ZeroOrderTerm& c, const AugmentedDomain& a, const PatchGrid& pg,
                                   bool verify = true, double tol = 1e-6);

// augment, Cauchy data from u, v, Riesz pair, extended equation
struct Pipeline {
  PatchGrid pg;
  CauchyData cd;
  Extension ext;
  RieszPair riesz;
  ExtendedSolution ext_sol;
};
Pipeline run_pipeline(const pde::DiscreteSolution& u, const pde::CoefficientField& A, const pde::ZeroOrderTerm& c,
                      const pde::SourceData& src, const AugmentedDomain& a, bool verify = true);

void write_report_csv(std::ostream& os, const Pipeline& p);

}  // namespace cauchylab::extension
