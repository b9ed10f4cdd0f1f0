#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "cauchylab/field.hpp"
#include "cauchylab/geometry.hpp"
#include "cauchylab/pde.hpp"

namespace cauchylab::smallness {

struct Radii {
  double r1, r2, r3;
};

// (h/(30K), h/(10K), h/2)
Radii radii_from_h(double h, double K);

// log(r3/r2) / log(r3/r1)
double holo_alpha(double r1, double r2, double r3);

// volume of the unit ball in R^n
double unit_ball_volume(int n);

struct ChainPlan {
  std::vector<Vec2> centers;  // x_0 .. x_{N-1}, then the terminal point y
  Radii radii{};
  int N = 0;
  Vec2 x0{}, y{};
  double path_length = 0.0;
  std::vector<double> step_Q;  // three-spheres ratio at each center, filled by measurement

  // invariant results, filled by check_chain
  std::vector<std::uint8_t> r1_ok, disjoint_ok, contained_ok;
  bool volume_ok = true;
  bool ok() const;
};

// walk a path taking the last parameter at distance 2 r1 from the previous center
ChainPlan build_chain_along(const std::vector<Vec2>& path, double r1);
// geodesic path in the mask of G^{r1}
ChainPlan build_chain(const geometry::GridMask& mask, Vec2 x0, Vec2 y, double r1);
// fills the invariant flags; B_{r3}(x_k) must lie in the domain, N <= |domain|/(omega_n r1^n)
void check_chain(ChainPlan& plan, const geometry::Domain& domain, int n = 2);

void write_chain_csv(std::ostream& os, const ChainPlan& plan);

struct ExponentBudget {
  double alpha = 0.5;
  double Q = 1.0;
  double C1 = 1.0;
  double C2 = 1.0;
  double area = 1.0;
  double h = 1.0;
  int n = 2;

  double C() const { return C1 * std::sqrt(area / std::pow(h, n)); }
  double delta_lower() const { return std::pow(alpha, C2 * area / std::pow(h, n)); }
};

// C1 = Q^{1/(1-alpha)} (n^{n/2} (15K)^n)^{1/2}, C2 = (30K)^n / omega_n
ExponentBudget make_budget(double alpha, double Q, double K, double area, double h, int n = 2);

// rho0-normalized L2 norm on a disc by polar quadrature
double ball_norm(const ScalarField& u, Vec2 c, double r, double rho0, int angular_nodes = 64);

struct InteriorOptions {
  double K = 1.0;
  int n = 2;
  double Q_cap = 10.0;
  std::optional<double> Q;    // frozen calibration; measured on the chains otherwise
  std::optional<double> eta;  // default ||u||_{L2(B_r0(x0))}
  std::optional<double> E0;   // default ||u||_{L2(domain)}
  int sample_targets = 8;
  unsigned long long seed = 1;
  int ball_nodes = 64;
  double C0 = 1.0;
};

struct PropagationReport {
  double measured = 0.0;
  double bound = 0.0;
  double delta = 0.0;
  double delta_lower = 0.0;
  double C = 0.0;           // certified form C1 (|Omega|/h^n)^{1/2}
  double C_realized = 0.0;  // sqrt(J) Q^{1/(1-alpha)}
  double alpha = 0.0;
  double Q = 1.0;
  double eta = 0.0, E0 = 0.0, eps = 0.0;
  int N_max = 0;       // chain length bound used for delta
  int N_realized = 0;  // longest sampled chain
  long long J = 0;     // r1-cubes meeting G
  double J_bound = 0.0;
  ExponentBudget budget;
  std::vector<ChainPlan> chains;
  bool steps_ok = true;
  bool invariants_ok = true;
  int offending_chain = -1, offending_ball = -1;
  bool pass = false;
};

PropagationReport interior_propagation(const pde::DiscreteSolution& u, const pde::SourceData& src, Vec2 x0,
                                       double r0, const geometry::GridMask& G, double h,
                                       const InteriorOptions& opt = {});

struct ConeChainPlan {
  Vec2 w{}, axis{};
  double rho0 = 1.0, M0 = 1.0, h1 = 0.0;
  double t0 = 0.0, s0 = 0.0, s = 0.0, q = 0.0;
  std::vector<Vec2> y;
  std::vector<double> radius, t;
  double identity_residual = 0.0;   // |4 s0 + h1 - t0/sqrt(1+M0^2)|
  double tangency_residual = 0.0;   // max over k of cone and neighbour tangency defects
  double geometric_sum() const { return 2.0 * s0 / (1.0 - q); }
  int N() const { return static_cast<int>(y.size()); }
};

// target: stop once the ball radius drops below it (default 1e-4 s0)
ConeChainPlan cone_chain(Vec2 w, Vec2 axis, double rho0, double M0, double h1, double target = 0.0);
// balls inside the cone or the half-space above the vertex, sampled on their circles
bool cone_balls_contained(const ConeChainPlan& plan, int samples = 64);

struct PhiResult {
  double l = 0.0, mu = 0.0;
  double bound = 0.0;       // 2 (1/log(1/zeta))^mu or the tau0 fallback
  bool fallback = false;
  double tau_closed = 0.0;  // (1/log(1/zeta))^l clipped to tau0
  double brute_inf = 0.0;
  double tau_star = 0.0;
};

double phi(double tau, double vartheta, double sigma, double log_zeta);
PhiResult phi_minimize(double vartheta, double sigma, double zeta, double tau0);
// zeta given by its logarithm (<= 0)
PhiResult phi_minimize_log(double vartheta, double sigma, double log_zeta, double tau0);

struct GlobalOptions {
  double p = 4.0;
  std::optional<double> E;  // default ||u||_{H1(domain)}
  std::optional<double> eta;
  int cone_samples = 8;
  InteriorOptions interior;
};

struct GlobalReport {
  PropagationReport interior;
  double h1 = 0.0;
  double t0 = 0.0, s0 = 0.0, q = 0.0;
  double alpha_cone = 0.0, Q_cone = 1.0;
  double D = 0.0, vartheta = 0.0, sigma = 0.0, mu = 0.0;
  double gamma = 0.0, log_zeta = 0.0, tau0 = 0.0;
  double C_AR = 0.0, Lp = 0.0;
  double C_exp = 0.0, C_layer = 0.0, C_global = 0.0;
  double C_modulus = 0.0;  // bound / ((E+eps) (1/log((E+eps)/(eta+eps)))^mu)
  PhiResult phi;
  double measured = 0.0, bound = 0.0, E = 0.0, eta = 0.0, eps = 0.0;
  bool pass = false;
};

GlobalReport global_propagation(const pde::DiscreteSolution& u, const pde::SourceData& src, Vec2 x0, double r0,
                                double M0, const GlobalOptions& opt = {});

struct LogLogParams {
  double Q = 1.0;
  double vartheta = 1.0;
  double p = 4.0;
  double alpha = 0.5;
  double C2 = 1.0;
  double area = 1.0;
  double s0 = 1.0;
  int n = 2;
  bool printed_exponent = false;  // tau^{alpha^{-C2 s}} instead of tau^{alpha^{C2/s}}
};

struct LogLogValue {
  double value = 0.0;
  double s_star = 0.0;
};

// inf over s in (0,s0] of s^{-1/2} tau^{e(s)} + s^D, D = (vartheta/n)(1/2 - 1/p); tau = exp(log_tau)
LogLogValue loglog_modulus(const LogLogParams& prm, double log_tau);
double loglog_integrand(const LogLogParams& prm, double s, double log_tau);

struct LogLogFit {
  double C = 0.0, S = 0.0;
  bool dominated = false;  // every value <= C (log|log tau|)^{-S}
};
LogLogFit fit_loglog(const std::vector<double>& log_tau, const std::vector<double>& values);

}  // namespace cauchylab::smallness
