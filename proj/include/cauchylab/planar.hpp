#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "cauchylab/pde.hpp"

namespace cauchylab::planar {

using cplx = std::complex<double>;

struct BeltramiPair {
  cplx mu, nu;
  double k = 0.0;  // |mu| + |nu|
};

// two-sided constant: A xi.xi >= |xi|^2/K and A^{-1} xi.xi >= |xi|^2/K
double two_sided_K(const Mat2& A);
// (K + sqrt(K^2-1) - 1) / (K + sqrt(K^2-1) + 1)
double k_bound(double K);
// (1+k)/(1-k)
double K_from_k(double k);

BeltramiPair beltrami_from_matrix(const Mat2& A);
Mat2 matrix_from_beltrami(cplx mu, cplx nu);
inline Mat2 matrix_from_beltrami(const BeltramiPair& p) { return matrix_from_beltrami(p.mu, p.nu); }
// A1 for log|f|: mu1 = mu + nu conj(fz)/fz where |fz| > 1e-12, else mu
Mat2 subharmonic_matrix(cplx mu, cplx nu, cplx fz);

struct StreamFunction {
  pde::DiscreteSolution v;
  double flux_residual = 0.0;  // rms of (dv - h J A grad u) over faces / rms |h J A grad u|
  double b_residual = 0.0;     // relative residual of div(B grad v) on uncut nodes, B = A^T/det A
  int anchor = -1;
};
// least-squares potential for J A grad u on the faces of u's mask; v(anchor) = 0
StreamFunction stream_function(const pde::DiscreteSolution& u, const pde::CoefficientField& A,
                               std::optional<Vec2> anchor = std::nullopt);

// (2E/pi) log((1+|z|)/(1-|z|))
double schwarz_bound(double E, double abs_z);

struct HarmonicMeasureField {
  pde::DiscreteSolution omega;
  double smoothing = 0.0;
  double max_clamp = 0.0;
  double value(Vec2 p) const { return omega.value(p); }
};

// boundary data clamp(1/2 + (d(x,Sigma') - d(x,Sigma)) / (2 width), 0, 1)
double mollified_indicator(const geometry::LipschitzPortion& sigma, Vec2 x, double width);
HarmonicMeasureField harmonic_measure(const geometry::Domain& domain, const geometry::LipschitzPortion& sigma,
                                      const pde::CoefficientField& A1, double smoothing,
                                      const geometry::GridSpec& grid);

// E^{1-omega} eta^omega
double interior_cauchy_bound(double E, double eta, double omega);

struct ThreeCircles {
  double alpha_holo = 0.0;
  double alpha_harm = 0.0;
  double C2 = 0.0, C3 = 0.0;  // Q factors are C2 + 1, C3 + 1
  double r1_tilde = 0.0, r2_tilde = 0.0;
  double alpha_qc = 0.0;       // holomorphic formula on the distorted radii
  double alpha_harm_qc = 0.0;  // harmonic formula on the distorted radii
  double C3_qc = 0.0;
};
// (C1, beta) are the Hoelder constants of the quasiconformal map; (1,1) is the conformal case
ThreeCircles three_circles_exponents(double r1, double r2, double r3, double C1 = 1.0, double beta = 1.0);

// annulus {1 < |z| < 4} check: u solves Laplace with Re f data, f = sum a_k z^k;
// E = max |f| on the closed annulus, eta = max |f| on |z| = 1, compare max_{|z|=2} |u| with E^{1/2} eta^{1/2}
struct HolderCase {
  double E = 0, eta = 0, measured = 0, bound = 0;
  bool ok = false;
};
HolderCase annulus_holder_case(const std::vector<cplx>& coeffs, int cells = 256, double slack = 0.05);

}  // namespace cauchylab::planar
