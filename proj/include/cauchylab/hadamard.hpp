#pragma once

#include <vector>

#include "cauchylab/core.hpp"

// u_n(x,y) = (A_n/n) sin(nx) sinh(ny) on (0,pi) x (0,1)
namespace cauchylab::hadamard {

constexpr int kMaxMode = 350;

// log(sinh x) for x > 0 without overflow
double log_sinh(double x);

double amplitude(int n, double E);
double log_amplitude(int n, double E);

struct DataError {
  double eta;
  double asymptote;  // 2E e^{-n}
};
DataError data_error(int n, double E);

// L2 norm over (0,pi) x (0,T), exact integral
double solution_norm(int n, double E, double T);
double log_solution_norm(int n, double E, double T);
// the printed variant with (sinh(2nT)/(2n) - 1); NaN when negative
double solution_norm_printed(int n, double E, double T);
// E e^{n(T-1)} / (n sqrt 2)
double solution_norm_asymptote(int n, double E, double T);

enum class DataChoice { inverse_n, inverse_power, exp_sqrt };

struct InstabilityRow {
  int n;
  double data;      // sup |d_y u_n(., 0)|
  double solution;  // sup |u_n(., y)|
};
std::vector<InstabilityRow> instability_demo(DataChoice choice, double y, int n_max, double p = 2.0);

struct Family {
  double E = 1.0;
  double T = 1.0;
  int n_min = 4;
  int n_max = 14;
};

struct RateFit {
  double exponent = 0.0;     // slope after dividing out the (log 2E/eta)^{-1} factor
  double raw_slope = 0.0;    // plain OLS slope of log||u_n|| vs log eta_n
  bool log_corrected = true;
  double power_residual = 0.0;  // SSR of log||u|| ~ a + s log eta
  double log_residual = 0.0;    // SSR of log||u|| ~ a + b log log(1/eta)
  double log_coefficient = 0.0;
  bool logarithmic = false;     // T = 1: rate reported as (log 1/eta)^{-b}
};
RateFit fit_rate(const Family& f);

// midpoint quadrature of |grad u_n|^2 on a cells x cells grid
double dirichlet_integral(int n, double E, int cells);

struct Line {
  double slope, intercept, ssr, correlation;
};
// ordinary least squares
Line least_squares(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cauchylab::hadamard
