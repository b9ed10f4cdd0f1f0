#include "cauchylab/hadamard.hpp"

#include <cmath>
#include <limits>

namespace cauchylab::hadamard {

namespace {

void check_mode(int n) {
  require(n >= 1, ErrorKind::parameter, "mode index must be >= 1");
  if (n > kMaxMode) throw Error(ErrorKind::range, "mode index above " + std::to_string(kMaxMode), n);
}

// log(sinh x - x), x > 0
double log_sinh_minus_x(double x) {
  if (x < 0.5) {
    double term = x * x * x / 6.0, s = term;
    for (int k = 2; k < 12; ++k) {
      term *= x * x / ((2.0 * k) * (2.0 * k + 1.0));
      s += term;
    }
    return std::log(s);
  }
  if (x < 30.0) return std::log(std::sinh(x) - x);
  return x - std::log(2.0) + std::log1p(-2.0 * x * std::exp(-x) - std::exp(-2.0 * x));
}

}  // namespace

double log_sinh(double x) {
  require(x > 0.0, ErrorKind::parameter, "log_sinh needs x > 0");
  if (x < 20.0) return std::log(std::sinh(x));
  return x - std::log(2.0) + std::log1p(-std::exp(-2.0 * x));
}

double log_amplitude(int n, double E) {
  check_mode(n);
  return 0.5 * (std::log(2.0 / kPi) + std::log(2.0 * n) - log_sinh(2.0 * n)) + std::log(E);
}

double amplitude(int n, double E) {
  check_mode(n);
  if (E == 0.0) return 0.0;
  return std::exp(log_amplitude(n, std::abs(E))) * (E < 0 ? -1.0 : 1.0);
}

DataError data_error(int n, double E) {
  check_mode(n);
  double eta = E == 0.0 ? 0.0 : E * std::exp(0.5 * (std::log(2.0) - log_sinh(2.0 * n)));
  return {eta, 2.0 * E * std::exp(-static_cast<double>(n))};
}

double log_solution_norm(int n, double E, double T) {
  check_mode(n);
  require(T > 0.0 && T <= 1.0, ErrorKind::parameter, "T must lie in (0,1]");
  // (sinh(2nT)/(2n) - T) = (sinh x - x)/(2n), x = 2nT
  double x = 2.0 * n * T;
  double l2 = 2.0 * std::log(E) + log_sinh_minus_x(x) - std::log(2.0 * n) - std::log(static_cast<double>(n)) -
              log_sinh(2.0 * n);
  return 0.5 * l2;
}

double solution_norm(int n, double E, double T) {
  if (E == 0.0) {
    log_solution_norm(n, 1.0, T);
    return 0.0;
  }
  return std::exp(log_solution_norm(n, std::abs(E), T));
}

double solution_norm_printed(int n, double E, double T) {
  check_mode(n);
  require(T > 0.0 && T <= 1.0, ErrorKind::parameter, "T must lie in (0,1]");
  double x = 2.0 * n * T;
  double ls = log_sinh(x) - std::log(2.0 * n);
  if (ls <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  double lfac = ls + std::log1p(-std::exp(-ls));
  return E * std::exp(0.5 * (lfac - std::log(static_cast<double>(n)) - log_sinh(2.0 * n)));
}

double solution_norm_asymptote(int n, double E, double T) {
  return E * std::exp(n * (T - 1.0)) / (n * std::sqrt(2.0));
}

std::vector<InstabilityRow> instability_demo(DataChoice choice, double y, int n_max, double p) {
  require(y >= 0.0, ErrorKind::parameter, "y must be nonnegative");
  require(n_max >= 1, ErrorKind::parameter, "n_max must be >= 1");
  std::vector<InstabilityRow> rows;
  for (int n = 1; n <= n_max; ++n) {
    double a = 0.0;
    switch (choice) {
      case DataChoice::inverse_n: a = 1.0 / n; break;
      case DataChoice::inverse_power: a = std::pow(n, -p); break;
      case DataChoice::exp_sqrt: a = std::exp(-std::sqrt(static_cast<double>(n))); break;
    }
    double sol = y == 0.0 ? 0.0 : std::exp(std::log(a / n) + log_sinh(n * y));
    rows.push_back({n, a, sol});
  }
  return rows;
}

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::fit, "need at least two points");
  const double m = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 1e-300) throw Error(ErrorKind::fit, "zero variance in the regressor");
  Line l;
  l.slope = sxy / sxx;
  l.intercept = my - l.slope * mx;
  l.ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) l.ssr += std::pow(y[i] - l.intercept - l.slope * x[i], 2);
  l.correlation = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 1.0;
  return l;
}

RateFit fit_rate(const Family& f) {
  require(f.n_max - f.n_min + 1 >= 5, ErrorKind::fit, "need at least 5 modes");
  require(f.E > 0.0, ErrorKind::parameter, "E must be positive");
  std::vector<double> le, lu, lc, ll;
  for (int n = f.n_min; n <= f.n_max; ++n) {
    double eta = data_error(n, f.E).eta;
    double lnorm = log_solution_norm(n, f.E, f.T);
    double L = std::log(2.0 * f.E / eta);
    le.push_back(std::log(eta));
    lu.push_back(lnorm);
    lc.push_back(lnorm + std::log(L));
    ll.push_back(std::log(std::log(1.0 / eta)));
  }
  RateFit r;
  Line raw = least_squares(le, lu);
  r.raw_slope = raw.slope;
  r.power_residual = raw.ssr;
  std::vector<double> ls(le.size());
  for (std::size_t i = 0; i < le.size(); ++i) ls[i] = le[i] - std::log(2.0 * f.E);
  r.exponent = least_squares(ls, lc).slope;
  Line lg = least_squares(ll, lu);
  r.log_residual = lg.ssr;
  r.log_coefficient = -lg.slope;
  r.logarithmic = f.T >= 1.0;
  return r;
}

double dirichlet_integral(int n, double E, int cells) {
  require(cells > 0, ErrorKind::parameter, "cells must be positive");
  const double a = amplitude(n, E) / n;
  const double hx = kPi / cells, hy = 1.0 / cells;
  double s = 0.0;
  for (int j = 0; j < cells; ++j) {
    double y = (j + 0.5) * hy;
    double sh = std::sinh(n * y), ch = std::cosh(n * y);
    for (int i = 0; i < cells; ++i) {
      double x = (i + 0.5) * hx;
      double ux = a * n * std::cos(n * x) * sh, uy = a * n * std::sin(n * x) * ch;
      s += ux * ux + uy * uy;
    }
  }
  return s * hx * hy;
}

}  // namespace cauchylab::hadamard
