#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cauchylab/extension.hpp"
#include "cauchylab/pde.hpp"
#include "cauchylab/smallness.hpp"

namespace cauchylab::experiment {

struct ExperimentConfig {
  std::string name = "probe";
  unsigned long long seed = 1;
  int grid = 256;  // cells across the domain, h = inradius/128 on the unit square
  std::string out = "out";
  bool svg = false;

  // rectangle [0,width] x [0,height]
  std::string domain = "rectangle";
  double width = 1.0, height = 1.0;
  // identity, or diagonal: a11 = 1 + ax x, a22 = 1 + ay y
  std::string coefficient = "identity";
  double ax = 0.0, ay = 0.0, c = 0.0;

  std::string sigma_side = "bottom";
  double rho0 = 0.5, M0 = 1.0, rho1 = 0.35;

  int mode_min = 1, mode_max = 6;
  std::vector<double> noise{0.0};  // one family per level, strictly decreasing

  double target_h = 0.1;  // measured set: points farther than target_h from the boundary
  double p = 4.0;
  double Q_cap = 10.0;
  double vartheta = 1.0, Q_measure = 10.0;  // |Omega \ G_h| <= Q rho0^n (h/rho0)^vartheta
  std::vector<double> layer_h{0.2, 0.1, 0.05, 0.025};

  // closed-form suites
  std::vector<double> hadamard_T{0.3, 0.5, 0.9, 1.0};
  int hadamard_n_min = 4, hadamard_n_max = 14;
  double hadamard_E = 1.0;
  int quadrature = 512;
  int fd_grid = 512;
};

// key is section.key, e.g. family.noise or hadamard.T
void set_option(ExperimentConfig& cfg, const std::string& key, const std::string& value);
// INI file: [section] headers, key = value lines
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});
void validate(const ExperimentConfig& cfg);

pde::CoefficientField coefficients(const ExperimentConfig& cfg);
pde::ZeroOrderTerm zero_order(const ExperimentConfig& cfg);
geometry::Domain make_domain(const ExperimentConfig& cfg);
// the rectangle padded so Omega1 fits and Sigma sits on a grid line
geometry::GridSpec probe_grid(const ExperimentConfig& cfg);

enum class Mode { interior, global, loglog };
const char* mode_name(Mode m);

struct ProbeRow {
  int family = 0;
  int mode = 0;
  double noise = 0.0;
  double eps = 0.0;
  double eta = 0.0;      // Cauchy data size on Sigma
  double E = 0.0;        // E0 (interior) or E (global, loglog)
  double measured = 0.0;
  double bound = 0.0;    // certified, data form
  double C = 0.0;        // constant of the data form
  double delta = 0.0;    // interior exponent
  double log10_delta = 0.0;  // delta underflows for long chains
  double mu = 0.0;       // global exponent
  double modulus = 0.0;  // omega at the data ratio (global, loglog)
  // pipeline quantities
  double eta_ball = 0.0, source = 0.0, E_tilde = 0.0;
  double ext_constant = 0.0, riesz_constant = 0.0, source_constant = 0.0, ball_constant = 0.0;
  double residual = 0.0;
  bool pass = false;
};

struct Fit {
  double slope = 0.0, intercept = 0.0, correlation = 0.0, ssr = 0.0;
};

struct StabilityReport {
  Mode mode = Mode::interior;
  std::vector<ProbeRow> rows;
  double p = 4.0;
  Fit power;  // log measured ~ log eta
  Fit log_fit;  // log measured ~ log log(1/eta)
  double mu_hat = 0.0;
  smallness::LogLogFit loglog;
  // loglog geometry
  std::vector<double> layer_h, layer_measure, layer_allowed;
  bool layer_ok = true;
  bool modulus_monotone = true;
  int inversions = 0;
  bool monotone = true;
  bool zero_noise_ok = true;
  double zero_noise_measured = 0.0;
  bool pass = false;
};

StabilityReport probe_stability(const ExperimentConfig& cfg, Mode mode);
void write_probe_csv(std::ostream& os, const StabilityReport& r);
void write_probe_svg(std::ostream& os, const StabilityReport& r);

// one verdict of a suite
struct Check {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double bound = 0.0;
  std::string tag = "paper-formula";  // provenance of the bound
  std::string extra;                  // further key=value fields
};
std::string result_line(const Check& c);

// dir: where CSVs go, empty for none
std::vector<Check> hadamard_checks(const ExperimentConfig& cfg, const std::string& dir = "");
std::vector<Check> dirichlet_integral_checks(const ExperimentConfig& cfg, const std::string& dir = "");
std::vector<Check> three_spheres_checks(const ExperimentConfig& cfg, bool fd = true, const std::string& dir = "");
std::vector<Check> frequency_checks(const ExperimentConfig& cfg, bool fd = true, const std::string& dir = "");
std::vector<Check> doubling_checks(const ExperimentConfig& cfg, bool fd = true, const std::string& dir = "");
std::vector<Check> harmonic_measure_checks(const ExperimentConfig& cfg, bool suite = true, const std::string& dir = "");
std::vector<Check> beltrami_checks(const ExperimentConfig& cfg, int samples = 1000, const std::string& dir = "");
std::vector<Check> chain_checks(const ExperimentConfig& cfg, bool propagation = true, const std::string& dir = "");
std::vector<Check> cone_checks(const ExperimentConfig& cfg, int samples = 100, const std::string& dir = "");
std::vector<Check> phi_checks(const ExperimentConfig& cfg, const std::string& dir = "");
std::vector<Check> loglog_modulus_checks(const ExperimentConfig& cfg, const std::string& dir = "");
std::vector<Check> extension_checks(const ExperimentConfig& cfg, const std::string& dir = "");
std::vector<Check> probe_checks(const StabilityReport& r);

const std::vector<std::string>& subcommands();
// writes CSVs and summary.txt under cfg.out; 0 all pass, 1 a verdict failed
int run(const std::string& subcommand, const ExperimentConfig& cfg, std::ostream& log);

}  // namespace cauchylab::experiment
