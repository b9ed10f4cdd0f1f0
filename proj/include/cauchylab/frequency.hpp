#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cauchylab/field.hpp"
#include "cauchylab/pde.hpp"

namespace cauchylab::frequency {

struct RadialProfile {
  std::vector<double> r, H, I, N;
  std::vector<std::uint8_t> defined;  // N defined (H above 1e-14 max H)
  double rho0 = 1.0;
  int angular_nodes = 512;
  bool transformed = false;  // ellipsoid change of variables applied
};

struct ProfileOptions {
  int angular_nodes = 512;
  int subsamples = 8;  // per straddling cell, per direction
  std::optional<Region> region;
  double rho0 = 1.0;
};

struct Ellipsoid {
  Mat2 J;      // sqrt(A0^{-1})
  Mat2 J_inv;  // sqrt(A0)
  double K;    // max(lmax, 1/lmin)
  double lmin, lmax;
  // B_{r/sqrt K} in E_r in B_{sqrt K r}
  double inner(double r) const { return r / std::sqrt(K); }
  double outer(double r) const { return r * std::sqrt(K); }
  // (r1/sqrt K, sqrt K r2, r3/sqrt K)
  std::vector<double> schedule(double r1, double r2, double r3) const;
  // E_r = {x : |J (x - c)| < r}
  bool in_ellipse(Vec2 x, Vec2 c, double r) const { return norm(J * (x - c)) < r; }
};
Ellipsoid ellipsoid_transform(const Mat2& A0);

// u~(y) = u(c + J^{-1} y), A~(y) = J A(c + J^{-1} y) J
class TransformedField : public ScalarField {
 public:
  TransformedField(const ScalarField& u, Vec2 c, const Ellipsoid& e) : u_(u), c_(c), e_(e) {}
  double value(Vec2 y) const override { return u_.value(c_ + e_.J_inv * y); }
  Vec2 gradient(Vec2 y) const override { return e_.J_inv * u_.gradient(c_ + e_.J_inv * y); }
  double resolution() const override { return u_.resolution(); }

 private:
  const ScalarField& u_;
  Vec2 c_;
  Ellipsoid e_;
};

RadialProfile radial_profile(const ScalarField& u, const pde::CoefficientField& A, Vec2 center,
                             const std::vector<double>& radii, const ProfileOptions& opt = {});
RadialProfile radial_profile(const pde::DiscreteSolution& u, const pde::CoefficientField& A, Vec2 center,
                             const std::vector<double>& radii, ProfileOptions opt = {});

struct MonotonicityReport {
  double C = 0.0;  // smallest C with e^{C r/rho0} N(r) nondecreasing up to tol
  bool ok = false;
  std::vector<double> excluded;  // radii where N is undefined
  std::size_t used = 0;
  std::string note;
};
MonotonicityReport frequency_monotonicity_check(const RadialProfile& p, double tol = 1e-2);

enum class NormKind { ball_L2, sphere_L2, sup };

struct SphereTriple {
  double r1, r2, r3;
  bool restricted = false;  // require r2 < r3/K
};

struct ThreeSpheresOptions {
  std::optional<double> alpha;  // override the exponent
  double C = 1.0;               // constant in the K-restricted exponent
  double Q_cap = 10.0;
  int angular_nodes = 512;
  std::optional<Region> region;
};

struct ThreeSpheresReport {
  double n1 = 0, n2 = 0, n3 = 0;
  double alpha = 0.0;
  double Q = 0.0;  // n2 / (n1^alpha n3^{1-alpha})
  bool pass = false;
};

// log(r3/(K r2)) / (log(r3/(K r2)) + C log(K r2/r1))
double restricted_alpha(const SphereTriple& t, double K, double C);
double circle_norm(const ScalarField& u, Vec2 c, double r, NormKind kind, int nodes = 512);
ThreeSpheresReport three_spheres_verify(const ScalarField& u, const pde::CoefficientField& A, Vec2 center,
                                        const SphereTriple& t, NormKind kind, const ThreeSpheresOptions& opt = {});

struct DoublingRow {
  double r;
  double H_ratio;     // H(2r)/H(r)
  double mass_ratio;  // int_{B_2r} u^2 / int_{B_r} u^2
};
struct DoublingReport {
  std::vector<DoublingRow> rows;
  double max_H_ratio = 0.0, max_mass_ratio = 0.0;
  bool bounded = false;
  double growth_exponent = 0.0;  // slope of log int_{B_r} u^2 vs log r
};
DoublingReport doubling_check(const ScalarField& u, const pde::CoefficientField& A, Vec2 center,
                              const std::vector<double>& r_list, const ProfileOptions& opt = {});

void write_profile_csv(std::ostream& os, const RadialProfile& p);

}  // namespace cauchylab::frequency
