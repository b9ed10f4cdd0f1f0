#include "cauchylab/field.hpp"

#include <boost/math/quadrature/gauss.hpp>

namespace cauchylab {

AnalyticField::AnalyticField(std::function<double(Vec2)> f, std::function<Vec2(Vec2)> grad)
    : f_(std::move(f)), g_(std::move(grad)) {}

Vec2 AnalyticField::gradient(Vec2 p) const {
  if (g_) return g_(p);
  const double e = 1e-6 * std::max(1.0, norm(p));
  return {(f_({p.x + e, p.y}) - f_({p.x - e, p.y})) / (2 * e), (f_({p.x, p.y + e}) - f_({p.x, p.y - e})) / (2 * e)};
}

AnalyticField holomorphic_field(std::vector<std::complex<double>> coeffs, bool real_part, Vec2 center,
                                int lowest_power) {
  auto eval = [coeffs, center, lowest_power](Vec2 p) {
    std::complex<double> z(p.x - center.x, p.y - center.y), F = 0, dF = 0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      int m = lowest_power + static_cast<int>(k);
      F += coeffs[k] * std::pow(z, m);
      if (m != 0) dF += coeffs[k] * static_cast<double>(m) * std::pow(z, m - 1);
    }
    return std::pair{F, dF};
  };
  if (real_part)
    return AnalyticField([eval](Vec2 p) { return eval(p).first.real(); },
                         [eval](Vec2 p) {
                           auto d = eval(p).second;
                           return Vec2{d.real(), -d.imag()};
                         });
  return AnalyticField([eval](Vec2 p) { return eval(p).first.imag(); },
                       [eval](Vec2 p) {
                         auto d = eval(p).second;
                         return Vec2{d.imag(), d.real()};
                       });
}

AnalyticField monomial_field(int m, Vec2 center) {
  std::vector<std::complex<double>> c(m + 1, 0.0);
  c[m] = 1.0;
  return holomorphic_field(c, true, center);
}

AnalyticField constant_field(double c) {
  return AnalyticField([c](Vec2) { return c; }, [](Vec2) { return Vec2{}; });
}

namespace {

struct Cell {
  int i, j;
  double tx, ty;
};

Cell locate(const geometry::GridSpec& g, Vec2 p) {
  double fx = (p.x - g.origin.x) / g.h, fy = (p.y - g.origin.y) / g.h;
  if (!(fx >= -1e-9 && fy >= -1e-9 && fx <= g.nx - 1 + 1e-9 && fy <= g.ny - 1 + 1e-9))
    throw Error(ErrorKind::geometry, "point outside the grid");
  int i = std::clamp(static_cast<int>(std::floor(fx)), 0, g.nx - 2);
  int j = std::clamp(static_cast<int>(std::floor(fy)), 0, g.ny - 2);
  return {i, j, fx - i, fy - j};
}

}  // namespace

double GridFunction::value(Vec2 p) const {
  Cell c = locate(grid, p);
  double u00 = at(c.i, c.j), u10 = at(c.i + 1, c.j), u01 = at(c.i, c.j + 1), u11 = at(c.i + 1, c.j + 1);
  return (1 - c.tx) * (1 - c.ty) * u00 + c.tx * (1 - c.ty) * u10 + (1 - c.tx) * c.ty * u01 + c.tx * c.ty * u11;
}

Vec2 GridFunction::gradient(Vec2 p) const {
  Cell c = locate(grid, p);
  double u00 = at(c.i, c.j), u10 = at(c.i + 1, c.j), u01 = at(c.i, c.j + 1), u11 = at(c.i + 1, c.j + 1);
  return {((u10 - u00) * (1 - c.ty) + (u11 - u01) * c.ty) / grid.h,
          ((u01 - u00) * (1 - c.tx) + (u11 - u10) * c.tx) / grid.h};
}

Region region_of(const geometry::Domain& d) {
  return [d](Vec2 p) { return d.contains(p); };
}

Region region_of(const geometry::GridMask& m) {
  return [m](Vec2 p) {
    const auto& g = m.grid;
    int i = static_cast<int>(std::floor((p.x - g.origin.x) / g.h));
    int j = static_cast<int>(std::floor((p.y - g.origin.y) / g.h));
    return m.at(i, j) && m.at(i + 1, j) && m.at(i, j + 1) && m.at(i + 1, j + 1);
  };
}

Region ball_region(Vec2 c, double r) {
  return [c, r](Vec2 p) { return dist(p, c) < r; };
}

double circle_integral(const std::function<double(Vec2)>& f, Vec2 c, double r, int nodes) {
  double s = 0.0;
  for (int k = 0; k < nodes; ++k) {
    double t = 2.0 * kPi * k / nodes;
    s += f({c.x + r * std::cos(t), c.y + r * std::sin(t)});
  }
  return s * 2.0 * kPi * r / nodes;
}

double disc_integral(const std::function<double(Vec2)>& f, Vec2 c, double r, int angular_nodes) {
  if (r <= 0.0) return 0.0;
  auto ring = [&](double rho) { return circle_integral(f, c, rho, angular_nodes); };
  return boost::math::quadrature::gauss<double, 20>::integrate(ring, 0.0, r);
}

}  // namespace cauchylab
