#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "cauchylab/core.hpp"
#include "cauchylab/geometry.hpp"

namespace cauchylab {

class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual double value(Vec2 p) const = 0;
  virtual Vec2 gradient(Vec2 p) const = 0;
  // grid spacing of the underlying data, 0 for analytic fields
  virtual double resolution() const { return 0.0; }
};

class AnalyticField : public ScalarField {
 public:
  AnalyticField(std::function<double(Vec2)> f, std::function<Vec2(Vec2)> grad = {});
  double value(Vec2 p) const override { return f_(p); }
  Vec2 gradient(Vec2 p) const override;

 private:
  std::function<double(Vec2)> f_;
  std::function<Vec2(Vec2)> g_;
};

// Re or Im of sum_k c_k (z - center)^k, exact gradient
AnalyticField holomorphic_field(std::vector<std::complex<double>> coeffs, bool real_part = true,
                                Vec2 center = {}, int lowest_power = 0);
// Re (z - center)^m
AnalyticField monomial_field(int m, Vec2 center = {});
AnalyticField constant_field(double c);

// nodal values on a grid, bilinear in each cell
class GridFunction : public ScalarField {
 public:
  GridFunction() = default;
  GridFunction(geometry::GridSpec g, std::vector<double> values) : grid(g), values(std::move(values)) {}
  double value(Vec2 p) const override;
  Vec2 gradient(Vec2 p) const override;
  double resolution() const override { return grid.h; }
  double at(int i, int j) const { return values[grid.index(i, j)]; }

  geometry::GridSpec grid;
  std::vector<double> values;
};

using Region = std::function<bool(Vec2)>;
Region region_of(const geometry::Domain& d);
// cell centers whose four corner nodes are all flagged
Region region_of(const geometry::GridMask& m);
Region ball_region(Vec2 c, double r);

// trapezoidal rule on the circle |x - c| = r
double circle_integral(const std::function<double(Vec2)>& f, Vec2 c, double r, int nodes);
// polar quadrature on B_r(c): Gauss-Legendre in the radius, trapezoid in the angle
double disc_integral(const std::function<double(Vec2)>& f, Vec2 c, double r, int angular_nodes = 128);

}  // namespace cauchylab
