#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "cauchylab/core.hpp"

namespace cauchylab::geometry {

struct Rectangle {
  double w = 1.0, h = 1.0;
  Vec2 origin{};
};
struct Disc {
  double R = 1.0;
  Vec2 center{};
};
struct Annulus {
  double r_in = 0.5, r_out = 1.0;
  Vec2 center{};
};
struct Polygon {
  std::vector<Vec2> vertices;  // counter-clockwise after construction
};
// region {|x'| < rho0/M0, Z(x') < x_n < rho0} above sampled graph Z
struct GraphPatch {
  std::vector<double> xs, zs;
  double rho0 = 1.0, M0 = 1.0;
};

struct Box {
  Vec2 lo, hi;
};

class Domain {
 public:
  using Variant = std::variant<Rectangle, Disc, Annulus, Polygon, GraphPatch>;

  static Domain rectangle(double w, double h, Vec2 origin = {});
  static Domain disc(double R, Vec2 center = {});
  static Domain annulus(double r_in, double r_out, Vec2 center = {});
  static Domain polygon(std::vector<Vec2> vertices);
  static Domain graph_patch(std::vector<double> xs, std::vector<double> zs, double rho0, double M0);

  const Variant& variant() const { return v_; }
  std::string variant_name() const;

  // open set membership
  bool contains(Vec2 p) const;
  // unsigned distance to the boundary
  double boundary_distance(Vec2 p) const;
  // a inside, b outside: parameter t in (0,1] of the first boundary crossing on a->b
  double exit_fraction(Vec2 a, Vec2 b) const;
  Box bbox() const;
  double area() const;
  double inradius() const;
  // closed boundary loops; outer loop first, curved pieces split into `segments` chords
  std::vector<std::vector<Vec2>> boundary_loops(int segments = 4096) const;

 private:
  explicit Domain(Variant v) : v_(std::move(v)) {}
  Variant v_;
  std::vector<Vec2> poly_;  // cached polygon for polygon and graph_patch variants
};

double polygon_area(const std::vector<Vec2>& v);
bool polygon_self_intersects(const std::vector<Vec2>& v);
double segment_distance(Vec2 p, Vec2 a, Vec2 b);
bool point_in_polygon(Vec2 p, const std::vector<Vec2>& v);

struct GridSpec {
  Vec2 origin{};
  double h = 1.0;
  int nx = 0, ny = 0;

  Vec2 node(int i, int j) const { return {origin.x + i * h, origin.y + j * h}; }
  int index(int i, int j) const { return j * nx + i; }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  bool valid(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }
};

// cells across the longer bounding-box side; bbox corner sits on a node
GridSpec grid_for(const Domain& d, int cells, int pad = 2);
GridSpec grid_for_box(Box b, int cells, int pad = 2);
// h_grid = inradius / 128
GridSpec default_grid(const Domain& d);

struct GridMask {
  GridSpec grid;
  std::vector<std::uint8_t> inside;
  std::vector<std::uint8_t> on_sigma;  // boundary-adjacent nodes whose exit point lies on Sigma

  bool at(int i, int j) const { return grid.valid(i, j) && inside[grid.index(i, j)] != 0; }
  std::size_t count() const;
  double area() const { return static_cast<double>(count()) * grid.h * grid.h; }
  bool empty() const { return count() == 0; }
  bool connected() const;
  // nearest node to p that is inside, or -1
  int nearest_inside(Vec2 p, int radius_cells = 1) const;
  bool subset_of(const GridMask& o) const;
};

GridMask rasterize(const Domain& d, const GridSpec& g);
GridMask mask_from(const GridSpec& g, const std::function<bool(Vec2)>& pred);
// morphological dilation by a disc of radius r
GridMask dilate(const GridMask& m, double r);
int count_components(const GridMask& m);
// number of bounded components of the complement (holes)
int count_holes(const GridMask& m);
void write_pgm(std::ostream& os, const GridMask& m);

GridMask interior_envelope(const Domain& d, double h);
GridMask interior_envelope(const Domain& d, double h, const GridSpec& g);

// Sigma: an arclength sub-interval of one boundary loop
class LipschitzPortion {
 public:
  LipschitzPortion(Domain d, int loop, double s_begin, double s_end, double rho0, double M0, double rho1,
                   Vec2 P);

  const Domain& domain() const { return d_; }
  double rho0() const { return rho0_; }
  double M0() const { return M0_; }
  double rho1() const { return rho1_; }
  Vec2 P() const { return P_; }
  int loop() const { return loop_; }
  double s_begin() const { return s_begin_; }
  double s_end() const { return s_end_; }
  double length() const;
  const std::vector<Vec2>& sigma() const { return sigma_; }
  const std::vector<std::vector<Vec2>>& complement() const { return comp_; }
  // point at arclength s measured from the start of Sigma
  Vec2 at(double s) const;
  double distance_to_sigma(Vec2 p) const;
  double distance_to_complement(Vec2 p) const;
  bool on_sigma(Vec2 p, double tol = 1e-6) const;

 private:
  Domain d_;
  int loop_;
  double s_begin_, s_end_;
  double rho0_, M0_, rho1_;
  Vec2 P_;
  std::vector<Vec2> sigma_;
  std::vector<std::vector<Vec2>> comp_;
};

// rectangle side ("bottom", "right", "top", "left") as Sigma with P at its midpoint
LipschitzPortion rectangle_side(const Domain& rect, const std::string& side, double rho0, double M0,
                                double rho1);

double rho_from_r(double r, double rho0, double M0);
double rho_of_point(const LipschitzPortion& portion, Vec2 P);

struct Path {
  std::vector<Vec2> points;
  double length = 0.0;
};

double polyline_length(const std::vector<Vec2>& pts);
Path geodesic_path(const GridMask& mask, Vec2 x0, Vec2 y);
// 8-connected grid distance between the nodes nearest to x0 and y (no smoothing)
double grid_distance(const GridMask& mask, Vec2 x0, Vec2 y);

// single-source 8-connected Dijkstra over inside nodes; parent = -1 at the source and unreachable
struct DistanceTree {
  std::vector<double> dist;
  std::vector<int> parent;
  int source = -1;
};
DistanceTree distance_tree(const GridMask& mask, int source);

bool verify_lipschitz_graph(const std::vector<double>& xs, const std::vector<double>& zs, double rho0,
                            double M0);
double lipschitz_norm(const std::vector<double>& xs, const std::vector<double>& zs, double rho0);

double boundary_layer_measure(const Domain& d, double h);

struct Connectivity {
  double h0, d0;
};
Connectivity connectivity_threshold(double rho0, double M0);

void write_domain(std::ostream& os, const Domain& d);
Domain read_domain(std::istream& is);
Domain parse_domain(const std::string& text);

}  // namespace cauchylab::geometry
