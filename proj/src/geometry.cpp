#include "cauchylab/geometry.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <sstream>

namespace cauchylab::geometry {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Vec2> graph_polygon(const GraphPatch& g) {
  std::vector<Vec2> v;
  for (std::size_t k = 0; k < g.xs.size(); ++k) v.push_back({g.xs[k], g.zs[k]});
  v.push_back({g.xs.back(), g.rho0});
  v.push_back({g.xs.front(), g.rho0});
  return v;
}

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

// smallest t in (0,1] with a + t(b-a) on segment [c,d]
double segment_hit(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  Vec2 r = b - a, s = d - c;
  double den = cross(r, s);
  if (std::abs(den) < 1e-300) return kInf;
  double t = cross(c - a, s) / den;
  double u = cross(c - a, r) / den;
  if (t <= 0.0 || t > 1.0 + 1e-12 || u < -1e-12 || u > 1.0 + 1e-12) return kInf;
  return std::min(t, 1.0);
}

// positive roots of |a + t(b-a) - c|^2 = R^2 in (0,1]
double circle_hit(Vec2 a, Vec2 b, Vec2 c, double R) {
  Vec2 d = b - a, f = a - c;
  double A = dot(d, d), B = 2.0 * dot(f, d), C = dot(f, f) - R * R;
  double disc = B * B - 4.0 * A * C;
  if (disc < 0.0 || A == 0.0) return kInf;
  double sq = std::sqrt(disc);
  // numerically stable pair of roots
  double q = -0.5 * (B + std::copysign(sq, B));
  double t1 = q / A, t2 = (q != 0.0) ? C / q : kInf;
  double best = kInf;
  for (double t : {t1, t2})
    if (t > 0.0 && t <= 1.0 + 1e-12) best = std::min(best, std::min(t, 1.0));
  return best;
}

double polygon_boundary_distance(Vec2 p, const std::vector<Vec2>& v) {
  double best = kInf;
  for (std::size_t k = 0; k < v.size(); ++k) best = std::min(best, segment_distance(p, v[k], v[(k + 1) % v.size()]));
  return best;
}

double polygon_exit(Vec2 a, Vec2 b, const std::vector<Vec2>& v) {
  double best = kInf;
  for (std::size_t k = 0; k < v.size(); ++k) best = std::min(best, segment_hit(a, b, v[k], v[(k + 1) % v.size()]));
  return best;
}

std::vector<Vec2> circle_loop(Vec2 c, double R, int n, bool ccw) {
  std::vector<Vec2> pts(n);
  for (int k = 0; k < n; ++k) {
    double t = 2.0 * kPi * k / n * (ccw ? 1.0 : -1.0);
    pts[k] = {c.x + R * std::cos(t), c.y + R * std::sin(t)};
  }
  return pts;
}

double domain_scale(const Box& b) { return std::max(b.hi.x - b.lo.x, b.hi.y - b.lo.y); }

}  // namespace

double polygon_area(const std::vector<Vec2>& v) {
  double a = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) a += cross(v[k], v[(k + 1) % v.size()]);
  return 0.5 * a;
}

bool polygon_self_intersects(const std::vector<Vec2>& v) {
  std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) return true;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (dist(v[i], v[j]) == 0.0) return true;
  return false;
}

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double L2 = dot(ab, ab);
  double t = L2 > 0.0 ? std::clamp(dot(p - a, ab) / L2, 0.0, 1.0) : 0.0;
  return dist(p, a + t * ab);
}

bool point_in_polygon(Vec2 p, const std::vector<Vec2>& v) {
  bool in = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      double x = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (p.x < x) in = !in;
    }
  }
  return in;
}

Domain Domain::rectangle(double w, double h, Vec2 origin) {
  require(w > 0.0 && h > 0.0, ErrorKind::parameter, "rectangle sides must be positive");
  return Domain(Rectangle{w, h, origin});
}

Domain Domain::disc(double R, Vec2 center) {
  require(R > 0.0, ErrorKind::parameter, "disc radius must be positive");
  return Domain(Disc{R, center});
}

Domain Domain::annulus(double r_in, double r_out, Vec2 center) {
  require(r_in > 0.0 && r_in < r_out, ErrorKind::parameter, "annulus needs 0 < r_in < r_out");
  return Domain(Annulus{r_in, r_out, center});
}

Domain Domain::polygon(std::vector<Vec2> vertices) {
  require(vertices.size() >= 3, ErrorKind::parameter, "polygon needs at least 3 vertices");
  require(!polygon_self_intersects(vertices), ErrorKind::parameter, "polygon is self-intersecting");
  double a = polygon_area(vertices);
  require(std::abs(a) > 0.0, ErrorKind::parameter, "polygon has zero area");
  if (a < 0.0) std::reverse(vertices.begin(), vertices.end());
  Domain d(Polygon{vertices});
  d.poly_ = vertices;
  return d;
}

Domain Domain::graph_patch(std::vector<double> xs, std::vector<double> zs, double rho0, double M0) {
  require(xs.size() == zs.size() && xs.size() >= 2, ErrorKind::parameter, "graph patch needs matching samples");
  require(rho0 > 0.0 && M0 >= 1.0, ErrorKind::parameter, "graph patch needs rho0 > 0 and M0 >= 1");
  for (std::size_t k = 1; k < xs.size(); ++k)
    require(xs[k] > xs[k - 1], ErrorKind::parameter, "graph patch abscissae must increase");
  for (double z : zs) require(z < rho0, ErrorKind::parameter, "graph must stay below the patch top");
  GraphPatch g{std::move(xs), std::move(zs), rho0, M0};
  auto poly = graph_polygon(g);
  require(!polygon_self_intersects(poly), ErrorKind::parameter, "graph patch polygon is self-intersecting");
  Domain d(std::move(g));
  d.poly_ = std::move(poly);
  return d;
}

std::string Domain::variant_name() const {
  static const char* names[] = {"rectangle", "disc", "annulus", "polygon", "graph_patch"};
  return names[v_.index()];
}

bool Domain::contains(Vec2 p) const {
  if (auto r = std::get_if<Rectangle>(&v_))
    return p.x > r->origin.x && p.x < r->origin.x + r->w && p.y > r->origin.y && p.y < r->origin.y + r->h;
  if (auto c = std::get_if<Disc>(&v_)) return dist(p, c->center) < c->R;
  if (auto a = std::get_if<Annulus>(&v_)) {
    double r = dist(p, a->center);
    return r > a->r_in && r < a->r_out;
  }
  double eps = 1e-12 * domain_scale(bbox());
  return point_in_polygon(p, poly_) && polygon_boundary_distance(p, poly_) > eps;
}

double Domain::boundary_distance(Vec2 p) const {
  if (auto r = std::get_if<Rectangle>(&v_)) {
    double x0 = r->origin.x, y0 = r->origin.y, x1 = x0 + r->w, y1 = y0 + r->h;
    if (p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1)
      return std::min({p.x - x0, x1 - p.x, p.y - y0, y1 - p.y});
    double dx = std::max({x0 - p.x, 0.0, p.x - x1}), dy = std::max({y0 - p.y, 0.0, p.y - y1});
    return std::hypot(dx, dy);
  }
  if (auto c = std::get_if<Disc>(&v_)) return std::abs(dist(p, c->center) - c->R);
  if (auto a = std::get_if<Annulus>(&v_)) {
    double r = dist(p, a->center);
    return std::min(std::abs(r - a->r_in), std::abs(r - a->r_out));
  }
  return polygon_boundary_distance(p, poly_);
}

double Domain::exit_fraction(Vec2 a, Vec2 b) const {
  double t = kInf;
  if (auto r = std::get_if<Rectangle>(&v_)) {
    std::vector<Vec2> box{r->origin,
                          {r->origin.x + r->w, r->origin.y},
                          {r->origin.x + r->w, r->origin.y + r->h},
                          {r->origin.x, r->origin.y + r->h}};
    t = polygon_exit(a, b, box);
  } else if (auto c = std::get_if<Disc>(&v_)) {
    t = circle_hit(a, b, c->center, c->R);
  } else if (auto an = std::get_if<Annulus>(&v_)) {
    t = std::min(circle_hit(a, b, an->center, an->r_in), circle_hit(a, b, an->center, an->r_out));
  } else {
    t = polygon_exit(a, b, poly_);
  }
  return std::isfinite(t) ? t : 1.0;
}

Box Domain::bbox() const {
  if (auto r = std::get_if<Rectangle>(&v_)) return {r->origin, {r->origin.x + r->w, r->origin.y + r->h}};
  if (auto c = std::get_if<Disc>(&v_))
    return {{c->center.x - c->R, c->center.y - c->R}, {c->center.x + c->R, c->center.y + c->R}};
  if (auto a = std::get_if<Annulus>(&v_))
    return {{a->center.x - a->r_out, a->center.y - a->r_out}, {a->center.x + a->r_out, a->center.y + a->r_out}};
  Box b{{kInf, kInf}, {-kInf, -kInf}};
  for (Vec2 p : poly_) {
    b.lo = {std::min(b.lo.x, p.x), std::min(b.lo.y, p.y)};
    b.hi = {std::max(b.hi.x, p.x), std::max(b.hi.y, p.y)};
  }
  return b;
}

double Domain::area() const {
  if (auto r = std::get_if<Rectangle>(&v_)) return r->w * r->h;
  if (auto c = std::get_if<Disc>(&v_)) return kPi * c->R * c->R;
  if (auto a = std::get_if<Annulus>(&v_)) return kPi * (a->r_out * a->r_out - a->r_in * a->r_in);
  return polygon_area(poly_);
}

double Domain::inradius() const {
  if (auto r = std::get_if<Rectangle>(&v_)) return 0.5 * std::min(r->w, r->h);
  if (auto c = std::get_if<Disc>(&v_)) return c->R;
  if (auto a = std::get_if<Annulus>(&v_)) return 0.5 * (a->r_out - a->r_in);
  Box b = bbox();
  double best = 0.0;
  const int n = 96;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      Vec2 p{b.lo.x + (b.hi.x - b.lo.x) * i / n, b.lo.y + (b.hi.y - b.lo.y) * j / n};
      if (contains(p)) best = std::max(best, boundary_distance(p));
    }
  return best;
}

std::vector<std::vector<Vec2>> Domain::boundary_loops(int segments) const {
  if (auto r = std::get_if<Rectangle>(&v_)) {
    Vec2 o = r->origin;
    return {{o, {o.x + r->w, o.y}, {o.x + r->w, o.y + r->h}, {o.x, o.y + r->h}}};
  }
  if (auto c = std::get_if<Disc>(&v_)) return {circle_loop(c->center, c->R, segments, true)};
  if (auto a = std::get_if<Annulus>(&v_))
    return {circle_loop(a->center, a->r_out, segments, true), circle_loop(a->center, a->r_in, segments, false)};
  return {poly_};
}

GridSpec grid_for_box(Box b, int cells, int pad) {
  require(cells >= 4, ErrorKind::resolution, "grid needs at least 4 cells");
  double w = b.hi.x - b.lo.x, hh = b.hi.y - b.lo.y;
  double h = std::max(w, hh) / cells;
  GridSpec g;
  g.h = h;
  g.origin = {b.lo.x - pad * h, b.lo.y - pad * h};
  g.nx = static_cast<int>(std::ceil(w / h - 1e-9)) + 1 + 2 * pad;
  g.ny = static_cast<int>(std::ceil(hh / h - 1e-9)) + 1 + 2 * pad;
  return g;
}

GridSpec grid_for(const Domain& d, int cells, int pad) { return grid_for_box(d.bbox(), cells, pad); }

GridSpec default_grid(const Domain& d) {
  Box b = d.bbox();
  double h = d.inradius() / 128.0;
  int cells = static_cast<int>(std::ceil(domain_scale(b) / h));
  return grid_for_box(b, cells);
}

std::size_t GridMask::count() const {
  return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
}

bool GridMask::connected() const { return count_components(*this) == 1; }

int GridMask::nearest_inside(Vec2 p, int radius_cells) const {
  int ic = static_cast<int>(std::lround((p.x - grid.origin.x) / grid.h));
  int jc = static_cast<int>(std::lround((p.y - grid.origin.y) / grid.h));
  int best = -1;
  double bd = kInf;
  for (int dj = -radius_cells; dj <= radius_cells; ++dj)
    for (int di = -radius_cells; di <= radius_cells; ++di) {
      int i = ic + di, j = jc + dj;
      if (!at(i, j)) continue;
      double d = dist(grid.node(i, j), p);
      if (d < bd) {
        bd = d;
        best = grid.index(i, j);
      }
    }
  return best;
}

bool GridMask::subset_of(const GridMask& o) const {
  for (std::size_t k = 0; k < inside.size(); ++k)
    if (inside[k] && !o.inside[k]) return false;
  return true;
}

GridMask mask_from(const GridSpec& g, const std::function<bool(Vec2)>& pred) {
  GridMask m{g, std::vector<std::uint8_t>(g.size(), 0), std::vector<std::uint8_t>(g.size(), 0)};
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) m.inside[g.index(i, j)] = pred(g.node(i, j)) ? 1 : 0;
  return m;
}

GridMask rasterize(const Domain& d, const GridSpec& g) {
  return mask_from(g, [&](Vec2 p) { return d.contains(p); });
}

GridMask dilate(const GridMask& m, double r) {
  const GridSpec& g = m.grid;
  int rc = static_cast<int>(std::floor(r / g.h));
  std::vector<std::pair<int, int>> offs;
  for (int dj = -rc - 1; dj <= rc + 1; ++dj)
    for (int di = -rc - 1; di <= rc + 1; ++di)
      if (std::hypot(di, dj) * g.h < r) offs.push_back({di, dj});
  GridMask out{g, std::vector<std::uint8_t>(g.size(), 0), std::vector<std::uint8_t>(g.size(), 0)};
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!m.inside[g.index(i, j)]) continue;
      for (auto [di, dj] : offs)
        if (g.valid(i + di, j + dj)) out.inside[g.index(i + di, j + dj)] = 1;
    }
  return out;
}

namespace {

int flood_components(const GridSpec& g, const std::vector<std::uint8_t>& on, bool eight, bool count_bounded_only) {
  std::vector<std::uint8_t> seen(g.size(), 0);
  int comps = 0;
  std::vector<int> stack;
  for (int start = 0; start < static_cast<int>(g.size()); ++start) {
    if (!on[start] || seen[start]) continue;
    bool touches_border = false;
    stack.push_back(start);
    seen[start] = 1;
    while (!stack.empty()) {
      int k = stack.back();
      stack.pop_back();
      int i = k % g.nx, j = k / g.nx;
      if (i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1) touches_border = true;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if ((di == 0 && dj == 0) || (!eight && di != 0 && dj != 0)) continue;
          int ii = i + di, jj = j + dj;
          if (!g.valid(ii, jj)) continue;
          int kk = g.index(ii, jj);
          if (on[kk] && !seen[kk]) {
            seen[kk] = 1;
            stack.push_back(kk);
          }
        }
    }
    if (!count_bounded_only || !touches_border) ++comps;
  }
  return comps;
}

}  // namespace

int count_components(const GridMask& m) { return flood_components(m.grid, m.inside, false, false); }

int count_holes(const GridMask& m) {
  std::vector<std::uint8_t> comp(m.inside.size());
  for (std::size_t k = 0; k < comp.size(); ++k) comp[k] = m.inside[k] ? 0 : 1;
  return flood_components(m.grid, comp, true, true);
}

void write_pgm(std::ostream& os, const GridMask& m) {
  os << "P2\n" << m.grid.nx << " " << m.grid.ny << "\n255\n";
  for (int j = m.grid.ny - 1; j >= 0; --j) {
    for (int i = 0; i < m.grid.nx; ++i) {
      int k = m.grid.index(i, j);
      int v = m.inside[k] ? 255 : 0;
      if (!m.on_sigma.empty() && m.on_sigma[k]) v = 128;
      os << v << (i + 1 < m.grid.nx ? " " : "\n");
    }
  }
}

GridMask interior_envelope(const Domain& d, double h, const GridSpec& g) {
  require(h > 0.0, ErrorKind::parameter, "envelope distance h must be positive");
  return mask_from(g, [&](Vec2 p) { return d.contains(p) && d.boundary_distance(p) > h; });
}

GridMask interior_envelope(const Domain& d, double h) { return interior_envelope(d, h, default_grid(d)); }

// ---- Lipschitz portion ----

namespace {

std::vector<double> cumulative(const std::vector<Vec2>& loop) {
  std::vector<double> s(loop.size() + 1, 0.0);
  for (std::size_t k = 0; k < loop.size(); ++k) s[k + 1] = s[k] + dist(loop[k], loop[(k + 1) % loop.size()]);
  return s;
}

// points of a closed loop between arclengths a < b (b may exceed the loop length once)
std::vector<Vec2> loop_piece(const std::vector<Vec2>& loop, const std::vector<double>& cum, double a, double b) {
  double L = cum.back();
  std::size_t n = loop.size();
  auto point_at = [&](double s) {
    s = std::fmod(s, L);
    if (s < 0) s += L;
    std::size_t k = std::upper_bound(cum.begin(), cum.end(), s) - cum.begin();
    k = std::min(std::max<std::size_t>(k, 1), n) - 1;
    double seg = cum[k + 1] - cum[k];
    double t = seg > 0 ? (s - cum[k]) / seg : 0.0;
    return loop[k] + t * (loop[(k + 1) % n] - loop[k]);
  };
  std::vector<Vec2> out{point_at(a)};
  // vertices strictly inside (a, b), walking at most one extra lap
  for (int lap = 0; lap < 2; ++lap)
    for (std::size_t k = 0; k < n; ++k) {
      double s = cum[k] + lap * L;
      if (s > a && s < b) out.push_back(loop[k]);
    }
  out.push_back(point_at(b));
  return out;
}

double polyline_distance(Vec2 p, const std::vector<Vec2>& pl) {
  double best = kInf;
  if (pl.size() == 1) return dist(p, pl[0]);
  for (std::size_t k = 0; k + 1 < pl.size(); ++k) best = std::min(best, segment_distance(p, pl[k], pl[k + 1]));
  return best;
}

}  // namespace

LipschitzPortion::LipschitzPortion(Domain d, int loop, double s_begin, double s_end, double rho0, double M0,
                                   double rho1, Vec2 P)
    : d_(std::move(d)), loop_(loop), s_begin_(s_begin), s_end_(s_end), rho0_(rho0), M0_(M0), rho1_(rho1), P_(P) {
  require(rho0 > 0.0, ErrorKind::parameter, "rho0 must be positive");
  require(M0 >= 1.0, ErrorKind::parameter, "M0 must be at least 1");
  require(rho1 > 0.0 && rho1 <= rho0, ErrorKind::parameter, "rho1 must lie in (0, rho0]");
  auto loops = d_.boundary_loops();
  require(loop >= 0 && loop < static_cast<int>(loops.size()), ErrorKind::parameter, "no such boundary loop");
  require(s_end > s_begin, ErrorKind::parameter, "Sigma arclength interval is empty");
  auto cum = cumulative(loops[loop]);
  double L = cum.back();
  require(s_end - s_begin <= L * (1.0 + 1e-6), ErrorKind::parameter, "Sigma longer than its boundary loop");
  bool whole = s_end - s_begin >= L * (1.0 - 1e-6);
  if (whole) {
    sigma_ = loops[loop];
    sigma_.push_back(loops[loop].front());
  } else {
    sigma_ = loop_piece(loops[loop], cum, s_begin, s_end);
    comp_.push_back(loop_piece(loops[loop], cum, s_end, s_begin + L));
  }
  for (int k = 0; k < static_cast<int>(loops.size()); ++k) {
    if (k == loop) continue;
    auto c = loops[k];
    c.push_back(c.front());
    comp_.push_back(c);
  }
  require(on_sigma(P, 1e-6 * std::max(1.0, L)), ErrorKind::parameter, "P is not on Sigma");
}

double LipschitzPortion::length() const { return polyline_length(sigma_); }

Vec2 LipschitzPortion::at(double s) const {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < sigma_.size(); ++k) {
    double seg = dist(sigma_[k], sigma_[k + 1]);
    if (acc + seg >= s || k + 2 == sigma_.size()) {
      double t = seg > 0 ? std::clamp((s - acc) / seg, 0.0, 1.0) : 0.0;
      return sigma_[k] + t * (sigma_[k + 1] - sigma_[k]);
    }
    acc += seg;
  }
  return sigma_.front();
}

double LipschitzPortion::distance_to_sigma(Vec2 p) const { return polyline_distance(p, sigma_); }

double LipschitzPortion::distance_to_complement(Vec2 p) const {
  double best = kInf;
  for (const auto& c : comp_) best = std::min(best, polyline_distance(p, c));
  return best;
}

bool LipschitzPortion::on_sigma(Vec2 p, double tol) const { return distance_to_sigma(p) <= tol; }

LipschitzPortion rectangle_side(const Domain& rect, const std::string& side, double rho0, double M0, double rho1) {
  auto r = std::get_if<Rectangle>(&rect.variant());
  require(r != nullptr, ErrorKind::parameter, "rectangle_side needs a rectangle");
  double w = r->w, h = r->h;
  double a = 0, b = 0;
  if (side == "bottom") {
    a = 0;
    b = w;
  } else if (side == "right") {
    a = w;
    b = w + h;
  } else if (side == "top") {
    a = w + h;
    b = 2 * w + h;
  } else if (side == "left") {
    a = 2 * w + h;
    b = 2 * w + 2 * h;
  } else {
    throw Error(ErrorKind::parameter, "unknown rectangle side '" + side + "'");
  }
  auto loop = rect.boundary_loops()[0];
  auto cum = cumulative(loop);
  auto piece = loop_piece(loop, cum, a, b);
  Vec2 P = 0.5 * (piece.front() + piece.back());
  return LipschitzPortion(rect, 0, a, b, rho0, M0, rho1, P);
}

double rho_from_r(double r, double rho0, double M0) {
  require(M0 >= 1.0, ErrorKind::parameter, "M0 must be at least 1");
  return std::min(rho0, r * M0 / std::sqrt(1.0 + M0 * M0));
}

double rho_of_point(const LipschitzPortion& portion, Vec2 P) {
  double L = portion.length();
  require(portion.on_sigma(P, 1e-6 * std::max(1.0, L)), ErrorKind::parameter, "P is not on Sigma");
  double r = portion.distance_to_complement(P);
  return rho_from_r(r, portion.rho0(), portion.M0());
}

// ---- paths ----

double polyline_length(const std::vector<Vec2>& pts) {
  double L = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) L += dist(pts[k], pts[k + 1]);
  return L;
}

DistanceTree distance_tree(const GridMask& mask, int source) {
  const GridSpec& g = mask.grid;
  DistanceTree t;
  t.dist.assign(g.size(), kInf);
  t.parent.assign(g.size(), -1);
  t.source = source;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  t.dist[source] = 0.0;
  pq.push({0.0, source});
  const double diag = std::sqrt(2.0);
  while (!pq.empty()) {
    auto [d, k] = pq.top();
    pq.pop();
    if (d > t.dist[k]) continue;
    int i = k % g.nx, j = k / g.nx;
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        if (!mask.at(i + di, j + dj)) continue;
        // diagonal steps only when both axis neighbours are inside (no corner cutting)
        if (di != 0 && dj != 0 && (!mask.at(i + di, j) || !mask.at(i, j + dj))) continue;
        int kk = g.index(i + di, j + dj);
        double nd = d + ((di != 0 && dj != 0) ? diag : 1.0);
        if (nd < t.dist[kk]) {
          t.dist[kk] = nd;
          t.parent[kk] = k;
          pq.push({nd, kk});
        }
      }
  }
  return t;
}

namespace {

int endpoint_node(const GridMask& mask, Vec2 p) {
  int k = mask.nearest_inside(p, 1);
  require(k >= 0, ErrorKind::parameter, "path endpoint is not inside the mask");
  return k;
}

bool visible(const GridMask& mask, Vec2 a, Vec2 b) {
  const GridSpec& g = mask.grid;
  double L = dist(a, b);
  int n = std::max(1, static_cast<int>(std::ceil(4.0 * L / g.h)));
  for (int s = 0; s <= n; ++s) {
    Vec2 p = a + (static_cast<double>(s) / n) * (b - a);
    int i = static_cast<int>(std::lround((p.x - g.origin.x) / g.h));
    int j = static_cast<int>(std::lround((p.y - g.origin.y) / g.h));
    if (!mask.at(i, j)) return false;
  }
  return true;
}

}  // namespace

double grid_distance(const GridMask& mask, Vec2 x0, Vec2 y) {
  int s = endpoint_node(mask, x0), e = endpoint_node(mask, y);
  auto t = distance_tree(mask, s);
  require(std::isfinite(t.dist[e]), ErrorKind::no_path, "endpoints are disconnected in the mask");
  return t.dist[e] * mask.grid.h;
}

Path geodesic_path(const GridMask& mask, Vec2 x0, Vec2 y) {
  Path path;
  if (dist(x0, y) == 0.0) {
    endpoint_node(mask, x0);
    path.points = {x0};
    return path;
  }
  const GridSpec& g = mask.grid;
  int s = endpoint_node(mask, x0), e = endpoint_node(mask, y);
  auto t = distance_tree(mask, s);
  require(std::isfinite(t.dist[e]), ErrorKind::no_path, "endpoints are disconnected in the mask");
  std::vector<Vec2> raw{y};
  for (int k = e; k != -1; k = t.parent[k]) raw.push_back(g.node(k % g.nx, k / g.nx));
  raw.push_back(x0);
  std::reverse(raw.begin(), raw.end());
  // string pulling: extend each straight piece while the chord stays in the mask
  std::vector<Vec2> pulled{raw.front()};
  std::size_t anchor = 0;
  while (anchor + 1 < raw.size()) {
    std::size_t next = anchor + 1;
    while (next + 1 < raw.size() && visible(mask, raw[anchor], raw[next + 1])) ++next;
    pulled.push_back(raw[next]);
    anchor = next;
  }
  // resample so consecutive points are at most one cell apart
  path.points.push_back(pulled.front());
  for (std::size_t k = 0; k + 1 < pulled.size(); ++k) {
    double L = dist(pulled[k], pulled[k + 1]);
    int n = std::max(1, static_cast<int>(std::ceil(L / g.h)));
    for (int q = 1; q <= n; ++q) path.points.push_back(pulled[k] + (static_cast<double>(q) / n) * (pulled[k + 1] - pulled[k]));
  }
  path.length = polyline_length(path.points);
  return path;
}

// ---- Lipschitz graphs, layers, thresholds ----

double lipschitz_norm(const std::vector<double>& xs, const std::vector<double>& zs, double rho0) {
  double sup = 0.0, slope = 0.0;
  for (double z : zs) sup = std::max(sup, std::abs(z));
  for (std::size_t k = 1; k < xs.size(); ++k) slope = std::max(slope, std::abs((zs[k] - zs[k - 1]) / (xs[k] - xs[k - 1])));
  return sup + rho0 * slope;
}

bool verify_lipschitz_graph(const std::vector<double>& xs, const std::vector<double>& zs, double rho0, double M0) {
  if (xs.size() != zs.size() || xs.size() < 2) return false;
  return lipschitz_norm(xs, zs, rho0) <= M0 * rho0 * (1.0 + 1e-12);
}

double boundary_layer_measure(const Domain& d, double h) {
  require(h > 0.0, ErrorKind::parameter, "layer width must be positive");
  if (auto r = std::get_if<Rectangle>(&d.variant()))
    return r->w * r->h - std::max(0.0, r->w - 2 * h) * std::max(0.0, r->h - 2 * h);
  if (auto c = std::get_if<Disc>(&d.variant())) {
    double ri = std::max(0.0, c->R - h);
    return kPi * (c->R * c->R - ri * ri);
  }
  if (auto a = std::get_if<Annulus>(&d.variant())) {
    double lo = a->r_in + h, hi = a->r_out - h;
    double inner = hi > lo ? kPi * (hi * hi - lo * lo) : 0.0;
    return d.area() - inner;
  }
  // cell-midpoint raster with exact point-to-segment distances
  Box b = d.bbox();
  double L = domain_scale(b);
  double hr = std::max(std::min(h / 16.0, L / 512.0), L / 2048.0);
  int nx = static_cast<int>(std::ceil((b.hi.x - b.lo.x) / hr));
  int ny = static_cast<int>(std::ceil((b.hi.y - b.lo.y) / hr));
  double hx = (b.hi.x - b.lo.x) / nx, hy = (b.hi.y - b.lo.y) / ny;
  std::size_t cnt = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Vec2 p{b.lo.x + (i + 0.5) * hx, b.lo.y + (j + 0.5) * hy};
      if (d.contains(p) && d.boundary_distance(p) <= h) ++cnt;
    }
  return cnt * hx * hy;
}

Connectivity connectivity_threshold(double rho0, double M0) {
  require(M0 >= 1.0, ErrorKind::parameter, "M0 must be at least 1");
  require(rho0 > 0.0, ErrorKind::parameter, "rho0 must be positive");
  return {rho0 / (4.0 * M0 * (1.0 + std::sqrt(1.0 + M0 * M0))), rho0 / (2.0 * M0)};
}

// ---- text format ----

void write_domain(std::ostream& os, const Domain& d) {
  os.precision(17);
  os << "domain " << d.variant_name() << "\n";
  const auto& v = d.variant();
  if (auto r = std::get_if<Rectangle>(&v)) {
    os << "w = " << r->w << "\nh = " << r->h << "\nx0 = " << r->origin.x << "\ny0 = " << r->origin.y << "\n";
  } else if (auto c = std::get_if<Disc>(&v)) {
    os << "R = " << c->R << "\ncx = " << c->center.x << "\ncy = " << c->center.y << "\n";
  } else if (auto a = std::get_if<Annulus>(&v)) {
    os << "r_in = " << a->r_in << "\nr_out = " << a->r_out << "\ncx = " << a->center.x << "\ncy = " << a->center.y
       << "\n";
  } else if (auto p = std::get_if<Polygon>(&v)) {
    for (Vec2 q : p->vertices) os << q.x << " " << q.y << "\n";
  } else if (auto g = std::get_if<GraphPatch>(&v)) {
    os << "rho0 = " << g->rho0 << "\nM0 = " << g->M0 << "\n";
    for (std::size_t k = 0; k < g->xs.size(); ++k) os << g->xs[k] << " " << g->zs[k] << "\n";
  }
}

Domain read_domain(std::istream& is) {
  std::string line, variant;
  std::map<std::string, double> kv;
  std::vector<std::pair<double, double>> pts;
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    if (variant.empty()) {
      std::istringstream ss(line);
      std::string word;
      ss >> word >> variant;
      require(word == "domain" && !variant.empty(), ErrorKind::parameter, "expected 'domain <variant>' header");
      continue;
    }
    if (line == "patch" || line.rfind("[", 0) == 0) break;
    auto eq = line.find('=');
    if (eq != std::string::npos) {
      std::string key = trim(line.substr(0, eq));
      std::string val = trim(line.substr(eq + 1));
      try {
        kv[key] = std::stod(val);
      } catch (const std::exception&) {
        throw Error(ErrorKind::parameter, "bad value for key '" + key + "'");
      }
    } else {
      std::istringstream ss(line);
      double a, b;
      require(static_cast<bool>(ss >> a >> b), ErrorKind::parameter, "bad vertex line '" + line + "'");
      pts.push_back({a, b});
    }
  }
  require(!variant.empty(), ErrorKind::parameter, "missing domain header");
  auto get = [&](const std::string& k, double def) { return kv.count(k) ? kv[k] : def; };
  auto need = [&](const std::string& k) {
    require(kv.count(k) > 0, ErrorKind::parameter, "missing key '" + k + "'");
    return kv[k];
  };
  if (variant == "rectangle") return Domain::rectangle(need("w"), need("h"), {get("x0", 0), get("y0", 0)});
  if (variant == "disc") return Domain::disc(need("R"), {get("cx", 0), get("cy", 0)});
  if (variant == "annulus") return Domain::annulus(need("r_in"), need("r_out"), {get("cx", 0), get("cy", 0)});
  if (variant == "polygon") {
    std::vector<Vec2> v;
    for (auto [a, b] : pts) v.push_back({a, b});
    return Domain::polygon(v);
  }
  if (variant == "graph_patch") {
    std::vector<double> xs, zs;
    for (auto [a, b] : pts) {
      xs.push_back(a);
      zs.push_back(b);
    }
    return Domain::graph_patch(xs, zs, need("rho0"), need("M0"));
  }
  throw Error(ErrorKind::parameter, "unknown domain variant '" + variant + "'");
}

Domain parse_domain(const std::string& text) {
  std::istringstream ss(text);
  return read_domain(ss);
}

}  // namespace cauchylab::geometry
