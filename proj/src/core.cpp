#include "cauchylab/core.hpp"

namespace cauchylab {

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::no_path: return "no-path error";
    case ErrorKind::resolution: return "resolution error";
    case ErrorKind::solver: return "solver error";
    case ErrorKind::indefinite: return "indefiniteness error";
    case ErrorKind::radius_too_large: return "radius-too-large error";
    case ErrorKind::factorization: return "factorization error";
    case ErrorKind::range: return "range error";
    case ErrorKind::fit: return "fit error";
    case ErrorKind::ellipticity: return "ellipticity error";
    case ErrorKind::singular: return "singular-denominator error";
    case ErrorKind::topology: return "topology error";
    case ErrorKind::degenerate_measure: return "degenerate-measure error";
    case ErrorKind::algebra: return "algebra error";
    case ErrorKind::propagation_domain: return "propagation-domain error";
    case ErrorKind::size: return "size error";
    case ErrorKind::geometry: return "geometry error";
    case ErrorKind::extension_consistency: return "extension-consistency error";
    case ErrorKind::usage: return "usage error";
  }
  return "error";
}

SymEigen sym_eigen(const Mat2& m) {
  Mat2 s = m.sym();
  double tr = 0.5 * (s.a11 + s.a22);
  double d = std::hypot(0.5 * (s.a11 - s.a22), s.a12);
  SymEigen e{tr - d, tr + d, {}, {}};
  if (d == 0.0) {
    e.vmax = {1.0, 0.0};
  } else if (s.a11 >= s.a22) {
    Vec2 v{s.a11 - e.lmin, s.a12};
    e.vmax = v / norm(v);
  } else {
    Vec2 v{s.a12, s.a22 - e.lmin};
    e.vmax = v / norm(v);
  }
  e.vmin = perp(e.vmax);
  return e;
}

}  // namespace cauchylab
