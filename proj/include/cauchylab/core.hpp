#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace cauchylab {

enum class ErrorKind {
  parameter,
  no_path,
  resolution,
  solver,
  indefinite,
  radius_too_large,
  factorization,
  range,
  fit,
  ellipticity,
  singular,
  topology,
  degenerate_measure,
  algebra,
  propagation_domain,
  size,
  geometry,
  extension_consistency,
  usage,
};

const char* kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, double detail = 0.0)
      : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind), detail_(detail) {}
  ErrorKind kind() const { return kind_; }
  // iteration count for solver errors, max deviation for radius errors, etc.
  double detail() const { return detail_; }

 private:
  ErrorKind kind_;
  double detail_;
};

inline void require(bool cond, ErrorKind k, const std::string& msg) {
  if (!cond) throw Error(k, msg);
}

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

// 2x2 matrix, row major
struct Mat2 {
  double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;

  static Mat2 identity() { return {}; }
  static Mat2 diag(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }
  double det() const { return a11 * a22 - a12 * a21; }
  double trace() const { return a11 + a22; }
  Mat2 transpose() const { return {a11, a21, a12, a22}; }
  Mat2 inverse() const {
    double d = det();
    return {a22 / d, -a12 / d, -a21 / d, a11 / d};
  }
  Vec2 operator*(Vec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
  Mat2 operator*(const Mat2& b) const {
    return {a11 * b.a11 + a12 * b.a21, a11 * b.a12 + a12 * b.a22, a21 * b.a11 + a22 * b.a21,
            a21 * b.a12 + a22 * b.a22};
  }
  Mat2 scaled(double s) const { return {s * a11, s * a12, s * a21, s * a22}; }
  Mat2 sym() const {
    double o = 0.5 * (a12 + a21);
    return {a11, o, o, a22};
  }
};

struct SymEigen {
  double lmin, lmax;
  Vec2 vmin, vmax;  // unit eigenvectors
};

// eigen-decomposition of the symmetric part
SymEigen sym_eigen(const Mat2& m);

constexpr double kPi = 3.14159265358979323846;

}  // namespace cauchylab
