#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include "qten/errors.hpp"

namespace qten {

/// Real quaternion q = w + x*i + y*j + z*k with i^2 = j^2 = k^2 = ijk = -1.
/// Multiplication follows the Hamilton convention: i*j = k = -j*i.
struct Quaternion {
  double w = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Quaternion() = default;
  constexpr Quaternion(double w_, double x_, double y_, double z_)
      : w(w_), x(x_), y(y_), z(z_) {}
  /// Embeds a real number.
  constexpr Quaternion(double r) : w(r) {}

  static constexpr Quaternion unit_i() { return {0.0, 1.0, 0.0, 0.0}; }
  static constexpr Quaternion unit_j() { return {0.0, 0.0, 1.0, 0.0}; }
  static constexpr Quaternion unit_k() { return {0.0, 0.0, 0.0, 1.0}; }

  constexpr bool is_zero() const { return w == 0.0 && x == 0.0 && y == 0.0 && z == 0.0; }
  constexpr bool is_real() const { return x == 0.0 && y == 0.0 && z == 0.0; }

  constexpr Quaternion operator-() const { return {-w, -x, -y, -z}; }

  constexpr Quaternion& operator+=(const Quaternion& o) {
    w += o.w; x += o.x; y += o.y; z += o.z;
    return *this;
  }
  constexpr Quaternion& operator-=(const Quaternion& o) {
    w -= o.w; x -= o.x; y -= o.y; z -= o.z;
    return *this;
  }
  constexpr Quaternion& operator*=(double s) {
    w *= s; x *= s; y *= s; z *= s;
    return *this;
  }
};

constexpr Quaternion operator+(Quaternion a, const Quaternion& b) { return a += b; }
constexpr Quaternion operator-(Quaternion a, const Quaternion& b) { return a -= b; }
constexpr Quaternion operator*(Quaternion a, double s) { return a *= s; }
constexpr Quaternion operator*(double s, Quaternion a) { return a *= s; }

/// Hamilton product. Not commutative.
constexpr Quaternion operator*(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

constexpr bool operator==(const Quaternion& a, const Quaternion& b) {
  return a.w == b.w && a.x == b.x && a.y == b.y && a.z == b.z;
}
constexpr bool operator!=(const Quaternion& a, const Quaternion& b) { return !(a == b); }

constexpr Quaternion conj(const Quaternion& q) { return {q.w, -q.x, -q.y, -q.z}; }

constexpr double abs_sq(const Quaternion& q) {
  return q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z;
}

inline double abs(const Quaternion& q) { return std::sqrt(abs_sq(q)); }

/// Multiplicative inverse conj(q)/|q|^2. Throws DomainError for q = 0.
inline Quaternion inverse(const Quaternion& q) {
  const double n2 = abs_sq(q);
  if (n2 == 0.0) throw DomainError("inverse of zero quaternion");
  return conj(q) * (1.0 / n2);
}

/// Exponential of a pure quaternion u*theta: cos(theta) + u*sin(theta).
inline Quaternion exp_pure(const Quaternion& v) {
  const double theta = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
  if (theta == 0.0) return {1.0, 0.0, 0.0, 0.0};
  const double s = std::sin(theta) / theta;
  return {std::cos(theta), v.x * s, v.y * s, v.z * s};
}

/// Polar decomposition q = modulus * exp(axis_angle); axis_angle is pure,
/// its direction the normalized imaginary part, its length in [0, pi].
struct PolarForm {
  double modulus = 0.0;
  Quaternion axis_angle;  // pure: axis * angle
};

/// Throws DomainError for q = 0. Real q maps to angle 0 (positive) or to
/// axis i with angle pi (negative); that branch keeps exp(arg q) well defined.
inline PolarForm to_polar(const Quaternion& q) {
  if (q.is_zero()) throw DomainError("polar form of zero quaternion");
  const double m = abs(q);
  const double v = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
  if (v == 0.0) {
    if (q.w > 0.0) return {m, Quaternion{}};
    constexpr double pi = 3.14159265358979323846;
    return {m, {0.0, pi, 0.0, 0.0}};
  }
  const double theta = std::atan2(v, q.w);
  const double s = theta / v;
  return {m, {0.0, q.x * s, q.y * s, q.z * s}};
}

inline Quaternion from_polar(const PolarForm& p) {
  return p.modulus * exp_pure(p.axis_angle);
}

/// Cayley-Dickson pair (z1, z2) with q = z1 + z2*j, z1 = w + x*i, z2 = y + z*i.
/// The component permutation is exact, so the round trip is bit-exact.
inline std::pair<std::complex<double>, std::complex<double>> cayley_dickson(
    const Quaternion& q) {
  return {{q.w, q.x}, {q.y, q.z}};
}

inline Quaternion from_cayley_dickson(const std::complex<double>& z1,
                                      const std::complex<double>& z2) {
  return {z1.real(), z1.imag(), z2.real(), z2.imag()};
}

inline std::string to_string(const Quaternion& q) {
  auto term = [](double v, const char* unit) {
    std::string s = (v < 0.0 ? " - " : " + ") + std::to_string(v < 0.0 ? -v : v);
    return s + unit;
  };
  return std::to_string(q.w) + term(q.x, "i") + term(q.y, "j") + term(q.z, "k");
}

}  // namespace qten
