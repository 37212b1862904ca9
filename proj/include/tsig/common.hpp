#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace tsig {

using cplx = std::complex<double>;
using Vec2 = std::array<double, 2>;

inline constexpr double pi = 3.14159265358979323846;

inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double s, const Vec2& a) { return {s * a[0], s * a[1]}; }
inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec2& a) { return std::hypot(a[0], a[1]); }
inline double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }
inline Vec2 unit_dir(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Error categories used across the toolkit.
struct geometry_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct mesh_integrity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct admissibility_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct solver_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct spectral_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct incompatibility_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// FNV-1a 64-bit, used for artifact/content hashing in manifests and caches.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}
inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull) {
  return fnv1a(s.data(), s.size(), h);
}
std::string to_hex(std::uint64_t h);

}  // namespace tsig
