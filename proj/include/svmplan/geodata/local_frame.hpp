#ifndef SVMPLAN_GEODATA_LOCAL_FRAME_HPP
#define SVMPLAN_GEODATA_LOCAL_FRAME_HPP

#include <array>
#include <cmath>

#include "svmplan/geodata/geodesy.hpp"

namespace svmplan::geodata {

/// Point in the local metric frame of a map: x east, y north (meters in the
/// tangent plane at the map origin), z height above sea level.
struct LocalPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const LocalPoint&, const LocalPoint&) = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 xy(const LocalPoint& p) { return {p.x, p.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

inline double distance3d(const LocalPoint& a, const LocalPoint& b) {
  const double dx = b.x - a.x, dy = b.y - a.y, dz = b.z - a.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// East-north tangent plane anchored at `origin`. A geographic point maps to
/// the (east, north) components of its ellipsoid-surface position relative to
/// the origin; the inverse is solved by Newton iteration, so the mapping is an
/// exact bijection within the planar hemisphere around the origin.
class LocalFrame {
public:
  LocalFrame() : LocalFrame(GeoPoint{}) {}

  explicit LocalFrame(const GeoPoint& origin) : origin_(origin) {
    require_valid(origin, "LocalFrame origin");
    const double phi0 = deg2rad(origin.latitude), lam0 = deg2rad(origin.longitude);
    sin_phi0_ = std::sin(phi0);
    cos_phi0_ = std::cos(phi0);
    sin_lam0_ = std::sin(lam0);
    cos_lam0_ = std::cos(lam0);
    origin_ecef_ = ecef(phi0, lam0);
  }

  const GeoPoint& origin() const { return origin_; }

  LocalPoint to_local(const GeoPoint& p) const {
    const auto e = ecef(deg2rad(p.latitude), deg2rad(p.longitude));
    const auto en = to_en({e[0] - origin_ecef_[0], e[1] - origin_ecef_[1], e[2] - origin_ecef_[2]});
    return {en[0], en[1], p.altitude.value_or(0.0)};
  }

  GeoPoint to_geo(const LocalPoint& p, bool with_altitude = true) const {
    using namespace wgs84;
    double phi = deg2rad(origin_.latitude), lam = deg2rad(origin_.longitude);
    {
      const double s = std::sin(phi);
      const double w = std::sqrt(1.0 - e2 * s * s);
      phi += p.y / (a * (1.0 - e2) / (w * w * w));
      lam += p.x / (a / w * std::cos(phi));
    }
    for (int iter = 0; iter < 30; ++iter) {
      const auto e = ecef(phi, lam);
      const auto en = to_en({e[0] - origin_ecef_[0], e[1] - origin_ecef_[1], e[2] - origin_ecef_[2]});
      const double re = p.x - en[0], rn = p.y - en[1];

      const double s = std::sin(phi), c = std::cos(phi);
      const double sl = std::sin(lam), cl = std::cos(lam);
      const double w = std::sqrt(1.0 - e2 * s * s);
      const double N = a / w;
      const double M = a * (1.0 - e2) / (w * w * w);
      const auto dphi = to_en({-M * s * cl, -M * s * sl, M * c});
      const auto dlam = to_en({-N * c * sl, N * c * cl, 0.0});
      const double det = dphi[0] * dlam[1] - dphi[1] * dlam[0];
      const double step_phi = (re * dlam[1] - rn * dlam[0]) / det;
      const double step_lam = (dphi[0] * rn - dphi[1] * re) / det;
      phi += step_phi;
      lam += step_lam;
      if (std::abs(step_phi) < 1e-15 && std::abs(step_lam) < 1e-15) break;
    }
    GeoPoint out{rad2deg(phi), rad2deg(lam), std::nullopt};
    if (with_altitude) out.altitude = p.z;
    return out;
  }

private:
  static std::array<double, 3> ecef(double phi, double lam) {
    using namespace wgs84;
    const double s = std::sin(phi);
    const double N = a / std::sqrt(1.0 - e2 * s * s);
    return {N * std::cos(phi) * std::cos(lam), N * std::cos(phi) * std::sin(lam), N * (1.0 - e2) * s};
  }

  std::array<double, 2> to_en(const std::array<double, 3>& d) const {
    return {-sin_lam0_ * d[0] + cos_lam0_ * d[1],
            -sin_phi0_ * cos_lam0_ * d[0] - sin_phi0_ * sin_lam0_ * d[1] + cos_phi0_ * d[2]};
  }

  GeoPoint origin_;
  double sin_phi0_ = 0, cos_phi0_ = 1, sin_lam0_ = 0, cos_lam0_ = 1;
  std::array<double, 3> origin_ecef_{};
};

} // namespace svmplan::geodata

#endif // SVMPLAN_GEODATA_LOCAL_FRAME_HPP
