#ifndef SVMPLAN_GEODATA_GEODESY_HPP
#define SVMPLAN_GEODATA_GEODESY_HPP

#include <cmath>
#include <tuple>
#include <numbers>
#include <optional>
#include <sstream>

#include "svmplan/error.hpp"

namespace svmplan::geodata {

/// WGS-84 ellipsoid constants.
namespace wgs84 {
inline constexpr double a = 6378137.0;
inline constexpr double f = 1.0 / 298.257223563;
inline constexpr double b = a * (1.0 - f);
inline constexpr double e2 = f * (2.0 - f);
} // namespace wgs84

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Geographic position, WGS-84 decimal degrees. Altitude in meters above
/// sea level; absent for 2D map vertices.
struct GeoPoint {
  double latitude = 0.0;
  double longitude = 0.0;
  std::optional<double> altitude;

  bool valid() const {
    return std::isfinite(latitude) && std::isfinite(longitude) && latitude >= -90.0 &&
           latitude <= 90.0 && longitude >= -180.0 && longitude <= 180.0;
  }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

inline void require_valid(const GeoPoint& p, const char* what) {
  if (!p.valid()) {
    std::ostringstream os;
    os << what << ": invalid coordinate (" << p.latitude << ", " << p.longitude << ")";
    throw InvalidArgument(os.str());
  }
}

struct VincentyOptions {
  double tolerance = 1e-12; // radians, on the auxiliary-sphere longitude
  int max_iterations = 200;
};

/// Geodesic distance on the WGS-84 ellipsoid by Vincenty's inverse method.
/// Throws NonConvergence for (nearly) antipodal pairs. The endpoints are put
/// in a canonical order first, so swapping them gives the identical result.
inline double vincenty_distance(const GeoPoint& q1, const GeoPoint& q2,
                                const VincentyOptions& opt = {}) {
  require_valid(q1, "vincenty_distance");
  require_valid(q2, "vincenty_distance");
  using namespace wgs84;
  const bool swap = std::tie(q2.latitude, q2.longitude) < std::tie(q1.latitude, q1.longitude);
  const GeoPoint& p1 = swap ? q2 : q1;
  const GeoPoint& p2 = swap ? q1 : q2;

  const double L = deg2rad(std::remainder(p2.longitude - p1.longitude, 360.0));
  const double U1 = std::atan((1.0 - f) * std::tan(deg2rad(p1.latitude)));
  const double U2 = std::atan((1.0 - f) * std::tan(deg2rad(p2.latitude)));
  const double sinU1 = std::sin(U1), cosU1 = std::cos(U1);
  const double sinU2 = std::sin(U2), cosU2 = std::cos(U2);

  double lambda = L;
  double sin_sigma = 0, cos_sigma = 0, sigma = 0, cos2_alpha = 0, cos_2sigma_m = 0;
  bool converged = false;
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    const double sin_lambda = std::sin(lambda), cos_lambda = std::cos(lambda);
    const double t1 = cosU2 * sin_lambda;
    const double t2 = cosU1 * sinU2 - sinU1 * cosU2 * cos_lambda;
    sin_sigma = std::sqrt(t1 * t1 + t2 * t2);
    if (sin_sigma == 0.0) return 0.0; // coincident points
    cos_sigma = sinU1 * sinU2 + cosU1 * cosU2 * cos_lambda;
    sigma = std::atan2(sin_sigma, cos_sigma);
    const double sin_alpha = cosU1 * cosU2 * sin_lambda / sin_sigma;
    cos2_alpha = 1.0 - sin_alpha * sin_alpha;
    // equatorial line: cos2_alpha = 0
    cos_2sigma_m = cos2_alpha != 0.0 ? cos_sigma - 2.0 * sinU1 * sinU2 / cos2_alpha : 0.0;
    const double C = f / 16.0 * cos2_alpha * (4.0 + f * (4.0 - 3.0 * cos2_alpha));
    const double prev = lambda;
    lambda = L + (1.0 - C) * f * sin_alpha *
                     (sigma + C * sin_sigma *
                                  (cos_2sigma_m + C * cos_sigma * (-1.0 + 2.0 * cos_2sigma_m * cos_2sigma_m)));
    if (std::abs(lambda) > std::numbers::pi) break;
    if (std::abs(lambda - prev) <= opt.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NonConvergence("vincenty_distance: no convergence (near-antipodal points)");

  const double u2 = cos2_alpha * (a * a - b * b) / (b * b);
  const double A = 1.0 + u2 / 16384.0 * (4096.0 + u2 * (-768.0 + u2 * (320.0 - 175.0 * u2)));
  const double B = u2 / 1024.0 * (256.0 + u2 * (-128.0 + u2 * (74.0 - 47.0 * u2)));
  const double c2 = cos_2sigma_m * cos_2sigma_m;
  const double delta_sigma =
      B * sin_sigma *
      (cos_2sigma_m + B / 4.0 *
                          (cos_sigma * (-1.0 + 2.0 * c2) -
                           B / 6.0 * cos_2sigma_m * (-3.0 + 4.0 * sin_sigma * sin_sigma) * (-3.0 + 4.0 * c2)));
  return b * A * (sigma - delta_sigma);
}

/// Great-circle distance on a sphere of the WGS-84 mean radius.
inline double spherical_distance(const GeoPoint& p1, const GeoPoint& p2) {
  constexpr double mean_radius = (2.0 * wgs84::a + wgs84::b) / 3.0;
  const double phi1 = deg2rad(p1.latitude), phi2 = deg2rad(p2.latitude);
  const double dphi = phi2 - phi1;
  const double dlambda = deg2rad(p2.longitude - p1.longitude);
  const double h = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) * std::sin(dlambda / 2);
  return 2.0 * mean_radius * std::asin(std::min(1.0, std::sqrt(h)));
}

struct GeodesicDistance {
  double meters = 0.0;
  bool approximate = false; // true when Vincenty failed and the sphere was used
};

/// Vincenty with the spherical fallback for the non-convergent case.
inline GeodesicDistance geodesic_distance(const GeoPoint& p1, const GeoPoint& p2) {
  try {
    return {vincenty_distance(p1, p2), false};
  } catch (const NonConvergence&) {
    return {spherical_distance(p1, p2), true};
  }
}

} // namespace svmplan::geodata

#endif // SVMPLAN_GEODATA_GEODESY_HPP
