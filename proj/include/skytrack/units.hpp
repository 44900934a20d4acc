#pragma once

// U.S. aviation unit conversions. All factors are exact definitions.
namespace skytrack::units {

inline constexpr double kMetersPerFoot = 0.3048;
inline constexpr double kMpsPerKnot = 1852.0 / 3600.0;
inline constexpr double kFeetPerMeter = 1.0 / kMetersPerFoot;
inline constexpr double kFpmPerMps = 60.0 / kMetersPerFoot;
inline constexpr double kMetersPerNauticalMile = 1852.0;

constexpr double meters_to_feet(double m) { return m / kMetersPerFoot; }
constexpr double feet_to_meters(double ft) { return ft * kMetersPerFoot; }
constexpr double mps_to_knots(double v) { return v / kMpsPerKnot; }
constexpr double knots_to_mps(double kt) { return kt * kMpsPerKnot; }
constexpr double mps_to_fpm(double v) { return v * kFpmPerMps; }
constexpr double fpm_to_mps(double fpm) { return fpm / kFpmPerMps; }

}  // namespace skytrack::units
