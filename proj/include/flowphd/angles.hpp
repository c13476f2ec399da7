#pragma once

namespace flowphd {

/// Wraps an azimuth into [0, 360).
double wrap_azimuth(double azimuth);

/// Clamps an elevation into [-90, 90].
double clamp_elevation(double elevation);

/// Signed shortest arc from `b` to `a`, in (-180, 180]. The antipodal tie
/// is broken to +180. Throws std::invalid_argument on non-finite input.
double wrap_angular_difference(double a, double b);

/// Euclidean distance between two az/el points with the azimuth
/// difference taken along the shortest arc.
double angular_distance(double az_a, double el_a, double az_b, double el_b);

}  // namespace flowphd
