#include "flowphd/angles.hpp"

#include <cmath>
#include <stdexcept>

namespace flowphd {

double wrap_azimuth(double azimuth) {
    double wrapped = std::fmod(azimuth, 360.0);
    if (wrapped < 0.0) {
        wrapped += 360.0;
    }
    return wrapped >= 360.0 ? 0.0 : wrapped;
}

double clamp_elevation(double elevation) {
    if (elevation < -90.0) {
        return -90.0;
    }
    if (elevation > 90.0) {
        return 90.0;
    }
    return elevation;
}

double wrap_angular_difference(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw std::invalid_argument("wrap_angular_difference: non-finite input");
    }
    double diff = std::remainder(a - b, 360.0);
    if (diff <= -180.0) {
        diff += 360.0;  // antipodal tie goes to +180
    }
    return diff;
}

double angular_distance(double az_a, double el_a, double az_b, double el_b) {
    const double d_az = wrap_angular_difference(az_a, az_b);
    const double d_el = el_a - el_b;
    return std::sqrt(d_az * d_az + d_el * d_el);
}

}  // namespace flowphd
