#include "flowphd/types.hpp"

#include "flowphd/angles.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace flowphd {

namespace {

void require_finite(double value, const char* what) {
    if (!std::isfinite(value)) {
        throw std::invalid_argument(std::string(what) + ": non-finite component");
    }
}

void require_spd(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument(std::string(what) + ": not square");
    }
    if (!m.isApprox(m.transpose(), 1e-12)) {
        throw std::invalid_argument(std::string(what) + ": not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument(std::string(what) + ": not positive definite");
    }
}

}  // namespace

TargetState::TargetState(double az, double el, double az_rate, double el_rate) {
    require_finite(az, "TargetState azimuth");
    require_finite(el, "TargetState elevation");
    require_finite(az_rate, "TargetState azimuth_rate");
    require_finite(el_rate, "TargetState elevation_rate");
    azimuth = wrap_azimuth(az);
    elevation = clamp_elevation(el);
    azimuth_rate = az_rate;
    elevation_rate = el_rate;
}

TargetState TargetState::from_vector(const Vec4& v) {
    return {v[0], v[1], v[2], v[3]};
}

Vec4 TargetState::to_vector() const {
    return {azimuth, elevation, azimuth_rate, elevation_rate};
}

Measurement::Measurement(double az, double el) {
    require_finite(az, "Measurement azimuth");
    require_finite(el, "Measurement elevation");
    azimuth = wrap_azimuth(az);
    elevation = clamp_elevation(el);
}

void NoiseModel::validate(double max_condition) const {
    require_spd(process_noise, "NoiseModel process_noise");
    require_spd(measurement_noise, "NoiseModel measurement_noise");
    Eigen::SelfAdjointEigenSolver<Mat2> solver(measurement_noise);
    const double smallest = solver.eigenvalues().minCoeff();
    const double largest = solver.eigenvalues().maxCoeff();
    if (!(smallest > 0.0) || largest / smallest > max_condition) {
        throw std::invalid_argument("NoiseModel measurement_noise: condition number too large");
    }
}

int round_half_up(double value) {
    return static_cast<int>(std::floor(value + 0.5));
}

}  // namespace flowphd
