#include "flowphd/model.hpp"

#include "flowphd/angles.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <numbers>

namespace flowphd {

namespace {

Vec2 wrapped_residual(const TargetState& state, const Measurement& z) {
    return {wrap_angular_difference(state.azimuth, z.azimuth), state.elevation - z.elevation};
}

Eigen::LLT<Mat2> factorize(const Mat2& measurement_noise) {
    Eigen::LLT<Mat2> llt(measurement_noise);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("measurement covariance is singular or not positive definite");
    }
    return llt;
}

double density(const Eigen::LLT<Mat2>& llt, const Vec2& residual) {
    const double quad = residual.dot(llt.solve(residual));
    const auto& chol = llt.matrixLLT();
    const double det = chol(0, 0) * chol(0, 0) * chol(1, 1) * chol(1, 1);
    return std::exp(-0.5 * quad) / (2.0 * std::numbers::pi * std::sqrt(det));
}

}  // namespace

TargetState transition(const TargetState& state, double dt, const Vec4& noise) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("transition: dt must be positive");
    }
    return {state.azimuth + state.azimuth_rate * dt + noise[0],
            state.elevation + state.elevation_rate * dt + noise[1],
            state.azimuth_rate + noise[2],
            state.elevation_rate + noise[3]};
}

Measurement measure(const TargetState& state, const Vec2& noise) {
    return {state.azimuth + noise[0], state.elevation + noise[1]};
}

double gaussian_likelihood(const TargetState& state, const Measurement& z, const Mat2& measurement_noise) {
    return density(factorize(measurement_noise), wrapped_residual(state, z));
}

std::size_t nearest_measurement_index(const TargetState& state, std::span<const Measurement> measurements) {
    if (measurements.empty()) {
        throw std::invalid_argument("nearest_measurement_index: empty measurement set");
    }
    std::size_t best = 0;
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < measurements.size(); ++r) {
        const double d = angular_distance(state.azimuth, state.elevation, measurements[r].azimuth,
                                          measurements[r].elevation);
        if (d < best_distance) {
            best_distance = d;
            best = r;
        }
    }
    return best;
}

double nearest_measurement_likelihood(const TargetState& state, std::span<const Measurement> measurements,
                                      const Mat2& measurement_noise) {
    return gaussian_likelihood(state, measurements[nearest_measurement_index(state, measurements)],
                               measurement_noise);
}

Vec4 likelihood_gradient(const TargetState& state, const Measurement& z, const Mat2& measurement_noise) {
    const auto llt = factorize(measurement_noise);
    const Vec2 residual = wrapped_residual(state, z);
    const double h = density(llt, residual);
    Vec4 gradient = Vec4::Zero();
    gradient.head<2>() = -h * llt.solve(residual);
    return gradient;
}

Mat4 likelihood_hessian(const TargetState& state, const Measurement& z, const Mat2& measurement_noise) {
    const auto llt = factorize(measurement_noise);
    const Vec2 residual = wrapped_residual(state, z);
    const double h = density(llt, residual);
    const Vec2 scaled = llt.solve(residual);
    Mat2 inverse = llt.solve(Mat2::Identity());
    inverse = 0.5 * (inverse + inverse.transpose()).eval();  // keep the block exactly symmetric
    Mat4 hessian = Mat4::Zero();
    hessian.topLeftCorner<2, 2>() = h * (scaled * scaled.transpose() - inverse);
    return hessian;
}

}  // namespace flowphd
