#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace flowphd {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

/// Thrown when a linear-algebra step cannot proceed (singular or
/// non-positive-definite matrix, degenerate particle weights).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown for malformed scenario or experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Azimuth/elevation state with angular rates, all in degrees and
/// degrees per second. Azimuth is stored wrapped into [0, 360),
/// elevation clamped to [-90, 90].
struct TargetState {
    double azimuth = 0.0;
    double elevation = 0.0;
    double azimuth_rate = 0.0;
    double elevation_rate = 0.0;

    TargetState() = default;
    TargetState(double az, double el, double az_rate, double el_rate);

    static TargetState from_vector(const Vec4& v);
    Vec4 to_vector() const;
    Vec2 position() const { return {azimuth, elevation}; }
};

/// A DOA observation: azimuth in [0, 360), elevation in [-90, 90].
struct Measurement {
    double azimuth = 0.0;
    double elevation = 0.0;

    Measurement() = default;
    Measurement(double az, double el);

    Vec2 to_vector() const { return {azimuth, elevation}; }
};

struct Particle {
    TargetState state;
    double weight = 0.0;
    Mat4 covariance = Mat4::Identity();
};

/// Process and measurement noise covariances. Defaults put measurement
/// noise at the few-degree scale typical for DOA estimates.
struct NoiseModel {
    Mat4 process_noise = Vec4(1.0, 1.0, 0.25, 0.25).asDiagonal();
    Mat2 measurement_noise = Vec2(4.0, 4.0).asDiagonal();

    /// Checks both matrices are SPD and that the measurement covariance
    /// is invertible with condition number below `max_condition`.
    void validate(double max_condition = 1e12) const;
};

/// Symmetric square root of a positive-semidefinite matrix, suitable for
/// sampling correlated noise. Throws std::invalid_argument when the input
/// has a meaningfully negative eigenvalue.
template <int N>
Eigen::Matrix<double, N, N> covariance_sqrt(const Eigen::Matrix<double, N, N>& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> solver(m);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("covariance_sqrt: eigendecomposition failed");
    }
    const auto& values = solver.eigenvalues();
    const double tolerance = 1e-9 * std::max(1.0, values.cwiseAbs().maxCoeff());
    if ((values.array() < -tolerance).any()) {
        throw std::invalid_argument("covariance_sqrt: matrix is not positive semidefinite");
    }
    return solver.eigenvectors() * values.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
           solver.eigenvectors().transpose();
}

/// Rounds half-up to an integer (2.5 -> 3); inputs are non-negative counts.
int round_half_up(double value);

}  // namespace flowphd
