#pragma once

#include "flowphd/types.hpp"

#include <span>

namespace flowphd {

/// Constant-angular-velocity transition: positions advance by rate * dt,
/// then `noise` is added to all four components and the result is
/// re-wrapped. Throws std::invalid_argument for dt <= 0.
TargetState transition(const TargetState& state, double dt, const Vec4& noise);

/// Measurement model: position projection of the state plus noise,
/// wrapped into the measurement domain.
Measurement measure(const TargetState& state, const Vec2& noise);

/// Bivariate normal density of the wrapped residual measure(state, 0) - z
/// under covariance R. Throws NumericalError when R is not positive
/// definite.
double gaussian_likelihood(const TargetState& state, const Measurement& z, const Mat2& measurement_noise);

/// Index of the measurement nearest to the state in wrapped az/el
/// distance; ties broken by the lowest index. Throws
/// std::invalid_argument when the set is empty.
std::size_t nearest_measurement_index(const TargetState& state, std::span<const Measurement> measurements);

/// gaussian_likelihood against the nearest member of the measurement set.
double nearest_measurement_likelihood(const TargetState& state, std::span<const Measurement> measurements,
                                      const Mat2& measurement_noise);

/// Gradient of gaussian_likelihood with respect to the 4-dim state:
/// -h * H^T R^-1 (H m - z) with H = [I2 | 0] and wrapped residual. The
/// rate components are always zero.
Vec4 likelihood_gradient(const TargetState& state, const Measurement& z, const Mat2& measurement_noise);

/// Hessian of gaussian_likelihood:
/// h * H^T [R^-1 r r^T R^-1 - R^-1] H, symmetric by construction; at zero
/// residual this is -h * H^T R^-1 H (negative semidefinite).
Mat4 likelihood_hessian(const TargetState& state, const Measurement& z, const Mat2& measurement_noise);

}  // namespace flowphd
