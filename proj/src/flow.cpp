#include "flowphd/flow.hpp"

#include "flowphd/angles.hpp"
#include "flowphd/diag.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace flowphd {

namespace {

constexpr double kMinLikelihood = 1e-300;
constexpr double kNormalizerFloor = 1e-300;
constexpr double kMaxJitter = 1e-2;

/// Solves bracket * x = rhs by LDLT, shifting the bracket by -jitter * I
/// in escalating decades when the factorization is inaccurate. The
/// bracket is dominated by the negative prior curvature, so the shift
/// pushes it away from singularity.
bool solve_regularized(const Mat4& bracket, const Vec4& rhs, double initial_jitter, Vec4& solution) {
    double shift = 0.0;
    for (;;) {
        const Mat4 shifted = bracket - shift * Mat4::Identity();
        Eigen::LDLT<Mat4> ldlt(shifted);
        if (ldlt.info() == Eigen::Success) {
            const Vec4 x = ldlt.solve(rhs);
            if (x.allFinite()) {
                const double residual = (shifted * x - rhs).norm();
                const double scale = shifted.norm() * x.norm() + rhs.norm();
                if (residual <= 1e-9 * std::max(scale, 1e-300)) {
                    solution = x;
                    return true;
                }
            }
        }
        shift = shift == 0.0 ? initial_jitter : shift * 10.0;
        if (shift > kMaxJitter) {
            return false;
        }
    }
}

bool invert_spd(const Mat4& m, Mat4& inverse) {
    Eigen::LLT<Mat4> llt(m);
    if (llt.info() != Eigen::Success) {
        return false;
    }
    inverse = llt.solve(Mat4::Identity());
    return true;
}

TargetState offset_state(const TargetState& state, const Vec4& delta) {
    return {state.azimuth + delta[0], state.elevation + delta[1], state.azimuth_rate + delta[2],
            state.elevation_rate + delta[3]};
}

double displacement_norm(const Vec4& delta) {
    const double d_az = wrap_angular_difference(delta[0], 0.0);
    return std::sqrt(d_az * d_az + delta[1] * delta[1] + delta[2] * delta[2] + delta[3] * delta[3]);
}

}  // namespace

void FlowConfig::validate() const {
    if (n_lambda_steps < 1) {
        throw std::invalid_argument("FlowConfig n_lambda_steps: must be at least 1");
    }
    if (!(diffusion >= 0.0)) {
        throw std::invalid_argument("FlowConfig diffusion: must be non-negative");
    }
    if (!(sensor_resolution > 0.0)) {
        throw std::invalid_argument("FlowConfig sensor_resolution: must be positive");
    }
    if (!(jitter > 0.0)) {
        throw std::invalid_argument("FlowConfig jitter: must be positive");
    }
}

double birth_intensity(const Particle& born, const Measurement& z, const ParticlePopulation& pop,
                       const FilterConfig& config) {
    (void)born;  // the birth intensity is uniform over the scene
    double surviving_mass = 0.0;
    for (std::size_t i = 0; i < pop.surviving_count; ++i) {
        surviving_mass += gaussian_likelihood(pop.particles[i].state, z, config.noise.measurement_noise) *
                          pop.particles[i].weight;
    }
    return config.birth_weight * std::max(0.0, 1.0 - surviving_mass);
}

double flow_normalizer(const Measurement& z, const ParticlePopulation& pop, const FilterConfig& config) {
    double surviving_mass = 0.0;
    for (std::size_t i = 0; i < pop.surviving_count; ++i) {
        surviving_mass += gaussian_likelihood(pop.particles[i].state, z, config.noise.measurement_noise) *
                          pop.particles[i].weight;
    }
    double born_sum = 0.0;
    for (std::size_t i = pop.surviving_count; i < pop.size(); ++i) {
        born_sum += birth_intensity(pop.particles[i], z, pop, config);
    }
    double normalizer = config.clutter_intensity + born_sum + surviving_mass;
    if (normalizer < kNormalizerFloor) {
        diag::warn("flow_normalizer: underflow; clamping to floor");
        normalizer = kNormalizerFloor;
    }
    return normalizer;
}

PopulationSnapshot make_population_snapshot(const ParticlePopulation& pop,
                                            std::span<const Measurement> measurements,
                                            const FilterConfig& config) {
    PopulationSnapshot snapshot;
    snapshot.particles = pop.particles;
    snapshot.surviving_count = pop.surviving_count;
    const auto n_surviving = static_cast<Eigen::Index>(pop.surviving_count);
    const auto n_meas = static_cast<Eigen::Index>(measurements.size());
    snapshot.likelihood.resize(n_surviving, n_meas);
    snapshot.normalizers.resize(measurements.size());

    for (Eigen::Index r = 0; r < n_meas; ++r) {
        double surviving_mass = 0.0;
        for (Eigen::Index i = 0; i < n_surviving; ++i) {
            snapshot.likelihood(i, r) = gaussian_likelihood(
                pop.particles[static_cast<std::size_t>(i)].state, measurements[static_cast<std::size_t>(r)],
                config.noise.measurement_noise);
            surviving_mass +=
                snapshot.likelihood(i, r) * pop.particles[static_cast<std::size_t>(i)].weight;
        }
        // uniform birth intensity: every born particle contributes the same S
        const double birth_term = static_cast<double>(pop.born_count) * config.birth_weight *
                                  std::max(0.0, 1.0 - surviving_mass);
        double normalizer = config.clutter_intensity + birth_term + surviving_mass;
        if (normalizer < kNormalizerFloor) {
            diag::warn("make_population_snapshot: normalizer underflow; clamping to floor");
            normalizer = kNormalizerFloor;
        }
        snapshot.normalizers[static_cast<std::size_t>(r)] = normalizer;
    }
    return snapshot;
}

FlowResult npf_flow(const Particle& particle, std::span<const Measurement> measurements,
                    const Mat2& measurement_noise, double lambda, const FlowConfig& config) {
    if (measurements.empty()) {
        throw std::invalid_argument("npf_flow: empty measurement set");
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw std::invalid_argument("npf_flow: lambda must be in [0, 1]");
    }

    const Measurement& nearest = measurements[nearest_measurement_index(particle.state, measurements)];
    const double h = gaussian_likelihood(particle.state, nearest, measurement_noise);
    FlowResult result;
    if (h < kMinLikelihood) {
        diag::warn("npf_flow: likelihood underflow; zero flow");
        result.ok = false;
        return result;
    }
    const Vec4 gradient = likelihood_gradient(particle.state, nearest, measurement_noise);
    const Mat4 hessian = likelihood_hessian(particle.state, nearest, measurement_noise);
    const Vec4 grad_log = gradient / h;
    const Mat4 hess_log = hessian / h - (gradient * gradient.transpose()) / (h * h);

    Mat4 prior_inverse;
    if (!invert_spd(particle.covariance, prior_inverse)) {
        diag::warn("npf_flow: particle covariance not positive definite; zero flow");
        result.ok = false;
        return result;
    }

    const Mat4 bracket = -prior_inverse + lambda * hess_log;
    Vec4 solution;
    if (!solve_regularized(bracket, grad_log, config.jitter, solution)) {
        diag::warn("npf_flow: bracket stayed singular after jitter escalation; zero flow");
        result.ok = false;
        return result;
    }
    result.drift = -solution;
    return result;
}

FlowResult ipf_flow(std::size_t particle_index, const PopulationSnapshot& snapshot,
                    std::span<const Measurement> measurements, const FilterConfig& filter_config,
                    const FlowConfig& flow_config, double lambda) {
    if (particle_index >= snapshot.surviving_count) {
        throw std::invalid_argument("ipf_flow: intensity flow applies to surviving particles only");
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw std::invalid_argument("ipf_flow: lambda must be in [0, 1]");
    }
    const Particle& particle = snapshot.particles[particle_index];
    const double p_d = filter_config.detection_probability;

    Vec4 drive = Vec4::Zero();
    Mat4 curvature = Mat4::Zero();
    for (std::size_t r = 0; r < measurements.size(); ++r) {
        const double normalizer = snapshot.normalizers[r];
        drive += p_d / normalizer *
                 likelihood_gradient(particle.state, measurements[r], filter_config.noise.measurement_noise);
        curvature +=
            lambda * p_d / normalizer *
            likelihood_hessian(particle.state, measurements[r], filter_config.noise.measurement_noise);
    }

    FlowResult result;
    Mat4 prior_inverse;
    if (!invert_spd(particle.covariance, prior_inverse)) {
        diag::warn("ipf_flow: particle covariance not positive definite; zero flow");
        result.ok = false;
        return result;
    }
    // the state-independent curvature of ln(omega) is realized as -P^-1
    const Mat4 bracket = curvature - prior_inverse;
    Vec4 solution;
    if (!solve_regularized(bracket, drive, flow_config.jitter, solution)) {
        diag::warn("ipf_flow: bracket stayed singular after jitter escalation; zero flow");
        result.ok = false;
        return result;
    }
    result.drift = -solution;
    return result;
}

ParticlePopulation migrate(const ParticlePopulation& pop, std::span<const Measurement> measurements,
                           FlowKind kind, const FlowConfig& flow_config, const FilterConfig& filter_config,
                           Rng& rng) {
    if (kind == FlowKind::None || measurements.empty() || pop.particles.empty()) {
        return pop;
    }
    flow_config.validate();

    ParticlePopulation out = pop;
    const std::size_t movable = kind == FlowKind::Ipf ? out.surviving_count : out.size();
    if (movable == 0) {
        return out;
    }

    // one seed-derived stream per particle index, so scheduling cannot
    // change the Wiener samples
    const std::uint64_t stream_base = rng.raw();
    std::vector<Rng> streams;
    if (flow_config.diffusion > 0.0) {
        streams.reserve(movable);
        for (std::size_t i = 0; i < movable; ++i) {
            streams.emplace_back(Rng::mix(stream_base, i));
        }
    }

    std::vector<bool> frozen(movable, false);
    const double d_lambda = flow_config.delta_lambda();
    for (int step = 1; step <= flow_config.n_lambda_steps; ++step) {
        const double lambda = static_cast<double>(step) / static_cast<double>(flow_config.n_lambda_steps);
        PopulationSnapshot snapshot;
        if (kind == FlowKind::Ipf) {
            snapshot = make_population_snapshot(out, measurements, filter_config);
        }
        for (std::size_t i = 0; i < movable; ++i) {
            if (frozen[i]) {
                continue;
            }
            const FlowResult flow =
                kind == FlowKind::Npf
                    ? npf_flow(out.particles[i], measurements, filter_config.noise.measurement_noise,
                               lambda, flow_config)
                    : ipf_flow(i, snapshot, measurements, filter_config, flow_config, lambda);
            if (!flow.ok) {
                frozen[i] = true;
                continue;
            }
            Vec4 delta = flow.drift * d_lambda;
            if (flow_config.diffusion > 0.0) {
                delta += flow_config.diffusion * streams[i].normal_vec4();
            }
            out.particles[i].state = offset_state(out.particles[i].state, delta);
            if (displacement_norm(delta) < flow_config.sensor_resolution) {
                frozen[i] = true;  // below sensor resolution: skip the remaining steps
            }
        }
    }
    return out;
}

}  // namespace flowphd
