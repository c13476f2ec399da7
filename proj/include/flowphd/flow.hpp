#pragma once

#include "flowphd/phd.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace flowphd {

enum class FlowKind { None, Npf, Ipf };

struct FlowConfig {
    int n_lambda_steps = 20;         // N_lambda
    double diffusion = 0.0;          // upsilon, Wiener term scale
    double sensor_resolution = 0.1;  // degrees; steps below this freeze the particle
    double jitter = 1e-8;            // starting shift for regularized solves

    double delta_lambda() const { return 1.0 / static_cast<double>(n_lambda_steps); }
    void validate() const;
};

struct FlowResult {
    Vec4 drift = Vec4::Zero();
    bool ok = true;  // false: solve failed or likelihood underflowed; drift is zero
};

/// Frozen pre-step view of a population used by the intensity flow: the
/// per-measurement normalizers are computed once against the states as
/// they were when the snapshot was taken.
struct PopulationSnapshot {
    std::vector<Particle> particles;
    std::size_t surviving_count = 0;
    Eigen::MatrixXd likelihood;       // surviving x |Z|
    std::vector<double> normalizers;  // G^r per measurement
};

PopulationSnapshot make_population_snapshot(const ParticlePopulation& pop,
                                            std::span<const Measurement> measurements,
                                            const FilterConfig& config);

/// Birth intensity credited to a born particle for measurement z:
/// gamma * max(0, 1 - sum over surviving of h * w). The birth intensity
/// is uniform, so the born particle only fixes the evaluation point.
double birth_intensity(const Particle& born, const Measurement& z, const ParticlePopulation& pop,
                       const FilterConfig& config);

/// Per-measurement flow normalizer:
/// kappa + sum over born of S + sum over surviving of h * w.
/// Clamped to a tiny positive floor (with a diagnostic) on underflow.
double flow_normalizer(const Measurement& z, const ParticlePopulation& pop, const FilterConfig& config);

/// Non-zero-diffusion flow drift against the nearest measurement:
/// f = -[-P^-1 + lambda * grad^2 ln h]^-1 (grad ln h).
/// The log-derivatives are formed from the likelihood gradient/Hessian;
/// when the likelihood underflows, or the bracket stays singular after
/// jitter escalation, the result is zero drift with ok = false.
FlowResult npf_flow(const Particle& particle, std::span<const Measurement> measurements,
                    const Mat2& measurement_noise, double lambda, const FlowConfig& config = {});

/// Intensity flow drift for one surviving particle: per-measurement
/// gradient and Hessian terms scaled by p_D / G^r, with the
/// state-independent prior curvature -P^-1 completing the bracket.
FlowResult ipf_flow(std::size_t particle_index, const PopulationSnapshot& snapshot,
                    std::span<const Measurement> measurements, const FilterConfig& filter_config,
                    const FlowConfig& flow_config, double lambda);

/// Runs the lambda loop (lambda_j = j * delta_lambda, j = 1..N_lambda):
/// each step applies delta = f * delta_lambda + upsilon * w and freezes a
/// particle for the remaining steps once its displacement drops below
/// the sensor resolution. The intensity flow migrates surviving
/// particles only; the NPF migrates the whole population. FlowKind::None
/// and empty measurement sets are no-ops.
ParticlePopulation migrate(const ParticlePopulation& pop, std::span<const Measurement> measurements,
                           FlowKind kind, const FlowConfig& flow_config, const FilterConfig& filter_config,
                           Rng& rng);

}  // namespace flowphd
