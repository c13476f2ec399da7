#pragma once

#include "flowphd/model.hpp"
#include "flowphd/rng.hpp"

#include <span>
#include <vector>

namespace flowphd {

/// Eigenvalue floor added to every cluster covariance.
inline constexpr double kCovarianceJitter = 1e-6;

/// Particle approximation of the PHD. Surviving particles always precede
/// born particles; the two counts partition the list.
struct ParticlePopulation {
    std::vector<Particle> particles;
    std::size_t surviving_count = 0;
    std::size_t born_count = 0;

    std::size_t size() const { return particles.size(); }
    double total_weight() const;
};

struct FilterConfig {
    double survival_probability = 0.99;      // q_s
    double detection_probability = 0.9;      // p_D
    double clutter_intensity = 1.0 / 64800;  // kappa, per square degree
    double birth_weight = 1e-5;              // gamma, per square degree
    int births_per_measurement = 50;         // N_B
    int particles_per_target = 50;
    double ess_fraction = 0.5;
    Mat2 birth_spread = Vec2(4.0, 4.0).asDiagonal();
    NoiseModel noise;

    void validate() const;
};

/// Survival prediction: every particle moves through the transition model
/// with sampled process noise and its weight is scaled by the survival
/// probability. The whole output counts as surviving.
ParticlePopulation predict(const ParticlePopulation& pop, double dt, const FilterConfig& config, Rng& rng);

/// Births: `births_per_measurement` particles per measurement, positions
/// uniform in the +-3 sigma box of `birth_spread` around the measurement,
/// rates drawn from the rate block of the process noise. Weights follow
/// the importance ratio gamma / (N_B * p_k) with p_k the uniform box
/// density, so all weights within one measurement's box are equal.
std::vector<Particle> spawn_births(std::span<const Measurement> measurements, const FilterConfig& config,
                                   Rng& rng);

/// Appends a birth block to a population that has none yet.
ParticlePopulation append_births(ParticlePopulation pop, std::vector<Particle> born);

/// PHD weight update with clutter intensity and detection probability.
/// With an empty measurement set only the missed-detection factor
/// (1 - p_D) applies. A collapsed per-measurement normalizer makes that
/// measurement's ratio term vanish (with a diagnostic) instead of
/// dividing by zero.
ParticlePopulation update_weights(const ParticlePopulation& pop, std::span<const Measurement> measurements,
                                  const FilterConfig& config);

/// Expected target count: the plain weight sum.
double estimate_count(const ParticlePopulation& pop);

struct ClusterEstimate {
    TargetState state;
    double weight = 0.0;
};

struct ClusterResult {
    std::vector<ClusterEstimate> estimates;  // sorted by descending weight
    std::vector<int> assignment;             // per-particle cluster index
    bool reduced_k = false;
};

/// Weighted k-means (k-means++ seeding, wrapped azimuth geometry) over
/// particle positions. Deterministic for a fixed rng. If n_targets
/// exceeds the particle count, k is reduced and flagged.
ClusterResult extract_states(const ParticlePopulation& pop, int n_targets, Rng& rng);

/// Replaces every particle's covariance with its cluster's weighted
/// sample covariance plus kCovarianceJitter * I. A singleton cluster
/// falls back to the process noise covariance.
ParticlePopulation update_covariances(const ParticlePopulation& pop, const std::vector<int>& assignment,
                                      const FilterConfig& config);

/// Effective sample size (sum w)^2 / sum w^2. Throws NumericalError when
/// every weight is zero.
double ess(std::span<const double> weights);
double ess(const ParticlePopulation& pop);

/// Systematic resampling to `target_count` particles. Output weights are
/// all equal to (sum w) / target_count: the weight sum encodes the target
/// count, so total mass is preserved rather than normalized away.
ParticlePopulation resample(const ParticlePopulation& pop, std::size_t target_count, Rng& rng);

}  // namespace flowphd
