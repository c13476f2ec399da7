#include "flowphd/tracker.hpp"

#include <algorithm>

namespace flowphd {

void TrackerOptions::validate() const {
    filter.validate();
    flow_config.validate();
    if (!(ident.gate > 0.0)) {
        throw std::invalid_argument("TrackerOptions ident.gate: must be positive");
    }
    if (max_clusters < 1) {
        throw std::invalid_argument("TrackerOptions max_clusters: must be at least 1");
    }
}

PhdTracker::PhdTracker(TrackerOptions options, std::uint64_t seed)
    : options_(std::move(options)), identity_(options_.ident), rng_(seed) {
    options_.validate();
}

std::vector<TrackEstimate> PhdTracker::step(std::span<const Measurement> measurements, double dt) {
    if (!population_.particles.empty()) {
        population_ = predict(population_, dt, options_.filter, rng_);
    }
    if (!measurements.empty()) {
        population_ = append_births(std::move(population_), spawn_births(measurements, options_.filter, rng_));
    }
    population_ = migrate(population_, measurements, options_.flow, options_.flow_config, options_.filter, rng_);
    population_ = update_weights(population_, measurements, options_.filter);

    last_count_ = estimate_count(population_);
    const int k = std::clamp(round_half_up(last_count_), 0, options_.max_clusters);
    ClusterResult clusters = extract_states(population_, k, rng_);
    if (!clusters.estimates.empty()) {
        population_ = update_covariances(population_, clusters.assignment, options_.filter);
    }

    if (!population_.particles.empty() && last_count_ > 0.0) {
        const double sample_size = ess(population_);
        if (sample_size < options_.filter.ess_fraction * static_cast<double>(population_.size())) {
            const auto budget = static_cast<std::size_t>(options_.filter.particles_per_target) *
                                static_cast<std::size_t>(std::max(1, round_half_up(last_count_)));
            population_ = resample(population_, budget, rng_);
        }
    } else if (!population_.particles.empty()) {
        // every particle is weightless; drop them and wait for fresh births
        population_ = ParticlePopulation{};
    }

    return identity_.step(clusters.estimates, last_count_, dt);
}

}  // namespace flowphd
