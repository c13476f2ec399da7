#pragma once

#include "flowphd/flow.hpp"
#include "flowphd/ident.hpp"
#include "flowphd/phd.hpp"

#include <span>
#include <vector>

namespace flowphd {

struct TrackerOptions {
    FlowKind flow = FlowKind::None;
    FilterConfig filter;
    FlowConfig flow_config;
    IdentConfig ident;
    int max_clusters = 10;  // cap on the extraction k

    void validate() const;
};

/// Full per-frame pipeline: predict, birth, migrate, weight update,
/// extraction, covariance refresh, ESS-gated resampling, identity step.
class PhdTracker {
public:
    PhdTracker(TrackerOptions options, std::uint64_t seed);

    std::vector<TrackEstimate> step(std::span<const Measurement> measurements, double dt);

    /// Weight-sum target count of the latest frame.
    double last_count_estimate() const { return last_count_; }
    const ParticlePopulation& population() const { return population_; }
    const IdentityTracker& identity() const { return identity_; }

private:
    TrackerOptions options_;
    ParticlePopulation population_;
    IdentityTracker identity_;
    Rng rng_;
    double last_count_ = 0.0;
};

}  // namespace flowphd
