#pragma once

#include "flowphd/rng.hpp"
#include "flowphd/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace flowphd {

/// Measurement origin tag for clutter (target ids start at 1).
inline constexpr int kClutterOrigin = 0;

struct Waypoint {
    int frame = 0;
    double azimuth = 0.0;
    double elevation = 0.0;
};

struct TargetSpec {
    int birth_frame = 0;
    int death_frame = 0;  // exclusive
    TargetState initial;
    std::vector<Waypoint> waypoints;                    // sorted by frame
    std::vector<std::pair<int, int>> speech_intervals;  // inclusive; empty = always on
};

struct ScenarioConfig {
    int duration_frames = 200;
    double dt = 1.0;
    std::vector<TargetSpec> targets;
    double detection_probability = 0.9;                     // p_D of the simulated sensor
    double clutter_rate = 1.0;                              // mean false alarms per frame
    Mat2 measurement_noise = Vec2(4.0, 4.0).asDiagonal();   // R of the simulated sensor
    Mat4 process_noise = Mat4::Zero();                      // trajectory jitter
    std::uint64_t seed = 1;

    void validate() const;  // throws ConfigError
};

struct TaggedMeasurement {
    Measurement value;
    int origin = kClutterOrigin;  // generator-internal; never shown to the filter
};

struct FrameRecord {
    int frame = 0;
    std::vector<std::pair<int, TargetState>> truth;
    std::vector<TaggedMeasurement> measurements;

    std::vector<Measurement> measurement_values() const;
};

using TruthSequence = std::vector<std::vector<std::pair<int, TargetState>>>;

/// Ground truth: each target follows constant-velocity dynamics, with
/// rates re-aimed at the next waypoint when one is pending. Deterministic
/// per rng seed.
TruthSequence generate_truth(const ScenarioConfig& config, Rng& rng);

/// Measurement stream: every alive, speech-active target is detected with
/// the configured probability (noise from the configured R), plus a
/// Poisson number of clutter points uniform over the DOA domain.
std::vector<FrameRecord> generate_measurements(const TruthSequence& truth, const ScenarioConfig& config,
                                               Rng& rng);

/// The scenario shipped with the repo: two speakers crossing in azimuth
/// (equal azimuth for about five frames around frame 100), detection
/// probability 0.9, one clutter point per frame on average.
ScenarioConfig canned_occlusion_scenario();

}  // namespace flowphd
