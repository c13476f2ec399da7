#include "flowphd/sim.hpp"

#include "flowphd/angles.hpp"
#include "flowphd/model.hpp"

#include <algorithm>

namespace flowphd {

namespace {

bool speech_active(const TargetSpec& target, int frame) {
    if (target.speech_intervals.empty()) {
        return true;
    }
    return std::any_of(target.speech_intervals.begin(), target.speech_intervals.end(),
                       [frame](const auto& interval) {
                           return interval.first <= frame && frame <= interval.second;
                       });
}

}  // namespace

void ScenarioConfig::validate() const {
    if (duration_frames < 1) {
        throw ConfigError("scenario duration_frames: must be at least 1");
    }
    if (!(dt > 0.0)) {
        throw ConfigError("scenario dt: must be positive");
    }
    if (!(detection_probability >= 0.0 && detection_probability <= 1.0)) {
        throw ConfigError("scenario detection_probability: must be in [0, 1]");
    }
    if (!(clutter_rate >= 0.0)) {
        throw ConfigError("scenario clutter_rate: must be non-negative");
    }
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const auto& target = targets[t];
        const std::string label = "scenario target " + std::to_string(t + 1);
        if (target.birth_frame < 0 || target.birth_frame >= target.death_frame ||
            target.death_frame > duration_frames) {
            throw ConfigError(label + ": requires 0 <= birth_frame < death_frame <= duration_frames");
        }
        int last_frame = target.birth_frame;
        for (const auto& wp : target.waypoints) {
            if (wp.frame <= last_frame || wp.frame >= target.death_frame) {
                throw ConfigError(label + ": waypoint frames must be ascending inside the lifetime");
            }
            last_frame = wp.frame;
        }
        for (const auto& interval : target.speech_intervals) {
            if (interval.first > interval.second) {
                throw ConfigError(label + ": speech interval must have first <= last");
            }
        }
    }
    try {
        covariance_sqrt<2>(measurement_noise);
        covariance_sqrt<4>(process_noise);
    } catch (const std::invalid_argument& error) {
        throw ConfigError(std::string("scenario noise: ") + error.what());
    }
}

TruthSequence generate_truth(const ScenarioConfig& config, Rng& rng) {
    config.validate();
    TruthSequence frames(static_cast<std::size_t>(config.duration_frames));
    const Mat4 noise_sqrt = covariance_sqrt<4>(config.process_noise);

    for (std::size_t t = 0; t < config.targets.size(); ++t) {
        const auto& target = config.targets[t];
        const int id = static_cast<int>(t) + 1;
        TargetState state = target.initial;
        std::size_t next_waypoint = 0;
        for (int frame = target.birth_frame; frame < target.death_frame; ++frame) {
            while (next_waypoint < target.waypoints.size() &&
                   target.waypoints[next_waypoint].frame <= frame) {
                ++next_waypoint;
            }
            if (next_waypoint < target.waypoints.size()) {
                // re-aim the rates at the pending waypoint
                const auto& wp = target.waypoints[next_waypoint];
                const double seconds_left = static_cast<double>(wp.frame - frame) * config.dt;
                state.azimuth_rate = wrap_angular_difference(wp.azimuth, state.azimuth) / seconds_left;
                state.elevation_rate = (wp.elevation - state.elevation) / seconds_left;
            }
            frames[static_cast<std::size_t>(frame)].emplace_back(id, state);
            state = transition(state, config.dt, noise_sqrt * rng.normal_vec4());
        }
    }
    return frames;
}

std::vector<FrameRecord> generate_measurements(const TruthSequence& truth, const ScenarioConfig& config,
                                               Rng& rng) {
    config.validate();
    if (truth.size() != static_cast<std::size_t>(config.duration_frames)) {
        throw std::invalid_argument("generate_measurements: truth length does not match the scenario");
    }
    const Mat2 noise_sqrt = covariance_sqrt<2>(config.measurement_noise);

    std::vector<FrameRecord> records(truth.size());
    for (std::size_t f = 0; f < truth.size(); ++f) {
        auto& record = records[f];
        record.frame = static_cast<int>(f);
        record.truth = truth[f];
        for (const auto& [id, state] : truth[f]) {
            if (!speech_active(config.targets[static_cast<std::size_t>(id - 1)], record.frame)) {
                continue;
            }
            const double detect_draw = rng.uniform();
            if (detect_draw < config.detection_probability) {
                record.measurements.push_back({measure(state, noise_sqrt * rng.normal_vec2()), id});
            }
        }
        const int n_clutter = rng.poisson(config.clutter_rate);
        for (int c = 0; c < n_clutter; ++c) {
            const double az = rng.uniform(0.0, 360.0);
            const double el = rng.uniform(-90.0, 90.0);
            record.measurements.push_back({Measurement(az, el), kClutterOrigin});
        }
    }
    return records;
}

std::vector<Measurement> FrameRecord::measurement_values() const {
    std::vector<Measurement> values;
    values.reserve(measurements.size());
    for (const auto& tagged : measurements) {
        values.push_back(tagged.value);
    }
    return values;
}

ScenarioConfig canned_occlusion_scenario() {
    ScenarioConfig config;
    config.duration_frames = 200;
    config.dt = 1.0;
    config.seed = 1;
    config.detection_probability = 0.9;
    config.clutter_rate = 1.0;
    config.measurement_noise = Vec2(4.0, 4.0).asDiagonal();
    config.process_noise = Mat4::Zero();

    TargetSpec first;
    first.birth_frame = 0;
    first.death_frame = 200;
    first.initial = TargetState(60.0, -10.0, 0.3, 0.0);

    TargetSpec second;
    second.birth_frame = 0;
    second.death_frame = 200;
    second.initial = TargetState(120.0, 10.0, -0.3, 0.0);

    config.targets = {first, second};
    return config;
}

}  // namespace flowphd
