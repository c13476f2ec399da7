#include "flowphd/ident.hpp"

#include "flowphd/angles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace flowphd {

void CountHistory::record(double count) {
    if (!(count >= 0.0) || !std::isfinite(count)) {
        throw std::invalid_argument("CountHistory::record: count must be finite and non-negative");
    }
    counts_.push_back(count);
    sum_ += count;
}

double CountHistory::mean() const {
    if (counts_.empty()) {
        throw std::invalid_argument("CountHistory::mean: empty history");
    }
    return sum_ / static_cast<double>(counts_.size());
}

int CountHistory::rounded_mean() const {
    return round_half_up(mean());
}

int mean_target_count(const CountHistory& history) {
    return history.rounded_mean();
}

AssignResult assign_ids_detailed(std::span<const TrackEstimate> previous,
                                 std::span<const ClusterEstimate> current, double gate, double dt) {
    if (!(gate > 0.0)) {
        throw std::invalid_argument("assign_ids: gate must be positive");
    }

    std::vector<std::size_t> order(previous.size());
    for (std::size_t i = 0; i < previous.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return previous[a].id < previous[b].id; });

    AssignResult result;
    result.tracks.reserve(previous.size());
    result.consumed.assign(current.size(), false);
    const bool under_count = current.size() < previous.size();

    for (const std::size_t index : order) {
        const TrackEstimate& prev = previous[index];
        int best = -1;
        double best_distance = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < current.size(); ++j) {
            if (result.consumed[j]) {
                continue;
            }
            const double d = angular_distance(prev.state.azimuth, prev.state.elevation,
                                              current[j].state.azimuth, current[j].state.elevation);
            if (d < best_distance) {
                best_distance = d;
                best = static_cast<int>(j);
            }
        }

        const bool matched = !under_count ? best >= 0 : (best >= 0 && best_distance <= gate);
        if (matched) {
            result.consumed[static_cast<std::size_t>(best)] = true;
            result.tracks.push_back({prev.id, current[static_cast<std::size_t>(best)].state,
                                     current[static_cast<std::size_t>(best)].weight, false});
        } else {
            // coast on noise-free dynamics
            result.tracks.push_back({prev.id, transition(prev.state, dt, Vec4::Zero()), prev.weight, true});
        }
    }
    return result;
}

std::vector<TrackEstimate> assign_ids(std::span<const TrackEstimate> previous,
                                      std::span<const ClusterEstimate> current, double gate, double dt) {
    return assign_ids_detailed(previous, current, gate, dt).tracks;
}

IdentityTracker::IdentityTracker(IdentConfig config) : config_(config) {}

std::vector<TrackEstimate> IdentityTracker::step(std::span<const ClusterEstimate> estimates,
                                                 double estimated_count, double dt) {
    if (config_.exclude_warmup && !seen_activity_) {
        if (estimated_count < 0.5 && estimates.empty()) {
            return tracks_;  // silent startup frame; not recorded
        }
        seen_activity_ = true;
    }
    history_.record(estimated_count);
    const std::size_t target = static_cast<std::size_t>(std::max(0, history_.rounded_mean()));

    // shrink: retire the longest-coasting tracks (ties to the larger id)
    while (tracks_.size() > target) {
        std::size_t victim = 0;
        for (std::size_t i = 1; i < tracks_.size(); ++i) {
            if (coast_streaks_[i] > coast_streaks_[victim] ||
                (coast_streaks_[i] == coast_streaks_[victim] && tracks_[i].id > tracks_[victim].id)) {
                victim = i;
            }
        }
        tracks_.erase(tracks_.begin() + static_cast<std::ptrdiff_t>(victim));
        coast_streaks_.erase(coast_streaks_.begin() + static_cast<std::ptrdiff_t>(victim));
    }

    AssignResult assigned = assign_ids_detailed(tracks_, estimates, config_.gate, dt);

    // grow: mint ids for the heaviest unconsumed estimates
    if (assigned.tracks.size() < target) {
        std::vector<std::size_t> leftover;
        for (std::size_t j = 0; j < estimates.size(); ++j) {
            if (!assigned.consumed[j]) {
                leftover.push_back(j);
            }
        }
        std::sort(leftover.begin(), leftover.end(), [&](std::size_t a, std::size_t b) {
            if (estimates[a].weight != estimates[b].weight) {
                return estimates[a].weight > estimates[b].weight;
            }
            return a < b;
        });
        for (const std::size_t j : leftover) {
            if (assigned.tracks.size() >= target) {
                break;
            }
            assigned.tracks.push_back({next_id_++, estimates[j].state, estimates[j].weight, false});
        }
    }

    // refresh coast streaks (new tracks start at zero)
    std::map<int, int> streaks;
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        streaks[tracks_[i].id] = coast_streaks_[i];
    }
    tracks_ = std::move(assigned.tracks);
    coast_streaks_.assign(tracks_.size(), 0);
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        if (tracks_[i].coasting) {
            const auto it = streaks.find(tracks_[i].id);
            coast_streaks_[i] = (it == streaks.end() ? 0 : it->second) + 1;
        }
    }
    return tracks_;
}

int count_label_switches(const std::vector<std::vector<TrackEstimate>>& track_frames,
                         const std::vector<std::vector<std::pair<int, TargetState>>>& truth_frames,
                         double gate) {
    if (track_frames.size() != truth_frames.size()) {
        throw std::invalid_argument("count_label_switches: frame count mismatch");
    }
    std::map<int, int> last_association;  // track id -> truth id
    int switches = 0;
    for (std::size_t f = 0; f < track_frames.size(); ++f) {
        for (const auto& track : track_frames[f]) {
            int nearest_truth = -1;
            double nearest_distance = std::numeric_limits<double>::infinity();
            for (const auto& [truth_id, truth_state] : truth_frames[f]) {
                const double d = angular_distance(track.state.azimuth, track.state.elevation,
                                                  truth_state.azimuth, truth_state.elevation);
                if (d < nearest_distance) {
                    nearest_distance = d;
                    nearest_truth = truth_id;
                }
            }
            if (nearest_truth < 0 || nearest_distance > gate) {
                continue;  // unassociated frames neither count nor reset
            }
            const auto it = last_association.find(track.id);
            if (it != last_association.end() && it->second != nearest_truth) {
                ++switches;
            }
            last_association[track.id] = nearest_truth;
        }
    }
    return switches;
}

}  // namespace flowphd
