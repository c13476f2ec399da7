#pragma once

#include "flowphd/phd.hpp"

#include <span>
#include <utility>
#include <vector>

namespace flowphd {

struct TrackEstimate {
    int id = 0;
    TargetState state;
    double weight = 0.0;
    bool coasting = false;  // true when carried by dynamics, not by an estimate
};

/// Per-frame estimated counts and their running mean.
class CountHistory {
public:
    void record(double count);
    std::size_t frames() const { return counts_.size(); }
    double mean() const;      // throws std::invalid_argument on empty history
    int rounded_mean() const; // half-up
    const std::vector<double>& counts() const { return counts_; }

private:
    std::vector<double> counts_;
    double sum_ = 0.0;
};

/// Mean number of targets over the history, rounded half-up.
int mean_target_count(const CountHistory& history);

struct IdentConfig {
    double gate = 10.0;          // degrees
    bool exclude_warmup = false; // skip silent startup frames in the count mean
};

struct AssignResult {
    std::vector<TrackEstimate> tracks;
    std::vector<bool> consumed;  // which current estimates were taken
};

/// One identity step over three branches, greedy in ascending id order
/// with each estimate consumed at most once:
///  - as many or more estimates than tracks: every track takes its
///    nearest unconsumed estimate; the surplus is discarded as noise;
///  - fewer estimates: a track whose nearest unconsumed estimate exceeds
///    the gate (or that finds none) coasts on its noise-free dynamics.
/// The output always has exactly the previous ids, in ascending order.
AssignResult assign_ids_detailed(std::span<const TrackEstimate> previous,
                                 std::span<const ClusterEstimate> current, double gate, double dt);

std::vector<TrackEstimate> assign_ids(std::span<const TrackEstimate> previous,
                                      std::span<const ClusterEstimate> current, double gate, double dt);

/// Session state: feeds the count history, keeps the track list sized to
/// the rounded mean count, and runs assign_ids each frame. When the mean
/// grows, new ids are minted for the unconsumed estimates (heaviest
/// first); when it shrinks, the longest-coasting tracks are retired.
class IdentityTracker {
public:
    explicit IdentityTracker(IdentConfig config = {});

    std::vector<TrackEstimate> step(std::span<const ClusterEstimate> estimates, double estimated_count,
                                    double dt);

    const CountHistory& history() const { return history_; }
    const std::vector<TrackEstimate>& tracks() const { return tracks_; }

private:
    IdentConfig config_;
    CountHistory history_;
    std::vector<TrackEstimate> tracks_;
    std::vector<int> coast_streaks_;  // aligned with tracks_
    int next_id_ = 1;
    bool seen_activity_ = false;
};

/// Counts identity switches of tracks against ground truth: a switch is a
/// track whose nearest-truth association (within `gate` degrees) differs
/// from its previous association. Unassociated stretches neither count
/// nor reset.
int count_label_switches(const std::vector<std::vector<TrackEstimate>>& track_frames,
                         const std::vector<std::vector<std::pair<int, TargetState>>>& truth_frames,
                         double gate);

}  // namespace flowphd
