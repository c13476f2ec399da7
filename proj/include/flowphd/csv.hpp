#pragma once

#include "flowphd/ident.hpp"
#include "flowphd/sim.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace flowphd {

/// Shortest round-trip formatting used for every CSV number.
std::string format_double(double value);

/// Trajectory CSV: frame,track_id,azimuth,elevation,azimuth_rate,
/// elevation_rate,weight,coasting — one row per track per frame.
void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<std::vector<TrackEstimate>>& frames);

/// Reads a trajectory CSV back into per-frame track lists (frames without
/// rows come back empty). Throws ConfigError on malformed rows.
std::vector<std::vector<TrackEstimate>> read_trajectory_csv(const std::filesystem::path& path);

/// Measurement CSV: frame,azimuth,elevation (origin tags are not emitted).
void write_measurement_csv(const std::filesystem::path& path, const std::vector<FrameRecord>& frames);

/// Per-frame score CSV: frame,ospa.
void write_frame_score_csv(const std::filesystem::path& path, const std::vector<double>& per_frame);

}  // namespace flowphd
