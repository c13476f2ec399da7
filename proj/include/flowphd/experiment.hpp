#pragma once

#include "flowphd/csv.hpp"
#include "flowphd/metrics.hpp"
#include "flowphd/scenario_io.hpp"
#include "flowphd/tracker.hpp"

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace flowphd {

/// Filter variants benchmarked against each other. Raw feeds the
/// measurements straight to the metric (the no-filter baseline).
enum class FilterVariant { Smc, Npf, Ipf, Raw };

std::string_view to_string(FilterVariant variant);
std::optional<FilterVariant> parse_filter_variant(std::string_view name);

struct ExperimentSpec {
    ScenarioConfig scenario;
    std::vector<FilterVariant> filters = {FilterVariant::Smc, FilterVariant::Npf, FilterVariant::Ipf,
                                          FilterVariant::Raw};
    int runs = 10;
    std::uint64_t base_seed = 1;
    std::filesystem::path output_dir;
    OspaParams ospa;
    TrackerOptions tracker;
    int jobs = 0;  // worker threads; 0 = hardware concurrency

    void validate() const;  // throws ConfigError
};

struct RunScore {
    FilterVariant filter = FilterVariant::Smc;
    int run = 0;
    double mean_ospa = 0.0;          // over frames within the run
    double std_ospa = 0.0;           // over frames within the run
    int label_switches = 0;
    double seconds_per_frame = 0.0;  // wall clock; not covered by the determinism contract
};

struct FilterSummary {
    FilterVariant filter = FilterVariant::Smc;
    int runs = 0;
    double mean_ospa = 0.0;  // mean of per-run means
    double std_ospa = 0.0;   // sample std of per-run means
};

struct ExperimentResult {
    std::vector<RunScore> scores;
    std::vector<FilterSummary> summaries;
};

/// Tracks every (filter, run) pair on freshly simulated data
/// (seed = base_seed + run, shared across filters), scores OSPA, and
/// writes per-run trajectory and score CSVs plus scores.csv / summary.csv
/// into the output directory. Runs execute concurrently; all outputs are
/// a pure function of (spec, seed) except the wall-clock column.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// One (filter, run) job without file output; used by `track` and tests.
struct SingleRunOutput {
    std::vector<std::vector<TrackEstimate>> track_frames;
    TruthSequence truth;
    std::vector<FrameRecord> frames;
    SequenceScore score;
    int label_switches = 0;
    double seconds_per_frame = 0.0;
};

SingleRunOutput run_single(const ExperimentSpec& spec, FilterVariant variant, int run);

}  // namespace flowphd
