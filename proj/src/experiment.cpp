#include "flowphd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

namespace flowphd {

namespace {

FlowKind flow_kind_of(FilterVariant variant) {
    switch (variant) {
        case FilterVariant::Smc:
            return FlowKind::None;
        case FilterVariant::Npf:
            return FlowKind::Npf;
        case FilterVariant::Ipf:
            return FlowKind::Ipf;
        case FilterVariant::Raw:
            break;
    }
    return FlowKind::None;
}

std::string run_tag(FilterVariant variant, int run) {
    std::ostringstream tag;
    tag << to_string(variant) << "_run" << std::setw(3) << std::setfill('0') << run;
    return tag.str();
}

std::vector<std::vector<TargetState>> states_of_tracks(const std::vector<std::vector<TrackEstimate>>& frames) {
    std::vector<std::vector<TargetState>> states(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
        states[f].reserve(frames[f].size());
        for (const auto& track : frames[f]) {
            states[f].push_back(track.state);
        }
    }
    return states;
}

std::vector<std::vector<TargetState>> states_of_truth(const TruthSequence& truth) {
    std::vector<std::vector<TargetState>> states(truth.size());
    for (std::size_t f = 0; f < truth.size(); ++f) {
        states[f].reserve(truth[f].size());
        for (const auto& [id, state] : truth[f]) {
            states[f].push_back(state);
        }
    }
    return states;
}

double sample_std(const std::vector<double>& values, double mean) {
    if (values.size() < 2) {
        return 0.0;
    }
    double sum_sq = 0.0;
    for (const double v : values) {
        sum_sq += (v - mean) * (v - mean);
    }
    return std::sqrt(sum_sq / static_cast<double>(values.size() - 1));
}

}  // namespace

std::string_view to_string(FilterVariant variant) {
    switch (variant) {
        case FilterVariant::Smc:
            return "smc";
        case FilterVariant::Npf:
            return "npf";
        case FilterVariant::Ipf:
            return "ipf";
        case FilterVariant::Raw:
            return "raw";
    }
    return "smc";
}

std::optional<FilterVariant> parse_filter_variant(std::string_view name) {
    if (name == "smc") {
        return FilterVariant::Smc;
    }
    if (name == "npf") {
        return FilterVariant::Npf;
    }
    if (name == "ipf") {
        return FilterVariant::Ipf;
    }
    if (name == "raw") {
        return FilterVariant::Raw;
    }
    return std::nullopt;
}

void ExperimentSpec::validate() const {
    scenario.validate();
    if (filters.empty()) {
        throw ConfigError("experiment: at least one filter must be selected");
    }
    if (runs < 1) {
        throw ConfigError("experiment: runs must be at least 1");
    }
    if (jobs < 0) {
        throw ConfigError("experiment: jobs must be non-negative");
    }
    try {
        ospa.validate();
        tracker.validate();
    } catch (const std::invalid_argument& error) {
        throw ConfigError(std::string("experiment: ") + error.what());
    }
}

SingleRunOutput run_single(const ExperimentSpec& spec, FilterVariant variant, int run) {
    const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(run);
    Rng sim_rng(seed);
    SingleRunOutput output;
    output.truth = generate_truth(spec.scenario, sim_rng);
    output.frames = generate_measurements(output.truth, spec.scenario, sim_rng);

    const std::size_t n_frames = output.frames.size();
    output.track_frames.resize(n_frames);
    using clock = std::chrono::steady_clock;
    double tracking_seconds = 0.0;

    if (variant == FilterVariant::Raw) {
        const auto start = clock::now();
        for (std::size_t f = 0; f < n_frames; ++f) {
            int ordinal = 1;
            for (const auto& tagged : output.frames[f].measurements) {
                output.track_frames[f].push_back(
                    {ordinal++, TargetState(tagged.value.azimuth, tagged.value.elevation, 0.0, 0.0), 1.0,
                     false});
            }
        }
        tracking_seconds = std::chrono::duration<double>(clock::now() - start).count();
    } else {
        TrackerOptions options = spec.tracker;
        options.flow = flow_kind_of(variant);
        PhdTracker tracker(options, Rng::mix(seed, static_cast<std::uint64_t>(variant)));
        for (std::size_t f = 0; f < n_frames; ++f) {
            const auto measurements = output.frames[f].measurement_values();
            const auto start = clock::now();
            output.track_frames[f] = tracker.step(measurements, spec.scenario.dt);
            tracking_seconds += std::chrono::duration<double>(clock::now() - start).count();
        }
    }

    output.score = ospa_sequence(states_of_tracks(output.track_frames), states_of_truth(output.truth),
                                 spec.ospa);
    output.label_switches = count_label_switches(output.track_frames, output.truth, spec.ospa.cutoff);
    output.seconds_per_frame = n_frames == 0 ? 0.0 : tracking_seconds / static_cast<double>(n_frames);
    return output;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    std::error_code ec;
    std::filesystem::create_directories(spec.output_dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory " + spec.output_dir.string() + ": " +
                          ec.message());
    }
    {
        std::ofstream probe(spec.output_dir / "scores.csv", std::ios::trunc);
        if (!probe) {
            throw ConfigError("output directory is not writable: " + spec.output_dir.string());
        }
    }

    struct Job {
        FilterVariant variant;
        int run;
    };
    std::vector<Job> jobs;
    for (const auto variant : spec.filters) {
        for (int run = 0; run < spec.runs; ++run) {
            jobs.push_back({variant, run});
        }
    }

    std::vector<RunScore> scores(jobs.size());
    std::vector<std::exception_ptr> failures(jobs.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t index = next.fetch_add(1);
            if (index >= jobs.size()) {
                return;
            }
            const Job& job = jobs[index];
            try {
                const SingleRunOutput output = run_single(spec, job.variant, job.run);
                const std::string tag = run_tag(job.variant, job.run);
                write_trajectory_csv(spec.output_dir / ("traj_" + tag + ".csv"), output.track_frames);
                write_frame_score_csv(spec.output_dir / ("ospa_" + tag + ".csv"), output.score.per_frame);
                scores[index] = {job.variant,
                                 job.run,
                                 output.score.mean,
                                 sample_std(output.score.per_frame, output.score.mean),
                                 output.label_switches,
                                 output.seconds_per_frame};
            } catch (...) {
                failures[index] = std::current_exception();
            }
        }
    };

    unsigned n_workers = spec.jobs > 0 ? static_cast<unsigned>(spec.jobs)
                                       : std::max(1u, std::thread::hardware_concurrency());
    n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(jobs.size()));
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) {
        threads.emplace_back(worker);
    }
    for (auto& thread : threads) {
        thread.join();
    }
    for (const auto& failure : failures) {
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    ExperimentResult result;
    result.scores = std::move(scores);

    for (const auto variant : spec.filters) {
        std::vector<double> means;
        for (const auto& score : result.scores) {
            if (score.filter == variant) {
                means.push_back(score.mean_ospa);
            }
        }
        const double mean =
            means.empty() ? 0.0
                          : std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
        result.summaries.push_back({variant, static_cast<int>(means.size()), mean, sample_std(means, mean)});
    }

    {
        std::ofstream out(spec.output_dir / "scores.csv", std::ios::trunc);
        out << "filter,run,mean_ospa,std_ospa,label_switches,seconds_per_frame\n";
        for (const auto& score : result.scores) {
            out << to_string(score.filter) << ',' << score.run << ',' << format_double(score.mean_ospa)
                << ',' << format_double(score.std_ospa) << ',' << score.label_switches << ','
                << format_double(score.seconds_per_frame) << '\n';
        }
    }
    {
        std::ofstream out(spec.output_dir / "summary.csv", std::ios::trunc);
        out << "filter,runs,mean_ospa,std_ospa\n";
        for (const auto& summary : result.summaries) {
            out << to_string(summary.filter) << ',' << summary.runs << ','
                << format_double(summary.mean_ospa) << ',' << format_double(summary.std_ospa) << '\n';
        }
    }
    return result;
}

}  // namespace flowphd
