#include "flowphd/cli.hpp"

#include "flowphd/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace flowphd {

namespace {

constexpr double kDoaAreaDeg2 = 360.0 * 180.0;

struct Tunables {
    double survival_probability;
    double detection_probability;
    double clutter_intensity = -1.0;  // < 0: derive from the scenario clutter rate
    double birth_weight;
    int births_per_measurement;
    int particles_per_target;
    double ess_fraction;
    double birth_spread_var;
    std::vector<double> process_noise_diag;      // empty: library default
    std::vector<double> measurement_noise_diag;  // empty: scenario value
    int lambda_steps;
    double diffusion;
    double sensor_resolution;
    double gate;
    bool exclude_warmup = false;

    Tunables() {
        const FilterConfig filter;
        const FlowConfig flow;
        const IdentConfig ident;
        survival_probability = filter.survival_probability;
        detection_probability = filter.detection_probability;
        birth_weight = filter.birth_weight;
        births_per_measurement = filter.births_per_measurement;
        particles_per_target = filter.particles_per_target;
        ess_fraction = filter.ess_fraction;
        birth_spread_var = filter.birth_spread(0, 0);
        lambda_steps = flow.n_lambda_steps;
        diffusion = flow.diffusion;
        sensor_resolution = flow.sensor_resolution;
        gate = ident.gate;
    }
};

void add_tunable_options(CLI::App& cmd, Tunables& tunables) {
    cmd.add_option("--survival-probability", tunables.survival_probability, "Filter survival probability")
        ->capture_default_str();
    cmd.add_option("--detection-probability", tunables.detection_probability,
                   "Filter detection probability")
        ->capture_default_str();
    cmd.add_option("--clutter-intensity", tunables.clutter_intensity,
                   "Clutter intensity per square degree (default: scenario clutter_rate / 64800)");
    cmd.add_option("--birth-weight", tunables.birth_weight, "Birth intensity per square degree")
        ->capture_default_str();
    cmd.add_option("--births-per-measurement", tunables.births_per_measurement,
                   "Born particles per measurement")
        ->capture_default_str();
    cmd.add_option("--particles-per-target", tunables.particles_per_target,
                   "Particle budget per estimated target")
        ->capture_default_str();
    cmd.add_option("--ess-fraction", tunables.ess_fraction, "Resample when ESS < fraction * N")
        ->capture_default_str();
    cmd.add_option("--birth-spread", tunables.birth_spread_var,
                   "Birth box variance (deg^2, both axes)")
        ->capture_default_str();
    cmd.add_option("--process-noise", tunables.process_noise_diag,
                   "Filter process noise diagonal: az el az_rate el_rate")
        ->expected(4);
    cmd.add_option("--measurement-noise", tunables.measurement_noise_diag,
                   "Filter measurement noise diagonal: az el (default: scenario value)")
        ->expected(2);
    cmd.add_option("--lambda-steps", tunables.lambda_steps, "Synthetic-time steps of the particle flow")
        ->capture_default_str();
    cmd.add_option("--diffusion", tunables.diffusion, "Wiener diffusion coefficient of the flow")
        ->capture_default_str();
    cmd.add_option("--sensor-resolution", tunables.sensor_resolution,
                   "Flow displacement (degrees) below which a particle stops")
        ->capture_default_str();
    cmd.add_option("--gate", tunables.gate, "Identity association gate in degrees")->capture_default_str();
    cmd.add_flag("--exclude-warmup", tunables.exclude_warmup,
                 "Exclude silent startup frames from the mean target count");
}

TrackerOptions make_tracker_options(const Tunables& tunables, const ScenarioConfig& scenario) {
    TrackerOptions options;
    options.filter.survival_probability = tunables.survival_probability;
    options.filter.detection_probability = tunables.detection_probability;
    options.filter.clutter_intensity = tunables.clutter_intensity >= 0.0
                                           ? tunables.clutter_intensity
                                           : scenario.clutter_rate / kDoaAreaDeg2;
    options.filter.birth_weight = tunables.birth_weight;
    options.filter.births_per_measurement = tunables.births_per_measurement;
    options.filter.particles_per_target = tunables.particles_per_target;
    options.filter.ess_fraction = tunables.ess_fraction;
    options.filter.birth_spread = Vec2(tunables.birth_spread_var, tunables.birth_spread_var).asDiagonal();
    if (!tunables.process_noise_diag.empty()) {
        options.filter.noise.process_noise =
            Vec4(tunables.process_noise_diag[0], tunables.process_noise_diag[1],
                 tunables.process_noise_diag[2], tunables.process_noise_diag[3])
                .asDiagonal();
    }
    options.filter.noise.measurement_noise =
        tunables.measurement_noise_diag.empty()
            ? scenario.measurement_noise
            : Mat2(Vec2(tunables.measurement_noise_diag[0], tunables.measurement_noise_diag[1]).asDiagonal());
    options.flow_config.n_lambda_steps = tunables.lambda_steps;
    options.flow_config.diffusion = tunables.diffusion;
    options.flow_config.sensor_resolution = tunables.sensor_resolution;
    options.ident.gate = tunables.gate;
    options.ident.exclude_warmup = tunables.exclude_warmup;
    return options;
}

std::vector<FilterVariant> parse_filter_list(const std::string& list) {
    std::vector<FilterVariant> filters;
    std::stringstream stream(list);
    std::string name;
    while (std::getline(stream, name, ',')) {
        const auto variant = parse_filter_variant(name);
        if (!variant) {
            throw ConfigError("unknown filter '" + name + "' (expected smc, npf, ipf or raw)");
        }
        filters.push_back(*variant);
    }
    if (filters.empty()) {
        throw ConfigError("empty filter list");
    }
    return filters;
}

std::vector<std::vector<TrackEstimate>> truth_as_tracks(const TruthSequence& truth) {
    std::vector<std::vector<TrackEstimate>> frames(truth.size());
    for (std::size_t f = 0; f < truth.size(); ++f) {
        for (const auto& [id, state] : truth[f]) {
            frames[f].push_back({id, state, 1.0, false});
        }
    }
    return frames;
}

int run_simulate(const std::string& scenario_path, const std::string& out_path,
                 const std::string& truth_path, std::int64_t seed_override) {
    ScenarioConfig scenario = parse_scenario_file(scenario_path);
    if (seed_override >= 0) {
        scenario.seed = static_cast<std::uint64_t>(seed_override);
    }
    Rng rng(scenario.seed);
    const auto truth = generate_truth(scenario, rng);
    const auto frames = generate_measurements(truth, scenario, rng);
    write_measurement_csv(out_path, frames);
    if (!truth_path.empty()) {
        write_trajectory_csv(truth_path, truth_as_tracks(truth));
    }
    std::cout << "wrote " << out_path << " (" << frames.size() << " frames)\n";
    return 0;
}

int run_track(const std::string& scenario_path, const std::string& filter_name, const std::string& out_path,
              const std::string& ospa_path, std::int64_t seed_override, const Tunables& tunables,
              const OspaParams& ospa_params) {
    const auto variant = parse_filter_variant(filter_name);
    if (!variant) {
        throw ConfigError("unknown filter '" + filter_name + "' (expected smc, npf, ipf or raw)");
    }
    ExperimentSpec spec;
    spec.scenario = parse_scenario_file(scenario_path);
    spec.filters = {*variant};
    spec.runs = 1;
    spec.base_seed = seed_override >= 0 ? static_cast<std::uint64_t>(seed_override) : spec.scenario.seed;
    spec.ospa = ospa_params;
    spec.tracker = make_tracker_options(tunables, spec.scenario);
    spec.tracker.validate();

    const SingleRunOutput output = run_single(spec, *variant, 0);
    write_trajectory_csv(out_path, output.track_frames);
    if (!ospa_path.empty()) {
        write_frame_score_csv(ospa_path, output.score.per_frame);
    }
    std::cout << "filter=" << to_string(*variant) << " mean_ospa=" << format_double(output.score.mean)
              << " label_switches=" << output.label_switches
              << " seconds_per_frame=" << format_double(output.seconds_per_frame) << '\n';
    return 0;
}

int run_bench(const std::string& scenario_path, const std::string& out_dir, const std::string& filter_list,
              int runs, std::int64_t seed, int jobs, const Tunables& tunables,
              const OspaParams& ospa_params) {
    ExperimentSpec spec;
    spec.scenario = parse_scenario_file(scenario_path);
    spec.filters = parse_filter_list(filter_list);
    spec.runs = runs;
    spec.base_seed = seed >= 0 ? static_cast<std::uint64_t>(seed) : spec.scenario.seed;
    spec.output_dir = out_dir;
    spec.ospa = ospa_params;
    spec.tracker = make_tracker_options(tunables, spec.scenario);
    spec.jobs = jobs;

    const ExperimentResult result = run_experiment(spec);
    std::cout << "filter  runs  mean_ospa  std_ospa\n";
    for (const auto& summary : result.summaries) {
        std::cout << to_string(summary.filter) << '\t' << summary.runs << '\t'
                  << format_double(summary.mean_ospa) << '\t' << format_double(summary.std_ospa) << '\n';
    }
    std::cout << "wrote " << (spec.output_dir / "scores.csv").string() << '\n';
    return 0;
}

int run_ospa(const std::string& estimates_path, const std::string& truth_path, const std::string& out_path,
             const OspaParams& params) {
    auto estimate_frames = read_trajectory_csv(estimates_path);
    auto truth_frames = read_trajectory_csv(truth_path);
    const std::size_t n = std::max(estimate_frames.size(), truth_frames.size());
    estimate_frames.resize(n);
    truth_frames.resize(n);

    std::vector<std::vector<TargetState>> estimates(n);
    std::vector<std::vector<TargetState>> truth(n);
    for (std::size_t f = 0; f < n; ++f) {
        for (const auto& track : estimate_frames[f]) {
            estimates[f].push_back(track.state);
        }
        for (const auto& track : truth_frames[f]) {
            truth[f].push_back(track.state);
        }
    }
    const SequenceScore score = ospa_sequence(estimates, truth, params);
    if (!out_path.empty()) {
        write_frame_score_csv(out_path, score.per_frame);
    }
    std::cout << "mean_ospa=" << format_double(score.mean) << " frames=" << n << '\n';
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"flowphd — multi-speaker DOA tracking with particle-flow PHD filters"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Generate a measurement stream from a scenario");
    std::string sim_scenario;
    std::string sim_out;
    std::string sim_truth_out;
    std::int64_t sim_seed = -1;
    simulate->add_option("--scenario", sim_scenario, "Scenario file")->required();
    simulate->add_option("--out", sim_out, "Measurement CSV to write")->required();
    simulate->add_option("--truth-out", sim_truth_out, "Also write the ground-truth trajectory CSV");
    simulate->add_option("--seed", sim_seed, "Override the scenario seed");

    // track
    auto* track = app.add_subcommand("track", "Run one filter over one scenario");
    std::string track_scenario;
    std::string track_filter;
    std::string track_out;
    std::string track_ospa_out;
    std::int64_t track_seed = -1;
    Tunables track_tunables;
    OspaParams track_ospa;
    track->add_option("--scenario", track_scenario, "Scenario file")->required();
    track->add_option("--filter", track_filter, "One of smc, npf, ipf, raw")->required();
    track->add_option("--out", track_out, "Trajectory CSV to write")->required();
    track->add_option("--ospa-out", track_ospa_out, "Per-frame OSPA CSV to write");
    track->add_option("--seed", track_seed, "Override the scenario seed");
    track->add_option("--ospa-cutoff", track_ospa.cutoff, "OSPA cutoff in degrees")->capture_default_str();
    track->add_option("--ospa-order", track_ospa.order, "OSPA order")->capture_default_str();
    add_tunable_options(*track, track_tunables);

    // bench
    auto* bench = app.add_subcommand("bench", "Monte Carlo sweep over filter variants");
    std::string bench_scenario;
    std::string bench_out_dir;
    std::string bench_filters = "smc,npf,ipf,raw";
    int bench_runs = 10;
    std::int64_t bench_seed = -1;
    int bench_jobs = 0;
    Tunables bench_tunables;
    OspaParams bench_ospa;
    bench->add_option("--scenario", bench_scenario, "Scenario file")->required();
    bench->add_option("--out-dir", bench_out_dir, "Output directory")->required();
    bench->add_option("--filters", bench_filters, "Comma-separated filter list")->capture_default_str();
    bench->add_option("--runs", bench_runs, "Monte Carlo repetitions per filter")->capture_default_str();
    bench->add_option("--seed", bench_seed, "Base seed (default: scenario seed); run r uses seed + r");
    bench->add_option("--jobs", bench_jobs, "Worker threads (0 = hardware concurrency)")
        ->capture_default_str();
    bench->add_option("--ospa-cutoff", bench_ospa.cutoff, "OSPA cutoff in degrees")->capture_default_str();
    bench->add_option("--ospa-order", bench_ospa.order, "OSPA order")->capture_default_str();
    add_tunable_options(*bench, bench_tunables);

    // ospa
    auto* score = app.add_subcommand("ospa", "Score an estimate trajectory file against a truth file");
    std::string score_estimates;
    std::string score_truth;
    std::string score_out;
    OspaParams score_params;
    score->add_option("--estimates", score_estimates, "Estimate trajectory CSV")->required();
    score->add_option("--truth", score_truth, "Truth trajectory CSV")->required();
    score->add_option("--out", score_out, "Per-frame OSPA CSV to write");
    score->add_option("--cutoff", score_params.cutoff, "OSPA cutoff in degrees")->capture_default_str();
    score->add_option("--order", score_params.order, "OSPA order")->capture_default_str();

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::CallForHelp& help) {
        return app.exit(help);
    } catch (const CLI::CallForAllHelp& help) {
        return app.exit(help);
    } catch (const CLI::CallForVersion& version) {
        return app.exit(version);
    } catch (const CLI::ParseError& error) {
        app.exit(error);
        return 2;
    }

    try {
        if (*simulate) {
            return run_simulate(sim_scenario, sim_out, sim_truth_out, sim_seed);
        }
        if (*track) {
            return run_track(track_scenario, track_filter, track_out, track_ospa_out, track_seed,
                             track_tunables, track_ospa);
        }
        if (*bench) {
            return run_bench(bench_scenario, bench_out_dir, bench_filters, bench_runs, bench_seed,
                             bench_jobs, bench_tunables, bench_ospa);
        }
        if (*score) {
            return run_ospa(score_estimates, score_truth, score_out, score_params);
        }
        std::cerr << "flowphd: no subcommand selected\n";
        return 2;
    } catch (const NumericalError& error) {
        std::cerr << "flowphd: numerical failure: " << error.what() << '\n';
        return 3;
    } catch (const ConfigError& error) {
        std::cerr << "flowphd: " << error.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& error) {
        std::cerr << "flowphd: " << error.what() << '\n';
        return 2;
    } catch (const std::filesystem::filesystem_error& error) {
        std::cerr << "flowphd: " << error.what() << '\n';
        return 2;
    }
}

}  // namespace flowphd
