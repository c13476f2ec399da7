#include "flowphd/scenario_io.hpp"

#include "flowphd/csv.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace flowphd {

namespace {

struct Line {
    std::size_t number = 0;
    std::string key;
    std::vector<double> values;
    bool open_target = false;
    bool close_block = false;
};

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& message) {
    throw ConfigError(std::string(source) + ":" + std::to_string(line) + ": " + message);
}

std::string trim(std::string text) {
    const auto comment = text.find('#');
    if (comment != std::string::npos) {
        text.erase(comment);
    }
    const auto begin = text.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return {};
    }
    const auto end = text.find_last_not_of(" \t\r");
    return text.substr(begin, end - begin + 1);
}

double parse_number(const std::string& token, std::string_view source, std::size_t line) {
    double value = 0.0;
    const auto* begin = token.data();
    const auto* end = token.data() + token.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc() || result.ptr != end) {
        fail(source, line, "bad number '" + token + "'");
    }
    return value;
}

std::optional<Line> scan_line(const std::string& raw, std::size_t number, std::string_view source) {
    const std::string text = trim(raw);
    if (text.empty()) {
        return std::nullopt;
    }
    Line line;
    line.number = number;
    if (text == "target {" || text == "target{") {
        line.open_target = true;
        return line;
    }
    if (text == "}") {
        line.close_block = true;
        return line;
    }
    const auto equals = text.find('=');
    if (equals == std::string::npos) {
        fail(source, number, "expected 'key = value', 'target {' or '}'");
    }
    line.key = trim(text.substr(0, equals));
    if (line.key.empty()) {
        fail(source, number, "missing key before '='");
    }
    std::istringstream values(text.substr(equals + 1));
    std::string token;
    while (values >> token) {
        line.values.push_back(parse_number(token, source, number));
    }
    if (line.values.empty()) {
        fail(source, number, "key '" + line.key + "' has no value");
    }
    return line;
}

void expect_count(const Line& line, std::string_view source, std::initializer_list<std::size_t> allowed) {
    for (const auto count : allowed) {
        if (line.values.size() == count) {
            return;
        }
    }
    fail(source, line.number, "key '" + line.key + "' has the wrong number of values");
}

int as_int(double value, const Line& line, std::string_view source) {
    const int result = static_cast<int>(value);
    if (static_cast<double>(result) != value) {
        fail(source, line.number, "key '" + line.key + "' expects an integer");
    }
    return result;
}

Mat2 parse_mat2(const Line& line, std::string_view source) {
    expect_count(line, source, {2, 4});
    Mat2 m;
    if (line.values.size() == 2) {
        m = Vec2(line.values[0], line.values[1]).asDiagonal();
    } else {
        m << line.values[0], line.values[1], line.values[2], line.values[3];
    }
    return m;
}

Mat4 parse_mat4(const Line& line, std::string_view source) {
    expect_count(line, source, {4, 16});
    Mat4 m;
    if (line.values.size() == 4) {
        m = Vec4(line.values[0], line.values[1], line.values[2], line.values[3]).asDiagonal();
    } else {
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                m(r, c) = line.values[static_cast<std::size_t>(4 * r + c)];
            }
        }
    }
    return m;
}

void append_matrix(std::ostringstream& out, const char* key, const Eigen::MatrixXd& m) {
    out << key << " =";
    bool diagonal = true;
    for (int r = 0; r < m.rows() && diagonal; ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            if (r != c && m(r, c) != 0.0) {
                diagonal = false;
                break;
            }
        }
    }
    if (diagonal) {
        for (int i = 0; i < m.rows(); ++i) {
            out << ' ' << format_double(m(i, i));
        }
    } else {
        for (int r = 0; r < m.rows(); ++r) {
            for (int c = 0; c < m.cols(); ++c) {
                out << ' ' << format_double(m(r, c));
            }
        }
    }
    out << '\n';
}

}  // namespace

ScenarioConfig parse_scenario_text(std::string_view text, std::string_view source_name) {
    ScenarioConfig config;
    std::set<std::string> seen_top;
    std::set<std::string> seen_target;
    bool in_target = false;
    bool target_has_state = false;
    std::optional<int> target_birth;
    std::optional<int> target_death;
    std::size_t target_open_line = 0;
    bool has_duration = false;
    bool has_dt = false;

    auto check_duplicate = [&](const Line& line, std::set<std::string>& seen) {
        if (!seen.insert(line.key).second) {
            fail(source_name, line.number, "duplicate key '" + line.key + "'");
        }
    };

    std::istringstream stream{std::string(text)};
    std::string raw;
    std::size_t number = 0;
    while (std::getline(stream, raw)) {
        ++number;
        const auto scanned = scan_line(raw, number, source_name);
        if (!scanned) {
            continue;
        }
        const Line& line = *scanned;

        if (line.open_target) {
            if (in_target) {
                fail(source_name, line.number, "nested target block");
            }
            in_target = true;
            target_has_state = false;
            target_birth.reset();
            target_death.reset();
            seen_target.clear();
            target_open_line = line.number;
            config.targets.emplace_back();
            continue;
        }
        if (line.close_block) {
            if (!in_target) {
                fail(source_name, line.number, "'}' without an open target block");
            }
            if (!target_birth || !target_death || !target_has_state) {
                fail(source_name, line.number, "target block needs birth_frame, death_frame and state");
            }
            if (*target_birth >= *target_death) {
                fail(source_name, line.number, "birth_frame must be smaller than death_frame");
            }
            in_target = false;
            continue;
        }

        if (in_target) {
            auto& target = config.targets.back();
            if (line.key == "birth_frame") {
                check_duplicate(line, seen_target);
                expect_count(line, source_name, {1});
                target.birth_frame = as_int(line.values[0], line, source_name);
                target_birth = target.birth_frame;
            } else if (line.key == "death_frame") {
                check_duplicate(line, seen_target);
                expect_count(line, source_name, {1});
                target.death_frame = as_int(line.values[0], line, source_name);
                target_death = target.death_frame;
            } else if (line.key == "state") {
                check_duplicate(line, seen_target);
                expect_count(line, source_name, {4});
                target.initial = TargetState(line.values[0], line.values[1], line.values[2], line.values[3]);
                target_has_state = true;
            } else if (line.key == "waypoint") {
                expect_count(line, source_name, {3});
                target.waypoints.push_back(
                    {as_int(line.values[0], line, source_name), line.values[1], line.values[2]});
            } else if (line.key == "speech") {
                expect_count(line, source_name, {2});
                target.speech_intervals.emplace_back(as_int(line.values[0], line, source_name),
                                                     as_int(line.values[1], line, source_name));
            } else {
                fail(source_name, line.number, "unknown key '" + line.key + "' in target block");
            }
            continue;
        }

        if (line.key == "duration_frames") {
            check_duplicate(line, seen_top);
            expect_count(line, source_name, {1});
            config.duration_frames = as_int(line.values[0], line, source_name);
            if (config.duration_frames < 1) {
                fail(source_name, line.number, "duration_frames must be at least 1");
            }
            has_duration = true;
        } else if (line.key == "dt") {
            check_duplicate(line, seen_top);
            expect_count(line, source_name, {1});
            config.dt = line.values[0];
            if (!(config.dt > 0.0)) {
                fail(source_name, line.number, "dt must be positive");
            }
            has_dt = true;
        } else if (line.key == "seed") {
            check_duplicate(line, seen_top);
            expect_count(line, source_name, {1});
            if (line.values[0] < 0.0) {
                fail(source_name, line.number, "seed must be non-negative");
            }
            config.seed = static_cast<std::uint64_t>(line.values[0]);
        } else if (line.key == "detection_probability") {
            check_duplicate(line, seen_top);
            expect_count(line, source_name, {1});
            config.detection_probability = line.values[0];
            if (!(config.detection_probability >= 0.0 && config.detection_probability <= 1.0)) {
                fail(source_name, line.number, "detection_probability must be in [0, 1]");
            }
        } else if (line.key == "clutter_rate") {
            check_duplicate(line, seen_top);
            expect_count(line, source_name, {1});
            config.clutter_rate = line.values[0];
            if (!(config.clutter_rate >= 0.0)) {
                fail(source_name, line.number, "clutter_rate must be non-negative");
            }
        } else if (line.key == "measurement_noise") {
            check_duplicate(line, seen_top);
            config.measurement_noise = parse_mat2(line, source_name);
        } else if (line.key == "process_noise") {
            check_duplicate(line, seen_top);
            config.process_noise = parse_mat4(line, source_name);
        } else {
            fail(source_name, line.number, "unknown key '" + line.key + "'");
        }
    }

    if (in_target) {
        fail(source_name, target_open_line, "unterminated target block");
    }
    if (!has_duration || !has_dt) {
        throw ConfigError(std::string(source_name) + ": missing mandatory key 'duration_frames' or 'dt'");
    }
    try {
        config.validate();
    } catch (const ConfigError& error) {
        throw ConfigError(std::string(source_name) + ": " + error.what());
    }
    return config;
}

ScenarioConfig parse_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open scenario file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_text(buffer.str(), path.string());
}

std::string write_scenario(const ScenarioConfig& config) {
    std::ostringstream out;
    out << "# flowphd scenario\n";
    out << "duration_frames = " << config.duration_frames << '\n';
    out << "dt = " << format_double(config.dt) << '\n';
    out << "seed = " << config.seed << '\n';
    out << "detection_probability = " << format_double(config.detection_probability) << '\n';
    out << "clutter_rate = " << format_double(config.clutter_rate) << '\n';
    append_matrix(out, "measurement_noise", config.measurement_noise);
    append_matrix(out, "process_noise", config.process_noise);
    for (const auto& target : config.targets) {
        out << "\ntarget {\n";
        out << "  birth_frame = " << target.birth_frame << '\n';
        out << "  death_frame = " << target.death_frame << '\n';
        out << "  state = " << format_double(target.initial.azimuth) << ' '
            << format_double(target.initial.elevation) << ' ' << format_double(target.initial.azimuth_rate)
            << ' ' << format_double(target.initial.elevation_rate) << '\n';
        for (const auto& wp : target.waypoints) {
            out << "  waypoint = " << wp.frame << ' ' << format_double(wp.azimuth) << ' '
                << format_double(wp.elevation) << '\n';
        }
        for (const auto& interval : target.speech_intervals) {
            out << "  speech = " << interval.first << ' ' << interval.second << '\n';
        }
        out << "}\n";
    }
    return out.str();
}

void write_scenario_file(const ScenarioConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw ConfigError("cannot open for writing: " + path.string());
    }
    out << write_scenario(config);
}

}  // namespace flowphd
