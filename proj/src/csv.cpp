#include "flowphd/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace flowphd {

namespace {

constexpr const char* kTrajectoryHeader =
    "frame,track_id,azimuth,elevation,azimuth_rate,elevation_rate,weight,coasting";

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw ConfigError("cannot open for writing: " + path.string());
    }
    return out;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) {
        fields.push_back(field);
    }
    return fields;
}

double parse_field_double(const std::string& field, const std::filesystem::path& path, std::size_t line) {
    double value = 0.0;
    const auto* begin = field.data();
    const auto* end = field.data() + field.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc() || result.ptr != end) {
        throw ConfigError(path.string() + ":" + std::to_string(line) + ": bad number '" + field + "'");
    }
    return value;
}

}  // namespace

std::string format_double(double value) {
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<std::vector<TrackEstimate>>& frames) {
    auto out = open_for_write(path);
    out << kTrajectoryHeader << '\n';
    for (std::size_t f = 0; f < frames.size(); ++f) {
        for (const auto& track : frames[f]) {
            out << f << ',' << track.id << ',' << format_double(track.state.azimuth) << ','
                << format_double(track.state.elevation) << ',' << format_double(track.state.azimuth_rate)
                << ',' << format_double(track.state.elevation_rate) << ',' << format_double(track.weight)
                << ',' << (track.coasting ? 1 : 0) << '\n';
        }
    }
}

std::vector<std::vector<TrackEstimate>> read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open trajectory file: " + path.string());
    }
    std::string line;
    std::size_t line_number = 0;
    if (!std::getline(in, line) || line != kTrajectoryHeader) {
        throw ConfigError(path.string() + ": missing or wrong trajectory header");
    }
    ++line_number;

    std::vector<std::vector<TrackEstimate>> frames;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != 8) {
            throw ConfigError(path.string() + ":" + std::to_string(line_number) +
                              ": expected 8 fields, got " + std::to_string(fields.size()));
        }
        const auto frame = static_cast<std::size_t>(parse_field_double(fields[0], path, line_number));
        TrackEstimate track;
        track.id = static_cast<int>(parse_field_double(fields[1], path, line_number));
        track.state = TargetState(parse_field_double(fields[2], path, line_number),
                                  parse_field_double(fields[3], path, line_number),
                                  parse_field_double(fields[4], path, line_number),
                                  parse_field_double(fields[5], path, line_number));
        track.weight = parse_field_double(fields[6], path, line_number);
        track.coasting = parse_field_double(fields[7], path, line_number) != 0.0;
        if (frames.size() <= frame) {
            frames.resize(frame + 1);
        }
        frames[frame].push_back(track);
    }
    return frames;
}

void write_measurement_csv(const std::filesystem::path& path, const std::vector<FrameRecord>& frames) {
    auto out = open_for_write(path);
    out << "frame,azimuth,elevation\n";
    for (const auto& record : frames) {
        for (const auto& tagged : record.measurements) {
            out << record.frame << ',' << format_double(tagged.value.azimuth) << ','
                << format_double(tagged.value.elevation) << '\n';
        }
    }
}

void write_frame_score_csv(const std::filesystem::path& path, const std::vector<double>& per_frame) {
    auto out = open_for_write(path);
    out << "frame,ospa\n";
    for (std::size_t f = 0; f < per_frame.size(); ++f) {
        out << f << ',' << format_double(per_frame[f]) << '\n';
    }
}

}  // namespace flowphd
