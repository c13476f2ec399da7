#include "flowphd/phd.hpp"

#include "flowphd/angles.hpp"
#include "flowphd/diag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace flowphd {

namespace {

constexpr double kDenominatorFloor = 1e-300;
constexpr int kMaxLloydIterations = 100;

double position_distance_sq(const Vec2& a, const Vec2& b) {
    const double d_az = wrap_angular_difference(a[0], b[0]);
    const double d_el = a[1] - b[1];
    return d_az * d_az + d_el * d_el;
}

}  // namespace

double ParticlePopulation::total_weight() const {
    double sum = 0.0;
    for (const auto& particle : particles) {
        sum += particle.weight;
    }
    return sum;
}

void FilterConfig::validate() const {
    auto probability = [](double value, const char* what) {
        if (!(value >= 0.0 && value <= 1.0)) {
            throw std::invalid_argument(std::string("FilterConfig ") + what + ": must be in [0, 1]");
        }
    };
    probability(survival_probability, "survival_probability");
    probability(detection_probability, "detection_probability");
    if (!(clutter_intensity >= 0.0)) {
        throw std::invalid_argument("FilterConfig clutter_intensity: must be non-negative");
    }
    if (!(birth_weight >= 0.0)) {
        throw std::invalid_argument("FilterConfig birth_weight: must be non-negative");
    }
    if (births_per_measurement < 1 || particles_per_target < 1) {
        throw std::invalid_argument("FilterConfig counts: must be at least 1");
    }
    if (!(ess_fraction > 0.0 && ess_fraction <= 1.0)) {
        throw std::invalid_argument("FilterConfig ess_fraction: must be in (0, 1]");
    }
    Eigen::LLT<Mat2> llt(birth_spread);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("FilterConfig birth_spread: not positive definite");
    }
    noise.validate();
}

ParticlePopulation predict(const ParticlePopulation& pop, double dt, const FilterConfig& config, Rng& rng) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("predict: dt must be positive");
    }
    const Mat4 noise_sqrt = covariance_sqrt<4>(config.noise.process_noise);
    ParticlePopulation out = pop;
    for (auto& particle : out.particles) {
        particle.state = transition(particle.state, dt, noise_sqrt * rng.normal_vec4());
        particle.weight *= config.survival_probability;
    }
    // everything entering frame k counts as surviving until births are appended
    out.surviving_count = out.particles.size();
    out.born_count = 0;
    return out;
}

std::vector<Particle> spawn_births(std::span<const Measurement> measurements, const FilterConfig& config,
                                   Rng& rng) {
    std::vector<Particle> born;
    if (measurements.empty()) {
        return born;
    }
    const double sigma_az = std::sqrt(config.birth_spread(0, 0));
    const double sigma_el = std::sqrt(config.birth_spread(1, 1));
    const double box_density = 1.0 / (36.0 * sigma_az * sigma_el);
    const double weight =
        config.birth_weight / (static_cast<double>(config.births_per_measurement) * box_density);

    const Mat2 rate_block = config.noise.process_noise.bottomRightCorner<2, 2>();
    const Mat2 rate_sqrt = covariance_sqrt<2>(rate_block);
    Mat4 initial_covariance = Mat4::Zero();
    initial_covariance.topLeftCorner<2, 2>() = config.birth_spread;
    initial_covariance.bottomRightCorner<2, 2>() = rate_block;
    initial_covariance += kCovarianceJitter * Mat4::Identity();

    born.reserve(measurements.size() * static_cast<std::size_t>(config.births_per_measurement));
    for (const auto& z : measurements) {
        for (int b = 0; b < config.births_per_measurement; ++b) {
            const double az = z.azimuth + rng.uniform(-3.0 * sigma_az, 3.0 * sigma_az);
            const double el = z.elevation + rng.uniform(-3.0 * sigma_el, 3.0 * sigma_el);
            const Vec2 rates = rate_sqrt * rng.normal_vec2();
            born.push_back({TargetState(az, el, rates[0], rates[1]), weight, initial_covariance});
        }
    }
    return born;
}

ParticlePopulation append_births(ParticlePopulation pop, std::vector<Particle> born) {
    if (pop.born_count != 0) {
        throw std::invalid_argument("append_births: population already has a birth block");
    }
    pop.born_count = born.size();
    pop.particles.insert(pop.particles.end(), std::make_move_iterator(born.begin()),
                         std::make_move_iterator(born.end()));
    return pop;
}

ParticlePopulation update_weights(const ParticlePopulation& pop, std::span<const Measurement> measurements,
                                  const FilterConfig& config) {
    ParticlePopulation out = pop;
    const double p_d = config.detection_probability;
    if (measurements.empty()) {
        for (auto& particle : out.particles) {
            particle.weight *= 1.0 - p_d;
        }
        return out;
    }

    const std::size_t n = pop.size();
    const std::size_t n_meas = measurements.size();
    Eigen::MatrixXd likelihood(n, n_meas);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < n_meas; ++r) {
            likelihood(i, r) =
                gaussian_likelihood(pop.particles[i].state, measurements[r], config.noise.measurement_noise);
        }
    }

    std::vector<double> denominator(n_meas);
    bool underflow = false;
    for (std::size_t r = 0; r < n_meas; ++r) {
        double mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mass += p_d * likelihood(i, r) * pop.particles[i].weight;
        }
        denominator[r] = config.clutter_intensity + mass;
        if (denominator[r] < kDenominatorFloor) {
            underflow = true;
        }
    }
    if (underflow) {
        diag::warn("update_weights: collapsed measurement normalizer; dropping its ratio term");
    }

    for (std::size_t i = 0; i < n; ++i) {
        double ratio = 0.0;
        for (std::size_t r = 0; r < n_meas; ++r) {
            if (denominator[r] >= kDenominatorFloor) {
                ratio += p_d * likelihood(i, r) / denominator[r];
            }
        }
        out.particles[i].weight = (1.0 - p_d + ratio) * pop.particles[i].weight;
    }
    return out;
}

double estimate_count(const ParticlePopulation& pop) {
    return pop.total_weight();
}

namespace {

struct KmeansState {
    std::vector<Vec2> centers;
    std::vector<int> assignment;
};

int nearest_center(const std::vector<Vec2>& centers, const Vec2& point) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d = position_distance_sq(point, centers[c]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

std::size_t weighted_pick(const std::vector<double>& masses, double total, Rng& rng) {
    const double u = rng.uniform() * total;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        cumulative += masses[i];
        if (u < cumulative) {
            return i;
        }
    }
    return masses.size() - 1;
}

}  // namespace

ClusterResult extract_states(const ParticlePopulation& pop, int n_targets, Rng& rng) {
    ClusterResult result;
    const std::size_t n = pop.size();
    if (n_targets <= 0) {
        return result;
    }
    int k = n_targets;
    if (static_cast<std::size_t>(k) > n) {
        k = static_cast<int>(n);
        result.reduced_k = true;
        diag::warn("extract_states: requested more clusters than particles; k reduced");
    }
    if (k == 0) {
        return result;
    }

    std::vector<Vec2> points(n);
    std::vector<double> weights(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        points[i] = pop.particles[i].state.position();
        weights[i] = pop.particles[i].weight;
        total += weights[i];
    }
    if (!(total > 0.0)) {
        diag::warn("extract_states: zero total weight; clustering with uniform weights");
        std::fill(weights.begin(), weights.end(), 1.0);
        total = static_cast<double>(n);
    }

    // k-means++ seeding
    std::vector<Vec2> centers;
    centers.reserve(static_cast<std::size_t>(k));
    centers.push_back(points[weighted_pick(weights, total, rng)]);
    std::vector<double> seed_mass(n);
    while (centers.size() < static_cast<std::size_t>(k)) {
        double mass_total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d2 = std::numeric_limits<double>::infinity();
            for (const auto& center : centers) {
                d2 = std::min(d2, position_distance_sq(points[i], center));
            }
            seed_mass[i] = weights[i] * d2;
            mass_total += seed_mass[i];
        }
        if (mass_total > 0.0) {
            centers.push_back(points[weighted_pick(seed_mass, mass_total, rng)]);
        } else {
            centers.push_back(points[centers.size() % n]);  // duplicate points; resolved below
        }
    }

    std::vector<int> assignment(n, 0);
    std::vector<int> previous;
    for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            assignment[i] = nearest_center(centers, points[i]);
        }
        if (assignment == previous) {
            break;
        }
        previous = assignment;

        for (int c = 0; c < k; ++c) {
            double mass = 0.0;
            double az_offset = 0.0;
            double el_sum = 0.0;
            bool has_member = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (assignment[i] != c) {
                    continue;
                }
                has_member = true;
                mass += weights[i];
                az_offset += weights[i] * wrap_angular_difference(points[i][0], centers[c][0]);
                el_sum += weights[i] * points[i][1];
            }
            if (!has_member || !(mass > 0.0)) {
                // relocate an empty cluster to the point farthest from its center
                std::size_t farthest = 0;
                double farthest_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = weights[i] * position_distance_sq(points[i], centers[assignment[i]]);
                    if (d > farthest_d) {
                        farthest_d = d;
                        farthest = i;
                    }
                }
                centers[c] = points[farthest];
                continue;
            }
            centers[c] = {wrap_azimuth(centers[c][0] + az_offset / mass), el_sum / mass};
        }
    }

    // weighted mean full state per cluster
    struct Accumulator {
        double mass = 0.0;
        double az_offset = 0.0;
        double el = 0.0;
        double az_rate = 0.0;
        double el_rate = 0.0;
        std::size_t members = 0;
    };
    std::vector<Accumulator> acc(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) {
        auto& a = acc[static_cast<std::size_t>(assignment[i])];
        const auto& state = pop.particles[i].state;
        a.mass += weights[i];
        a.az_offset += weights[i] * wrap_angular_difference(state.azimuth, centers[assignment[i]][0]);
        a.el += weights[i] * state.elevation;
        a.az_rate += weights[i] * state.azimuth_rate;
        a.el_rate += weights[i] * state.elevation_rate;
        a.members += 1;
    }

    struct Labeled {
        ClusterEstimate estimate;
        int original_index;
    };
    std::vector<Labeled> labeled;
    for (int c = 0; c < k; ++c) {
        const auto& a = acc[static_cast<std::size_t>(c)];
        if (a.members == 0 || !(a.mass > 0.0)) {
            result.reduced_k = true;  // degenerate duplicate center
            continue;
        }
        TargetState mean(wrap_azimuth(centers[c][0] + a.az_offset / a.mass), a.el / a.mass,
                         a.az_rate / a.mass, a.el_rate / a.mass);
        double cluster_weight = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (assignment[i] == c) {
                cluster_weight += pop.particles[i].weight;
            }
        }
        labeled.push_back({{mean, cluster_weight}, c});
    }
    std::sort(labeled.begin(), labeled.end(), [](const Labeled& a, const Labeled& b) {
        if (a.estimate.weight != b.estimate.weight) {
            return a.estimate.weight > b.estimate.weight;
        }
        if (a.estimate.state.azimuth != b.estimate.state.azimuth) {
            return a.estimate.state.azimuth < b.estimate.state.azimuth;
        }
        return a.estimate.state.elevation < b.estimate.state.elevation;
    });

    std::vector<int> remap(static_cast<std::size_t>(k), -1);
    for (std::size_t out_index = 0; out_index < labeled.size(); ++out_index) {
        remap[static_cast<std::size_t>(labeled[out_index].original_index)] = static_cast<int>(out_index);
        result.estimates.push_back(labeled[out_index].estimate);
    }
    result.assignment.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        int mapped = remap[static_cast<std::size_t>(assignment[i])];
        if (mapped < 0) {
            mapped = 0;  // member of a dropped duplicate cluster; fold into the heaviest
        }
        result.assignment[i] = mapped;
    }
    return result;
}

ParticlePopulation update_covariances(const ParticlePopulation& pop, const std::vector<int>& assignment,
                                      const FilterConfig& config) {
    if (assignment.size() != pop.size()) {
        throw std::invalid_argument("update_covariances: assignment size mismatch");
    }
    ParticlePopulation out = pop;
    if (pop.particles.empty()) {
        return out;
    }
    int k = 0;
    for (const int c : assignment) {
        if (c < 0) {
            throw std::invalid_argument("update_covariances: every particle must be assigned");
        }
        k = std::max(k, c + 1);
    }

    for (int c = 0; c < k; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (assignment[i] == c) {
                members.push_back(i);
            }
        }
        if (members.empty()) {
            continue;
        }

        Mat4 covariance;
        if (members.size() == 1) {
            covariance = config.noise.process_noise;  // no spread to estimate
        } else {
            double mass = 0.0;
            for (const auto i : members) {
                mass += pop.particles[i].weight;
            }
            const bool uniform = !(mass > 0.0);
            if (uniform) {
                mass = static_cast<double>(members.size());
            }
            auto member_weight = [&](std::size_t i) { return uniform ? 1.0 : pop.particles[i].weight; };

            const double ref_az = pop.particles[members[0]].state.azimuth;
            double az_offset = 0.0;
            Eigen::Vector3d linear = Eigen::Vector3d::Zero();
            for (const auto i : members) {
                const auto& s = pop.particles[i].state;
                az_offset += member_weight(i) * wrap_angular_difference(s.azimuth, ref_az);
                linear += member_weight(i) * Eigen::Vector3d(s.elevation, s.azimuth_rate, s.elevation_rate);
            }
            const double mean_az = wrap_azimuth(ref_az + az_offset / mass);
            linear /= mass;

            Mat4 scatter = Mat4::Zero();
            for (const auto i : members) {
                const auto& s = pop.particles[i].state;
                const Vec4 deviation(wrap_angular_difference(s.azimuth, mean_az), s.elevation - linear[0],
                                     s.azimuth_rate - linear[1], s.elevation_rate - linear[2]);
                scatter += member_weight(i) * (deviation * deviation.transpose());
            }
            covariance = scatter / mass + kCovarianceJitter * Mat4::Identity();
        }
        for (const auto i : members) {
            out.particles[i].covariance = covariance;
        }
    }
    return out;
}

double ess(std::span<const double> weights) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("ess: weights must be finite and non-negative");
        }
        sum += w;
        sum_sq += w * w;
    }
    if (!(sum_sq > 0.0)) {
        throw NumericalError("ess: degenerate population (all weights zero)");
    }
    return sum * sum / sum_sq;
}

double ess(const ParticlePopulation& pop) {
    std::vector<double> weights(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        weights[i] = pop.particles[i].weight;
    }
    return ess(std::span<const double>(weights));
}

ParticlePopulation resample(const ParticlePopulation& pop, std::size_t target_count, Rng& rng) {
    if (target_count == 0) {
        throw std::invalid_argument("resample: target_count must be positive");
    }
    const double total = pop.total_weight();
    if (pop.particles.empty() || !(total > 0.0)) {
        throw NumericalError("resample: degenerate population");
    }

    ParticlePopulation out;
    out.particles.reserve(target_count);
    const double step = total / static_cast<double>(target_count);
    const double start = rng.uniform() * step;
    double cumulative = pop.particles[0].weight;
    std::size_t source = 0;
    for (std::size_t j = 0; j < target_count; ++j) {
        const double position = start + static_cast<double>(j) * step;
        while (cumulative < position && source + 1 < pop.size()) {
            ++source;
            cumulative += pop.particles[source].weight;
        }
        out.particles.push_back(pop.particles[source]);
        out.particles.back().weight = step;  // equal weights carrying the full mass
    }
    out.surviving_count = target_count;
    out.born_count = 0;
    return out;
}

}  // namespace flowphd
