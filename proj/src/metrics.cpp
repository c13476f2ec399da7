#include "flowphd/metrics.hpp"

#include "flowphd/angles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace flowphd {

namespace {

/// Kuhn-Munkres over a square cost matrix; returns the minimal total cost.
double solve_assignment(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);

    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> min_value(static_cast<std::size_t>(n) + 1,
                                      std::numeric_limits<double>::infinity());
        std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const int i0 = match[static_cast<std::size_t>(j0)];
            int j1 = 0;
            double delta = std::numeric_limits<double>::infinity();
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    continue;
                }
                const double current = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                                       v[static_cast<std::size_t>(j)];
                if (current < min_value[static_cast<std::size_t>(j)]) {
                    min_value[static_cast<std::size_t>(j)] = current;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (min_value[static_cast<std::size_t>(j)] < delta) {
                    delta = min_value[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    min_value[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    double total = 0.0;
    for (int j = 1; j <= n; ++j) {
        const int i = match[static_cast<std::size_t>(j)];
        if (i >= 1) {
            total += cost(i - 1, j - 1);
        }
    }
    return total;
}

}  // namespace

void OspaParams::validate() const {
    if (!(cutoff > 0.0)) {
        throw std::invalid_argument("OspaParams cutoff: must be positive");
    }
    if (!(order >= 1.0)) {
        throw std::invalid_argument("OspaParams order: must be at least 1");
    }
}

double ospa(std::span<const TargetState> estimates, std::span<const TargetState> truth,
            const OspaParams& params) {
    params.validate();
    if (estimates.empty() && truth.empty()) {
        return 0.0;
    }
    const auto& smaller = estimates.size() <= truth.size() ? estimates : truth;
    const auto& larger = estimates.size() <= truth.size() ? truth : estimates;
    const int m = static_cast<int>(smaller.size());
    const int n = static_cast<int>(larger.size());
    const double cutoff_p = std::pow(params.cutoff, params.order);

    // rows beyond the smaller set are virtual and cost exactly c^p,
    // which reproduces the cardinality penalty term
    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i < m) {
                const double d = angular_distance(smaller[static_cast<std::size_t>(i)].azimuth,
                                                  smaller[static_cast<std::size_t>(i)].elevation,
                                                  larger[static_cast<std::size_t>(j)].azimuth,
                                                  larger[static_cast<std::size_t>(j)].elevation);
                cost(i, j) = std::pow(std::min(params.cutoff, d), params.order);
            } else {
                cost(i, j) = cutoff_p;
            }
        }
    }
    const double total = solve_assignment(cost);
    return std::pow(total / static_cast<double>(n), 1.0 / params.order);
}

SequenceScore ospa_sequence(const std::vector<std::vector<TargetState>>& estimates,
                            const std::vector<std::vector<TargetState>>& truth,
                            const OspaParams& params) {
    if (estimates.size() != truth.size()) {
        throw std::invalid_argument("ospa_sequence: sequence length mismatch");
    }
    SequenceScore score;
    score.per_frame.reserve(estimates.size());
    double sum = 0.0;
    for (std::size_t f = 0; f < estimates.size(); ++f) {
        const double value = ospa(estimates[f], truth[f], params);
        score.per_frame.push_back(value);
        sum += value;
    }
    score.mean = estimates.empty() ? 0.0 : sum / static_cast<double>(estimates.size());
    return score;
}

}  // namespace flowphd
