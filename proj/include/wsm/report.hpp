#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace wsm {

/// Value and gradient of an objective averaged over sequences.
struct ObjectiveReport {
    double value = 0.0;
    Eigen::VectorXd grad;
    std::vector<double> per_seq; // value = mean(per_seq) when filled
    std::size_t clamp_count = 0; // probabilities clamped into (0, 1)
};

using Objective = std::function<ObjectiveReport(const Eigen::VectorXd&)>;

} // namespace wsm
