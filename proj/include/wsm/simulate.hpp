#pragma once

#include <cstdint>
#include <vector>

#include "wsm/models.hpp"

namespace wsm {

struct SimConfig {
    FamilyPtr family;
    Params theta;
    std::size_t n_sequences = 1;
    std::uint64_t seed = 0;
    std::size_t max_events = 100000;

    /// Throws ConfigError on a missing family, bad theta or zero counts.
    void validate() const;
};

/// Poisson families: thinning against intensity_bound over V.
[[nodiscard]] std::vector<PointSequence> simulate_poisson(const SimConfig& cfg);

/// Ogata thinning for temporal families whose ground intensity does not
/// increase between events (exponential Hawkes); marks drawn by intensity ratio.
[[nodiscard]] std::vector<PointSequence> simulate_hawkes(const SimConfig& cfg);

/// Thinning in time on the in-S ground intensity, then the location from the
/// background (uniform on S) or a trigger (Gaussian truncated to S).
[[nodiscard]] std::vector<PointSequence> simulate_st_hawkes(const SimConfig& cfg);

/// Exact inversion of the closed-form compensator.
[[nodiscard]] std::vector<PointSequence> simulate_logistic(const SimConfig& cfg);

/// Dispatches on the family.
[[nodiscard]] std::vector<PointSequence> simulate(const SimConfig& cfg);

} // namespace wsm
