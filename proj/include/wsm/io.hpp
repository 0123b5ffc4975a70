#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wsm/models.hpp"

namespace wsm {

/// Header line plus one sequence per line.
struct Dataset {
    ObservationDomain domain;
    json family;   // {"name": ..., hyperparameters}
    json theta;    // generating parameters by name (may be null)
    std::uint64_t seed = 0;
    std::vector<PointSequence> sequences;

    bool operator==(const Dataset&) const = default;
};

[[nodiscard]] json domain_to_json(const ObservationDomain& d);
/// {"t_max": T?, "space": [x_lo, x_hi, y_lo, y_hi]?, "n_marks": K?}.
[[nodiscard]] ObservationDomain domain_from_json(const json& j);

/// {"t": [...], "s": [[x, y], ...]?, "k": [1-based]?, "truncated": true?}.
[[nodiscard]] json sequence_to_json(const PointSequence& seq, const ObservationDomain& d);
[[nodiscard]] PointSequence sequence_from_json(const json& j, const ObservationDomain& d);

void write_jsonl(std::ostream& os, const Dataset& ds);
void write_jsonl(const std::string& path, const Dataset& ds);
/// Throws ValidationError naming the line for malformed input and the
/// sequence and field for invariant violations.
[[nodiscard]] Dataset read_jsonl(std::istream& is);
[[nodiscard]] Dataset read_jsonl(const std::string& path);

} // namespace wsm
