#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace wsm {

using Point2 = std::array<double, 2>;

/// Coordinates of one event as seen by a Janossy-score model: time (if the
/// domain has a time axis) followed by the two spatial coordinates (if any).
using PointVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;

/// Axis-aligned rectangle [x_lo, x_hi] x [y_lo, y_hi].
struct Rect {
    double x_lo = 0.0;
    double x_hi = 1.0;
    double y_lo = 0.0;
    double y_hi = 1.0;

    [[nodiscard]] double width() const noexcept { return x_hi - x_lo; }
    [[nodiscard]] double height() const noexcept { return y_hi - y_lo; }
    [[nodiscard]] double area() const noexcept { return width() * height(); }
    [[nodiscard]] bool contains(const Point2& p) const noexcept {
        return p[0] >= x_lo && p[0] <= x_hi && p[1] >= y_lo && p[1] <= y_hi;
    }
    [[nodiscard]] bool contains_strictly(const Point2& p) const noexcept {
        return p[0] > x_lo && p[0] < x_hi && p[1] > y_lo && p[1] < y_hi;
    }
    bool operator==(const Rect&) const = default;
};

/// One realization of a finite point process.
///
/// Marks are stored zero-based (0..K-1); the dataset format uses 1..K.
/// Purely spatial processes leave `times` empty.
struct PointSequence {
    std::vector<double> times;
    std::vector<Point2> locs;
    std::vector<int> marks;
    bool truncated = false;

    [[nodiscard]] std::size_t size() const noexcept { return times.empty() ? locs.size() : times.size(); }
    [[nodiscard]] bool empty() const noexcept { return size() == 0; }

    /// t_{n-1} for zero-based event index n (0 for the first event).
    [[nodiscard]] double previous_time(std::size_t n) const noexcept { return n == 0 ? 0.0 : times[n - 1]; }

    bool operator==(const PointSequence&) const = default;
};

/// Bounded observation window V: a time interval (0, T), a rectangle S, or
/// their product, optionally with K mark types.
class ObservationDomain {
public:
    ObservationDomain() = default;

    static ObservationDomain temporal(double t_max, std::optional<int> n_marks = std::nullopt);
    static ObservationDomain spatial(const Rect& space);
    static ObservationDomain spatio_temporal(double t_max, const Rect& space,
                                             std::optional<int> n_marks = std::nullopt);

    [[nodiscard]] bool has_time() const noexcept { return t_max_.has_value(); }
    [[nodiscard]] bool has_space() const noexcept { return space_.has_value(); }
    [[nodiscard]] bool is_marked() const noexcept { return n_marks_.has_value(); }

    /// Time horizon T; throws ConfigError for purely spatial domains.
    [[nodiscard]] double t_max() const;
    /// Spatial rectangle S; throws ConfigError for purely temporal domains.
    [[nodiscard]] const Rect& space() const;
    /// Number of mark types (1 when unmarked).
    [[nodiscard]] int n_marks() const noexcept { return n_marks_.value_or(1); }

    /// Dimension d of V (1 for time, 2 for space, 3 for space-time).
    [[nodiscard]] std::size_t point_dim() const noexcept {
        return (has_time() ? 1U : 0U) + (has_space() ? 2U : 0U);
    }
    /// Lebesgue volume of V.
    [[nodiscard]] double volume() const;

    /// Checks every PointSequence invariant against this domain; throws
    /// ValidationError naming the offending field and event.
    void validate(const PointSequence& seq) const;

    /// Coordinates of event n in V (time first, then space).
    [[nodiscard]] PointVec event_point(const PointSequence& seq, std::size_t n) const;

    bool operator==(const ObservationDomain&) const = default;

private:
    std::optional<double> t_max_;
    std::optional<Rect> space_;
    std::optional<int> n_marks_;
};

/// Distance from x to the boundary of the closed domain V (minimum over the
/// faces of the box). Throws DomainError when x lies outside V.
[[nodiscard]] double dist_to_boundary(std::span<const double> x, const ObservationDomain& domain);

} // namespace wsm
