#include "wsm/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wsm/errors.hpp"

namespace wsm {

namespace {

void check_rect(const Rect& r) {
    if (!(std::isfinite(r.x_lo) && std::isfinite(r.x_hi) && std::isfinite(r.y_lo) && std::isfinite(r.y_hi))) {
        throw ConfigError("spatial rectangle bounds must be finite");
    }
    if (!(r.x_lo < r.x_hi) || !(r.y_lo < r.y_hi)) {
        throw ConfigError("spatial rectangle requires x_lo < x_hi and y_lo < y_hi");
    }
}

void check_horizon(double t_max) {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) {
        throw ConfigError("time horizon must be finite and strictly positive");
    }
}

void check_marks(std::optional<int> n_marks) {
    if (n_marks && *n_marks < 1) {
        throw ConfigError("mark count must be at least 1");
    }
}

std::string where(std::size_t n) { return "event " + std::to_string(n); }

} // namespace

ObservationDomain ObservationDomain::temporal(double t_max, std::optional<int> n_marks) {
    check_horizon(t_max);
    check_marks(n_marks);
    ObservationDomain d;
    d.t_max_ = t_max;
    d.n_marks_ = n_marks;
    return d;
}

ObservationDomain ObservationDomain::spatial(const Rect& space) {
    check_rect(space);
    ObservationDomain d;
    d.space_ = space;
    return d;
}

ObservationDomain ObservationDomain::spatio_temporal(double t_max, const Rect& space, std::optional<int> n_marks) {
    check_horizon(t_max);
    check_rect(space);
    check_marks(n_marks);
    ObservationDomain d;
    d.t_max_ = t_max;
    d.space_ = space;
    d.n_marks_ = n_marks;
    return d;
}

double ObservationDomain::t_max() const {
    if (!t_max_) {
        throw ConfigError("domain has no time axis");
    }
    return *t_max_;
}

const Rect& ObservationDomain::space() const {
    if (!space_) {
        throw ConfigError("domain has no spatial component");
    }
    return *space_;
}

double ObservationDomain::volume() const {
    double v = 1.0;
    if (t_max_) {
        v *= *t_max_;
    }
    if (space_) {
        v *= space_->area();
    }
    return v;
}

void ObservationDomain::validate(const PointSequence& seq) const {
    const std::size_t n = seq.size();
    if (has_time()) {
        if (seq.times.size() != n) {
            throw ValidationError("field t: expected " + std::to_string(n) + " times");
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double t = seq.times[i];
            if (!std::isfinite(t) || !(t > 0.0) || !(t < *t_max_)) {
                throw ValidationError("field t: " + where(i) + " time outside (0, T)");
            }
            if (i > 0 && !(t > seq.times[i - 1])) {
                throw ValidationError("field t: " + where(i) + " times not strictly increasing");
            }
        }
    } else if (!seq.times.empty()) {
        throw ValidationError("field t: purely spatial domain does not carry times");
    }

    if (has_space()) {
        if (seq.locs.size() != n) {
            throw ValidationError("field s: expected " + std::to_string(n) + " locations");
        }
        for (std::size_t i = 0; i < n; ++i) {
            const Point2& p = seq.locs[i];
            if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !space_->contains(p)) {
                throw ValidationError("field s: " + where(i) + " location outside S");
            }
        }
    } else if (!seq.locs.empty()) {
        throw ValidationError("field s: domain has no spatial component");
    }

    if (is_marked()) {
        if (seq.marks.size() != n) {
            throw ValidationError("field k: expected " + std::to_string(n) + " marks");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (seq.marks[i] < 0 || seq.marks[i] >= *n_marks_) {
                throw ValidationError("field k: " + where(i) + " mark outside 1..K");
            }
        }
    } else if (!seq.marks.empty()) {
        throw ValidationError("field k: domain is unmarked");
    }
}

PointVec ObservationDomain::event_point(const PointSequence& seq, std::size_t n) const {
    PointVec x(static_cast<Eigen::Index>(point_dim()));
    Eigen::Index j = 0;
    if (has_time()) {
        x(j++) = seq.times.at(n);
    }
    if (has_space()) {
        x(j++) = seq.locs.at(n)[0];
        x(j++) = seq.locs.at(n)[1];
    }
    return x;
}

double dist_to_boundary(std::span<const double> x, const ObservationDomain& domain) {
    if (x.size() != domain.point_dim()) {
        throw DomainError("point dimension does not match the domain");
    }
    double best = std::numeric_limits<double>::infinity();
    std::size_t j = 0;
    const auto face = [&](double v, double lo, double hi) {
        if (!(v >= lo && v <= hi)) {
            throw DomainError("point lies outside the domain");
        }
        best = std::min({best, v - lo, hi - v});
    };
    if (domain.has_time()) {
        face(x[j++], 0.0, domain.t_max());
    }
    if (domain.has_space()) {
        const Rect& s = domain.space();
        face(x[j++], s.x_lo, s.x_hi);
        face(x[j++], s.y_lo, s.y_hi);
    }
    return best;
}

} // namespace wsm
