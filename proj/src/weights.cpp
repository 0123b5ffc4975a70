#include "wsm/weights.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "wsm/errors.hpp"

namespace wsm {

WeightSpec::WeightSpec(WeightKind kind, WeightScope scope) : kind_(kind), scope_(scope), name_(to_string(kind)) {
    if (kind == WeightKind::Custom) {
        throw ConfigError("custom weights are built with custom_temporal or custom_point");
    }
}

WeightSpec WeightSpec::unit(WeightScope scope) {
    WeightSpec w;
    w.kind_ = WeightKind::Custom;
    w.scope_ = scope;
    w.name_ = "unit";
    w.unit_ = true;
    return w;
}

WeightSpec WeightSpec::custom_temporal(TemporalWeightFn fn, double t_max, std::string name, double tol) {
    if (!fn) {
        throw ConfigError("custom weight callable is empty");
    }
    // 32 values of t_prev, each checked at t = t_prev and t = T.
    for (int i = 0; i < 32; ++i) {
        const double t_prev = t_max * i / 32.0;
        for (const double t : {t_prev, t_max}) {
            const double v = fn(t_prev, t, t_max).value;
            if (!(std::abs(v) <= tol)) {
                throw ConfigError("custom temporal weight '" + name + "' does not vanish at the boundary (t_prev=" +
                                  std::to_string(t_prev) + ", t=" + std::to_string(t) + ")");
            }
        }
    }
    WeightSpec w;
    w.kind_ = WeightKind::Custom;
    w.scope_ = WeightScope::Temporal;
    w.name_ = std::move(name);
    w.temporal_fn_ = std::make_shared<const TemporalWeightFn>(std::move(fn));
    return w;
}

WeightSpec WeightSpec::custom_point(WeightScope scope, PointWeightFn fn, const ObservationDomain& domain,
                                    std::string name, double tol) {
    if (scope == WeightScope::Temporal) {
        throw ConfigError("use custom_temporal for temporal weights");
    }
    if (!fn) {
        throw ConfigError("custom weight callable is empty");
    }
    const std::size_t d = scope == WeightScope::Spatial ? 2 : domain.point_dim();
    std::vector<double> lo;
    std::vector<double> hi;
    if (scope == WeightScope::Joint && domain.has_time()) {
        lo.push_back(0.0);
        hi.push_back(domain.t_max());
    }
    if (domain.has_space()) {
        const Rect& s = domain.space();
        lo.insert(lo.end(), {s.x_lo, s.y_lo});
        hi.insert(hi.end(), {s.x_hi, s.y_hi});
    }
    if (lo.size() != d) {
        throw ConfigError("weight scope does not match the domain");
    }
    // 64 boundary points spread over the 2d faces; the free coordinates sit
    // on a deterministic low-discrepancy sequence.
    for (int i = 0; i < 64; ++i) {
        const std::size_t face = static_cast<std::size_t>(i) % (2 * d);
        const std::size_t axis = face / 2;
        PointVec x(static_cast<Eigen::Index>(d));
        for (std::size_t j = 0; j < d; ++j) {
            const double u = std::fmod(0.5 + (i + 1) * (0.6180339887498949 + 0.1 * static_cast<double>(j)), 1.0);
            x(static_cast<Eigen::Index>(j)) = lo[j] + u * (hi[j] - lo[j]);
        }
        x(static_cast<Eigen::Index>(axis)) = face % 2 == 0 ? lo[axis] : hi[axis];
        const double v = fn(x).value;
        if (!(std::abs(v) <= tol)) {
            throw ConfigError("custom weight '" + name + "' does not vanish on the boundary");
        }
    }
    WeightSpec w;
    w.kind_ = WeightKind::Custom;
    w.scope_ = scope;
    w.name_ = std::move(name);
    w.point_fn_ = std::make_shared<const PointWeightFn>(std::move(fn));
    return w;
}

PointWeightValue WeightSpec::eval_box(const PointVec& x, const double* lo, const double* hi) const {
    const Eigen::Index d = x.size();
    PointWeightValue out;
    out.grad = PointVec::Zero(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        if (!(x(j) >= lo[j] && x(j) <= hi[j])) {
            throw DomainError("weight evaluated outside its domain");
        }
    }
    if (unit_) {
        out.value = 1.0;
        return out;
    }
    switch (kind_) {
    case WeightKind::DistanceToBoundary: {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < d; ++j) {
            const double below = x(j) - lo[j];
            const double above = hi[j] - x(j);
            if (below < best) {
                best = below;
                out.grad.setZero();
                out.grad(j) = 1.0;
            }
            if (above < best) {
                best = above;
                out.grad.setZero();
                out.grad(j) = -1.0;
            }
        }
        out.value = best;
        return out;
    }
    case WeightKind::NaturalProduct:
    case WeightKind::SquareRootProduct: {
        // Product of per-axis factors f_j = (x_j - lo_j)(hi_j - x_j).
        double f[3];
        double df[3];
        for (Eigen::Index j = 0; j < d; ++j) {
            f[j] = (x(j) - lo[j]) * (hi[j] - x(j));
            df[j] = (hi[j] - x(j)) - (x(j) - lo[j]);
        }
        double prod = 1.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            prod *= f[j];
        }
        for (Eigen::Index j = 0; j < d; ++j) {
            double others = 1.0;
            for (Eigen::Index k = 0; k < d; ++k) {
                if (k != j) {
                    others *= f[k];
                }
            }
            out.grad(j) = others * df[j];
        }
        if (kind_ == WeightKind::NaturalProduct) {
            out.value = prod;
            return out;
        }
        out.value = std::sqrt(prod);
        for (Eigen::Index j = 0; j < d; ++j) {
            if (out.grad(j) != 0.0) {
                out.grad(j) = out.value > 0.0 ? out.grad(j) / (2.0 * out.value)
                                              : std::copysign(std::numeric_limits<double>::infinity(), out.grad(j));
            }
        }
        return out;
    }
    case WeightKind::Custom:
        break;
    }
    throw ConfigError("custom weight has no callable for this scope");
}

TemporalWeightValue WeightSpec::eval_temporal(double t_prev, double t, double t_max) const {
    if (scope_ != WeightScope::Temporal) {
        throw ConfigError("weight '" + name_ + "' is not a temporal weight");
    }
    if (!(t_prev <= t && t <= t_max)) {
        throw DomainError("temporal weight requires t_prev <= t <= T");
    }
    if (temporal_fn_) {
        return (*temporal_fn_)(t_prev, t, t_max);
    }
    PointVec x(1);
    x(0) = t;
    const PointWeightValue v = eval_box(x, &t_prev, &t_max);
    return {v.value, v.grad(0)};
}

PointWeightValue WeightSpec::eval_spatial(const Point2& s, const Rect& space) const {
    if (scope_ != WeightScope::Spatial) {
        throw ConfigError("weight '" + name_ + "' is not a spatial weight");
    }
    PointVec x(2);
    x << s[0], s[1];
    if (point_fn_) {
        if (!space.contains(s)) {
            throw DomainError("spatial weight evaluated outside S");
        }
        return (*point_fn_)(x);
    }
    const double lo[2] = {space.x_lo, space.y_lo};
    const double hi[2] = {space.x_hi, space.y_hi};
    return eval_box(x, lo, hi);
}

PointWeightValue WeightSpec::eval_joint(const PointVec& x, const ObservationDomain& domain) const {
    if (scope_ != WeightScope::Joint) {
        throw ConfigError("weight '" + name_ + "' is not a joint weight");
    }
    if (static_cast<std::size_t>(x.size()) != domain.point_dim()) {
        throw ConfigError("weight point dimension does not match the domain");
    }
    double lo[3];
    double hi[3];
    int j = 0;
    if (domain.has_time()) {
        lo[j] = 0.0;
        hi[j++] = domain.t_max();
    }
    if (domain.has_space()) {
        const Rect& s = domain.space();
        lo[j] = s.x_lo;
        hi[j++] = s.x_hi;
        lo[j] = s.y_lo;
        hi[j++] = s.y_hi;
    }
    if (point_fn_) {
        for (int k = 0; k < j; ++k) {
            if (!(x(k) >= lo[k] && x(k) <= hi[k])) {
                throw DomainError("joint weight evaluated outside V");
            }
        }
        return (*point_fn_)(x);
    }
    return eval_box(x, lo, hi);
}

std::string to_string(WeightKind kind) {
    switch (kind) {
    case WeightKind::DistanceToBoundary:
        return "distance";
    case WeightKind::NaturalProduct:
        return "natural";
    case WeightKind::SquareRootProduct:
        return "sqrt";
    case WeightKind::Custom:
        return "custom";
    }
    return "unknown";
}

WeightKind weight_kind_from_string(const std::string& s) {
    if (s == "distance" || s == "DistanceToBoundary" || s == "h0") {
        return WeightKind::DistanceToBoundary;
    }
    if (s == "natural" || s == "NaturalProduct" || s == "h1") {
        return WeightKind::NaturalProduct;
    }
    if (s == "sqrt" || s == "SquareRootProduct" || s == "h2") {
        return WeightKind::SquareRootProduct;
    }
    throw ConfigError("unknown weight kind '" + s + "'");
}

} // namespace wsm
