#pragma once

#include <functional>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "wsm/domain.hpp"

namespace wsm {

enum class WeightKind { DistanceToBoundary, NaturalProduct, SquareRootProduct, Custom };

/// Which coordinate the weight acts on.
///  - Temporal: h_T(t_prev, t) on (t_prev, T), used by the autoregressive objectives.
///  - Spatial: h_S(s) on the rectangle S.
///  - Joint: h(x) on the whole box V, used by the Janossy objectives.
enum class WeightScope { Temporal, Spatial, Joint };

struct TemporalWeightValue {
    double value = 0.0;
    double grad = 0.0; // derivative in t
};

struct PointWeightValue {
    double value = 0.0;
    PointVec grad; // gradient in the event coordinates
};

using TemporalWeightFn = std::function<TemporalWeightValue(double t_prev, double t, double t_max)>;
using PointWeightFn = std::function<PointWeightValue(const PointVec& x)>;

/// Weight function h with its event-coordinate gradient.
///
/// Named kinds are evaluated in closed form. For DistanceToBoundary the
/// gradient on the ridge where two faces are equidistant is taken from the
/// lower face.
class WeightSpec {
public:
    WeightSpec(WeightKind kind, WeightScope scope);

    /// Custom temporal weight. The constructor evaluates it on 64 boundary
    /// configurations and throws ConfigError if any value exceeds `tol`.
    static WeightSpec custom_temporal(TemporalWeightFn fn, double t_max, std::string name = "custom",
                                      double tol = 1e-12);
    /// Custom spatial or joint weight, spot-checked on 64 points of the
    /// boundary of `domain`.
    static WeightSpec custom_point(WeightScope scope, PointWeightFn fn, const ObservationDomain& domain,
                                   std::string name = "custom", double tol = 1e-12);
    /// Constant weight 1; violates the boundary condition on purpose and is
    /// how the unweighted objectives are expressed.
    static WeightSpec unit(WeightScope scope);

    [[nodiscard]] WeightKind kind() const noexcept { return kind_; }
    [[nodiscard]] WeightScope scope() const noexcept { return scope_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

    /// Temporal evaluation; requires t_prev <= t <= t_max.
    [[nodiscard]] TemporalWeightValue eval_temporal(double t_prev, double t, double t_max) const;
    /// Spatial evaluation at s in S.
    [[nodiscard]] PointWeightValue eval_spatial(const Point2& s, const Rect& space) const;
    /// Joint evaluation at x in V (coordinates as ObservationDomain::event_point).
    [[nodiscard]] PointWeightValue eval_joint(const PointVec& x, const ObservationDomain& domain) const;

private:
    WeightSpec() = default;

    [[nodiscard]] PointWeightValue eval_box(const PointVec& x, const double* lo, const double* hi) const;

    WeightKind kind_ = WeightKind::DistanceToBoundary;
    WeightScope scope_ = WeightScope::Joint;
    std::string name_;
    bool unit_ = false;
    std::shared_ptr<const TemporalWeightFn> temporal_fn_;
    std::shared_ptr<const PointWeightFn> point_fn_;
};

[[nodiscard]] std::string to_string(WeightKind kind);
/// Parses "distance", "natural", "sqrt" (and the enum spellings).
[[nodiscard]] WeightKind weight_kind_from_string(const std::string& s);

} // namespace wsm
