#include <cmath>
#include <limits>

#include "wsm/errors.hpp"
#include "wsm/models.hpp"

namespace wsm {

namespace {

Params single(double v) {
    Params p(1);
    p(0) = v;
    return p;
}

TemporalJet zero_jet(Eigen::Index p) {
    TemporalJet jet;
    jet.g_lam = Params::Zero(p);
    jet.g_d1 = Params::Zero(p);
    jet.g_d2 = Params::Zero(p);
    return jet;
}

void check_time(const ObservationDomain& dom, double a, double t, const std::string& who) {
    if (!(t >= a && t <= dom.t_max())) {
        throw DomainError(who + ": time outside (t_{n-1}, T]");
    }
}

} // namespace

// ---------------------------------------------------------------------------
// HomogeneousPoisson

HomogeneousPoisson::HomogeneousPoisson(ObservationDomain domain)
    : ProcessFamily(std::move(domain)), area_(this->domain().has_space() ? this->domain().space().area() : 1.0) {
    if (this->domain().is_marked()) {
        throw ConfigError("homogeneous_poisson does not support marks");
    }
}

Params HomogeneousPoisson::lower_bounds() const { return single(0.0); }

JanossyScore HomogeneousPoisson::janossy_score(const Params& theta, const PointSequence& seq, std::size_t n,
                                               bool grad) const {
    check_params(theta);
    check_index(seq, n, false);
    const auto d = static_cast<Eigen::Index>(domain().point_dim());
    JanossyScore s;
    s.psi = PointVec::Zero(d);
    if (grad) {
        s.dpsi = ScoreJacobian::Zero(d, 1);
        s.ddiv = Params::Zero(1);
    }
    return s;
}

TemporalJet HomogeneousPoisson::temporal_jet(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                                             bool grad) const {
    check_index(seq, n, true);
    check_time(domain(), interval_start(seq, n), t, name());
    TemporalJet jet = zero_jet(grad ? 1 : 0);
    jet.lam = theta(0) * area_;
    if (grad) {
        jet.g_lam(0) = area_;
    }
    return jet;
}

double HomogeneousPoisson::integrated_intensity(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                                                Params* grad) const {
    check_index(seq, n, true);
    const double a = interval_start(seq, n);
    check_time(domain(), a, t, name());
    if (grad != nullptr) {
        *grad = single(area_ * (t - a));
    }
    return theta(0) * area_ * (t - a);
}

SpatialScore HomogeneousPoisson::spatial_score(const Params& theta, const PointSequence& seq, std::size_t n,
                                               bool grad) const {
    check_params(theta);
    check_index(seq, n, false);
    if (!has_spatial_score()) {
        throw UnsupportedOperation("homogeneous_poisson on this domain has no spatial score");
    }
    SpatialScore s;
    if (grad) {
        s.dpsi = decltype(s.dpsi)::Zero(2, 1);
        s.ddiv = Params::Zero(1);
    }
    return s;
}

double HomogeneousPoisson::spatial_intensity(const Params& theta, const PointSequence&, std::size_t, double,
                                             const Point2&) const {
    if (!domain().has_space()) {
        throw UnsupportedOperation("homogeneous_poisson on this domain has no spatial component");
    }
    return theta(0);
}

double HomogeneousPoisson::log_event_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                                               Params* grad) const {
    check_index(seq, n, false);
    if (grad != nullptr) {
        *grad = single(1.0 / theta(0));
    }
    return std::log(theta(0));
}

double HomogeneousPoisson::point_intensity(const Params& theta, const PointVec&, Params* grad) const {
    if (grad != nullptr) {
        *grad = single(1.0);
    }
    return theta(0);
}

double HomogeneousPoisson::intensity_bound(const Params& theta) const { return theta(0); }

// ---------------------------------------------------------------------------
// PoissonWeibull1D

PoissonWeibull1D::PoissonWeibull1D(ObservationDomain domain) : ProcessFamily(std::move(domain)) {
    if (!this->domain().has_time() || this->domain().has_space() || this->domain().is_marked()) {
        throw ConfigError("poisson_weibull needs an unmarked temporal domain");
    }
}

Params PoissonWeibull1D::lower_bounds() const { return single(1e-3); }

JanossyScore PoissonWeibull1D::janossy_score(const Params& theta, const PointSequence& seq, std::size_t n,
                                             bool grad) const {
    check_params(theta);
    check_index(seq, n, false);
    const double t = seq.times[n];
    const double rho = theta(0);
    JanossyScore s;
    s.psi = PointVec::Constant(1, (rho - 1.0) / t);
    s.div = (1.0 - rho) / (t * t);
    if (grad) {
        s.dpsi = ScoreJacobian::Constant(1, 1, 1.0 / t);
        s.ddiv = single(-1.0 / (t * t));
    }
    return s;
}

TemporalJet PoissonWeibull1D::temporal_jet(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                                           bool grad) const {
    check_index(seq, n, true);
    check_time(domain(), interval_start(seq, n), t, name());
    const double r = theta(0);
    const double lt = std::log(t);
    const double p1 = std::pow(t, r - 1.0);
    const double p2 = p1 / t;
    const double p3 = p2 / t;
    TemporalJet jet = zero_jet(grad ? 1 : 0);
    jet.lam = r * p1;
    jet.d1 = r * (r - 1.0) * p2;
    jet.d2 = r * (r - 1.0) * (r - 2.0) * p3;
    if (grad) {
        jet.g_lam(0) = p1 * (1.0 + r * lt);
        jet.g_d1(0) = p2 * ((2.0 * r - 1.0) + r * (r - 1.0) * lt);
        jet.g_d2(0) = p3 * ((3.0 * r * r - 6.0 * r + 2.0) + r * (r - 1.0) * (r - 2.0) * lt);
    }
    return jet;
}

double PoissonWeibull1D::integrated_intensity(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                                              Params* grad) const {
    check_index(seq, n, true);
    const double a = interval_start(seq, n);
    check_time(domain(), a, t, name());
    const double r = theta(0);
    const double ta = a > 0.0 ? std::pow(a, r) : 0.0;
    const double tt = t > 0.0 ? std::pow(t, r) : 0.0;
    if (grad != nullptr) {
        const double ga = a > 0.0 ? ta * std::log(a) : 0.0;
        const double gt = t > 0.0 ? tt * std::log(t) : 0.0;
        *grad = single(gt - ga);
    }
    return tt - ta;
}

double PoissonWeibull1D::log_event_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                                             Params* grad) const {
    check_index(seq, n, false);
    const double lt = std::log(seq.times[n]);
    if (grad != nullptr) {
        *grad = single(1.0 / theta(0) + lt);
    }
    return std::log(theta(0)) + (theta(0) - 1.0) * lt;
}

double PoissonWeibull1D::point_intensity(const Params& theta, const PointVec& x, Params* grad) const {
    const double t = x(0);
    const double r = theta(0);
    const double p1 = std::pow(t, r - 1.0);
    if (grad != nullptr) {
        *grad = single(p1 * (1.0 + r * std::log(t)));
    }
    return r * p1;
}

double PoissonWeibull1D::intensity_bound(const Params& theta) const {
    const double r = theta(0);
    if (r < 1.0) {
        throw ConfigError("poisson_weibull with rho < 1 has an unbounded intensity near 0");
    }
    return r * std::pow(domain().t_max(), r - 1.0);
}

// ---------------------------------------------------------------------------
// PoissonExpSin2D

PoissonExpSin2D::PoissonExpSin2D(ObservationDomain domain) : ProcessFamily(std::move(domain)) {
    if (this->domain().has_time() || !this->domain().has_space() || this->domain().is_marked()) {
        throw ConfigError("poisson_expsin2d needs a purely spatial domain");
    }
}

JanossyScore PoissonExpSin2D::janossy_score(const Params& theta, const PointSequence& seq, std::size_t n,
                                            bool grad) const {
    check_params(theta);
    check_index(seq, n, false);
    const Point2& x = seq.locs[n];
    const double th = theta(0);
    const double c1 = std::cos(x[0]);
    const double s2 = std::sin(x[1]);
    const double stat = std::sin(x[0]) + std::cos(x[1]);
    JanossyScore s;
    s.psi.resize(2);
    s.psi << th * c1, -th * s2;
    s.div = -th * stat;
    if (grad) {
        s.dpsi.resize(2, 1);
        s.dpsi << c1, -s2;
        s.ddiv = single(-stat);
    }
    return s;
}

double PoissonExpSin2D::log_event_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                                            Params* grad) const {
    check_index(seq, n, false);
    const Point2& x = seq.locs[n];
    const double stat = std::sin(x[0]) + std::cos(x[1]);
    if (grad != nullptr) {
        *grad = single(stat);
    }
    return theta(0) * stat;
}

double PoissonExpSin2D::point_intensity(const Params& theta, const PointVec& x, Params* grad) const {
    const double stat = std::sin(x(0)) + std::cos(x(1));
    const double lam = std::exp(theta(0) * stat);
    if (grad != nullptr) {
        *grad = single(lam * stat);
    }
    return lam;
}

double PoissonExpSin2D::intensity_bound(const Params& theta) const { return std::exp(2.0 * std::abs(theta(0))); }

} // namespace wsm
