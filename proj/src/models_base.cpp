#include <algorithm>
#include <cmath>
#include <limits>

#include "wsm/errors.hpp"
#include "wsm/models.hpp"
#include "wsm/quadrature.hpp"

namespace wsm {

namespace {

struct ValueGrad {
    double value;
    Params grad;
};

// One 15-point Gauss-Legendre panel of lambda_T and its theta-gradient.
ValueGrad jet_panel(const ProcessFamily& f, const Params& theta, const PointSequence& seq, std::size_t n, double a,
                    double b, bool want_grad) {
    const GaussLegendre& rule = gauss_legendre(15);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    ValueGrad out{0.0, Params::Zero(theta.size())};
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const TemporalJet jet = f.temporal_jet(theta, seq, n, mid + half * rule.nodes[q], want_grad);
        out.value += rule.weights[q] * jet.lam;
        if (want_grad) {
            out.grad += rule.weights[q] * jet.g_lam;
        }
    }
    out.value *= half;
    out.grad *= half;
    return out;
}

ValueGrad jet_adaptive(const ProcessFamily& f, const Params& theta, const PointSequence& seq, std::size_t n, double a,
                       double b, const ValueGrad& whole, bool want_grad, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const ValueGrad left = jet_panel(f, theta, seq, n, a, m, want_grad);
    const ValueGrad right = jet_panel(f, theta, seq, n, m, b, want_grad);
    ValueGrad both{left.value + right.value, left.grad + right.grad};
    if (depth <= 0 || std::abs(both.value - whole.value) <= tol * std::max(1.0, std::abs(both.value))) {
        return both;
    }
    const ValueGrad l = jet_adaptive(f, theta, seq, n, a, m, left, want_grad, 0.5 * tol, depth - 1);
    const ValueGrad r = jet_adaptive(f, theta, seq, n, m, b, right, want_grad, 0.5 * tol, depth - 1);
    return {l.value + r.value, l.grad + r.grad};
}

// Gauss-Legendre in time on every interval, calling temporal_jet at the nodes;
// tensor rule over S for purely spatial Poisson families.
class GenericCompensator final : public Compensator {
public:
    GenericCompensator(const ProcessFamily& family, std::span<const PointSequence> seqs, int nodes)
        : family_(family), seqs_(seqs), rule_(gauss_legendre(nodes)) {}

    void evaluate(const Params& theta, std::vector<double>& values, std::vector<Params>* grads) const override {
        const std::size_t p = static_cast<std::size_t>(theta.size());
        values.assign(seqs_.size(), 0.0);
        if (grads != nullptr) {
            grads->assign(seqs_.size(), Params::Zero(static_cast<Eigen::Index>(p)));
        }
        const ObservationDomain& dom = family_.domain();
        if (!dom.has_time()) {
            Params g = Params::Zero(theta.size());
            const double v = spatial_integral(theta, grads != nullptr ? &g : nullptr);
            for (std::size_t i = 0; i < seqs_.size(); ++i) {
                values[i] = v;
                if (grads != nullptr) {
                    (*grads)[i] = g;
                }
            }
            return;
        }
        const double t_max = dom.t_max();
        for (std::size_t i = 0; i < seqs_.size(); ++i) {
            const PointSequence& seq = seqs_[i];
            const std::size_t n_events = seq.size();
            for (std::size_t n = 0; n <= n_events; ++n) {
                const double a = n == 0 ? 0.0 : seq.times[n - 1];
                const double b = n == n_events ? t_max : seq.times[n];
                const double half = 0.5 * (b - a);
                const double mid = 0.5 * (a + b);
                for (std::size_t q = 0; q < rule_.size(); ++q) {
                    const TemporalJet jet =
                        family_.temporal_jet(theta, seq, n, mid + half * rule_.nodes[q], grads != nullptr);
                    values[i] += half * rule_.weights[q] * jet.lam;
                    if (grads != nullptr) {
                        (*grads)[i] += (half * rule_.weights[q]) * jet.g_lam;
                    }
                }
            }
        }
    }

private:
    double spatial_integral(const Params& theta, Params* grad) const {
        const Rect& s = family_.domain().space();
        const double hx = 0.5 * s.width();
        const double hy = 0.5 * s.height();
        const double mx = 0.5 * (s.x_lo + s.x_hi);
        const double my = 0.5 * (s.y_lo + s.y_hi);
        double v = 0.0;
        Params g = Params::Zero(theta.size());
        Params gq = Params::Zero(theta.size());
        PointVec x(2);
        for (std::size_t a = 0; a < rule_.size(); ++a) {
            for (std::size_t b = 0; b < rule_.size(); ++b) {
                x << mx + hx * rule_.nodes[a], my + hy * rule_.nodes[b];
                const double w = rule_.weights[a] * rule_.weights[b] * hx * hy;
                v += w * family_.point_intensity(theta, x, grad != nullptr ? &gq : nullptr);
                if (grad != nullptr) {
                    g += w * gq;
                }
            }
        }
        if (grad != nullptr) {
            *grad = g;
        }
        return v;
    }

    const ProcessFamily& family_;
    std::span<const PointSequence> seqs_;
    const GaussLegendre& rule_;
};

} // namespace

Params ProcessFamily::lower_bounds() const {
    return Params::Constant(static_cast<Eigen::Index>(n_params()), -std::numeric_limits<double>::infinity());
}

void ProcessFamily::check_params(const Params& theta) const {
    if (static_cast<std::size_t>(theta.size()) != n_params()) {
        throw ConfigError(name() + ": expected " + std::to_string(n_params()) + " parameters, got " +
                          std::to_string(theta.size()));
    }
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        if (!std::isfinite(theta(i))) {
            throw ConfigError(name() + ": parameter " + param_names()[static_cast<std::size_t>(i)] + " is not finite");
        }
    }
}

void ProcessFamily::check_index(const PointSequence& seq, std::size_t n, bool allow_end) const {
    const std::size_t size = seq.size();
    if (n > size || (n == size && !allow_end)) {
        throw IndexError(name() + ": event index " + std::to_string(n) + " out of range for a sequence of " +
                         std::to_string(size) + " events");
    }
}

double ProcessFamily::interval_start(const PointSequence& seq, std::size_t n) const {
    return n == 0 ? 0.0 : seq.times[n - 1];
}

JanossyScore ProcessFamily::janossy_score(const Params&, const PointSequence&, std::size_t, bool) const {
    throw UnsupportedOperation(name() + " has no tractable Janossy score");
}

TemporalJet ProcessFamily::temporal_jet(const Params&, const PointSequence&, std::size_t, double, bool) const {
    throw UnsupportedOperation(name() + " has no conditional temporal intensity");
}

double ProcessFamily::integrated_intensity(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                                           Params* grad) const {
    check_index(seq, n, true);
    const double a = interval_start(seq, n);
    if (!(t >= a && t <= domain().t_max())) {
        throw DomainError(name() + ": integrated intensity requires t_{n-1} <= t <= T");
    }
    if (t == a) {
        if (grad != nullptr) {
            *grad = Params::Zero(theta.size());
        }
        return 0.0;
    }
    const bool want = grad != nullptr;
    const ValueGrad whole = jet_panel(*this, theta, seq, n, a, t, want);
    const ValueGrad r = jet_adaptive(*this, theta, seq, n, a, t, whole, want, 1e-13, 20);
    if (want) {
        *grad = r.grad;
    }
    return r.value;
}

SpatialScore ProcessFamily::spatial_score(const Params&, const PointSequence&, std::size_t, bool) const {
    throw UnsupportedOperation(name() + " is not a spatio-temporal family");
}

double ProcessFamily::spatial_intensity(const Params&, const PointSequence&, std::size_t, double,
                                        const Point2&) const {
    throw UnsupportedOperation(name() + " is not a spatio-temporal family");
}

std::vector<double> ProcessFamily::mark_intensities(const Params& theta, const PointSequence& seq, std::size_t n,
                                                    double t) const {
    return {temporal_jet(theta, seq, n, t, false).lam};
}

double ProcessFamily::mark_log_prob(const Params& theta, const PointSequence& seq, std::size_t n, Params* grad) const {
    check_index(seq, n, false);
    if (grad != nullptr) {
        *grad = Params::Zero(theta.size());
    }
    return 0.0;
}

double ProcessFamily::point_intensity(const Params&, const PointVec&, Params*) const {
    throw UnsupportedOperation(name() + " is not a Poisson family");
}

double ProcessFamily::intensity_bound(const Params&) const {
    throw UnsupportedOperation(name() + " has no global intensity bound");
}

std::unique_ptr<Compensator> ProcessFamily::make_compensator(std::span<const PointSequence> seqs, int nodes) const {
    if (!domain().has_time() && !is_poisson()) {
        throw UnsupportedOperation(name() + " has no compensator");
    }
    return std::make_unique<GenericCompensator>(*this, seqs, nodes);
}

json ProcessFamily::to_json() const { return json{{"name", name()}}; }

json ProcessFamily::params_to_json(const Params& theta) const {
    check_params(theta);
    json j = json::object();
    const auto names = param_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        j[names[i]] = theta(static_cast<Eigen::Index>(i));
    }
    return j;
}

Params ProcessFamily::params_from_json(const json& j) const {
    if (!j.is_object()) {
        throw ConfigError(name() + ": theta must be a JSON object");
    }
    const auto names = param_names();
    Params theta(static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (!j.contains(names[i]) || !j[names[i]].is_number()) {
            throw ConfigError(name() + ": theta is missing numeric entry '" + names[i] + "'");
        }
        theta(static_cast<Eigen::Index>(i)) = j[names[i]].get<double>();
    }
    check_params(theta);
    return theta;
}

Eigen::VectorXd to_vector(const Params& p) { return Eigen::VectorXd(p); }

Params to_params(const Eigen::VectorXd& v) {
    if (v.size() > kMaxParams) {
        throw ConfigError("parameter vector longer than the supported maximum");
    }
    return Params(v);
}

FamilyPtr make_family(const json& spec, const ObservationDomain& domain) {
    if (!spec.is_object() || !spec.contains("name")) {
        throw ConfigError("family entry must be an object with a 'name'");
    }
    const std::string name = spec["name"].get<std::string>();
    if (name == "homogeneous_poisson") {
        return std::make_shared<HomogeneousPoisson>(domain);
    }
    if (name == "poisson_weibull") {
        return std::make_shared<PoissonWeibull1D>(domain);
    }
    if (name == "poisson_expsin2d") {
        return std::make_shared<PoissonExpSin2D>(domain);
    }
    if (name == "exp_hawkes") {
        return std::make_shared<MultivariateExpHawkes>(domain, spec.value("beta", 5.0),
                                                       spec.value("estimate_beta", false));
    }
    if (name == "gaussian_st_hawkes") {
        return std::make_shared<GaussianSTHawkes>(domain, spec.value("sigma", 1.0));
    }
    if (name == "logistic") {
        return std::make_shared<LogisticIntensity>(domain);
    }
    if (name == "score_equivalent_constant") {
        return std::make_shared<ScoreEquivalentConstant>(domain);
    }
    throw ConfigError("unknown process family '" + name + "'");
}

} // namespace wsm
