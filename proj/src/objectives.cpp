#include "wsm/objectives.hpp"

#include <cmath>
#include <utility>

#include "wsm/errors.hpp"
#include "wsm/optimize.hpp"

namespace wsm {

namespace {

// Mean over sequences of fn(seq, grad) with per-sequence values recorded.
template <class Fn>
ObjectiveReport average(SeqSpan seqs, Eigen::Index p, const char* what, Fn&& fn) {
    ObjectiveReport r;
    r.grad = Eigen::VectorXd::Zero(p);
    r.per_seq.resize(seqs.size());
    Params g(p);
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        g.setZero();
        const double v = fn(seqs[i], g);
        if (!std::isfinite(v) || !g.allFinite()) {
            throw NumericError(std::string(what) + ": non-finite contribution from sequence " + std::to_string(i));
        }
        r.per_seq[i] = v;
        r.value += v;
        r.grad += g;
    }
    if (!seqs.empty()) {
        const double m = static_cast<double>(seqs.size());
        r.value /= m;
        r.grad /= m;
    }
    return r;
}

Eigen::Index param_count(const ProcessFamily& f, const Params& theta) {
    f.check_params(theta);
    return theta.size();
}

// Temporal AWSM term of event n and its theta-gradient.
double temporal_term(const ProcessFamily& f, const Params& theta, const PointSequence& seq, std::size_t n,
                     const WeightSpec& w, Params& g) {
    const double t_max = f.domain().t_max();
    const double t = seq.times[n];
    const TemporalJet jet = f.temporal_jet(theta, seq, n, t, true);
    const TemporalWeightValue h = w.eval_temporal(seq.previous_time(n), t, t_max);
    const double psi = jet.psi();
    const double dpsi = jet.dpsi();
    const Params gpsi = jet.grad_psi();
    const Params gdpsi = jet.grad_dpsi();
    g += (psi * gpsi + gdpsi) * h.value + gpsi * h.grad;
    return (0.5 * psi * psi + dpsi) * h.value + psi * h.grad;
}

double spatial_term(const ProcessFamily& f, const Params& theta, const PointSequence& seq, std::size_t n,
                    const WeightSpec& w, Params& g) {
    const SpatialScore s = f.spatial_score(theta, seq, n, true);
    const PointWeightValue h = w.eval_spatial(seq.locs[n], f.domain().space());
    const Eigen::Vector2d gh(h.grad(0), h.grad(1));
    g += (s.dpsi.transpose() * s.psi + s.ddiv) * h.value + s.dpsi.transpose() * gh;
    return (0.5 * s.psi.squaredNorm() + s.div) * h.value + s.psi.dot(gh);
}

void require_spatial_weight(const ProcessFamily& f, const WeightSpec* w_s) {
    if (w_s != nullptr) {
        if (!f.has_spatial_score()) {
            throw ConfigError(f.name() + ": spatial weight given for a family without spatial score");
        }
        if (w_s->scope() != WeightScope::Spatial) {
            throw ConfigError("spatial weight must have spatial scope");
        }
    }
}

} // namespace

MleObjective::MleObjective(FamilyPtr family, SeqSpan seqs, int quad_nodes)
    : family_(std::move(family)), seqs_(seqs), compensator_(family_->make_compensator(seqs, quad_nodes)) {}

ObjectiveReport MleObjective::operator()(const Params& theta) const {
    const Eigen::Index p = param_count(*family_, theta);
    std::vector<double> comp;
    std::vector<Params> comp_grad;
    compensator_->evaluate(theta, comp, &comp_grad);
    ObjectiveReport r;
    r.grad = Eigen::VectorXd::Zero(p);
    r.per_seq.resize(seqs_.size());
    Params g(p);
    for (std::size_t i = 0; i < seqs_.size(); ++i) {
        const PointSequence& seq = seqs_[i];
        double v = comp[i];
        Eigen::VectorXd gi = comp_grad[i];
        for (std::size_t n = 0; n < seq.size(); ++n) {
            const double ll = family_->log_event_intensity(theta, seq, n, &g);
            if (!std::isfinite(ll)) {
                throw NumericError("mle: intensity is not positive at event " + std::to_string(n) + " of sequence " +
                                   std::to_string(i));
            }
            v -= ll;
            gi -= g;
        }
        if (!std::isfinite(v)) {
            throw NumericError("mle: non-finite likelihood for sequence " + std::to_string(i));
        }
        r.per_seq[i] = v;
        r.value += v;
        r.grad += gi;
    }
    if (!seqs_.empty()) {
        r.value /= static_cast<double>(seqs_.size());
        r.grad /= static_cast<double>(seqs_.size());
    }
    return r;
}

ObjectiveReport nll_mle(const FamilyPtr& family, const Params& theta, SeqSpan seqs, int quad_nodes) {
    return MleObjective(family, seqs, quad_nodes)(theta);
}

ObjectiveReport j_sm_implicit(const ProcessFamily& family, const Params& theta, SeqSpan seqs) {
    return j_wsm_implicit(family, theta, seqs, WeightSpec::unit(WeightScope::Joint));
}

ObjectiveReport j_wsm_implicit(const ProcessFamily& family, const Params& theta, SeqSpan seqs, const WeightSpec& w) {
    const Eigen::Index p = param_count(family, theta);
    if (w.scope() != WeightScope::Joint) {
        throw ConfigError("WSM needs a weight with joint scope");
    }
    const ObservationDomain& dom = family.domain();
    return average(seqs, p, "wsm", [&](const PointSequence& seq, Params& g) {
        double v = 0.0;
        for (std::size_t n = 0; n < seq.size(); ++n) {
            const JanossyScore s = family.janossy_score(theta, seq, n, true);
            const PointWeightValue h = w.eval_joint(dom.event_point(seq, n), dom);
            v += (0.5 * s.psi.squaredNorm() + s.div) * h.value + s.psi.dot(h.grad);
            g += (s.dpsi.transpose() * s.psi + s.ddiv) * h.value + s.dpsi.transpose() * h.grad;
        }
        return v;
    });
}

ObjectiveReport l_wsm_explicit(const ProcessFamily& family, const Params& theta, SeqSpan seqs, const WeightSpec& w,
                               const ProcessFamily& oracle, const Params& oracle_theta) {
    const Eigen::Index p = param_count(family, theta);
    if (w.scope() != WeightScope::Joint) {
        throw ConfigError("WSM needs a weight with joint scope");
    }
    const ObservationDomain& dom = family.domain();
    return average(seqs, p, "wsm explicit", [&](const PointSequence& seq, Params& g) {
        double v = 0.0;
        for (std::size_t n = 0; n < seq.size(); ++n) {
            const JanossyScore s = family.janossy_score(theta, seq, n, true);
            const JanossyScore o = oracle.janossy_score(oracle_theta, seq, n, false);
            const double h = w.eval_joint(dom.event_point(seq, n), dom).value;
            const PointVec diff = o.psi - s.psi;
            v += 0.5 * diff.squaredNorm() * h;
            g -= s.dpsi.transpose() * diff * h;
        }
        return v;
    });
}

ObjectiveReport j_awsm_implicit(const ProcessFamily& family, const Params& theta, SeqSpan seqs,
                                const WeightSpec& w_t, const WeightSpec* w_s) {
    const Eigen::Index p = param_count(family, theta);
    if (w_t.scope() != WeightScope::Temporal) {
        throw ConfigError("AWSM temporal weight must have temporal scope");
    }
    require_spatial_weight(family, w_s);
    return average(seqs, p, "awsm", [&](const PointSequence& seq, Params& g) {
        double v = 0.0;
        for (std::size_t n = 0; n < seq.size(); ++n) {
            v += temporal_term(family, theta, seq, n, w_t, g);
            if (w_s != nullptr) {
                v += spatial_term(family, theta, seq, n, *w_s, g);
            }
        }
        return v;
    });
}

ObjectiveReport j_asm_implicit(const ProcessFamily& family, const Params& theta, SeqSpan seqs, bool marks) {
    const WeightSpec unit_t = WeightSpec::unit(WeightScope::Temporal);
    const WeightSpec unit_s = WeightSpec::unit(WeightScope::Spatial);
    ObjectiveReport r =
        j_awsm_implicit(family, theta, seqs, unit_t, family.has_spatial_score() ? &unit_s : nullptr);
    if (marks && family.domain().is_marked()) {
        const ObjectiveReport ce = mark_ce(family, theta, seqs);
        r.value += ce.value;
        r.grad += ce.grad;
        for (std::size_t i = 0; i < r.per_seq.size(); ++i) {
            r.per_seq[i] += ce.per_seq[i];
        }
    }
    return r;
}

ObjectiveReport l_awsm_explicit(const ProcessFamily& family, const Params& theta, SeqSpan seqs,
                                const WeightSpec& w_t, const WeightSpec* w_s, const ProcessFamily& oracle,
                                const Params& oracle_theta) {
    const Eigen::Index p = param_count(family, theta);
    if (w_t.scope() != WeightScope::Temporal) {
        throw ConfigError("AWSM temporal weight must have temporal scope");
    }
    require_spatial_weight(family, w_s);
    const double t_max = family.domain().t_max();
    return average(seqs, p, "awsm explicit", [&](const PointSequence& seq, Params& g) {
        double v = 0.0;
        for (std::size_t n = 0; n < seq.size(); ++n) {
            const double t = seq.times[n];
            const TemporalJet jet = family.temporal_jet(theta, seq, n, t, true);
            const double psi_o = oracle.temporal_jet(oracle_theta, seq, n, t, false).psi();
            const double h = w_t.eval_temporal(seq.previous_time(n), t, t_max).value;
            const double diff = psi_o - jet.psi();
            v += 0.5 * diff * diff * h;
            g -= jet.grad_psi() * (diff * h);
            if (w_s != nullptr) {
                const SpatialScore s = family.spatial_score(theta, seq, n, true);
                const SpatialScore o = oracle.spatial_score(oracle_theta, seq, n, false);
                const double hs = w_s->eval_spatial(seq.locs[n], family.domain().space()).value;
                const Eigen::Vector2d d = o.psi - s.psi;
                v += 0.5 * d.squaredNorm() * hs;
                g -= s.dpsi.transpose() * d * hs;
            }
        }
        return v;
    });
}

ObjectiveReport mark_ce(const ProcessFamily& family, const Params& theta, SeqSpan seqs) {
    const Eigen::Index p = param_count(family, theta);
    Params gn(p);
    return average(seqs, p, "mark ce", [&](const PointSequence& seq, Params& g) {
        double v = 0.0;
        for (std::size_t n = 0; n < seq.size(); ++n) {
            v -= family.mark_log_prob(theta, seq, n, &gn);
            g -= gn;
        }
        return v;
    });
}

ExpFamilyTerms ExpSin2DStats::terms(const PointSequence& seq, std::size_t n) const {
    const Point2& x = seq.locs.at(n);
    ExpFamilyTerms t;
    t.s.resize(2, 1);
    t.s << std::cos(x[0]), -std::sin(x[1]);
    t.lap_t = Params::Constant(1, -(std::sin(x[0]) + std::cos(x[1])));
    t.grad_b = PointVec::Zero(2);
    return t;
}

ExpFamilyTerms WeibullStats::terms(const PointSequence& seq, std::size_t n) const {
    const double x = seq.times.at(n);
    ExpFamilyTerms t;
    t.s = ScoreJacobian::Constant(1, 1, 1.0 / x);
    t.lap_t = Params::Constant(1, -1.0 / (x * x));
    t.grad_b = PointVec::Constant(1, -1.0 / x);
    t.lap_b = 1.0 / (x * x);
    return t;
}

QuadraticFit exp_family_fit(SeqSpan seqs, const ObservationDomain& domain, const WeightSpec& w,
                            const ExponentialFamilyStats& stats) {
    if (w.scope() != WeightScope::Joint) {
        throw ConfigError("exponential-family fit needs a joint weight");
    }
    const auto p = static_cast<Eigen::Index>(stats.dim());
    QuadraticFit fit;
    fit.gamma = Eigen::MatrixXd::Zero(p, p);
    fit.g = Eigen::VectorXd::Zero(p);
    for (const PointSequence& seq : seqs) {
        for (std::size_t n = 0; n < seq.size(); ++n) {
            const ExpFamilyTerms t = stats.terms(seq, n);
            const PointWeightValue h = w.eval_joint(domain.event_point(seq, n), domain);
            fit.gamma += h.value * (t.s.transpose() * t.s);
            fit.g -= h.value * (t.s.transpose() * t.grad_b) + h.value * t.lap_t + t.s.transpose() * h.grad;
        }
    }
    if (!seqs.empty()) {
        fit.gamma /= static_cast<double>(seqs.size());
        fit.g /= static_cast<double>(seqs.size());
    }
    fit.theta = solve_quadratic(fit.gamma, fit.g);
    return fit;
}

MonotoneTransform MonotoneTransform::logit(double lo, double hi) {
    if (!(lo < hi)) {
        throw ConfigError("logit transform needs lo < hi");
    }
    const double w = hi - lo;
    const auto sig = [](double y) { return 1.0 / (1.0 + std::exp(-y)); };
    MonotoneTransform t;
    t.name = "logit";
    t.forward = [lo, hi](double x) { return std::log((x - lo) / (hi - x)); };
    t.inverse = [lo, w, sig](double y) { return lo + w * sig(y); };
    t.phi = [w, sig](double y) {
        const double s = sig(y);
        return w * s * (1.0 - s);
    };
    t.dphi = [w, sig](double y) {
        const double s = sig(y);
        return w * s * (1.0 - s) * (1.0 - 2.0 * s);
    };
    t.ddphi = [w, sig](double y) {
        const double s = sig(y);
        return w * s * (1.0 - s) * (1.0 - 6.0 * s + 6.0 * s * s);
    };
    return t;
}

WeightSpec transform_weight(const MonotoneTransform& g, const ObservationDomain& domain) {
    if (domain.point_dim() != 1) {
        throw ConfigError("transform weights are defined on one-dimensional domains");
    }
    return WeightSpec::custom_point(
        WeightScope::Joint,
        [g](const PointVec& x) {
            const double y = g.forward(x(0));
            const double ph = g.phi(y);
            PointWeightValue v;
            v.value = ph * ph;
            v.grad = PointVec::Constant(1, std::isfinite(y) ? 2.0 * g.dphi(y) : 0.0);
            return v;
        },
        domain, g.name + "_weight");
}

ChangeOfVariableReport change_of_variable_check(const ProcessFamily& family, SeqSpan seqs,
                                                const MonotoneTransform& g, const std::vector<Params>& theta_grid) {
    const ObservationDomain& dom = family.domain();
    if (dom.point_dim() != 1 || !family.has_janossy_score()) {
        throw ConfigError("change of variable check needs a one-dimensional Janossy family");
    }
    if (!g.forward || !g.inverse || !g.phi || !g.dphi || !g.ddphi) {
        throw ConfigError("transform is missing a component");
    }
    // Strict monotonicity of g on an interior grid.
    const double t_max = dom.t_max();
    double prev = g.forward(t_max * 0.5 / 201.0);
    int sign = 0;
    for (int i = 1; i < 201; ++i) {
        const double cur = g.forward(t_max * (i + 0.5) / 201.0);
        const int s = cur > prev ? 1 : (cur < prev ? -1 : 0);
        if (s == 0 || (sign != 0 && s != sign)) {
            throw ConfigError("transform '" + g.name + "' is not strictly monotone");
        }
        sign = s;
        prev = cur;
    }
    // Points mapped through g and back, so both objectives see the same values.
    std::vector<PointSequence> raw(seqs.begin(), seqs.end());
    std::vector<std::vector<double>> ys(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        for (double& t : raw[i].times) {
            const double y = g.forward(t);
            ys[i].push_back(y);
            t = g.inverse(y);
        }
    }
    const WeightSpec h = transform_weight(g, dom);
    ChangeOfVariableReport rep;
    std::vector<double> diff;
    for (const Params& theta : theta_grid) {
        double j_sm = 0.0;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            for (std::size_t n = 0; n < raw[i].size(); ++n) {
                const JanossyScore s = family.janossy_score(theta, raw[i], n, false);
                const double y = ys[i][n];
                const double ph = g.phi(y);
                const double dph = g.dphi(y);
                const double ddph = g.ddphi(y);
                const double r = dph / ph;
                const double psi_y = s.psi(0) * ph + r;
                const double dpsi_y = s.div * ph * ph + s.psi(0) * dph + ddph / ph - r * r;
                j_sm += 0.5 * psi_y * psi_y + dpsi_y;
            }
        }
        if (!raw.empty()) {
            j_sm /= static_cast<double>(raw.size());
        }
        const double j_wsm = j_wsm_implicit(family, theta, raw, h).value;
        rep.j_sm_transformed.push_back(j_sm);
        rep.j_wsm_raw.push_back(j_wsm);
        diff.push_back(j_sm - j_wsm);
    }
    double mean = 0.0;
    for (const double d : diff) {
        mean += d;
    }
    if (!diff.empty()) {
        mean /= static_cast<double>(diff.size());
    }
    for (const double d : diff) {
        rep.max_discrepancy = std::max(rep.max_discrepancy, std::abs(d - mean));
    }
    return rep;
}

} // namespace wsm
