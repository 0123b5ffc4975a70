#include "wsm/survival.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "wsm/errors.hpp"
#include "wsm/quadrature.hpp"
#include "wsm/rng.hpp"

namespace wsm {

namespace {

double sigmoid(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

// Label term -cw * log(p or 1 - p) of one classification, with its
// derivative in the logit (zero when clamped).
double label_term(double z, bool positive, const ClassWeights& cw, double& dz, bool& clamped) {
    const double p = sigmoid(z);
    const double lo = SurvivalModel::kClampLo;
    clamped = p < lo || p > 1.0 - lo;
    const double w = positive ? cw.positive : cw.negative;
    if (clamped) {
        dz = 0.0;
        const double pc = std::clamp(p, lo, 1.0 - lo);
        return -w * std::log(positive ? pc : 1.0 - pc);
    }
    dz = w * (p - (positive ? 1.0 : 0.0));
    return -w * std::log(positive ? p : sigmoid(-z));
}

} // namespace

FeatureMap history_features(const ObservationDomain& domain, double n_bar) {
    if (!(n_bar > 0.0)) {
        n_bar = 1.0;
    }
    const bool timed = domain.has_time();
    const double t_max = timed ? domain.t_max() : 1.0;
    const double tau = t_max / (n_bar + 1.0);
    const int k = domain.is_marked() && domain.n_marks() > 1 ? domain.n_marks() : 0;
    FeatureMap fm;
    fm.name = "history";
    fm.dim = (timed ? 5U : 3U) + static_cast<std::size_t>(k);
    fm.params = {{"n_bar", n_bar}};
    const std::size_t dim = fm.dim;
    fm.fn = [=](const PointSequence& seq, std::size_t n) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
        x(0) = 1.0;
        x(1) = n == 0 ? 1.0 : 0.0;
        x(2) = static_cast<double>(n) / n_bar;
        Eigen::Index j = 3;
        if (timed) {
            const double prev = seq.previous_time(n);
            x(j++) = prev / t_max;
            x(j++) = std::log(std::max(-std::expm1(-(t_max - prev) / tau), 1e-12));
        }
        if (k > 0 && n > 0) {
            for (std::size_t i = 0; i < n; ++i) {
                x(j + seq.marks[i]) += 1.0 / static_cast<double>(n);
            }
        }
        return x;
    };
    return fm;
}

FeatureMap history_features(const ObservationDomain& domain, SeqSpan train) {
    double total = 0.0;
    for (const PointSequence& s : train) {
        total += static_cast<double>(s.size());
    }
    return history_features(domain, train.empty() ? 1.0 : total / static_cast<double>(train.size()));
}

SurvivalModel::SurvivalModel(FeatureMap features, Eigen::VectorXd weights)
    : features_(std::move(features)), weights_(std::move(weights)) {
    if (!features_.fn || static_cast<std::size_t>(weights_.size()) != features_.dim) {
        throw ConfigError("survival weights do not match the feature dimension");
    }
}

SurvivalModel SurvivalModel::with_weights(Eigen::VectorXd w) const { return {features_, std::move(w)}; }

double SurvivalModel::prob(const PointSequence& seq, std::size_t n, bool* clamped) const {
    const double p = sigmoid(weights_.dot(features_.fn(seq, n)));
    const bool c = p < kClampLo || p > 1.0 - kClampLo;
    if (clamped != nullptr) {
        *clamped = c;
    }
    return std::clamp(p, kClampLo, 1.0 - kClampLo);
}

ContinuationFn SurvivalModel::continuation() const {
    return [m = *this](const PointSequence& seq, std::size_t n) { return m.prob(seq, n); };
}

json SurvivalModel::to_json() const {
    return {{"features", features_.name},
            {"feature_params", features_.params},
            {"weights", std::vector<double>(weights_.data(), weights_.data() + weights_.size())}};
}

SurvivalModel SurvivalModel::from_json(const json& j, const ObservationDomain& domain) {
    if (j.value("features", std::string()) != "history") {
        throw ConfigError("unknown survival feature map");
    }
    const auto w = j.at("weights").get<std::vector<double>>();
    return {history_features(domain, j.at("feature_params").at("n_bar").get<double>()),
            Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()))};
}

ClassWeights ClassBalance::inverse_frequency() const {
    const double total = static_cast<double>(positive + negative);
    if (positive == 0 || negative == 0) {
        return {};
    }
    return {0.5 * total / static_cast<double>(positive), 0.5 * total / static_cast<double>(negative)};
}

ClassBalance class_balance(SeqSpan seqs) {
    ClassBalance b;
    for (const PointSequence& s : seqs) {
        b.positive += s.size();
        if (!s.truncated) {
            ++b.negative;
        }
    }
    return b;
}

ObjectiveReport survival_ce(const SurvivalModel& model, SeqSpan seqs, const ClassWeights* cw) {
    const ClassWeights unit;
    const ClassWeights& w = cw != nullptr ? *cw : unit;
    const Eigen::VectorXd& beta = model.weights();
    ObjectiveReport r;
    r.grad = Eigen::VectorXd::Zero(beta.size());
    r.per_seq.resize(seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        const PointSequence& seq = seqs[i];
        double v = 0.0;
        const std::size_t last = seq.truncated ? seq.size() : seq.size() + 1;
        for (std::size_t n = 0; n < last; ++n) {
            const Eigen::VectorXd x = model.features().fn(seq, n);
            double dz = 0.0;
            bool clamped = false;
            v += label_term(beta.dot(x), n < seq.size(), w, dz, clamped);
            r.grad += dz * x;
            r.clamp_count += clamped ? 1U : 0U;
        }
        r.per_seq[i] = v;
        r.value += v;
    }
    if (!seqs.empty()) {
        r.value /= static_cast<double>(seqs.size());
        r.grad /= static_cast<double>(seqs.size());
    }
    return r;
}

SurvivalFit fit_survival(SeqSpan seqs, const FeatureMap& features, const SurvivalFitOptions& opts) {
    if (seqs.empty()) {
        throw ConfigError("fit_survival needs a non-empty dataset");
    }
    const ClassBalance bal = class_balance(seqs);
    const auto dim = static_cast<Eigen::Index>(features.dim);
    if (bal.positive == 0 || bal.negative == 0) {
        const double q = static_cast<double>(bal.positive) / static_cast<double>(bal.positive + bal.negative);
        const double qc = std::clamp(q, SurvivalModel::kClampLo, 1.0 - SurvivalModel::kClampLo);
        Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
        w(0) = std::log(qc / (1.0 - qc));
        return {SurvivalModel(features, w), bal, "single-class continuation labels; constant model used", {}};
    }
    const ClassWeights cw = opts.class_weighted ? bal.inverse_frequency() : ClassWeights{};
    const SurvivalModel base(features, Eigen::VectorXd::Zero(dim));
    const Objective f = [&](const Eigen::VectorXd& w) { return survival_ce(base.with_weights(w), seqs, &cw); };
    AdamConfig cfg = opts.adam;
    cfg.lower.resize(0);
    cfg.upper.resize(0);
    AdamResult res = adam_minimize(f, Eigen::VectorXd::Zero(dim), cfg);
    return {base.with_weights(res.theta), bal, std::nullopt, std::move(res)};
}

ObjectiveReport combined_loss(const ProcessFamily& family, const Params& theta, const SurvivalModel& surv,
                              SeqSpan seqs, const WeightSpec& w_t, const WeightSpec* w_s, double a_surv, double a_k) {
    const ObjectiveReport j = j_awsm_implicit(family, theta, seqs, w_t, w_s);
    const Eigen::Index p = theta.size();
    const Eigen::Index q = surv.weights().size();
    ObjectiveReport r;
    r.value = j.value;
    r.per_seq = j.per_seq;
    r.grad = Eigen::VectorXd::Zero(p + q);
    r.grad.head(p) = j.grad;
    if (a_surv != 0.0) {
        const ObjectiveReport s = survival_ce(surv, seqs);
        r.value += a_surv * s.value;
        r.grad.tail(q) = a_surv * s.grad;
        r.clamp_count = s.clamp_count;
        for (std::size_t i = 0; i < r.per_seq.size(); ++i) {
            r.per_seq[i] += a_surv * s.per_seq[i];
        }
    }
    if (a_k != 0.0 && family.domain().is_marked()) {
        const ObjectiveReport c = mark_ce(family, theta, seqs);
        r.value += a_k * c.value;
        r.grad.head(p) += a_k * c.grad;
        for (std::size_t i = 0; i < r.per_seq.size(); ++i) {
            r.per_seq[i] += a_k * c.per_seq[i];
        }
    }
    return r;
}

double exact_continuation(const ProcessFamily& family, const Params& theta, const PointSequence& seq,
                          std::size_t n) {
    return -std::expm1(-family.integrated_intensity(theta, seq, n, family.domain().t_max()));
}

ContinuationFn exact_continuation_fn(FamilyPtr family, Params theta) {
    return [family = std::move(family), theta = std::move(theta)](const PointSequence& seq, std::size_t n) {
        return exact_continuation(*family, theta, seq, n);
    };
}

double corrected_intensity(const ProcessFamily& surrogate, const Params& theta, double f_hat,
                           const PointSequence& seq, std::size_t n, double t) {
    const double t_max = surrogate.domain().t_max();
    if (!(t > seq.previous_time(n) && t <= t_max)) {
        throw DomainError("corrected_intensity: t outside (t_{n-1}, T]");
    }
    const double lam = surrogate.temporal_jet(theta, seq, n, t, false).lam;
    const double g = std::exp(-surrogate.integrated_intensity(theta, seq, n, t));
    const double g_end = std::exp(-surrogate.integrated_intensity(theta, seq, n, t_max));
    const double denom = g - 1.0 + (1.0 - g_end) / f_hat;
    // For lam > 0 the numerator is positive and this is denom > 0. A surrogate
    // with negative intensity has increasing G and a negative numerator; the
    // ratio is still a valid intensity when both signs agree.
    const double out = g * lam / denom;
    if (!(out > 0.0) || !std::isfinite(out)) {
        throw CorrectionInvalidError("corrected intensity has a denominator of the wrong sign", f_hat, g_end);
    }
    return out;
}

double corrected_intensity(const ProcessFamily& surrogate, const Params& theta, const ContinuationFn& surv,
                           const PointSequence& seq, std::size_t n, double t) {
    return corrected_intensity(surrogate, theta, surv(seq, n), seq, n, t);
}

CorrectedLoglik corrected_loglik(const ProcessFamily& surrogate, const Params& theta, const ContinuationFn& surv,
                                 SeqSpan seqs, int quad_nodes) {
    const ObservationDomain& dom = surrogate.domain();
    const double t_max = dom.t_max();
    const bool spatial = dom.has_space() && surrogate.has_spatial_score();
    const GaussLegendre& rule = gauss_legendre(quad_nodes);
    CorrectedLoglik out;
    out.per_seq_t.resize(seqs.size());
    double sum_t = 0.0;
    double sum_s = 0.0;
    std::size_t good = 0;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        const PointSequence& seq = seqs[i];
        double lt = 0.0;
        double ls = 0.0;
        for (std::size_t n = 0; n < seq.size(); ++n) {
            const double lam = surrogate.temporal_jet(theta, seq, n, seq.times[n], false).lam;
            const double big = surrogate.integrated_intensity(theta, seq, n, seq.times[n]);
            const double g_end = std::exp(-surrogate.integrated_intensity(theta, seq, n, t_max));
            lt += std::log(lam) - big - std::log1p(-g_end) + std::log(surv(seq, n));
            if (spatial) {
                const Rect& s = dom.space();
                const double hx = 0.5 * s.width();
                const double hy = 0.5 * s.height();
                double z = 0.0;
                for (std::size_t a = 0; a < rule.size(); ++a) {
                    for (std::size_t b = 0; b < rule.size(); ++b) {
                        const Point2 p{s.x_lo + hx * (1.0 + rule.nodes[a]), s.y_lo + hy * (1.0 + rule.nodes[b])};
                        z += rule.weights[a] * rule.weights[b] * hx * hy *
                             surrogate.spatial_intensity(theta, seq, n, seq.times[n], p);
                    }
                }
                ls += std::log(surrogate.spatial_intensity(theta, seq, n, seq.times[n], seq.locs[n])) - std::log(z);
            }
        }
        if (!seq.truncated) {
            lt += std::log1p(-surv(seq, seq.size()));
        }
        out.per_seq_t[i] = lt;
        if (!std::isfinite(lt) || !std::isfinite(ls)) {
            out.flagged.push_back(i);
            continue;
        }
        sum_t += lt;
        sum_s += ls;
        ++good;
    }
    if (good > 0) {
        out.ll_t = sum_t / static_cast<double>(good);
        if (spatial) {
            out.ll_s = sum_s / static_cast<double>(good);
        }
    }
    return out;
}

std::vector<CnEstimate> estimate_cN(const JanossyFn& j, const ObservationDomain& domain, SeqSpan seqs,
                                    std::size_t n_max, std::size_t mc_samples, std::uint64_t seed) {
    if (domain.is_marked()) {
        throw UnsupportedOperation("estimate_cN does not handle marked domains");
    }
    if (seqs.empty() || mc_samples < 4) {
        throw ConfigError("estimate_cN needs data and at least 4 Monte Carlo samples");
    }
    std::vector<std::size_t> counts(n_max + 1, 0);
    for (const PointSequence& s : seqs) {
        if (s.size() <= n_max) {
            ++counts[s.size()];
        }
    }
    const double volume = domain.volume();
    const std::size_t d = domain.point_dim();
    std::vector<double> lo;
    std::vector<double> hi;
    if (domain.has_time()) {
        lo.push_back(0.0);
        hi.push_back(domain.t_max());
    }
    if (domain.has_space()) {
        const Rect& r = domain.space();
        lo.insert(lo.end(), {r.x_lo, r.y_lo});
        hi.insert(hi.end(), {r.x_hi, r.y_hi});
    }
    std::vector<CnEstimate> out;
    double factorial = 1.0;
    for (std::size_t n = 0; n <= n_max; ++n) {
        factorial *= n == 0 ? 1.0 : static_cast<double>(n);
        CnEstimate e;
        e.n = n;
        e.frequency = static_cast<double>(counts[n]) / static_cast<double>(seqs.size());
        if (counts[n] == 0) {
            throw NumericError("c_N undefined: no sequence has N = " + std::to_string(n));
        }
        if (n == 0) {
            e.integral = j(PointSequence{});
        } else {
            Stream rng(seed, n);
            const std::size_t strata = std::max<std::size_t>(2, static_cast<std::size_t>(std::sqrt(mc_samples)));
            const std::size_t per = std::max<std::size_t>(2, mc_samples / strata);
            const double scale = std::pow(volume, static_cast<double>(n));
            double est = 0.0;
            double var = 0.0;
            std::vector<std::vector<double>> pts(n, std::vector<double>(d));
            for (std::size_t l = 0; l < strata; ++l) {
                double s1 = 0.0;
                double s2 = 0.0;
                for (std::size_t q = 0; q < per; ++q) {
                    for (std::size_t a = 0; a < n; ++a) {
                        for (std::size_t c = 0; c < d; ++c) {
                            double u = rng.uniform();
                            if (a == 0 && c == 0) {
                                u = (static_cast<double>(l) + u) / static_cast<double>(strata);
                            }
                            pts[a][c] = lo[c] + u * (hi[c] - lo[c]);
                        }
                    }
                    std::vector<std::size_t> order(n);
                    std::iota(order.begin(), order.end(), 0U);
                    if (domain.has_time()) {
                        std::sort(order.begin(), order.end(),
                                  [&](std::size_t x, std::size_t y) { return pts[x][0] < pts[y][0]; });
                    }
                    PointSequence seq;
                    for (const std::size_t a : order) {
                        std::size_t c = 0;
                        if (domain.has_time()) {
                            seq.times.push_back(pts[a][c++]);
                        }
                        if (domain.has_space()) {
                            seq.locs.push_back({pts[a][c], pts[a][c + 1]});
                        }
                    }
                    const double v = j(seq);
                    s1 += v;
                    s2 += v * v;
                }
                const double mean = s1 / static_cast<double>(per);
                const double sv = std::max(0.0, (s2 - s1 * mean) / static_cast<double>(per - 1));
                est += mean / static_cast<double>(strata);
                var += sv / static_cast<double>(per) / static_cast<double>(strata * strata);
            }
            e.integral = scale * est;
            e.integral_se = scale * std::sqrt(var);
        }
        const double denom = factorial * e.frequency;
        e.c = e.integral / denom;
        // Delta method: integral and frequency are independent estimates.
        const double freq_rel = std::sqrt((1.0 - e.frequency) / (e.frequency * static_cast<double>(seqs.size())));
        e.se = std::abs(e.c) * std::hypot(e.integral != 0.0 ? e.integral_se / e.integral : 0.0, freq_rel);
        out.push_back(e);
    }
    return out;
}

} // namespace wsm
