#include <cmath>

#include "wsm/errors.hpp"
#include "wsm/models.hpp"

namespace wsm {

namespace {

Params pair(double a, double b) {
    Params p(2);
    p << a, b;
    return p;
}

void check_temporal(const ObservationDomain& dom, const std::string& who) {
    if (!dom.has_time() || dom.has_space() || dom.is_marked()) {
        throw ConfigError(who + " needs an unmarked temporal domain");
    }
}

// f = beta exp(c u) with s = f / (1 + f), r = 1 / (1 + f).
struct LogisticTerms {
    double e;
    double f;
    double s;
    double r;
};

LogisticTerms logistic_terms(double c, double beta, double u) {
    LogisticTerms lt{};
    lt.e = std::exp(c * u);
    lt.f = beta * lt.e;
    lt.r = 1.0 / (1.0 + lt.f);
    lt.s = lt.f * lt.r;
    return lt;
}

} // namespace

// ---------------------------------------------------------------------------
// LogisticIntensity

LogisticIntensity::LogisticIntensity(ObservationDomain domain) : ProcessFamily(std::move(domain)) {
    check_temporal(this->domain(), "logistic");
}

Params LogisticIntensity::lower_bounds() const { return pair(1e-6, 0.0); }

TemporalJet LogisticIntensity::temporal_jet(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                                            bool grad) const {
    check_index(seq, n, true);
    const double a = interval_start(seq, n);
    if (!(t >= a && t <= domain().t_max())) {
        throw DomainError("logistic: time outside (t_{n-1}, T]");
    }
    const double c = theta(0);
    const double beta = theta(1);
    TemporalJet jet;
    if (grad) {
        jet.g_lam = Params::Zero(2);
        jet.g_d1 = Params::Zero(2);
        jet.g_d2 = Params::Zero(2);
    }
    if (n == 0) {
        jet.lam = c;
        if (grad) {
            jet.g_lam(0) = 1.0;
        }
        return jet;
    }
    const double u = t - a;
    const LogisticTerms lt = logistic_terms(c, beta, u);
    const double s = lt.s;
    const double r = lt.r;
    jet.lam = c * r;
    jet.d1 = -c * c * s * r;
    jet.d2 = c * c * c * s * r * (s - r);
    if (grad) {
        const double q = -s * s + 4.0 * s * r - r * r;
        jet.g_lam << r - c * u * r * s, -c * r * r * lt.e;
        jet.g_d1 << -2.0 * c * s * r - c * c * u * s * r * (r - s), -c * c * r * r * (r - s) * lt.e;
        jet.g_d2 << 3.0 * c * c * s * r * (s - r) + c * c * c * u * r * s * q, c * c * c * r * r * q * lt.e;
    }
    return jet;
}

double LogisticIntensity::integrated_intensity(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                                               Params* grad) const {
    check_index(seq, n, true);
    const double a = interval_start(seq, n);
    if (!(t >= a && t <= domain().t_max())) {
        throw DomainError("logistic: time outside [t_{n-1}, T]");
    }
    const double c = theta(0);
    const double beta = theta(1);
    const double u = t - a;
    if (n == 0) {
        if (grad != nullptr) {
            *grad = pair(u, 0.0);
        }
        return c * u;
    }
    const LogisticTerms lt = logistic_terms(c, beta, u);
    if (grad != nullptr) {
        *grad = pair(u - u * lt.s, -lt.e * lt.r + 1.0 / (1.0 + beta));
    }
    return c * u - std::log1p(lt.f) + std::log1p(beta);
}

double LogisticIntensity::log_event_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                                              Params* grad) const {
    check_index(seq, n, false);
    const double c = theta(0);
    if (n == 0) {
        if (grad != nullptr) {
            *grad = pair(1.0 / c, 0.0);
        }
        return std::log(c);
    }
    const double u = seq.times[n] - seq.times[n - 1];
    const LogisticTerms lt = logistic_terms(c, theta(1), u);
    if (grad != nullptr) {
        *grad = pair(1.0 / c - u * lt.s, -lt.e * lt.r);
    }
    return std::log(c) - std::log1p(lt.f);
}

// ---------------------------------------------------------------------------
// ScoreEquivalentConstant

ScoreEquivalentConstant::ScoreEquivalentConstant(ObservationDomain domain) : ProcessFamily(std::move(domain)) {
    check_temporal(this->domain(), "score_equivalent_constant");
}

void ScoreEquivalentConstant::check_params(const Params& theta) const {
    ProcessFamily::check_params(theta);
    if (!(theta(0) > 0.0)) {
        throw ConfigError("score_equivalent_constant: lambda_star must be positive");
    }
    if (theta(1) == 1.0) {
        throw ConfigError("score_equivalent_constant: alpha = 1 is not admissible");
    }
}

double ScoreEquivalentConstant::survivor(double lambda_star, double alpha, double u) {
    return (std::exp(-lambda_star * u) - alpha) / (1.0 - alpha);
}

TemporalJet ScoreEquivalentConstant::temporal_jet(const Params& theta, const PointSequence& seq, std::size_t n,
                                                  double t, bool grad) const {
    check_index(seq, n, true);
    const double a = interval_start(seq, n);
    if (!(t >= a && t <= domain().t_max())) {
        throw DomainError("score_equivalent_constant: time outside (t_{n-1}, T]");
    }
    const double l = theta(0);
    const double al = theta(1);
    const double u = t - a;
    const double e = std::exp(l * u);
    const double w = 1.0 - al * e;
    const double w2 = w * w;
    const double w3 = w2 * w;
    TemporalJet jet;
    jet.lam = l / w;
    jet.d1 = al * l * l * e / w2;
    const double num2 = al * l * l * l * e * (1.0 + al * e);
    jet.d2 = num2 / w3;
    if (grad) {
        const double dw_dl = -al * u * e;
        const double dw_da = -e;
        jet.g_lam = pair(1.0 / w - l * dw_dl / w2, -l * dw_da / w2);
        const double n1 = al * l * l * e;
        const double dn1_dl = al * (2.0 * l * e + l * l * u * e);
        const double dn1_da = l * l * e;
        jet.g_d1 = pair(dn1_dl / w2 - 2.0 * n1 * dw_dl / w3, dn1_da / w2 - 2.0 * n1 * dw_da / w3);
        const double dn2_dl = al * (3.0 * l * l * e + l * l * l * u * e) * (1.0 + al * e) + al * l * l * l * e * al * u * e;
        const double dn2_da = l * l * l * e * (1.0 + al * e) + al * l * l * l * e * e;
        const double w4 = w3 * w;
        jet.g_d2 = pair(dn2_dl / w3 - 3.0 * num2 * dw_dl / w4, dn2_da / w3 - 3.0 * num2 * dw_da / w4);
    }
    return jet;
}

double ScoreEquivalentConstant::integrated_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                                                     double t, Params* grad) const {
    check_index(seq, n, true);
    const double a = interval_start(seq, n);
    if (!(t >= a && t <= domain().t_max())) {
        throw DomainError("score_equivalent_constant: time outside [t_{n-1}, T]");
    }
    const double l = theta(0);
    const double al = theta(1);
    const double u = t - a;
    const double e = std::exp(l * u);
    const double w = 1.0 - al * e;
    if (grad != nullptr) {
        *grad = pair(u + al * u * e / w, e / w - 1.0 / (1.0 - al));
    }
    return l * u - std::log(w / (1.0 - al));
}

double ScoreEquivalentConstant::log_event_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                                                    Params* grad) const {
    check_index(seq, n, false);
    const TemporalJet jet = temporal_jet(theta, seq, n, seq.times[n], grad != nullptr);
    if (grad != nullptr) {
        *grad = jet.g_lam / jet.lam;
    }
    return std::log(jet.lam);
}

} // namespace wsm
