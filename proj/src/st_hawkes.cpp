#include <algorithm>
#include <cmath>
#include <numbers>

#include "wsm/errors.hpp"
#include "wsm/models.hpp"
#include "wsm/quadrature.hpp"

namespace wsm {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double norm_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

struct AxisMass {
    double q;
    double d1;
    double d2;
};

// Mass of N(0, tau) on [a, b] (a <= 0 <= b in practice) and its tau-derivatives.
AxisMass axis_mass(double a, double b, double tau) {
    const double sigma = std::sqrt(tau);
    const double za = a / sigma;
    const double zb = b / sigma;
    const double pa = norm_pdf(za);
    const double pb = norm_pdf(zb);
    const double s3 = 2.0 * sigma * tau;
    const double t52 = tau * tau * sigma;
    AxisMass m{};
    m.q = norm_cdf(zb) - norm_cdf(za);
    m.d1 = a * pa / s3 - b * pb / s3;
    m.d2 = (a * pa * (za * za - 3.0) - b * pb * (zb * zb - 3.0)) / (4.0 * t52);
    return m;
}

// Gaussian density N(s; s_i, var I) times exp(-beta tau).
double kernel_density(double beta, double tau, double var, double dx, double dy) {
    return std::exp(-beta * tau - 0.5 * (dx * dx + dy * dy) / var) / (2.0 * std::numbers::pi * var);
}

} // namespace

GaussianSTHawkes::GaussianSTHawkes(ObservationDomain domain, double sigma)
    : ProcessFamily(std::move(domain)), sigma_(sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw ConfigError("gaussian_st_hawkes: sigma must be finite and >= 0");
    }
    if (!this->domain().has_time() || !this->domain().has_space() || this->domain().is_marked()) {
        throw ConfigError("gaussian_st_hawkes needs an unmarked spatio-temporal domain");
    }
}

Params GaussianSTHawkes::lower_bounds() const {
    Params lb(3);
    lb << 1e-6, 1e-3, 0.0;
    return lb;
}

GaussianSTHawkes::Mass GaussianSTHawkes::mass_in_space(const Point2& c, double tau) const {
    const Rect& s = domain().space();
    const AxisMass mx = axis_mass(s.x_lo - c[0], s.x_hi - c[0], variance(tau));
    const AxisMass my = axis_mass(s.y_lo - c[1], s.y_hi - c[1], variance(tau));
    if (!diffusion()) {
        return {mx.q * my.q, 0.0, 0.0};
    }
    return {mx.q * my.q, mx.d1 * my.q + mx.q * my.d1, mx.d2 * my.q + 2.0 * mx.d1 * my.d1 + mx.q * my.d2};
}

TemporalJet GaussianSTHawkes::temporal_jet(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                                           bool grad) const {
    check_index(seq, n, true);
    const double a = interval_start(seq, n);
    if (!(t >= a && t <= domain().t_max())) {
        throw DomainError("gaussian_st_hawkes: time outside (t_{n-1}, T]");
    }
    const double mu = theta(0);
    const double beta = theta(1);
    const double c = theta(2);
    const double area = domain().space().area();
    double k0 = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    double b0 = 0.0;
    double b1 = 0.0;
    double b2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double tau = std::max(t - seq.times[i], kMinLag);
        const Mass m = mass_in_space(seq.locs[i], tau);
        const double e = std::exp(-beta * tau);
        const double v0 = e * m.p;
        const double v1 = e * (m.d1 - beta * m.p);
        const double v2 = e * (m.d2 - 2.0 * beta * m.d1 + beta * beta * m.p);
        k0 += v0;
        k1 += v1;
        k2 += v2;
        if (grad) {
            b0 += -tau * v0;
            b1 += -tau * v1 - e * m.p;
            b2 += -tau * v2 + e * (-2.0 * m.d1 + 2.0 * beta * m.p);
        }
    }
    TemporalJet jet;
    jet.lam = mu * area + c * k0;
    jet.d1 = c * k1;
    jet.d2 = c * k2;
    if (grad) {
        jet.g_lam.resize(3);
        jet.g_d1.resize(3);
        jet.g_d2.resize(3);
        jet.g_lam << area, c * b0, k0;
        jet.g_d1 << 0.0, c * b1, k1;
        jet.g_d2 << 0.0, c * b2, k2;
    }
    return jet;
}

SpatialScore GaussianSTHawkes::spatial_score(const Params& theta, const PointSequence& seq, std::size_t n,
                                             bool grad) const {
    check_params(theta);
    check_index(seq, n, false);
    const double mu = theta(0);
    const double beta = theta(1);
    const double c = theta(2);
    const double t = seq.times[n];
    const Point2& s = seq.locs[n];
    // Sums over triggers: G = sum g_i, V = sum g_i (-d_i / v_i),
    // L = sum g_i (|d_i|^2 / v_i^2 - 2 / v_i), and their beta-derivatives.
    double g0 = 0.0;
    Eigen::Vector2d gv = Eigen::Vector2d::Zero();
    double gl = 0.0;
    double bg = 0.0;
    Eigen::Vector2d bv = Eigen::Vector2d::Zero();
    double bl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double tau = std::max(t - seq.times[i], kMinLag);
        const double dx = s[0] - seq.locs[i][0];
        const double dy = s[1] - seq.locs[i][1];
        const double var = variance(tau);
        const double g = kernel_density(beta, tau, var, dx, dy);
        const Eigen::Vector2d v(-g * dx / var, -g * dy / var);
        const double l = g * ((dx * dx + dy * dy) / (var * var) - 2.0 / var);
        g0 += g;
        gv += v;
        gl += l;
        bg -= tau * g;
        bv -= tau * v;
        bl -= tau * l;
    }
    const double lam = mu + c * g0;
    const Eigen::Vector2d glam = c * gv;
    const double llam = c * gl;
    SpatialScore out;
    out.psi = glam / lam;
    out.div = llam / lam - glam.squaredNorm() / (lam * lam);
    if (grad) {
        // Derivatives of (lambda, grad lambda, laplacian lambda) for [mu, beta, C].
        const double dl[3] = {1.0, c * bg, g0};
        const Eigen::Vector2d dg[3] = {Eigen::Vector2d::Zero(), c * bv, gv};
        const double dL[3] = {0.0, c * bl, gl};
        out.dpsi.resize(2, 3);
        out.ddiv.resize(3);
        for (int j = 0; j < 3; ++j) {
            out.dpsi.col(j) = dg[j] / lam - glam * (dl[j] / (lam * lam));
            out.ddiv(j) = dL[j] / lam - llam * dl[j] / (lam * lam) - 2.0 * glam.dot(dg[j]) / (lam * lam) +
                          2.0 * glam.squaredNorm() * dl[j] / (lam * lam * lam);
        }
    }
    return out;
}

double GaussianSTHawkes::spatial_intensity(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                                           const Point2& s) const {
    check_index(seq, n, true);
    double g0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double tau = std::max(t - seq.times[i], kMinLag);
        g0 += kernel_density(theta(1), tau, variance(tau), s[0] - seq.locs[i][0], s[1] - seq.locs[i][1]);
    }
    return theta(0) + theta(2) * g0;
}

double GaussianSTHawkes::log_event_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                                             Params* grad) const {
    check_index(seq, n, false);
    const double beta = theta(1);
    const double t = seq.times[n];
    const Point2& s = seq.locs[n];
    double g0 = 0.0;
    double bg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double tau = std::max(t - seq.times[i], kMinLag);
        const double g = kernel_density(beta, tau, variance(tau), s[0] - seq.locs[i][0], s[1] - seq.locs[i][1]);
        g0 += g;
        bg -= tau * g;
    }
    const double lam = theta(0) + theta(2) * g0;
    if (grad != nullptr) {
        grad->resize(3);
        *grad << 1.0 / lam, theta(2) * bg / lam, g0 / lam;
    }
    return std::log(lam);
}

namespace {

// The in-S masses P_i at every quadrature node depend only on the data, so
// they are computed once. Per evaluation the kernel factorizes as
//   exp(-beta (x_q - t_i)) = exp(-beta (x_q - a)) exp(-beta (a - t_i)).
// Trigger i contributes C int_0^{T - t_i} exp(-beta tau) P_i(tau) d tau, so
// the event-free intervals do not matter. The rule runs in v = sqrt(tau),
// which resolves the boundary layer of P_i near tau = 0. Per trigger the
// nodes tau_q and the weights w_q 2 v_q P_i(tau_q) are cached.
class STCompensator final : public Compensator {
public:
    STCompensator(const GaussianSTHawkes& family, std::span<const PointSequence> seqs, int nodes)
        : family_(family), seqs_(seqs), q_count_(gauss_legendre(nodes).size()) {
        const GaussLegendre& rule = gauss_legendre(nodes);
        const double t_max = family.domain().t_max();
        for (const PointSequence& seq : seqs_) {
            for (std::size_t i = 0; i < seq.size(); ++i) {
                const double half = 0.5 * std::sqrt(t_max - seq.times[i]);
                for (std::size_t q = 0; q < q_count_; ++q) {
                    const double v = half * (1.0 + rule.nodes[q]);
                    const double tau = std::max(v * v, GaussianSTHawkes::kMinLag);
                    tau_.push_back(tau);
                    weight_.push_back(half * rule.weights[q] * 2.0 * v * family.mass_in_space(seq.locs[i], tau).p);
                }
            }
        }
    }

    void evaluate(const Params& theta, std::vector<double>& values, std::vector<Params>* grads) const override {
        const double mu = theta(0);
        const double beta = theta(1);
        const double c = theta(2);
        const double area = family_.domain().space().area();
        const double t_max = family_.domain().t_max();
        values.assign(seqs_.size(), 0.0);
        if (grads != nullptr) {
            grads->assign(seqs_.size(), Params::Zero(3));
        }
        std::size_t k = 0;
        for (std::size_t s = 0; s < seqs_.size(); ++s) {
            double kern = 0.0;  // sum_i int e^{-beta tau} P_i
            double dbeta = 0.0; // sum_i int tau e^{-beta tau} P_i
            const std::size_t end = k + seqs_[s].size() * q_count_;
            for (; k < end; ++k) {
                const double term = weight_[k] * std::exp(-beta * tau_[k]);
                kern += term;
                dbeta += term * tau_[k];
            }
            values[s] = mu * area * t_max + c * kern;
            if (grads != nullptr) {
                (*grads)[s] << area * t_max, -c * dbeta, kern;
            }
        }
    }

private:
    const GaussianSTHawkes& family_;
    std::span<const PointSequence> seqs_;
    std::size_t q_count_;
    std::vector<double> tau_;
    std::vector<double> weight_;
};

} // namespace

json GaussianSTHawkes::to_json() const { return json{{"name", name()}, {"sigma", sigma_}}; }

std::unique_ptr<Compensator> GaussianSTHawkes::make_compensator(std::span<const PointSequence> seqs,
                                                                int nodes) const {
    return std::make_unique<STCompensator>(*this, seqs, nodes);
}

} // namespace wsm
