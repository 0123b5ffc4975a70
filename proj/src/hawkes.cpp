#include <array>
#include <cmath>
#include <tuple>
#include <utility>

#include "wsm/errors.hpp"
#include "wsm/models.hpp"
#include "wsm/quadrature.hpp"

namespace wsm {

namespace {
constexpr int kMaxMarks = 3; // K + K^2 + 1 <= kMaxParams
}

// D_j = sum over past events of mark j of exp(-beta (a - t_i)),
// E_j = the same sum weighted by (a - t_i), with a the interval start.
struct MultivariateExpHawkes::State {
    double a = 0.0;
    std::array<double, kMaxMarks> d{};
    std::array<double, kMaxMarks> e{};
};

MultivariateExpHawkes::MultivariateExpHawkes(ObservationDomain domain, double fixed_beta, bool estimate_beta)
    : ProcessFamily(std::move(domain)), k_(this->domain().n_marks()), fixed_beta_(fixed_beta),
      estimate_beta_(estimate_beta) {
    if (!this->domain().has_time() || this->domain().has_space()) {
        throw ConfigError("exp_hawkes needs a purely temporal domain");
    }
    if (k_ > kMaxMarks) {
        throw ConfigError("exp_hawkes supports at most 3 marks");
    }
    if (!(fixed_beta > 0.0) || !std::isfinite(fixed_beta)) {
        throw ConfigError("exp_hawkes decay beta must be positive");
    }
}

std::vector<std::string> MultivariateExpHawkes::param_names() const {
    std::vector<std::string> names;
    for (int k = 0; k < k_; ++k) {
        names.push_back("mu_" + std::to_string(k + 1));
    }
    for (int j = 0; j < k_; ++j) {
        for (int k = 0; k < k_; ++k) {
            names.push_back("alpha_" + std::to_string(j + 1) + std::to_string(k + 1));
        }
    }
    if (estimate_beta_) {
        names.emplace_back("beta");
    }
    return names;
}

Params MultivariateExpHawkes::lower_bounds() const {
    Params lb = Params::Zero(static_cast<Eigen::Index>(n_params()));
    lb.head(k_).setConstant(1e-6);
    if (estimate_beta_) {
        lb(k_ + k_ * k_) = 1e-3;
    }
    return lb;
}

json MultivariateExpHawkes::to_json() const {
    return json{{"name", name()}, {"beta", fixed_beta_}, {"estimate_beta", estimate_beta_}};
}

double MultivariateExpHawkes::beta(const Params& theta) const {
    return estimate_beta_ ? theta(k_ + k_ * k_) : fixed_beta_;
}

void MultivariateExpHawkes::history_state(const Params& theta, const PointSequence& seq, std::size_t n,
                                          State& st) const {
    const double b = beta(theta);
    st.a = interval_start(seq, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lag = st.a - seq.times[i];
        const double w = std::exp(-b * lag);
        const int m = seq.marks.empty() ? 0 : seq.marks[i];
        st.d[static_cast<std::size_t>(m)] += w;
        st.e[static_cast<std::size_t>(m)] += lag * w;
    }
}

double MultivariateExpHawkes::per_mark(const Params& theta, const State& st, int target, double decay) const {
    double s = 0.0;
    for (int j = 0; j < k_; ++j) {
        s += theta(alpha_index(j, target)) * st.d[static_cast<std::size_t>(j)];
    }
    return theta(target) + decay * s;
}

TemporalJet MultivariateExpHawkes::temporal_jet(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                                                bool grad) const {
    check_index(seq, n, true);
    State st;
    history_state(theta, seq, n, st);
    if (!(t >= st.a && t <= domain().t_max())) {
        throw DomainError("exp_hawkes: time outside (t_{n-1}, T]");
    }
    const double b = beta(theta);
    const double u = t - st.a;
    const double decay = std::exp(-b * u);
    double m = 0.0;
    for (int k = 0; k < k_; ++k) {
        m += theta(k);
    }
    double x = 0.0;
    double y = 0.0;
    std::array<double, kMaxMarks> row{};
    for (int j = 0; j < k_; ++j) {
        for (int k = 0; k < k_; ++k) {
            row[static_cast<std::size_t>(j)] += theta(alpha_index(j, k));
        }
        x += row[static_cast<std::size_t>(j)] * st.d[static_cast<std::size_t>(j)];
        y += row[static_cast<std::size_t>(j)] * st.e[static_cast<std::size_t>(j)];
    }
    TemporalJet jet;
    jet.lam = m + decay * x;
    jet.d1 = -b * decay * x;
    jet.d2 = b * b * decay * x;
    if (grad) {
        const auto p = static_cast<Eigen::Index>(n_params());
        jet.g_lam = Params::Zero(p);
        jet.g_d1 = Params::Zero(p);
        jet.g_d2 = Params::Zero(p);
        jet.g_lam.head(k_).setOnes();
        for (int j = 0; j < k_; ++j) {
            const double dj = decay * st.d[static_cast<std::size_t>(j)];
            for (int k = 0; k < k_; ++k) {
                const int idx = alpha_index(j, k);
                jet.g_lam(idx) = dj;
                jet.g_d1(idx) = -b * dj;
                jet.g_d2(idx) = b * b * dj;
            }
        }
        if (estimate_beta_) {
            const Eigen::Index ib = k_ + k_ * k_;
            const double z = decay * (y + u * x);
            jet.g_lam(ib) = -z;
            jet.g_d1(ib) = -decay * x + b * z;
            jet.g_d2(ib) = 2.0 * b * decay * x - b * b * z;
        }
    }
    return jet;
}

double MultivariateExpHawkes::integrated_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                                                   double t, Params* grad) const {
    check_index(seq, n, true);
    State st;
    history_state(theta, seq, n, st);
    if (!(t >= st.a && t <= domain().t_max())) {
        throw DomainError("exp_hawkes: time outside [t_{n-1}, T]");
    }
    const double b = beta(theta);
    const double u = t - st.a;
    const double decay = std::exp(-b * u);
    const double frac = -std::expm1(-b * u) / b; // (1 - decay) / beta
    double m = 0.0;
    for (int k = 0; k < k_; ++k) {
        m += theta(k);
    }
    double x = 0.0;
    double y = 0.0;
    std::array<double, kMaxMarks> row{};
    for (int j = 0; j < k_; ++j) {
        for (int k = 0; k < k_; ++k) {
            row[static_cast<std::size_t>(j)] += theta(alpha_index(j, k));
        }
        x += row[static_cast<std::size_t>(j)] * st.d[static_cast<std::size_t>(j)];
        y += row[static_cast<std::size_t>(j)] * st.e[static_cast<std::size_t>(j)];
    }
    if (grad != nullptr) {
        *grad = Params::Zero(static_cast<Eigen::Index>(n_params()));
        grad->head(k_).setConstant(u);
        for (int j = 0; j < k_; ++j) {
            for (int k = 0; k < k_; ++k) {
                (*grad)(alpha_index(j, k)) = st.d[static_cast<std::size_t>(j)] * frac;
            }
        }
        if (estimate_beta_) {
            (*grad)(k_ + k_ * k_) = -y * frac + x * (u * decay - frac) / b;
        }
    }
    return m * u + x * frac;
}

double MultivariateExpHawkes::log_event_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                                                  Params* grad) const {
    check_index(seq, n, false);
    State st;
    history_state(theta, seq, n, st);
    const double b = beta(theta);
    const double u = seq.times[n] - st.a;
    const double decay = std::exp(-b * u);
    const int target = seq.marks.empty() ? 0 : seq.marks[n];
    const double lam = per_mark(theta, st, target, decay);
    if (grad != nullptr) {
        *grad = Params::Zero(static_cast<Eigen::Index>(n_params()));
        (*grad)(target) = 1.0 / lam;
        double zb = 0.0;
        for (int j = 0; j < k_; ++j) {
            const auto js = static_cast<std::size_t>(j);
            (*grad)(alpha_index(j, target)) = decay * st.d[js] / lam;
            zb += theta(alpha_index(j, target)) * (st.e[js] + u * st.d[js]);
        }
        if (estimate_beta_) {
            (*grad)(k_ + k_ * k_) = -decay * zb / lam;
        }
    }
    return std::log(lam);
}

std::vector<double> MultivariateExpHawkes::mark_intensities(const Params& theta, const PointSequence& seq,
                                                            std::size_t n, double t) const {
    check_index(seq, n, true);
    State st;
    history_state(theta, seq, n, st);
    if (!(t >= st.a && t <= domain().t_max())) {
        throw DomainError("exp_hawkes: time outside (t_{n-1}, T]");
    }
    const double decay = std::exp(-beta(theta) * (t - st.a));
    std::vector<double> out(static_cast<std::size_t>(k_));
    for (int k = 0; k < k_; ++k) {
        out[static_cast<std::size_t>(k)] = per_mark(theta, st, k, decay);
    }
    return out;
}

double MultivariateExpHawkes::mark_log_prob(const Params& theta, const PointSequence& seq, std::size_t n,
                                            Params* grad) const {
    check_index(seq, n, false);
    if (k_ == 1) {
        if (grad != nullptr) {
            *grad = Params::Zero(static_cast<Eigen::Index>(n_params()));
        }
        return 0.0;
    }
    const double log_k = log_event_intensity(theta, seq, n, grad);
    const TemporalJet jet = temporal_jet(theta, seq, n, seq.times[n], grad != nullptr);
    if (grad != nullptr) {
        *grad -= jet.g_lam / jet.lam;
    }
    return log_k - std::log(jet.lam);
}

namespace {

// Integral of lambda_T over each interval by Gauss-Legendre. With beta fixed
// the node sums of exp(-beta (x - a)) do not depend on theta and are cached.
class HawkesCompensator final : public Compensator {
public:
    HawkesCompensator(const MultivariateExpHawkes& family, std::span<const PointSequence> seqs, int nodes,
                      double fixed_beta)
        : family_(family), seqs_(seqs), rule_(gauss_legendre(nodes)) {
        if (!family.estimates_beta()) {
            for (const PointSequence& seq : seqs_) {
                for (std::size_t n = 0; n <= seq.size(); ++n) {
                    const auto [a, b] = bounds(seq, n);
                    cached_s0_.push_back(node_sums(a, b, fixed_beta).first);
                }
            }
        }
    }

    void evaluate(const Params& theta, std::vector<double>& values, std::vector<Params>* grads) const override {
        const int k = family_.n_marks();
        const bool est = family_.estimates_beta();
        const double beta = family_.beta(theta);
        const auto p = static_cast<Eigen::Index>(family_.n_params());
        values.assign(seqs_.size(), 0.0);
        if (grads != nullptr) {
            grads->assign(seqs_.size(), Params::Zero(p));
        }
        double m = 0.0;
        for (int j = 0; j < k; ++j) {
            m += theta(j);
        }
        std::array<double, kMaxMarks> row{};
        for (int j = 0; j < k; ++j) {
            for (int t = 0; t < k; ++t) {
                row[static_cast<std::size_t>(j)] += theta(family_.alpha_index(j, t));
            }
        }
        std::size_t cursor = 0;
        for (std::size_t i = 0; i < seqs_.size(); ++i) {
            const PointSequence& seq = seqs_[i];
            std::array<double, kMaxMarks> d{};
            std::array<double, kMaxMarks> e{};
            double prev_a = 0.0;
            for (std::size_t n = 0; n <= seq.size(); ++n) {
                const auto [a, b] = bounds(seq, n);
                if (n > 0) {
                    // Shift the decayed sums from prev_a to a, then add event n-1.
                    const double shift = a - prev_a;
                    const double w = std::exp(-beta * shift);
                    for (int j = 0; j < k; ++j) {
                        const auto js = static_cast<std::size_t>(j);
                        e[js] = (e[js] + shift * d[js]) * w;
                        d[js] *= w;
                    }
                    d[static_cast<std::size_t>(seq.marks.empty() ? 0 : seq.marks[n - 1])] += 1.0;
                }
                prev_a = a;
                double s0 = 0.0;
                double s1 = 0.0;
                if (est) {
                    std::tie(s0, s1) = node_sums(a, b, beta);
                } else {
                    s0 = cached_s0_[cursor++];
                }
                double x = 0.0;
                double y = 0.0;
                for (int j = 0; j < k; ++j) {
                    x += row[static_cast<std::size_t>(j)] * d[static_cast<std::size_t>(j)];
                    y += row[static_cast<std::size_t>(j)] * e[static_cast<std::size_t>(j)];
                }
                values[i] += m * (b - a) + x * s0;
                if (grads != nullptr) {
                    Params& g = (*grads)[i];
                    g.head(k).array() += (b - a);
                    for (int j = 0; j < k; ++j) {
                        for (int t = 0; t < k; ++t) {
                            g(family_.alpha_index(j, t)) += d[static_cast<std::size_t>(j)] * s0;
                        }
                    }
                    if (est) {
                        g(k + k * k) -= y * s0 + x * s1;
                    }
                }
            }
        }
    }

private:
    std::pair<double, double> bounds(const PointSequence& seq, std::size_t n) const {
        const double a = n == 0 ? 0.0 : seq.times[n - 1];
        const double b = n == seq.size() ? family_.domain().t_max() : seq.times[n];
        return {a, b};
    }

    // Quadrature of exp(-beta u) and u exp(-beta u) over u in (0, b - a).
    std::pair<double, double> node_sums(double a, double b, double beta) const {
        const double half = 0.5 * (b - a);
        double s0 = 0.0;
        double s1 = 0.0;
        for (std::size_t q = 0; q < rule_.size(); ++q) {
            const double u = half * (1.0 + rule_.nodes[q]);
            const double w = half * rule_.weights[q] * std::exp(-beta * u);
            s0 += w;
            s1 += w * u;
        }
        return {s0, s1};
    }

    const MultivariateExpHawkes& family_;
    std::span<const PointSequence> seqs_;
    const GaussLegendre& rule_;
    std::vector<double> cached_s0_;
};

} // namespace

std::unique_ptr<Compensator> MultivariateExpHawkes::make_compensator(std::span<const PointSequence> seqs,
                                                                     int nodes) const {
    return std::make_unique<HawkesCompensator>(*this, seqs, nodes, fixed_beta_);
}

} // namespace wsm
