#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "wsm/domain.hpp"

namespace wsm {

using json = nlohmann::json;

inline constexpr int kMaxParams = 16;

/// Parameter vector of a process family (layout documented per family).
using Params = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxParams, 1>;
/// d x p Jacobian of an event-coordinate score with respect to theta.
using ScoreJacobian = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, kMaxParams>;

/// Janossy score psi_n = grad_{x_n} log j_N(X) and its divergence.
struct JanossyScore {
    PointVec psi;
    double div = 0.0;
    ScoreJacobian dpsi; // d(psi)/d(theta), filled when gradients are requested
    Params ddiv;
};

/// Ground intensity lambda_T(t | H_{n-1}) with its first two time
/// derivatives, plus theta-gradients of all three when requested.
struct TemporalJet {
    double lam = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    Params g_lam;
    Params g_d1;
    Params g_d2;

    /// psi_T = d/dt log lambda_T - lambda_T.
    [[nodiscard]] double psi() const noexcept { return d1 / lam - lam; }
    /// d psi_T / dt.
    [[nodiscard]] double dpsi() const noexcept { return d2 / lam - (d1 * d1) / (lam * lam) - d1; }
    [[nodiscard]] Params grad_psi() const { return g_d1 / lam - g_lam * (d1 / (lam * lam)) - g_lam; }
    [[nodiscard]] Params grad_dpsi() const {
        const double l2 = lam * lam;
        return g_d2 / lam - g_lam * (d2 / l2) - g_d1 * (2.0 * d1 / l2) + g_lam * (2.0 * d1 * d1 / (l2 * lam)) - g_d1;
    }
};

/// psi_S = grad_s log lambda_n(t_n, s | H_{n-1}) at s = s_n, and its divergence.
struct SpatialScore {
    Eigen::Vector2d psi = Eigen::Vector2d::Zero();
    double div = 0.0;
    Eigen::Matrix<double, 2, Eigen::Dynamic, Eigen::ColMajor, 2, kMaxParams> dpsi;
    Params ddiv;
};

/// Integrated ground intensity over every inter-event interval of a batch of
/// sequences, by Gauss-Legendre quadrature in time. Families may precompute
/// parameter-independent quantities at the nodes.
class Compensator {
public:
    virtual ~Compensator() = default;
    /// Writes the compensator of each sequence into `values` and, when
    /// `grads` is non-null, its theta-gradient.
    virtual void evaluate(const Params& theta, std::vector<double>& values, std::vector<Params>* grads) const = 0;
};

/// A parametric point-process family on a fixed observation domain.
///
/// Event indices are zero-based: event n has history H = events 0..n-1 and
/// lies in the interval (t_{n-1}, T) with t_{-1} := 0. Index n = N addresses
/// the final, event-free interval.
class ProcessFamily {
public:
    explicit ProcessFamily(ObservationDomain domain) : domain_(std::move(domain)) {}
    virtual ~ProcessFamily() = default;
    ProcessFamily(const ProcessFamily&) = default;
    ProcessFamily& operator=(const ProcessFamily&) = delete;

    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual std::vector<std::string> param_names() const = 0;
    [[nodiscard]] std::size_t n_params() const { return param_names().size(); }
    [[nodiscard]] const ObservationDomain& domain() const noexcept { return domain_; }

    /// Box constraints used when fitting.
    [[nodiscard]] virtual Params lower_bounds() const;
    /// Throws ConfigError when theta has the wrong size or is not admissible.
    virtual void check_params(const Params& theta) const;

    [[nodiscard]] virtual bool has_janossy_score() const { return false; }
    [[nodiscard]] virtual bool has_temporal() const { return false; }
    [[nodiscard]] virtual bool has_spatial_score() const { return false; }
    [[nodiscard]] virtual bool is_poisson() const { return false; }

    /// Janossy score of event n. Throws UnsupportedOperation for families
    /// whose Janossy density is not tractable.
    [[nodiscard]] virtual JanossyScore janossy_score(const Params& theta, const PointSequence& seq, std::size_t n,
                                                     bool grad) const;

    /// Ground intensity jet at time t in (t_{n-1}, T].
    [[nodiscard]] virtual TemporalJet temporal_jet(const Params& theta, const PointSequence& seq, std::size_t n,
                                                   double t, bool grad) const;

    /// Lambda_n(t) = integral of lambda_T over (t_{n-1}, t]. Closed form when
    /// available, adaptive Gauss-Legendre otherwise.
    [[nodiscard]] virtual double integrated_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                                                      double t, Params* grad = nullptr) const;

    /// Spatial score at event n.
    [[nodiscard]] virtual SpatialScore spatial_score(const Params& theta, const PointSequence& seq, std::size_t n,
                                                     bool grad) const;

    /// lambda_n(t, s | H_{n-1}) for spatio-temporal families.
    [[nodiscard]] virtual double spatial_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                                                   double t, const Point2& s) const;

    /// log lambda_n(x_n, k_n | H_{n-1}) at the event itself (the MLE data term).
    [[nodiscard]] virtual double log_event_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                                                     Params* grad = nullptr) const = 0;

    /// Per-mark intensities lambda_n(t, k | H_{n-1}), k = 0..K-1.
    [[nodiscard]] virtual std::vector<double> mark_intensities(const Params& theta, const PointSequence& seq,
                                                               std::size_t n, double t) const;

    /// log f_K(k_n | H_{n-1}, t_n) = log(lambda_{k_n} / sum_k lambda_k). Zero when unmarked.
    [[nodiscard]] virtual double mark_log_prob(const Params& theta, const PointSequence& seq, std::size_t n,
                                               Params* grad = nullptr) const;

    /// Intensity of a Poisson family at a point of V.
    [[nodiscard]] virtual double point_intensity(const Params& theta, const PointVec& x, Params* grad = nullptr) const;

    /// Upper bound of the Poisson intensity over V (for thinning).
    [[nodiscard]] virtual double intensity_bound(const Params& theta) const;

    /// Compensator for the MLE with `nodes` Gauss-Legendre points per
    /// inter-event interval (per axis for purely spatial families).
    [[nodiscard]] virtual std::unique_ptr<Compensator> make_compensator(std::span<const PointSequence> seqs,
                                                                        int nodes) const;

    /// Family description (name and hyperparameters) as JSON.
    [[nodiscard]] virtual json to_json() const;
    [[nodiscard]] json params_to_json(const Params& theta) const;
    [[nodiscard]] Params params_from_json(const json& j) const;

protected:
    void check_index(const PointSequence& seq, std::size_t n, bool allow_end) const;
    [[nodiscard]] double interval_start(const PointSequence& seq, std::size_t n) const;

private:
    ObservationDomain domain_;
};

using FamilyPtr = std::shared_ptr<const ProcessFamily>;

/// lambda = rate per unit volume on any domain.
/// theta = [rate].
class HomogeneousPoisson final : public ProcessFamily {
public:
    explicit HomogeneousPoisson(ObservationDomain domain);
    std::string name() const override { return "homogeneous_poisson"; }
    std::vector<std::string> param_names() const override { return {"rate"}; }
    Params lower_bounds() const override;
    bool has_janossy_score() const override { return true; }
    bool has_temporal() const override { return domain().has_time(); }
    bool has_spatial_score() const override { return domain().has_space() && domain().has_time(); }
    bool is_poisson() const override { return true; }
    JanossyScore janossy_score(const Params& theta, const PointSequence& seq, std::size_t n, bool grad) const override;
    TemporalJet temporal_jet(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                             bool grad) const override;
    double integrated_intensity(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                                Params* grad = nullptr) const override;
    SpatialScore spatial_score(const Params& theta, const PointSequence& seq, std::size_t n, bool grad) const override;
    double spatial_intensity(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                             const Point2& s) const override;
    double log_event_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                               Params* grad = nullptr) const override;
    double point_intensity(const Params& theta, const PointVec& x, Params* grad = nullptr) const override;
    double intensity_bound(const Params& theta) const override;

private:
    double area_;
};

/// lambda(t) = rho t^(rho - 1) on (0, T). theta = [rho].
class PoissonWeibull1D final : public ProcessFamily {
public:
    explicit PoissonWeibull1D(ObservationDomain domain);
    std::string name() const override { return "poisson_weibull"; }
    std::vector<std::string> param_names() const override { return {"rho"}; }
    Params lower_bounds() const override;
    bool has_janossy_score() const override { return true; }
    bool has_temporal() const override { return true; }
    bool is_poisson() const override { return true; }
    JanossyScore janossy_score(const Params& theta, const PointSequence& seq, std::size_t n, bool grad) const override;
    TemporalJet temporal_jet(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                             bool grad) const override;
    double integrated_intensity(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                                Params* grad = nullptr) const override;
    double log_event_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                               Params* grad = nullptr) const override;
    double point_intensity(const Params& theta, const PointVec& x, Params* grad = nullptr) const override;
    double intensity_bound(const Params& theta) const override;
};

/// lambda(x) = exp(theta (sin x1 + cos x2)) on a rectangle. theta = [theta].
class PoissonExpSin2D final : public ProcessFamily {
public:
    explicit PoissonExpSin2D(ObservationDomain domain);
    std::string name() const override { return "poisson_expsin2d"; }
    std::vector<std::string> param_names() const override { return {"theta"}; }
    bool has_janossy_score() const override { return true; }
    bool is_poisson() const override { return true; }
    JanossyScore janossy_score(const Params& theta, const PointSequence& seq, std::size_t n, bool grad) const override;
    double log_event_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                               Params* grad = nullptr) const override;
    double point_intensity(const Params& theta, const PointVec& x, Params* grad = nullptr) const override;
    double intensity_bound(const Params& theta) const override;
};

/// K-variate Hawkes process with exponential decay:
///   lambda_n(t, k | H) = mu_k + sum_{i<n} alpha_{k_i k} exp(-beta (t - t_i)).
/// theta = [mu_1..mu_K, alpha_{jk} row-major (j = source, k = target), beta?].
/// beta is part of theta only when estimated; otherwise it is fixed.
class MultivariateExpHawkes final : public ProcessFamily {
public:
    MultivariateExpHawkes(ObservationDomain domain, double fixed_beta, bool estimate_beta = false);
    std::string name() const override { return "exp_hawkes"; }
    std::vector<std::string> param_names() const override;
    Params lower_bounds() const override;
    bool has_temporal() const override { return true; }
    TemporalJet temporal_jet(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                             bool grad) const override;
    double integrated_intensity(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                                Params* grad = nullptr) const override;
    double log_event_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                               Params* grad = nullptr) const override;
    std::vector<double> mark_intensities(const Params& theta, const PointSequence& seq, std::size_t n,
                                         double t) const override;
    double mark_log_prob(const Params& theta, const PointSequence& seq, std::size_t n, Params* grad = nullptr) const override;
    std::unique_ptr<Compensator> make_compensator(std::span<const PointSequence> seqs, int nodes) const override;
    json to_json() const override;

    [[nodiscard]] int n_marks() const noexcept { return k_; }
    [[nodiscard]] bool estimates_beta() const noexcept { return estimate_beta_; }
    [[nodiscard]] double beta(const Params& theta) const;
    /// Index of alpha_{source,target} in theta.
    [[nodiscard]] int alpha_index(int source, int target) const noexcept { return k_ + source * k_ + target; }

private:
    struct State; // per-source decayed sums at the interval start
    void history_state(const Params& theta, const PointSequence& seq, std::size_t n, State& st) const;
    double per_mark(const Params& theta, const State& st, int target, double decay) const;

    int k_;
    double fixed_beta_;
    bool estimate_beta_;
};

/// Spatio-temporal Hawkes process with a Gaussian spatial kernel:
///   lambda_n(t, s | H) = mu + C sum_{i<n} exp(-beta tau_i) N(s; s_i, v(tau_i) I),  tau_i = t - t_i,
/// restricted to the rectangle S. The kernel variance is v(tau) = sigma^2
/// (fixed bandwidth) or v(tau) = tau (diffusion, sigma = 0). lambda_T
/// integrates the Gaussian exactly over S. theta = [mu, beta, C].
class GaussianSTHawkes final : public ProcessFamily {
public:
    /// sigma > 0: fixed bandwidth; sigma = 0: diffusion kernel.
    explicit GaussianSTHawkes(ObservationDomain domain, double sigma = 1.0);
    std::string name() const override { return "gaussian_st_hawkes"; }
    std::vector<std::string> param_names() const override { return {"mu", "beta", "C"}; }
    Params lower_bounds() const override;
    bool has_temporal() const override { return true; }
    bool has_spatial_score() const override { return true; }
    TemporalJet temporal_jet(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                             bool grad) const override;
    SpatialScore spatial_score(const Params& theta, const PointSequence& seq, std::size_t n, bool grad) const override;
    double spatial_intensity(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                             const Point2& s) const override;
    double log_event_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                               Params* grad = nullptr) const override;
    std::unique_ptr<Compensator> make_compensator(std::span<const PointSequence> seqs, int nodes) const override;
    json to_json() const override;

    [[nodiscard]] double sigma() const noexcept { return sigma_; }
    [[nodiscard]] bool diffusion() const noexcept { return sigma_ == 0.0; }
    /// Kernel variance v(tau).
    [[nodiscard]] double variance(double tau) const noexcept { return diffusion() ? tau : sigma_ * sigma_; }

    /// Mass of N(center, v(tau) I) inside S and its first two tau-derivatives.
    struct Mass {
        double p = 0.0;
        double d1 = 0.0;
        double d2 = 0.0;
    };
    [[nodiscard]] Mass mass_in_space(const Point2& center, double tau) const;

    /// Offsets closer than this to a trigger are clamped.
    static constexpr double kMinLag = 1e-9;

private:
    double sigma_;
};

/// Self-correcting logistic intensity:
///   lambda_1(t) = c,  lambda_n(t | H) = c / (1 + beta exp(c (t - t_{n-1}))) for n > 1.
/// theta = [c, beta].
class LogisticIntensity final : public ProcessFamily {
public:
    explicit LogisticIntensity(ObservationDomain domain);
    std::string name() const override { return "logistic"; }
    std::vector<std::string> param_names() const override { return {"c", "beta"}; }
    Params lower_bounds() const override;
    bool has_temporal() const override { return true; }
    TemporalJet temporal_jet(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                             bool grad) const override;
    double integrated_intensity(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                                Params* grad = nullptr) const override;
    double log_event_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                               Params* grad = nullptr) const override;
};

/// Surrogate intensity lambda(t) = lambda* / (1 - alpha exp(lambda* (t - t_{n-1}))).
/// Its conditional score equals that of the constant intensity lambda* for
/// every alpha, so score matching alone cannot tell them apart.
/// theta = [lambda_star, alpha]; alpha = 1 is excluded.
class ScoreEquivalentConstant final : public ProcessFamily {
public:
    explicit ScoreEquivalentConstant(ObservationDomain domain);
    std::string name() const override { return "score_equivalent_constant"; }
    std::vector<std::string> param_names() const override { return {"lambda_star", "alpha"}; }
    void check_params(const Params& theta) const override;
    bool has_temporal() const override { return true; }
    TemporalJet temporal_jet(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                             bool grad) const override;
    double integrated_intensity(const Params& theta, const PointSequence& seq, std::size_t n, double t,
                                Params* grad = nullptr) const override;
    double log_event_intensity(const Params& theta, const PointSequence& seq, std::size_t n,
                               Params* grad = nullptr) const override;
    /// Survivor exp(-Lambda) = (exp(-lambda* u) - alpha) / (1 - alpha).
    [[nodiscard]] static double survivor(double lambda_star, double alpha, double u);
};

/// Builds a family from {"name": ..., hyperparameters...}.
[[nodiscard]] FamilyPtr make_family(const json& spec, const ObservationDomain& domain);

/// Gradient-free view of theta as a plain vector, and back.
[[nodiscard]] Eigen::VectorXd to_vector(const Params& p);
[[nodiscard]] Params to_params(const Eigen::VectorXd& v);

} // namespace wsm
