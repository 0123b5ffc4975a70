#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wsm/objectives.hpp"
#include "wsm/optimize.hpp"

namespace wsm {

/// Features of the history H_{n-1} = events 0..n-1 used to predict whether
/// event n (zero-based) exists.
using FeatureFn = std::function<Eigen::VectorXd(const PointSequence& seq, std::size_t n)>;

struct FeatureMap {
    std::string name;
    std::size_t dim = 0;
    FeatureFn fn;
    json params; // hyperparameters needed to rebuild the map
};

/// [1, 1{n = 0}, n / n_bar, t_{n-1} / T, log(1 - exp(-(T - t_{n-1}) / tau_bar)), mark fractions (K > 1)].
/// Purely spatial domains keep only the first three. n_bar is the mean count
/// of `train` and tau_bar = T / (n_bar + 1).
[[nodiscard]] FeatureMap history_features(const ObservationDomain& domain, SeqSpan train);
[[nodiscard]] FeatureMap history_features(const ObservationDomain& domain, double n_bar);

/// Pr(N >= n + 1 | H_{n-1}); zero-based event index as everywhere else.
using ContinuationFn = std::function<double(const PointSequence& seq, std::size_t n)>;

/// Logistic regression on a feature map: F_n = sigmoid(w . phi(H_{n-1})),
/// clamped to [kClampLo, 1 - kClampLo].
class SurvivalModel {
public:
    static constexpr double kClampLo = 1e-12;

    SurvivalModel(FeatureMap features, Eigen::VectorXd weights);

    [[nodiscard]] const FeatureMap& features() const noexcept { return features_; }
    [[nodiscard]] const Eigen::VectorXd& weights() const noexcept { return weights_; }
    [[nodiscard]] SurvivalModel with_weights(Eigen::VectorXd w) const;

    /// Clamped continuation probability; sets *clamped when clamping applied.
    [[nodiscard]] double prob(const PointSequence& seq, std::size_t n, bool* clamped = nullptr) const;
    [[nodiscard]] ContinuationFn continuation() const;

    [[nodiscard]] json to_json() const;
    /// Rebuilds a model whose feature map is history_features.
    [[nodiscard]] static SurvivalModel from_json(const json& j, const ObservationDomain& domain);

private:
    FeatureMap features_;
    Eigen::VectorXd weights_;
};

/// Per-class weights for the continuation labels (1 = continues, 0 = stops).
struct ClassWeights {
    double positive = 1.0;
    double negative = 1.0;
};

struct ClassBalance {
    std::size_t positive = 0;
    std::size_t negative = 0;
    /// Weights proportional to 1 / class frequency, normalised to mean 1.
    [[nodiscard]] ClassWeights inverse_frequency() const;
};

[[nodiscard]] ClassBalance class_balance(SeqSpan seqs);

/// -mean[ sum_n log F_n + log(1 - F_{N+1}) ]; truncated sequences drop the
/// final term. Gradient is with respect to the survival weights.
[[nodiscard]] ObjectiveReport survival_ce(const SurvivalModel& model, SeqSpan seqs,
                                          const ClassWeights* cw = nullptr);

struct SurvivalFitOptions {
    AdamConfig adam;
    bool class_weighted = false;
};

struct SurvivalFit {
    SurvivalModel model;
    ClassBalance balance;
    std::optional<std::string> warning; // set for single-class labels
    AdamResult trace;
};

/// Minimises survival_ce from zero weights. With a single label class the
/// constant model at the empirical frequency is returned with a warning.
[[nodiscard]] SurvivalFit fit_survival(SeqSpan seqs, const FeatureMap& features, const SurvivalFitOptions& opts);

/// j_awsm + a_surv * survival_ce + a_k * mark_ce at (theta, surv.weights()).
/// Gradient is [d/d theta; d/d weights].
[[nodiscard]] ObjectiveReport combined_loss(const ProcessFamily& family, const Params& theta,
                                            const SurvivalModel& surv, SeqSpan seqs, const WeightSpec& w_t,
                                            const WeightSpec* w_s, double a_surv, double a_k);

/// F_n = 1 - exp(-Lambda_n(T)) of a temporal family.
[[nodiscard]] double exact_continuation(const ProcessFamily& family, const Params& theta, const PointSequence& seq,
                                        std::size_t n);
[[nodiscard]] ContinuationFn exact_continuation_fn(FamilyPtr family, Params theta);

/// lambda_hat = G lam / (G - 1 + (1 - G(T)) / F) with G = exp(-Lambda_n) of
/// the surrogate. Throws CorrectionInvalidError when the result is not a
/// finite positive number (denominator <= 0 for a positive surrogate).
[[nodiscard]] double corrected_intensity(const ProcessFamily& surrogate, const Params& theta, double f_hat,
                                         const PointSequence& seq, std::size_t n, double t);
[[nodiscard]] double corrected_intensity(const ProcessFamily& surrogate, const Params& theta,
                                         const ContinuationFn& surv, const PointSequence& seq, std::size_t n,
                                         double t);

struct CorrectedLoglik {
    double ll_t = 0.0;             // mean over finite sequences
    std::optional<double> ll_s;    // spatio-temporal families only
    std::vector<double> per_seq_t;
    std::vector<std::size_t> flagged; // sequences with non-finite terms
};

/// ll_T = sum_n [log lam - Lambda_n(t_n) - log(1 - G_n(T)) + log F_n] + log(1 - F_{N+1}),
/// ll_S = sum_n [log lambda(t_n, s_n) - log int_S lambda(t_n, s) ds] with a
/// quad_nodes^2 tensor rule over S.
[[nodiscard]] CorrectedLoglik corrected_loglik(const ProcessFamily& surrogate, const Params& theta,
                                               const ContinuationFn& surv, SeqSpan seqs, int quad_nodes);

/// Unnormalised Janossy density j_N of a sequence with N = seq.size() points.
using JanossyFn = std::function<double(const PointSequence& seq)>;

struct CnEstimate {
    std::size_t n = 0;
    double c = 0.0;
    double se = 0.0;
    double integral = 0.0;
    double integral_se = 0.0;
    double frequency = 0.0;
};

/// c_N = int_{V^N} j_N / (N! freq(N)) for N = 0..n_max. The integral is a
/// stratified Monte Carlo estimate (strata on the first coordinate).
/// Throws NumericError when some N has zero empirical frequency.
[[nodiscard]] std::vector<CnEstimate> estimate_cN(const JanossyFn& j, const ObservationDomain& domain, SeqSpan seqs,
                                                  std::size_t n_max, std::size_t mc_samples, std::uint64_t seed);

} // namespace wsm
