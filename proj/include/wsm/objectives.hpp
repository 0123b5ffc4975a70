#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wsm/models.hpp"
#include "wsm/report.hpp"
#include "wsm/weights.hpp"

namespace wsm {

using SeqSpan = std::span<const PointSequence>;

/// Negative mean log-likelihood with the compensator integrated by
/// Gauss-Legendre (quad_nodes per inter-event interval). The compensator
/// setup is done once, so repeated evaluations are cheap.
class MleObjective {
public:
    MleObjective(FamilyPtr family, SeqSpan seqs, int quad_nodes);
    [[nodiscard]] ObjectiveReport operator()(const Params& theta) const;

private:
    FamilyPtr family_;
    SeqSpan seqs_;
    std::unique_ptr<Compensator> compensator_;
};

[[nodiscard]] ObjectiveReport nll_mle(const FamilyPtr& family, const Params& theta, SeqSpan seqs, int quad_nodes);

/// Unweighted Janossy score matching: mean of sum_n 0.5 |psi_n|^2 + div psi_n.
[[nodiscard]] ObjectiveReport j_sm_implicit(const ProcessFamily& family, const Params& theta, SeqSpan seqs);

/// Implicit WSM: mean of sum_n (0.5 |psi|^2 + div psi) h(x_n) + psi . grad h(x_n).
/// `w` must have joint scope.
[[nodiscard]] ObjectiveReport j_wsm_implicit(const ProcessFamily& family, const Params& theta, SeqSpan seqs,
                                             const WeightSpec& w);

/// Explicit WSM: mean of sum_n 0.5 |psi*_n - psi_n|^2 h(x_n), psi* from the oracle.
[[nodiscard]] ObjectiveReport l_wsm_explicit(const ProcessFamily& family, const Params& theta, SeqSpan seqs,
                                             const WeightSpec& w, const ProcessFamily& oracle,
                                             const Params& oracle_theta);

/// Implicit AWSM: temporal part with w_t, plus the spatial part with w_s
/// when given. Marks do not enter; see mark_ce.
[[nodiscard]] ObjectiveReport j_awsm_implicit(const ProcessFamily& family, const Params& theta, SeqSpan seqs,
                                              const WeightSpec& w_t, const WeightSpec* w_s = nullptr);

/// Unweighted autoregressive score matching (unit weights), plus the mark
/// cross-entropy when `marks` is set.
[[nodiscard]] ObjectiveReport j_asm_implicit(const ProcessFamily& family, const Params& theta, SeqSpan seqs,
                                             bool marks);

/// Explicit AWSM: mean of sum_n 0.5 (psi*_T - psi_T)^2 h_T + 0.5 |psi*_S - psi_S|^2 h_S.
[[nodiscard]] ObjectiveReport l_awsm_explicit(const ProcessFamily& family, const Params& theta, SeqSpan seqs,
                                              const WeightSpec& w_t, const WeightSpec* w_s,
                                              const ProcessFamily& oracle, const Params& oracle_theta);

/// Mark cross-entropy: -mean sum_n log f_K(k_n | H_{n-1}, t_n).
[[nodiscard]] ObjectiveReport mark_ce(const ProcessFamily& family, const Params& theta, SeqSpan seqs);

/// Per-event pieces of an exponential family in the score sense:
///   log j = theta^T T(X) + b(X) + (terms free of the event coordinates),
/// so psi_n = S_n theta + grad b and div psi_n = L_n^T theta + lap b, with
/// S_n = d T / d x_n (d x p) and L_n the Laplacians of the components of T.
struct ExpFamilyTerms {
    ScoreJacobian s;
    Params lap_t;
    PointVec grad_b;
    double lap_b = 0.0;
};

class ExponentialFamilyStats {
public:
    virtual ~ExponentialFamilyStats() = default;
    [[nodiscard]] virtual std::size_t dim() const = 0;
    [[nodiscard]] virtual ExpFamilyTerms terms(const PointSequence& seq, std::size_t n) const = 0;
};

/// T(x) = sin x1 + cos x2 for PoissonExpSin2D.
class ExpSin2DStats final : public ExponentialFamilyStats {
public:
    std::size_t dim() const override { return 1; }
    ExpFamilyTerms terms(const PointSequence& seq, std::size_t n) const override;
};

/// T(t) = log t, b(t) = -log t for PoissonWeibull1D.
class WeibullStats final : public ExponentialFamilyStats {
public:
    std::size_t dim() const override { return 1; }
    ExpFamilyTerms terms(const PointSequence& seq, std::size_t n) const override;
};

/// The implicit WSM objective of an exponential family is
///   0.5 theta^T Gamma theta - g^T theta + const.
struct QuadraticFit {
    Eigen::MatrixXd gamma;
    Eigen::VectorXd g;
    Eigen::VectorXd theta; // Gamma^{-1} g
};

/// Assembles Gamma = mean sum_n h S^T S and
/// g = -mean sum_n [h S^T grad b + h L + S^T grad h], then solves.
/// Throws RankDeficiencyError when Gamma is singular.
[[nodiscard]] QuadraticFit exp_family_fit(SeqSpan seqs, const ObservationDomain& domain, const WeightSpec& w,
                                          const ExponentialFamilyStats& stats);

/// Monotone map g from a bounded interval onto the real line, described by
/// its inverse: phi = (g^{-1})' and the first two derivatives of phi.
struct MonotoneTransform {
    std::string name;
    std::function<double(double)> forward;  // g
    std::function<double(double)> inverse;  // g^{-1}
    std::function<double(double)> phi;      // (g^{-1})'
    std::function<double(double)> dphi;     // phi'
    std::function<double(double)> ddphi;   // phi''

    /// g(x) = log((x - lo) / (hi - x)).
    static MonotoneTransform logit(double lo, double hi);
};

struct ChangeOfVariableReport {
    std::vector<double> j_sm_transformed; // per theta
    std::vector<double> j_wsm_raw;        // per theta
    double max_discrepancy = 0.0;         // max |diff - mean(diff)|
};

/// Score matching on g(X) against WSM on X with h(x) = phi(g(x))^2, on the
/// same samples of a one-dimensional Janossy family.
[[nodiscard]] ChangeOfVariableReport change_of_variable_check(const ProcessFamily& family, SeqSpan seqs,
                                                              const MonotoneTransform& g,
                                                              const std::vector<Params>& theta_grid);

/// Weight h(x) = phi(g(x))^2 with gradient 2 phi'(g(x)) on a 1-D domain.
[[nodiscard]] WeightSpec transform_weight(const MonotoneTransform& g, const ObservationDomain& domain);

} // namespace wsm
