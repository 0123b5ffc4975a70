#pragma once

#include <vector>

#include <Eigen/Core>

#include "wsm/objectives.hpp"

namespace wsm {

struct MaeReport {
    Eigen::VectorXd mean; // per parameter, over runs
    Eigen::VectorXd std;  // sample standard deviation (0 for one run)
};

/// Per-parameter mean and standard deviation of |theta_hat - theta_star|.
[[nodiscard]] MaeReport mae_report(const std::vector<Eigen::VectorXd>& runs, const Eigen::VectorXd& truth);

/// Pr(K > lambda) for the Kolmogorov distribution.
[[nodiscard]] double kolmogorov_sf(double lambda);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

/// One-sample KS test of `u` against Uniform(0, 1), with the Stephens
/// small-sample correction of the statistic.
[[nodiscard]] KsResult ks_uniform(std::vector<double> u);

/// Time-rescaling residuals of a temporal family on a horizon-censored
/// sample: u_n = (1 - exp(-Lambda_n(t_n))) / (1 - exp(-Lambda_n(T))), which
/// is Uniform(0, 1) under the model given that event n exists.
[[nodiscard]] std::vector<double> time_rescaling_residuals(const ProcessFamily& f, const Params& theta, SeqSpan seqs);

/// Randomised probability integral transform of the marks:
/// u = F(k - 1) + V f(k), V ~ U(0, 1) from `seed`.
[[nodiscard]] std::vector<double> mark_residuals(const ProcessFamily& f, const Params& theta, SeqSpan seqs,
                                                 std::uint64_t seed);

/// Probability integral transforms of the two coordinates of a
/// PoissonExpSin2D sample under its separable marginals.
[[nodiscard]] std::vector<double> expsin2d_residuals(const PoissonExpSin2D& f, const Params& theta, SeqSpan seqs);

/// Conditional PIT of the first spatial coordinate of GaussianSTHawkes events
/// given their time and history.
[[nodiscard]] std::vector<double> st_location_residuals(const GaussianSTHawkes& f, const Params& theta, SeqSpan seqs);

} // namespace wsm
