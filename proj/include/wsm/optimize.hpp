#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "wsm/report.hpp"

namespace wsm {

struct AdamConfig {
    double lr = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int iters = 500;
    Eigen::VectorXd lower; // empty: unbounded
    Eigen::VectorXd upper; // empty: unbounded
};

struct AdamResult {
    Eigen::VectorXd theta;
    std::vector<double> trace; // objective value per iteration
    bool aborted = false;
    std::string diagnostic;
};

/// Projected Adam. theta0 is projected onto the box first; a non-finite
/// objective at the start throws NumericError, later it stops the run and
/// returns the last finite iterate with `aborted` set.
[[nodiscard]] AdamResult adam_minimize(const Objective& f, const Eigen::VectorXd& theta0, const AdamConfig& cfg);

/// Clamps theta into [lower, upper] (either bound may be empty).
[[nodiscard]] Eigen::VectorXd project_box(const Eigen::VectorXd& theta, const Eigen::VectorXd& lower,
                                          const Eigen::VectorXd& upper);

/// Solves Gamma x = g for symmetric positive definite Gamma by Cholesky.
/// Throws RankDeficiencyError when the smallest eigenvalue is below
/// `rel_tol` times the largest, NumericError on asymmetric or non-finite input.
[[nodiscard]] Eigen::VectorXd solve_quadratic(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& g,
                                              double rel_tol = 1e-12);

struct GradCheck {
    Eigen::VectorXd analytic;
    Eigen::VectorXd numeric;
    double rel_error = 0.0; // max |a - fd| / max(|fd|_inf, 1e-12)
};

/// Central differences with step 1e-6 (1 + |theta_i|).
[[nodiscard]] GradCheck grad_check(const Objective& f, const Eigen::VectorXd& theta);

} // namespace wsm
