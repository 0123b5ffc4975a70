#include "wsm/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "wsm/errors.hpp"

namespace wsm {

Eigen::VectorXd project_box(const Eigen::VectorXd& theta, const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper) {
    Eigen::VectorXd out = theta;
    if (lower.size() != 0) {
        if (lower.size() != theta.size()) {
            throw ConfigError("lower bound has the wrong size");
        }
        out = out.cwiseMax(lower);
    }
    if (upper.size() != 0) {
        if (upper.size() != theta.size()) {
            throw ConfigError("upper bound has the wrong size");
        }
        out = out.cwiseMin(upper);
    }
    return out;
}

AdamResult adam_minimize(const Objective& f, const Eigen::VectorXd& theta0, const AdamConfig& cfg) {
    if (!(cfg.lr > 0.0) || cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 || cfg.beta2 >= 1.0 ||
        !(cfg.eps > 0.0) || cfg.iters < 0) {
        throw ConfigError("invalid Adam configuration");
    }
    AdamResult res;
    res.theta = project_box(theta0, cfg.lower, cfg.upper);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(res.theta.size());
    Eigen::VectorXd v = m;
    double b1t = 1.0;
    double b2t = 1.0;
    Eigen::VectorXd theta = res.theta;
    for (int it = 0; it < cfg.iters; ++it) {
        ObjectiveReport r;
        try {
            r = f(theta);
        } catch (const NumericError& e) {
            if (it == 0) {
                throw;
            }
            res.aborted = true;
            res.diagnostic = "iteration " + std::to_string(it) + ": " + e.what();
            return res;
        }
        if (!std::isfinite(r.value) || !r.grad.allFinite()) {
            if (it == 0) {
                throw NumericError("objective is not finite at the initial point");
            }
            res.aborted = true;
            res.diagnostic = "non-finite objective at iteration " + std::to_string(it);
            return res;
        }
        res.theta = theta;
        res.trace.push_back(r.value);
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * r.grad;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * r.grad.cwiseAbs2();
        b1t *= cfg.beta1;
        b2t *= cfg.beta2;
        const Eigen::VectorXd mh = m / (1.0 - b1t);
        const Eigen::VectorXd vh = v / (1.0 - b2t);
        theta -= cfg.lr * (mh.array() / (vh.array().sqrt() + cfg.eps)).matrix();
        theta = project_box(theta, cfg.lower, cfg.upper);
    }
    // The final step has not been evaluated; keep it only if it is finite.
    if (cfg.iters > 0) {
        try {
            const ObjectiveReport r = f(theta);
            if (std::isfinite(r.value)) {
                res.theta = theta;
                res.trace.push_back(r.value);
            }
        } catch (const NumericError&) {
        }
    }
    return res;
}

Eigen::VectorXd solve_quadratic(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& g, double rel_tol) {
    if (gamma.rows() != gamma.cols() || gamma.rows() != g.size()) {
        throw ConfigError("quadratic system has inconsistent sizes");
    }
    if (!gamma.allFinite() || !g.allFinite()) {
        throw NumericError("quadratic system has non-finite entries");
    }
    const double scale = std::max(gamma.cwiseAbs().maxCoeff(), 1e-300);
    if ((gamma - gamma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw NumericError("quadratic system matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gamma, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(hi > 0.0) || lo <= rel_tol * hi) {
        throw RankDeficiencyError("quadratic system is singular or indefinite", cond, lo);
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(gamma);
    if (llt.info() != Eigen::Success) {
        throw RankDeficiencyError("Cholesky factorisation failed", cond, lo);
    }
    Eigen::VectorXd x = llt.solve(g);
    const double res = (gamma * x - g).norm();
    if (!x.allFinite() || res > 1e-8 * (g.norm() + scale * x.norm())) {
        throw NumericError("quadratic solve residual too large");
    }
    return x;
}

GradCheck grad_check(const Objective& f, const Eigen::VectorXd& theta) {
    GradCheck out;
    out.analytic = f(theta).grad;
    out.numeric.resize(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double h = 1e-6 * (1.0 + std::abs(theta(i)));
        Eigen::VectorXd tp = theta;
        Eigen::VectorXd tm = theta;
        tp(i) += h;
        tm(i) -= h;
        out.numeric(i) = (f(tp).value - f(tm).value) / (2.0 * h);
    }
    const double denom = std::max(out.numeric.cwiseAbs().maxCoeff(), 1e-12);
    out.rel_error = (out.analytic - out.numeric).cwiseAbs().maxCoeff() / denom;
    return out;
}

} // namespace wsm
