#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "wsm/errors.hpp"
#include "wsm/optimize.hpp"

using namespace wsm;

TEST(Optimize, AdamQuadratic) {
    const Objective f = [](const Eigen::VectorXd& x) {
        ObjectiveReport r;
        r.value = 0.5 * (x(0) - 3.0) * (x(0) - 3.0);
        r.grad = Eigen::VectorXd::Constant(1, x(0) - 3.0);
        return r;
    };
    AdamConfig cfg;
    cfg.iters = 500;
    const AdamResult res = adam_minimize(f, Eigen::VectorXd::Zero(1), cfg);
    EXPECT_NEAR(res.theta(0), 3.0, 1e-6);
    const AdamResult again = adam_minimize(f, Eigen::VectorXd::Zero(1), cfg);
    EXPECT_EQ(res.trace, again.trace);
}

TEST(Optimize, AdamProjectsAndAborts) {
    const Objective f = [](const Eigen::VectorXd& x) {
        ObjectiveReport r;
        r.value = x(0) < 0.5 ? std::log(x(0) - 0.4) : x(0);
        r.grad = Eigen::VectorXd::Constant(1, x(0) < 0.5 ? 1.0 / (x(0) - 0.4) : 1.0);
        return r;
    };
    AdamConfig cfg;
    cfg.iters = 200;
    cfg.lower = Eigen::VectorXd::Constant(1, 0.45);
    const AdamResult res = adam_minimize(f, Eigen::VectorXd::Constant(1, 2.0), cfg);
    EXPECT_GE(res.theta(0), 0.45);
    cfg.lower.resize(0);
    const AdamResult bad = adam_minimize(f, Eigen::VectorXd::Constant(1, 2.0), cfg);
    EXPECT_TRUE(bad.aborted);
    EXPECT_TRUE(std::isfinite(bad.trace.back()));
    EXPECT_THROW((void)adam_minimize(f, Eigen::VectorXd::Constant(1, 0.3), cfg), NumericError);
}

TEST(Optimize, SolveQuadratic) {
    EXPECT_NEAR(solve_quadratic(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Constant(1, 4.0))(0), 2.0,
                1e-15);
    const Eigen::VectorXd g = Eigen::VectorXd::LinSpaced(3, 1.0, 3.0);
    EXPECT_TRUE(solve_quadratic(Eigen::MatrixXd::Identity(3, 3), g).isApprox(g));
    std::mt19937_64 gen(1);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd a(5, 5);
    for (Eigen::Index i = 0; i < 25; ++i) {
        a(i) = n01(gen);
    }
    const Eigen::MatrixXd spd = a * a.transpose() + Eigen::MatrixXd::Identity(5, 5);
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(5);
    EXPECT_LT((solve_quadratic(spd, b) - spd.inverse() * b).norm(), 1e-10);
    Eigen::MatrixXd sing = Eigen::MatrixXd::Ones(2, 2);
    try {
        (void)solve_quadratic(sing, Eigen::VectorXd::Ones(2));
        FAIL();
    } catch (const RankDeficiencyError& e) {
        EXPECT_LT(std::abs(e.min_eigenvalue()), 1e-12);
    }
}

TEST(Optimize, GradCheckDetectsFaults) {
    const Objective lin = [](const Eigen::VectorXd& x) {
        ObjectiveReport r;
        r.value = 2.0 * x(0) - x(1);
        r.grad = Eigen::Vector2d(2.0, -1.0);
        return r;
    };
    EXPECT_LT(grad_check(lin, Eigen::Vector2d(0.3, 0.7)).rel_error, 1e-10);
    const Objective bad = [](const Eigen::VectorXd& x) {
        ObjectiveReport r;
        r.value = x.squaredNorm();
        r.grad = 1.1 * 2.0 * x;
        return r;
    };
    EXPECT_NEAR(grad_check(bad, Eigen::Vector2d(1.0, 0.5)).rel_error, 0.1, 1e-4);
}
