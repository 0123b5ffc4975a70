#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "wsm/errors.hpp"
#include "wsm/objectives.hpp"
#include "wsm/optimize.hpp"
#include "wsm/simulate.hpp"

using namespace wsm;

namespace {

std::vector<PointSequence> sample(const FamilyPtr& f, const Params& theta, std::size_t m, std::uint64_t seed) {
    SimConfig cfg{f, theta, m, seed, 100000};
    return simulate(cfg);
}

Objective wrap(std::function<ObjectiveReport(const Params&)> fn) {
    return [fn](const Eigen::VectorXd& v) { return fn(to_params(v)); };
}

void expect_grad_ok(const Objective& obj, const Eigen::VectorXd& theta) {
    const GradCheck gc = grad_check(obj, theta);
    EXPECT_LT(gc.rel_error, 1e-5) << "analytic " << gc.analytic.transpose() << " numeric " << gc.numeric.transpose();
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (const double x : xs) {
        v(i++) = x;
    }
    return v;
}

} // namespace

TEST(Objectives, WeibullSmClosedForm) {
    const auto dom = ObservationDomain::temporal(2.0);
    const FamilyPtr f = std::make_shared<PoissonWeibull1D>(dom);
    const auto data = sample(f, to_params(vec({2.0})), 200, 11);
    double s = 0.0;
    for (const auto& seq : data) {
        for (const double t : seq.times) {
            s += 1.0 / (t * t);
        }
    }
    s /= static_cast<double>(data.size());
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.5, 4.0);
    for (int i = 0; i < 10; ++i) {
        const double th = u(gen);
        const double v = j_sm_implicit(*f, to_params(vec({th})), data).value;
        EXPECT_NEAR(v, 0.5 * (th - 1.0) * (th - 3.0) * s, 1e-10 * std::max(1.0, std::abs(v)));
    }
}

TEST(Objectives, GradientsMatchFiniteDifferences) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.7, 1.3);
    const WeightSpec wt(WeightKind::DistanceToBoundary, WeightScope::Temporal);
    const WeightSpec ws(WeightKind::DistanceToBoundary, WeightScope::Spatial);
    const WeightSpec wj(WeightKind::DistanceToBoundary, WeightScope::Joint);
    const WeightSpec wn(WeightKind::NaturalProduct, WeightScope::Temporal);

    const FamilyPtr weib = std::make_shared<PoissonWeibull1D>(ObservationDomain::temporal(2.0));
    const auto dw = sample(weib, to_params(vec({2.0})), 20, 1);
    const FamilyPtr es = std::make_shared<PoissonExpSin2D>(ObservationDomain::spatial({-3, 3, -3, 3}));
    const auto de = sample(es, to_params(vec({1.0})), 5, 2);
    const FamilyPtr hk = std::make_shared<MultivariateExpHawkes>(ObservationDomain::temporal(5.0, 2), 5.0);
    const Eigen::VectorXd hk_true = vec({1, 1, 1.6, 0.2, 1, 1});
    const auto dh = sample(hk, to_params(hk_true), 10, 3);
    const FamilyPtr st = std::make_shared<GaussianSTHawkes>(ObservationDomain::spatio_temporal(2.0, {-2, 2, -2, 2}));
    const Eigen::VectorXd st_true = vec({0.5, 2.0, 1.0});
    const auto ds = sample(st, to_params(st_true), 10, 4);
    const FamilyPtr lg = std::make_shared<LogisticIntensity>(ObservationDomain::temporal(10.0));
    const auto dl = sample(lg, to_params(vec({2.0, 0.1})), 10, 5);

    for (int rep = 0; rep < 20; ++rep) {
        const double a = u(gen);
        expect_grad_ok(wrap([&](const Params& p) { return j_wsm_implicit(*weib, p, dw, wj); }), vec({2.0 * a}));
        expect_grad_ok(wrap([&](const Params& p) { return nll_mle(weib, p, dw, 30); }), vec({2.0 * a}));
        expect_grad_ok(wrap([&](const Params& p) { return j_wsm_implicit(*es, p, de, wj); }), vec({a}));
        expect_grad_ok(wrap([&](const Params& p) { return l_wsm_explicit(*es, p, de, wj, *es, to_params(vec({1.0}))); }),
                       vec({a}));
        Eigen::VectorXd th = hk_true;
        for (Eigen::Index i = 0; i < th.size(); ++i) {
            th(i) *= u(gen);
        }
        expect_grad_ok(wrap([&](const Params& p) { return j_awsm_implicit(*hk, p, dh, wt); }), th);
        expect_grad_ok(wrap([&](const Params& p) { return j_awsm_implicit(*hk, p, dh, wn); }), th);
        expect_grad_ok(wrap([&](const Params& p) { return j_asm_implicit(*hk, p, dh, true); }), th);
        expect_grad_ok(wrap([&](const Params& p) { return mark_ce(*hk, p, dh); }), th);
        expect_grad_ok(wrap([&](const Params& p) { return nll_mle(hk, p, dh, 20); }), th);
        expect_grad_ok(
            wrap([&](const Params& p) { return l_awsm_explicit(*hk, p, dh, wt, nullptr, *hk, to_params(hk_true)); }),
            th);
        Eigen::VectorXd ts = st_true;
        for (Eigen::Index i = 0; i < ts.size(); ++i) {
            ts(i) *= u(gen);
        }
        expect_grad_ok(wrap([&](const Params& p) { return j_awsm_implicit(*st, p, ds, wt, &ws); }), ts);
        expect_grad_ok(wrap([&](const Params& p) { return nll_mle(st, p, ds, 20); }), ts);
        expect_grad_ok(
            wrap([&](const Params& p) { return l_awsm_explicit(*st, p, ds, wt, &ws, *st, to_params(st_true)); }), ts);
        expect_grad_ok(wrap([&](const Params& p) { return j_awsm_implicit(*lg, p, dl, wt); }), vec({2.0 * a, 0.1 * a}));
        expect_grad_ok(wrap([&](const Params& p) { return nll_mle(lg, p, dl, 20); }), vec({2.0 * a, 0.1 * a}));
    }
}

TEST(Objectives, ExplicitZeroAtOracleAndNonNegative) {
    const FamilyPtr hk = std::make_shared<MultivariateExpHawkes>(ObservationDomain::temporal(5.0, 2), 5.0);
    const Params truth = to_params(vec({1, 1, 1.6, 0.2, 1, 1}));
    const auto dh = sample(hk, truth, 10, 3);
    const WeightSpec wt(WeightKind::DistanceToBoundary, WeightScope::Temporal);
    EXPECT_EQ(l_awsm_explicit(*hk, truth, dh, wt, nullptr, *hk, truth).value, 0.0);
    EXPECT_GE(l_awsm_explicit(*hk, to_params(vec({2, 1, 1, 1, 1, 1})), dh, wt, nullptr, *hk, truth).value, 0.0);
}

TEST(Objectives, AsmEqualsAwsmWithUnitWeight) {
    const FamilyPtr lg = std::make_shared<LogisticIntensity>(ObservationDomain::temporal(10.0));
    const Params th = to_params(vec({2.0, 0.1}));
    const auto d = sample(lg, th, 10, 5);
    EXPECT_DOUBLE_EQ(j_asm_implicit(*lg, th, d, false).value,
                     j_awsm_implicit(*lg, th, d, WeightSpec::unit(WeightScope::Temporal)).value);
}

TEST(Objectives, HomogeneousPoissonMleByHand) {
    const FamilyPtr f = std::make_shared<HomogeneousPoisson>(ObservationDomain::temporal(3.0));
    std::vector<PointSequence> d{{{0.5, 1.0}, {}, {}, false}, {{}, {}, {}, false}};
    const double lam = 1.3;
    const ObjectiveReport r = nll_mle(f, to_params(vec({lam})), d, 10);
    EXPECT_NEAR(r.per_seq[0], 3.0 * lam - 2.0 * std::log(lam), 1e-12);
    EXPECT_NEAR(r.per_seq[1], 3.0 * lam, 1e-12);
    EXPECT_NEAR(r.value, 0.5 * (r.per_seq[0] + r.per_seq[1]), 1e-14);
}

TEST(Objectives, MleRejectsNonPositiveIntensity) {
    const FamilyPtr f = std::make_shared<ScoreEquivalentConstant>(ObservationDomain::temporal(0.5));
    std::vector<PointSequence> d{{{0.2}, {}, {}, false}};
    EXPECT_THROW((void)nll_mle(f, to_params(vec({1.0, 2.0})), d, 10), NumericError);
}

TEST(Objectives, MarkCeSymmetric) {
    MultivariateExpHawkes f(ObservationDomain::temporal(5.0, 2), 5.0);
    std::vector<PointSequence> d{{{0.5}, {}, {1}, false}};
    EXPECT_NEAR(mark_ce(f, to_params(vec({1, 1, 1, 1, 1, 1})), d).value, std::log(2.0), 1e-14);
    HomogeneousPoisson g(ObservationDomain::temporal(5.0));
    std::vector<PointSequence> e{{{0.5, 1.5}, {}, {}, false}};
    EXPECT_EQ(mark_ce(g, to_params(vec({1.0})), e).value, 0.0);
}

TEST(Objectives, ScopeErrors) {
    HomogeneousPoisson f(ObservationDomain::temporal(5.0));
    std::vector<PointSequence> d{{{0.5}, {}, {}, false}};
    const Params th = to_params(vec({1.0}));
    EXPECT_THROW((void)j_wsm_implicit(f, th, d, WeightSpec(WeightKind::DistanceToBoundary, WeightScope::Temporal)),
                 ConfigError);
    EXPECT_THROW((void)j_awsm_implicit(f, th, d, WeightSpec(WeightKind::DistanceToBoundary, WeightScope::Joint)),
                 ConfigError);
}

TEST(Objectives, ExpFamilyQuadraticMatchesObjective) {
    const FamilyPtr es = std::make_shared<PoissonExpSin2D>(ObservationDomain::spatial({-3, 3, -3, 3}));
    const auto d = sample(es, to_params(vec({1.0})), 30, 9);
    const WeightSpec w(WeightKind::DistanceToBoundary, WeightScope::Joint);
    const QuadraticFit fit = exp_family_fit(d, es->domain(), w, ExpSin2DStats());
    const double c = j_wsm_implicit(*es, to_params(vec({0.0})), d, w).value;
    for (const double th : {-1.0, 0.3, 1.0, 2.5, 4.0}) {
        const double q = 0.5 * th * fit.gamma(0, 0) * th - fit.g(0) * th + c;
        EXPECT_NEAR(j_wsm_implicit(*es, to_params(vec({th})), d, w).value, q, 1e-10 * std::max(1.0, std::abs(q)));
    }
    const FamilyPtr wb = std::make_shared<PoissonWeibull1D>(ObservationDomain::temporal(2.0));
    const auto dw = sample(wb, to_params(vec({2.0})), 100, 9);
    const WeightSpec wn(WeightKind::NaturalProduct, WeightScope::Joint);
    const QuadraticFit fw = exp_family_fit(dw, wb->domain(), wn, WeibullStats());
    // Weibull: log j = (rho - 1) log t + ..., so theta_T = rho - 1 up to the b term.
    const double cw = j_wsm_implicit(*wb, to_params(vec({1.0})), dw, wn).value;
    for (const double rho : {1.5, 2.0, 3.0}) {
        const double th = rho;
        const double q = 0.5 * th * fw.gamma(0, 0) * th - fw.g(0) * th;
        const double q1 = 0.5 * fw.gamma(0, 0) - fw.g(0);
        EXPECT_NEAR(j_wsm_implicit(*wb, to_params(vec({rho})), dw, wn).value - cw, q - q1, 1e-10);
    }
}

TEST(Objectives, ChangeOfVariableIdentity) {
    const FamilyPtr f = std::make_shared<PoissonWeibull1D>(ObservationDomain::temporal(1.0));
    const auto d = sample(f, to_params(vec({2.0})), 200, 21);
    const MonotoneTransform g = MonotoneTransform::logit(0.0, 1.0);
    std::vector<Params> grid;
    for (const double th : {1.2, 1.6, 2.0, 2.4, 2.8}) {
        grid.push_back(to_params(vec({th})));
    }
    EXPECT_LT(change_of_variable_check(*f, d, g, grid).max_discrepancy, 1e-10);
    EXPECT_EQ(change_of_variable_check(*f, d, g, {grid[0]}).max_discrepancy, 0.0);
    const WeightSpec h = transform_weight(g, f->domain());
    PointVec x(1);
    x << 1e-9;
    EXPECT_LT(h.eval_joint(x, f->domain()).value, 1e-15);
    MonotoneTransform bad = g;
    bad.forward = [](double x) { return std::sin(20.0 * x); };
    EXPECT_THROW((void)change_of_variable_check(*f, d, bad, grid), ConfigError);
}
