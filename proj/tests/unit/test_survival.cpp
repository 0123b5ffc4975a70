#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "wsm/errors.hpp"
#include "wsm/optimize.hpp"
#include "wsm/rng.hpp"
#include "wsm/simulate.hpp"
#include "wsm/survival.hpp"

using namespace wsm;

namespace {

Params p2(double a, double b) {
    Params p(2);
    p << a, b;
    return p;
}

Params p1(double a) {
    Params p(1);
    p << a;
    return p;
}

} // namespace

TEST(Survival, CorrectionIsIdentityForNormalisedSurrogate) {
    const auto dom = ObservationDomain::temporal(3.0);
    const LogisticIntensity f(dom);
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        const Params theta = p2(0.5 + 2.0 * u(gen), 0.01 + u(gen));
        PointSequence seq;
        double t = 0.0;
        const int n = rep % 4;
        for (int i = 0; i < n; ++i) {
            t += 0.5 * u(gen);
            seq.times.push_back(t);
        }
        const double g_end = std::exp(-f.integrated_intensity(theta, seq, seq.size(), 3.0));
        const double f_hat = 1.0 - g_end;
        const double at = t + (3.0 - t) * (0.01 + 0.98 * u(gen));
        const double lam = f.temporal_jet(theta, seq, seq.size(), at, false).lam;
        const double hat = corrected_intensity(f, theta, f_hat, seq, seq.size(), at);
        EXPECT_NEAR(hat, lam, 1e-10 * lam);
    }
}

TEST(Survival, RecoversTrueIntensityFromScoreEquivalentSurrogate) {
    // lambda* = 1 on T = 0.5 keeps 1 - alpha e^{lambda* u} away from zero for alpha = 0.5.
    const double lambda_star = 1.0;
    const double t_max = 0.5;
    const auto dom = ObservationDomain::temporal(t_max);
    const ScoreEquivalentConstant fake(dom);
    const FamilyPtr truth = std::make_shared<HomogeneousPoisson>(dom);
    const ContinuationFn exact = exact_continuation_fn(truth, p1(lambda_star));
    const PointSequence seq{{0.1, 0.2}, {}, {}, false};
    for (const double alpha : {-0.9, -0.5, 0.5, 2.0}) {
        double worst = 0.0;
        for (int i = 1; i <= 50; ++i) {
            const double t = 0.2 + (t_max - 0.2) * i / 51.0;
            const double hat = corrected_intensity(fake, p2(lambda_star, alpha), exact, seq, 2, t);
            worst = std::max(worst, std::abs(hat - lambda_star) / lambda_star);
        }
        EXPECT_LT(worst, 1e-8) << "alpha " << alpha;
    }
}

TEST(Survival, CorrectionWithTrueSurrogateAndTrueContinuation) {
    const auto dom = ObservationDomain::temporal(1.0);
    const FamilyPtr truth = std::make_shared<HomogeneousPoisson>(dom);
    const PointSequence seq{{0.25}, {}, {}, false};
    const double hat = corrected_intensity(*truth, p1(2.0), exact_continuation_fn(truth, p1(2.0)), seq, 1, 0.6);
    EXPECT_NEAR(hat, 2.0, 1e-12);
}

TEST(Survival, InvalidCorrectionReportsInputs) {
    const auto dom = ObservationDomain::temporal(1.0);
    const HomogeneousPoisson f(dom);
    const PointSequence seq;
    const double g_end = std::exp(-3.0);
    EXPECT_GT(corrected_intensity(f, p1(3.0), 1.0 - 1e-12, seq, 0, 0.99), 0.0);
    // F above one drives G(t) - 1 + (1 - G(T)) / F below zero near T.
    try {
        (void)corrected_intensity(f, p1(3.0), 1.5, seq, 0, 0.99);
        FAIL() << "expected CorrectionInvalidError";
    } catch (const CorrectionInvalidError& e) {
        EXPECT_EQ(e.continuation(), 1.5);
        EXPECT_NEAR(e.survivor_at_horizon(), g_end, 1e-15);
    }
}

TEST(Survival, CorrectedLoglikMatchesPoissonClosedForm) {
    const double rate = 1.7;
    const double t_max = 4.0;
    const auto dom = ObservationDomain::temporal(t_max);
    const FamilyPtr f = std::make_shared<HomogeneousPoisson>(dom);
    const auto data = simulate(SimConfig{f, p1(rate), 100, 3, 100000});
    const CorrectedLoglik ll = corrected_loglik(*f, p1(rate), exact_continuation_fn(f, p1(rate)), data, 20);
    EXPECT_FALSE(ll.ll_s.has_value());
    EXPECT_TRUE(ll.flagged.empty());
    double expect = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double v = static_cast<double>(data[i].size()) * std::log(rate) - rate * t_max;
        EXPECT_NEAR(ll.per_seq_t[i], v, 1e-8);
        expect += v;
    }
    EXPECT_NEAR(ll.ll_t, expect / static_cast<double>(data.size()), 1e-8);
}

TEST(Survival, CorrectedLoglikOfTrueModelMatchesLikelihood) {
    const auto dom = ObservationDomain::temporal(10.0);
    const FamilyPtr f = std::make_shared<LogisticIntensity>(dom);
    const Params theta = p2(2.0, 0.3);
    const auto data = simulate(SimConfig{f, theta, 100, 8, 100000});
    const CorrectedLoglik ll = corrected_loglik(*f, theta, exact_continuation_fn(f, theta), data, 20);
    for (std::size_t i = 0; i < data.size(); ++i) {
        double v = 0.0;
        for (std::size_t n = 0; n < data[i].size(); ++n) {
            v += f->log_event_intensity(theta, data[i], n) -
                 f->integrated_intensity(theta, data[i], n, data[i].times[n]);
        }
        v -= f->integrated_intensity(theta, data[i], data[i].size(), 10.0);
        EXPECT_NEAR(ll.per_seq_t[i], v, 1e-8);
    }
}

TEST(Survival, SpatioTemporalLoglikHasSpatialPart) {
    const auto dom = ObservationDomain::spatio_temporal(1.0, {-1, 1, -1, 1});
    const FamilyPtr f = std::make_shared<GaussianSTHawkes>(dom);
    Params theta(3);
    theta << 0.5, 2.0, 1.0;
    const auto data = simulate(SimConfig{f, theta, 5, 2, 100000});
    const CorrectedLoglik ll = corrected_loglik(*f, theta, exact_continuation_fn(f, theta), data, 30);
    ASSERT_TRUE(ll.ll_s.has_value());
    EXPECT_TRUE(std::isfinite(*ll.ll_s));
}

TEST(Survival, CnEstimateOnPoisson) {
    const auto dom = ObservationDomain::temporal(1.0);
    const FamilyPtr f = std::make_shared<HomogeneousPoisson>(dom);
    const auto data = simulate(SimConfig{f, p1(1.0), 20000, 5, 100000});
    const JanossyFn j = [](const PointSequence&) { return std::exp(-1.0); };
    const auto est = estimate_cN(j, dom, data, 3, 4000, 1);
    ASSERT_EQ(est.size(), 4U);
    EXPECT_NEAR(est[1].integral, std::exp(-1.0), 1e-12);
    for (const CnEstimate& e : est) {
        EXPECT_NEAR(e.c, 1.0, 3.0 * e.se) << "N=" << e.n;
    }
    const JanossyFn j2 = [](const PointSequence&) { return 2.0 * std::exp(-1.0); };
    for (const CnEstimate& e : estimate_cN(j2, dom, data, 2, 4000, 1)) {
        EXPECT_NEAR(e.c, 2.0, 3.0 * e.se) << "N=" << e.n;
    }
    EXPECT_THROW((void)estimate_cN(j, dom, data, 12, 100, 1), NumericError);
}

TEST(Survival, CnEstimateNonConstantJanossy) {
    // lambda(t) = 2t on (0, 1): j_N = e^{-1} prod 2 t_i, integral over V^N = e^{-1}.
    const auto dom = ObservationDomain::temporal(1.0);
    const FamilyPtr f = std::make_shared<PoissonWeibull1D>(dom);
    const auto data = simulate(SimConfig{f, p1(2.0), 20000, 6, 100000});
    const JanossyFn j = [](const PointSequence& s) {
        double v = std::exp(-1.0);
        for (const double t : s.times) {
            v *= 2.0 * t;
        }
        return v;
    };
    for (const CnEstimate& e : estimate_cN(j, dom, data, 3, 20000, 2)) {
        EXPECT_NEAR(e.integral, std::exp(-1.0), 4.0 * e.integral_se + 1e-12) << "N=" << e.n;
        EXPECT_NEAR(e.c, 1.0, 3.0 * e.se) << "N=" << e.n;
    }
}

TEST(Survival, CrossEntropyExamples) {
    const auto dom = ObservationDomain::spatial({0, 1, 0, 1});
    const FeatureMap fm = history_features(dom, 2.0);
    const SurvivalModel zero(fm, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fm.dim)));
    std::vector<PointSequence> data(3);
    data[0].locs = {{0.5, 0.5}};
    data[2].locs = {{0.1, 0.2}, {0.3, 0.4}};
    // F = 1/2 everywhere: 2 + 1 + 3 labels -> mean 2 log 2
    EXPECT_NEAR(survival_ce(zero, data).value, 2.0 * std::log(2.0), 1e-12);
    data[2].truncated = true;
    EXPECT_NEAR(survival_ce(zero, data).value, 5.0 / 3.0 * std::log(2.0), 1e-12);
    const ClassBalance b = class_balance(data);
    EXPECT_EQ(b.positive, 3U);
    EXPECT_EQ(b.negative, 2U);
    const ClassWeights cw = b.inverse_frequency();
    EXPECT_NEAR((cw.positive * 3 + cw.negative * 2) / 5.0, 1.0, 1e-12);
    EXPECT_NEAR(cw.negative / cw.positive, 1.5, 1e-12);
}

TEST(Survival, CrossEntropyGradient) {
    const auto dom = ObservationDomain::temporal(5.0, 2);
    const FamilyPtr f = std::make_shared<MultivariateExpHawkes>(dom, 5.0);
    Params theta(6);
    theta << 1, 1, 1.6, 0.2, 1, 1;
    const auto data = simulate(SimConfig{f, theta, 30, 4, 100000});
    const FeatureMap fm = history_features(dom, data);
    std::mt19937_64 gen(2);
    std::normal_distribution<double> nd(0.0, 0.5);
    Eigen::VectorXd w(static_cast<Eigen::Index>(fm.dim));
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        w(i) = nd(gen);
    }
    const SurvivalModel model(fm, w);
    const ClassWeights cw{0.7, 1.9};
    for (const ClassWeights* c : {static_cast<const ClassWeights*>(nullptr), &cw}) {
        const Objective obj = [&](const Eigen::VectorXd& v) { return survival_ce(model.with_weights(v), data, c); };
        EXPECT_LT(grad_check(obj, w).rel_error, 1e-5);
    }
}

TEST(Survival, CombinedLossGradientAndPerSequence) {
    const auto dom = ObservationDomain::temporal(10.0);
    const FamilyPtr f = std::make_shared<LogisticIntensity>(dom);
    const auto data = simulate(SimConfig{f, p2(2.0, 0.1), 20, 9, 100000});
    const FeatureMap fm = history_features(dom, data);
    Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(fm.dim), 0.1);
    const SurvivalModel surv(fm, w);
    const WeightSpec wt(WeightKind::DistanceToBoundary, WeightScope::Temporal);
    const Eigen::Index p = 2;
    const Objective obj = [&](const Eigen::VectorXd& v) {
        return combined_loss(*f, to_params(v.head(p)), surv.with_weights(v.tail(v.size() - p)), data, wt, nullptr,
                             0.7, 0.0);
    };
    Eigen::VectorXd x(p + w.size());
    x << 1.8, 0.15, w;
    EXPECT_LT(grad_check(obj, x).rel_error, 1e-5);
    const ObjectiveReport r = obj(x);
    ASSERT_EQ(r.per_seq.size(), data.size());
    double mean = 0.0;
    for (const double v : r.per_seq) {
        mean += v;
    }
    EXPECT_NEAR(mean / static_cast<double>(data.size()), r.value, 1e-10 * std::max(1.0, std::abs(r.value)));
    const double expect = j_awsm_implicit(*f, p2(1.8, 0.15), data, wt).value + 0.7 * survival_ce(surv, data).value;
    EXPECT_NEAR(r.value, expect, 1e-10 * std::max(1.0, std::abs(expect)));
}

TEST(Survival, FitSingleClassWarns) {
    const auto dom = ObservationDomain::temporal(1.0);
    std::vector<PointSequence> data(10);
    for (auto& s : data) {
        s.times = {0.1, 0.2, 0.3};
        s.truncated = true;
    }
    const FeatureMap fm = history_features(dom, data);
    const SurvivalFit fit = fit_survival(data, fm, SurvivalFitOptions{});
    ASSERT_TRUE(fit.warning.has_value());
    EXPECT_EQ(fit.balance.negative, 0U);
    EXPECT_GT(fit.model.prob(data[0], 1), 1.0 - 1e-9);
}

TEST(Survival, FitRecoversConstantContinuation) {
    const double q = 0.6;
    const auto dom = ObservationDomain::spatial({0, 1, 0, 1});
    std::vector<PointSequence> data(20000);
    Stream rng(12, 0);
    for (auto& s : data) {
        while (rng.uniform() < q) {
            s.locs.push_back({rng.uniform(), rng.uniform()});
        }
    }
    const FeatureMap fm = history_features(dom, data);
    SurvivalFitOptions opts;
    opts.adam.iters = 1500;
    opts.adam.lr = 0.05;
    const SurvivalFit fit = fit_survival(data, fm, opts);
    EXPECT_FALSE(fit.warning.has_value());
    PointSequence h;
    for (int n = 0; n < 3; ++n) {
        EXPECT_NEAR(fit.model.prob(h, static_cast<std::size_t>(n)), q, 0.02) << "n=" << n;
        h.locs.push_back({0.5, 0.5});
    }
}

TEST(Survival, ModelJsonRoundTrip) {
    const auto dom = ObservationDomain::temporal(4.0, 3);
    const FeatureMap fm = history_features(dom, 7.5);
    Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(fm.dim), -1.0, 1.0);
    const SurvivalModel m(fm, w);
    const SurvivalModel back = SurvivalModel::from_json(m.to_json(), dom);
    const PointSequence seq{{0.5, 1.0, 2.5}, {}, {0, 2, 2}, false};
    for (std::size_t n = 0; n <= 3; ++n) {
        EXPECT_EQ(back.prob(seq, n), m.prob(seq, n));
    }
}
