#include "wsm/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "wsm/errors.hpp"
#include "wsm/io.hpp"
#include "wsm/rng.hpp"
#include "wsm/simulate.hpp"

namespace wsm {

namespace {

constexpr std::uint64_t kTheta0Stream = 0x7468657461300000ULL;
constexpr std::uint64_t kTestSeedOffset = 7919;

bool trend_ok(const std::vector<double>& trace) {
    if (trace.size() < 200) {
        return true;
    }
    const auto n = static_cast<std::ptrdiff_t>(100);
    const double lead = std::accumulate(trace.begin(), trace.begin() + n, 0.0) / 100.0;
    const double trail = std::accumulate(trace.end() - n, trace.end(), 0.0) / 100.0;
    return trail <= lead;
}

Eigen::VectorXd box_lower(const ProcessFamily& f) {
    return to_vector(f.lower_bounds());
}

template <class T>
T get_or(json& j, const char* key, T fallback) {
    if (!j.contains(key)) {
        j[key] = fallback;
    }
    return j.at(key).get<T>();
}

std::string kind_name(WeightKind k) { return to_string(k); }

Table recovery_tables(const ExperimentConfig& cfg, const RecoveryResult& res, Table& summary) {
    Table runs;
    runs.header = {"objective", "seed", "param", "theta_true", "theta0", "theta_hat", "abs_err", "trend_ok", "aborted"};
    summary.header = {"objective", "param", "mae_mean", "mae_std"};
    for (const auto& obj : cfg.objectives) {
        const RecoveryRuns& r = res.by_objective.at(obj);
        for (std::size_t s = 0; s < r.theta_hat.size(); ++s) {
            for (std::size_t p = 0; p < res.param_names.size(); ++p) {
                const auto i = static_cast<Eigen::Index>(p);
                runs.rows.push_back({obj, std::to_string(cfg.seeds[s]), res.param_names[p], fmt_num(cfg.theta_true(i)),
                                     fmt_num(r.theta0[s](i)), fmt_num(r.theta_hat[s](i)),
                                     fmt_num(std::abs(r.theta_hat[s](i) - cfg.theta_true(i))),
                                     r.trend_ok[s] ? "1" : "0", r.aborted[s] ? "1" : "0"});
            }
        }
        for (std::size_t p = 0; p < res.param_names.size(); ++p) {
            const auto i = static_cast<Eigen::Index>(p);
            summary.rows.push_back({obj, res.param_names[p], fmt_num(r.mae.mean(i)), fmt_num(r.mae.std(i))});
        }
    }
    return runs;
}

} // namespace

std::string fmt_num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

std::string Table::to_csv() const {
    std::string out;
    const auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out += (i == 0 ? "" : ",") + cells[i];
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) {
        line(r);
    }
    return out;
}

Eigen::VectorXd draw_theta0(const Eigen::VectorXd& truth, std::uint64_t seed) {
    Stream rng(seed, kTheta0Stream);
    Eigen::VectorXd t(truth.size());
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        t(i) = truth(i) * rng.uniform(0.5, 1.5);
    }
    return t;
}

Objective make_objective(const FamilyPtr& family, SeqSpan data, const FitSpec& spec) {
    const std::string& o = spec.objective;
    if (o == "mle") {
        auto mle = std::make_shared<MleObjective>(family, data, spec.quad_nodes);
        return [mle](const Eigen::VectorXd& v) { return (*mle)(to_params(v)); };
    }
    if (o == "sm") {
        return [family, data](const Eigen::VectorXd& v) { return j_sm_implicit(*family, to_params(v), data); };
    }
    if (o == "wsm") {
        const WeightSpec w(spec.weight, WeightScope::Joint);
        return [family, data, w](const Eigen::VectorXd& v) { return j_wsm_implicit(*family, to_params(v), data, w); };
    }
    if (o == "asm") {
        const bool marks = spec.mark_ce;
        return [family, data, marks](const Eigen::VectorXd& v) {
            return j_asm_implicit(*family, to_params(v), data, marks);
        };
    }
    if (o == "awsm") {
        const WeightSpec wt(spec.weight, WeightScope::Temporal);
        std::optional<WeightSpec> ws;
        if (family->has_spatial_score()) {
            ws.emplace(spec.spatial_weight, WeightScope::Spatial);
        }
        const bool marks = spec.mark_ce && family->domain().is_marked();
        return [family, data, wt, ws, marks](const Eigen::VectorXd& v) {
            const Params th = to_params(v);
            ObjectiveReport r = j_awsm_implicit(*family, th, data, wt, ws ? &*ws : nullptr);
            if (marks) {
                const ObjectiveReport c = mark_ce(*family, th, data);
                r.value += c.value;
                r.grad += c.grad;
                for (std::size_t i = 0; i < r.per_seq.size(); ++i) {
                    r.per_seq[i] += c.per_seq[i];
                }
            }
            return r;
        };
    }
    throw ConfigError("unknown objective '" + o + "'");
}

FitOutcome fit_model(const FamilyPtr& family, SeqSpan data, const FitSpec& spec, const Eigen::VectorXd& theta0) {
    FitOutcome out;
    if (spec.objective == "exp_family") {
        const WeightSpec w(spec.weight, WeightScope::Joint);
        if (dynamic_cast<const PoissonExpSin2D*>(family.get()) != nullptr) {
            out.theta = exp_family_fit(data, family->domain(), w, ExpSin2DStats()).theta;
        } else if (dynamic_cast<const PoissonWeibull1D*>(family.get()) != nullptr) {
            out.theta = exp_family_fit(data, family->domain(), w, WeibullStats()).theta;
        } else {
            throw ConfigError("exp_family fit is available for poisson_expsin2d and poisson_weibull");
        }
        return out;
    }
    AdamConfig adam = spec.adam;
    if (adam.lower.size() == 0) {
        adam.lower = box_lower(*family);
    }
    out.adam = adam_minimize(make_objective(family, data, spec), theta0, adam);
    out.theta = out.adam.theta;
    out.trend_ok = trend_ok(out.adam.trace);
    return out;
}

ExperimentConfig parse_config(const json& input) {
    if (!input.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    ExperimentConfig cfg;
    json j = input;
    try {
        cfg.experiment = get_or<std::string>(j, "experiment", "recovery");
        cfg.domain = domain_from_json(j.at("domain"));
        cfg.family = make_family(j.at("family"), cfg.domain);
        if (j.contains("theta_true")) {
            cfg.theta_true = to_vector(cfg.family->params_from_json(j.at("theta_true")));
            cfg.family->check_params(to_params(cfg.theta_true));
        }
        cfg.n_sequences = get_or<std::size_t>(j, "n_sequences", 1000);
        cfg.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", {1, 2, 3});
        cfg.max_events = get_or<std::size_t>(j, "max_events", 100000);
        cfg.objectives = get_or<std::vector<std::string>>(j, "objectives", {"awsm"});
        cfg.fit.objective = get_or<std::string>(j, "objective", cfg.objectives.empty() ? "awsm" : cfg.objectives[0]);
        cfg.fit.weight = weight_kind_from_string(get_or<std::string>(j, "weight", "distance"));
        cfg.fit.spatial_weight = weight_kind_from_string(get_or<std::string>(j, "spatial_weight", "distance"));
        cfg.fit.mark_ce = get_or<bool>(j, "mark_ce", true);
        cfg.fit.quad_nodes = get_or<int>(j, "quad_nodes", 100);
        json& a = j["adam"];
        if (a.is_null()) {
            a = json::object();
        }
        cfg.fit.adam.lr = get_or<double>(a, "lr", 0.05);
        cfg.fit.adam.beta1 = get_or<double>(a, "beta1", 0.9);
        cfg.fit.adam.beta2 = get_or<double>(a, "beta2", 0.999);
        cfg.fit.adam.eps = get_or<double>(a, "eps", 1e-8);
        cfg.fit.adam.iters = get_or<int>(a, "iters", 500);
        std::vector<std::size_t> sizes = get_or<std::vector<std::size_t>>(j, "sample_sizes", {100, 250, 500, 1000});
        cfg.sample_sizes = sizes;
        for (const auto& w : get_or<std::vector<std::string>>(j, "weights", {"distance", "natural", "sqrt"})) {
            cfg.weights.push_back(weight_kind_from_string(w));
        }
        cfg.grid_scales = get_or<std::vector<double>>(j, "grid_scales", {0.8, 0.9, 1.0, 1.1, 1.2});
        json& s = j["survival"];
        if (s.is_null()) {
            s = json::object();
        }
        cfg.a_surv = get_or<double>(s, "a_surv", 1.0);
        cfg.a_k = get_or<double>(s, "a_k", 1.0);
        cfg.class_weighted = get_or<bool>(s, "class_weighted", false);
        cfg.test_sequences = get_or<std::size_t>(s, "test_sequences", 200);
        cfg.bulk_margin = get_or<double>(s, "bulk_margin", 5.0);
        if (j.contains("theta0")) {
            cfg.theta0 = to_vector(cfg.family->params_from_json(j.at("theta0")));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (cfg.theta_true.size() == 0 && !cfg.theta0) {
        throw ConfigError("config needs theta_true or theta0");
    }
    if (cfg.seeds.empty() || cfg.n_sequences == 0) {
        throw ConfigError("config needs at least one seed and one sequence");
    }
    cfg.raw = j;
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot open config " + path);
    }
    json j;
    try {
        j = json::parse(is);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    return parse_config(j);
}

std::vector<PointSequence> simulate_for(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t n_sequences) {
    if (cfg.theta_true.size() == 0) {
        throw ConfigError("simulation needs theta_true");
    }
    return simulate(SimConfig{cfg.family, to_params(cfg.theta_true), n_sequences, seed, cfg.max_events});
}

DemoFailureResult run_demo_failure(const ExperimentConfig& cfg) {
    if (dynamic_cast<const PoissonWeibull1D*>(cfg.family.get()) == nullptr) {
        throw ConfigError("demo_failure runs on poisson_weibull");
    }
    DemoFailureResult res;
    res.table.header = {"seed", "theta_true", "theta0", "theta_hat", "formula_max_abs_err"};
    FitSpec spec = cfg.fit;
    spec.objective = "sm";
    for (const std::uint64_t seed : cfg.seeds) {
        const auto data = simulate_for(cfg, seed, cfg.n_sequences);
        const Eigen::VectorXd th0 = cfg.theta0 ? *cfg.theta0 : draw_theta0(cfg.theta_true, seed);
        const FitOutcome fit = fit_model(cfg.family, data, spec, th0);
        double s = 0.0;
        for (const auto& seq : data) {
            for (const double t : seq.times) {
                s += 1.0 / (t * t);
            }
        }
        s /= static_cast<double>(data.size());
        Stream rng(seed, 99);
        double err = 0.0;
        for (int i = 0; i < 10; ++i) {
            const double th = rng.uniform(0.5, 4.0);
            Params p(1);
            p << th;
            err = std::max(err, std::abs(j_sm_implicit(*cfg.family, p, data).value - 0.5 * (th - 1) * (th - 3) * s));
        }
        res.theta0.push_back(th0(0));
        res.theta_hat.push_back(fit.theta(0));
        res.formula_max_abs_err.push_back(err);
        res.table.rows.push_back(
            {std::to_string(seed), fmt_num(cfg.theta_true(0)), fmt_num(th0(0)), fmt_num(fit.theta(0)), fmt_num(err)});
    }
    return res;
}

RecoveryResult run_recovery(const ExperimentConfig& cfg, const std::vector<std::vector<PointSequence>>& data) {
    if (data.size() != cfg.seeds.size()) {
        throw ConfigError("one dataset per seed is required");
    }
    RecoveryResult res;
    res.param_names = cfg.family->param_names();
    for (const auto& obj : cfg.objectives) {
        FitSpec spec = cfg.fit;
        spec.objective = obj;
        RecoveryRuns runs;
        for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
            const Eigen::VectorXd th0 = cfg.theta0 ? *cfg.theta0 : draw_theta0(cfg.theta_true, cfg.seeds[s]);
            const FitOutcome fit = fit_model(cfg.family, data[s], spec, th0);
            runs.theta0.push_back(th0);
            runs.theta_hat.push_back(fit.theta);
            runs.trend_ok.push_back(fit.trend_ok);
            runs.aborted.push_back(fit.adam.aborted);
        }
        runs.mae = mae_report(runs.theta_hat, cfg.theta_true);
        res.by_objective.emplace(obj, std::move(runs));
    }
    res.runs = recovery_tables(cfg, res, res.summary);
    return res;
}

RecoveryResult run_recovery(const ExperimentConfig& cfg) {
    std::vector<std::vector<PointSequence>> data;
    for (const std::uint64_t seed : cfg.seeds) {
        data.push_back(simulate_for(cfg, seed, cfg.n_sequences));
    }
    return run_recovery(cfg, data);
}

CompareWeightsResult run_compare_weights(const ExperimentConfig& cfg,
                                         const std::vector<std::vector<PointSequence>>& data) {
    if (data.size() != cfg.seeds.size()) {
        throw ConfigError("one dataset per seed is required");
    }
    CompareWeightsResult res;
    res.table.header = {"weight", "m", "param", "mae_mean", "mae_std"};
    const auto names = cfg.family->param_names();
    for (const WeightKind w : cfg.weights) {
        FitSpec spec = cfg.fit;
        spec.weight = w;
        for (const std::size_t m : cfg.sample_sizes) {
            std::vector<Eigen::VectorXd> hats;
            for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
                if (m > data[s].size()) {
                    throw ConfigError("sample size exceeds the dataset");
                }
                const SeqSpan sub(data[s].data(), m);
                const Eigen::VectorXd th0 = cfg.theta0 ? *cfg.theta0 : draw_theta0(cfg.theta_true, cfg.seeds[s]);
                hats.push_back(fit_model(cfg.family, sub, spec, th0).theta);
            }
            const MaeReport mae = mae_report(hats, cfg.theta_true);
            for (std::size_t p = 0; p < names.size(); ++p) {
                const auto i = static_cast<Eigen::Index>(p);
                res.table.rows.push_back(
                    {kind_name(w), std::to_string(m), names[p], fmt_num(mae.mean(i)), fmt_num(mae.std(i))});
            }
            res.mae[kind_name(w)][m] = mae;
        }
    }
    return res;
}

CompareWeightsResult run_compare_weights(const ExperimentConfig& cfg) {
    const std::size_t m_max = *std::max_element(cfg.sample_sizes.begin(), cfg.sample_sizes.end());
    std::vector<std::vector<PointSequence>> data;
    for (const std::uint64_t seed : cfg.seeds) {
        data.push_back(simulate_for(cfg, seed, std::max(m_max, cfg.n_sequences)));
    }
    return run_compare_weights(cfg, data);
}

EquivalenceResult run_equivalence(const ExperimentConfig& cfg) {
    const auto data = simulate_for(cfg, cfg.seeds.front(), cfg.n_sequences);
    const Params truth = to_params(cfg.theta_true);
    const ProcessFamily& f = *cfg.family;
    const std::size_t m = data.size();
    std::vector<std::vector<double>> d; // [grid][sequence]
    EquivalenceResult res;
    res.scales = cfg.grid_scales;
    for (const double scale : cfg.grid_scales) {
        const Params th = truth * scale;
        ObjectiveReport l;
        ObjectiveReport jr;
        if (cfg.fit.objective == "wsm") {
            const WeightSpec w(cfg.fit.weight, WeightScope::Joint);
            l = l_wsm_explicit(f, th, data, w, f, truth);
            jr = j_wsm_implicit(f, th, data, w);
        } else if (cfg.fit.objective == "awsm") {
            const WeightSpec wt(cfg.fit.weight, WeightScope::Temporal);
            std::optional<WeightSpec> ws;
            if (f.has_spatial_score()) {
                ws.emplace(cfg.fit.spatial_weight, WeightScope::Spatial);
            }
            l = l_awsm_explicit(f, th, data, wt, ws ? &*ws : nullptr, f, truth);
            jr = j_awsm_implicit(f, th, data, wt, ws ? &*ws : nullptr);
        } else {
            throw ConfigError("equivalence compares wsm or awsm");
        }
        std::vector<double> di(m);
        for (std::size_t i = 0; i < m; ++i) {
            di[i] = l.per_seq[i] - jr.per_seq[i];
        }
        d.push_back(std::move(di));
    }
    const std::size_t g = d.size();
    std::vector<double> row_mean(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < g; ++k) {
            row_mean[i] += d[k][i] / static_cast<double>(g);
        }
    }
    double ms = 0.0;
    for (std::size_t k = 0; k < g; ++k) {
        double mean = 0.0;
        double cm = 0.0;
        double c2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            mean += d[k][i];
            const double c = d[k][i] - row_mean[i];
            cm += c;
            c2 += c * c;
        }
        mean /= static_cast<double>(m);
        cm /= static_cast<double>(m);
        const double var = (c2 - static_cast<double>(m) * cm * cm) / static_cast<double>(m - 1);
        res.mean_diff.push_back(mean);
        res.se.push_back(std::sqrt(std::max(var, 0.0) / static_cast<double>(m)));
        ms += res.se.back() * res.se.back() / static_cast<double>(g);
    }
    const double dbar = std::accumulate(res.mean_diff.begin(), res.mean_diff.end(), 0.0) / static_cast<double>(g);
    double ss = 0.0;
    for (const double v : res.mean_diff) {
        ss += (v - dbar) * (v - dbar);
    }
    res.std_diff = g > 1 ? std::sqrt(ss / static_cast<double>(g - 1)) : 0.0;
    res.rms_se = std::sqrt(ms);
    res.table.header = {"scale", "mean_l_minus_j", "se_centred"};
    for (std::size_t k = 0; k < g; ++k) {
        res.table.rows.push_back({fmt_num(res.scales[k]), fmt_num(res.mean_diff[k]), fmt_num(res.se[k])});
    }
    res.table.rows.push_back({"std_over_grid", fmt_num(res.std_diff), fmt_num(res.rms_se)});
    return res;
}

ChangeOfVariableResult run_change_of_variable(const ExperimentConfig& cfg) {
    const auto data = simulate_for(cfg, cfg.seeds.front(), cfg.n_sequences);
    const MonotoneTransform g = MonotoneTransform::logit(0.0, cfg.domain.t_max());
    std::vector<Params> grid;
    for (const double s : cfg.grid_scales) {
        grid.push_back(to_params(cfg.theta_true * s));
    }
    ChangeOfVariableResult res;
    res.report = change_of_variable_check(*cfg.family, data, g, grid);
    res.table.header = {"scale", "j_sm_transformed", "j_wsm_raw", "difference"};
    for (std::size_t k = 0; k < grid.size(); ++k) {
        res.table.rows.push_back({fmt_num(cfg.grid_scales[k]), fmt_num(res.report.j_sm_transformed[k]),
                                  fmt_num(res.report.j_wsm_raw[k]),
                                  fmt_num(res.report.j_sm_transformed[k] - res.report.j_wsm_raw[k])});
    }
    res.table.rows.push_back({"max_centred_discrepancy", "", "", fmt_num(res.report.max_discrepancy)});
    return res;
}

SurvivalAblationResult run_ablate_survival(const ExperimentConfig& cfg) {
    const ProcessFamily& f = *cfg.family;
    if (!f.has_temporal()) {
        throw ConfigError("survival ablation needs a temporal family");
    }
    const std::uint64_t seed = cfg.seeds.front();
    const auto train = simulate_for(cfg, seed, cfg.n_sequences);
    const auto test = simulate_for(cfg, seed + kTestSeedOffset, cfg.test_sequences);
    const Eigen::VectorXd th0 = cfg.theta0 ? *cfg.theta0 : draw_theta0(cfg.theta_true, seed);
    SurvivalAblationResult res;

    FitSpec spec = cfg.fit;
    spec.objective = "awsm";
    res.theta_awsm = fit_model(cfg.family, train, spec, th0).theta;

    const FeatureMap features = history_features(cfg.domain, SeqSpan(train));
    const SurvivalModel base(features, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(features.dim)));
    const Eigen::Index p = th0.size();
    const Eigen::Index q = static_cast<Eigen::Index>(features.dim);
    const WeightSpec wt(cfg.fit.weight, WeightScope::Temporal);
    std::optional<WeightSpec> ws;
    if (f.has_spatial_score()) {
        ws.emplace(cfg.fit.spatial_weight, WeightScope::Spatial);
    }
    const double a_surv = cfg.a_surv;
    const double a_k = cfg.a_k;
    const Objective combined = [&](const Eigen::VectorXd& v) {
        return combined_loss(f, to_params(v.head(p)), base.with_weights(v.tail(q)), train, wt, ws ? &*ws : nullptr,
                             a_surv, a_k);
    };
    AdamConfig adam = cfg.fit.adam;
    adam.lower = Eigen::VectorXd::Constant(p + q, -std::numeric_limits<double>::infinity());
    adam.lower.head(p) = box_lower(f);
    Eigen::VectorXd start = Eigen::VectorXd::Zero(p + q);
    start.head(p) = th0;
    const AdamResult joint = adam_minimize(combined, start, adam);
    res.theta_combined = joint.theta.head(p);
    const SurvivalModel surv = base.with_weights(joint.theta.tail(q));
    res.survival_model = surv.to_json();
    res.balance = class_balance(train);

    // Held-out cross-entropy against the constant predictor at the training frequency.
    res.heldout_ce_model = survival_ce(surv, test).value;
    const double freq = static_cast<double>(res.balance.positive) /
                        static_cast<double>(res.balance.positive + res.balance.negative);
    Eigen::VectorXd wc = Eigen::VectorXd::Zero(q);
    wc(0) = std::log(freq / (1.0 - freq));
    res.heldout_ce_constant = survival_ce(base.with_weights(wc), test).value;

    // sup relative error of the recovered ground intensity within one
    // inter-event scale 1 / lambda_T(t_{n-1}+) of the last event, on bulk histories.
    const Params truth = to_params(cfg.theta_true);
    const Params ta = to_params(res.theta_awsm);
    const Params tc = to_params(res.theta_combined);
    const double t_max = cfg.domain.t_max();
    constexpr int kGrid = 20;
    for (const PointSequence& seq : test) {
        for (std::size_t n = 0; n <= seq.size(); ++n) {
            const double prev = seq.previous_time(n);
            if (prev >= t_max - cfg.bulk_margin) {
                break;
            }
            const double scale = 1.0 / f.temporal_jet(truth, seq, n, prev, false).lam;
            const double fn = surv.prob(seq, n);
            ++res.n_histories;
            for (int k = 1; k <= kGrid; ++k) {
                const double t = prev + scale * k / kGrid;
                const double lam = f.temporal_jet(truth, seq, n, t, false).lam;
                const double la = f.temporal_jet(ta, seq, n, t, false).lam;
                const double lc = corrected_intensity(f, tc, fn, seq, n, t);
                res.sup_rel_err_awsm = std::max(res.sup_rel_err_awsm, std::abs(la - lam) / lam);
                res.sup_rel_err_combined = std::max(res.sup_rel_err_combined, std::abs(lc - lam) / lam);
            }
        }
    }
    const auto names = f.param_names();
    res.table.header = {"method", "quantity", "value"};
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        res.table.rows.push_back({"awsm", names[i], fmt_num(res.theta_awsm(ii))});
        res.table.rows.push_back({"awsm_survival", names[i], fmt_num(res.theta_combined(ii))});
    }
    res.table.rows.push_back({"awsm", "sup_rel_err", fmt_num(res.sup_rel_err_awsm)});
    res.table.rows.push_back({"awsm_survival", "sup_rel_err", fmt_num(res.sup_rel_err_combined)});
    res.table.rows.push_back({"awsm_survival", "heldout_ce", fmt_num(res.heldout_ce_model)});
    res.table.rows.push_back({"constant", "heldout_ce", fmt_num(res.heldout_ce_constant)});
    res.table.rows.push_back({"data", "positive_labels", std::to_string(res.balance.positive)});
    res.table.rows.push_back({"data", "negative_labels", std::to_string(res.balance.negative)});
    res.table.rows.push_back({"data", "histories", std::to_string(res.n_histories)});
    return res;
}

std::string config_hash(const json& j) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : j.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string git_describe() {
    std::string out;
    if (FILE* pipe = popen("git describe --always --dirty 2>/dev/null", "r")) {
        char buf[128];
        while (std::fgets(buf, sizeof(buf), pipe) != nullptr) {
            out += buf;
        }
        pclose(pipe);
    }
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) {
        out.pop_back();
    }
    return out.empty() ? "unknown" : out;
}

void write_report(const std::string& dir, const std::string& name, const Table& table, const ExperimentConfig& cfg,
                  const json& extra) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base = std::filesystem::path(dir) / name;
    {
        std::ofstream os(base.string() + ".csv", std::ios::binary);
        if (!os) {
            throw ConfigError("cannot write " + base.string() + ".csv");
        }
        os << table.to_csv();
    }
    json manifest = {{"experiment", cfg.experiment},
                     {"config", cfg.raw},
                     {"config_hash", config_hash(cfg.raw)},
                     {"git_describe", git_describe()},
                     {"seeds", cfg.seeds},
                     {"csv", name + ".csv"}};
    for (const auto& [k, v] : extra.items()) {
        manifest[k] = v;
    }
    std::ofstream os(base.string() + ".manifest.json", std::ios::binary);
    os << manifest.dump(2) << '\n';
}

} // namespace wsm
