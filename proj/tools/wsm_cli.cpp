// Command-line front end for simulation, fitting and the scripted experiments.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wsm/errors.hpp"
#include "wsm/experiments.hpp"
#include "wsm/io.hpp"
#include "wsm/metrics.hpp"
#include "wsm/simulate.hpp"

using namespace wsm;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "reports";
    std::optional<int> quad_nodes;
};

void add_common(CLI::App* cmd, Common& c, bool quad) {
    cmd->add_option("--config", c.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "run a single seed instead of the configured list");
    cmd->add_option("--out", c.out, "output directory (dataset path for simulate)");
    if (quad) {
        cmd->add_option("--quad-nodes", c.quad_nodes, "Gauss-Legendre nodes per interval for MLE");
    }
}

ExperimentConfig load(const Common& c) {
    std::ifstream is(c.config);
    json j = json::parse(is, nullptr, false);
    if (j.is_discarded()) {
        throw ConfigError("config " + c.config + " is not valid JSON");
    }
    if (c.seed) {
        j["seeds"] = {*c.seed};
    }
    if (c.quad_nodes) {
        j["quad_nodes"] = *c.quad_nodes;
    }
    return parse_config(j);
}

std::vector<PointSequence> dataset_or_simulate(const ExperimentConfig& cfg, std::uint64_t seed) {
    if (cfg.raw.contains("dataset")) {
        Dataset ds = read_jsonl(cfg.raw.at("dataset").get<std::string>());
        if (!(ds.domain == cfg.domain)) {
            throw ConfigError("dataset domain differs from the config domain");
        }
        return std::move(ds.sequences);
    }
    return simulate_for(cfg, seed, cfg.n_sequences);
}

int cmd_simulate(const Common& c) {
    const ExperimentConfig cfg = load(c);
    const std::uint64_t seed = cfg.seeds.front();
    Dataset ds{cfg.domain, cfg.family->to_json(), cfg.family->params_to_json(to_params(cfg.theta_true)), seed,
               simulate_for(cfg, seed, cfg.n_sequences)};
    write_jsonl(c.out, ds);
    std::cout << "wrote " << ds.sequences.size() << " sequences to " << c.out << '\n';
    return 0;
}

int cmd_fit(const Common& c) {
    const ExperimentConfig cfg = load(c);
    Table t;
    t.header = {"objective", "seed", "param", "theta0", "theta_hat", "final_value"};
    const auto names = cfg.family->param_names();
    json fitted = json::object();
    for (const std::uint64_t seed : cfg.seeds) {
        const auto data = dataset_or_simulate(cfg, seed);
        const Eigen::VectorXd th0 = cfg.theta0 ? *cfg.theta0 : draw_theta0(cfg.theta_true, seed);
        for (const auto& obj : cfg.objectives) {
            FitSpec spec = cfg.fit;
            spec.objective = obj;
            const FitOutcome fit = fit_model(cfg.family, data, spec, th0);
            const std::string last = fit.adam.trace.empty() ? "" : fmt_num(fit.adam.trace.back());
            for (std::size_t p = 0; p < names.size(); ++p) {
                const auto i = static_cast<Eigen::Index>(p);
                t.rows.push_back({obj, std::to_string(seed), names[p], fmt_num(th0(i)), fmt_num(fit.theta(i)), last});
            }
            fitted[obj][std::to_string(seed)] = cfg.family->params_to_json(to_params(fit.theta));
            if (fit.adam.aborted) {
                std::cerr << obj << " seed " << seed << ": " << fit.adam.diagnostic << '\n';
            }
        }
    }
    write_report(c.out, "fit", t, cfg, {{"fitted", fitted}});
    std::cout << t.to_csv();
    return 0;
}

int cmd_evaluate(const Common& c) {
    const ExperimentConfig cfg = load(c);
    const Params theta = cfg.raw.contains("theta") ? cfg.family->params_from_json(cfg.raw.at("theta"))
                                                   : to_params(cfg.theta_true);
    Table t;
    t.header = {"seed", "metric", "value"};
    for (const std::uint64_t seed : cfg.seeds) {
        const auto data = dataset_or_simulate(cfg, seed);
        const std::string s = std::to_string(seed);
        t.rows.push_back({s, "nll", fmt_num(nll_mle(cfg.family, theta, data, cfg.fit.quad_nodes).value)});
        if (cfg.family->has_temporal()) {
            const KsResult ks = ks_uniform(time_rescaling_residuals(*cfg.family, theta, data));
            t.rows.push_back({s, "ks_time_rescaling_stat", fmt_num(ks.statistic)});
            t.rows.push_back({s, "ks_time_rescaling_p", fmt_num(ks.p_value)});
            const CorrectedLoglik ll = corrected_loglik(*cfg.family, theta,
                                                        exact_continuation_fn(cfg.family, theta), data,
                                                        cfg.fit.quad_nodes);
            t.rows.push_back({s, "tll_temporal", fmt_num(ll.ll_t)});
            if (ll.ll_s) {
                t.rows.push_back({s, "tll_spatial", fmt_num(*ll.ll_s)});
            }
        }
    }
    write_report(c.out, "evaluate", t, cfg);
    std::cout << t.to_csv();
    return 0;
}

int cmd_experiment(const Common& c, const std::string& which) {
    const ExperimentConfig cfg = load(c);
    if (which == "demo-failure") {
        const auto r = run_demo_failure(cfg);
        write_report(c.out, "demo_failure", r.table, cfg);
        std::cout << r.table.to_csv();
    } else if (which == "compare-weights") {
        const auto r = run_compare_weights(cfg);
        write_report(c.out, "compare_weights", r.table, cfg);
        std::cout << r.table.to_csv();
    } else if (which == "check-equivalence") {
        const auto r = run_equivalence(cfg);
        write_report(c.out, "equivalence", r.table, cfg, {{"pass", r.pass()}});
        std::cout << r.table.to_csv() << "pass," << (r.pass() ? 1 : 0) << '\n';
    } else if (which == "check-change-of-variable") {
        const auto r = run_change_of_variable(cfg);
        write_report(c.out, "change_of_variable", r.table, cfg);
        std::cout << r.table.to_csv();
    } else if (which == "ablate-survival") {
        const auto r = run_ablate_survival(cfg);
        write_report(c.out, "ablate_survival", r.table, cfg, {{"survival_model", r.survival_model}});
        std::cout << r.table.to_csv();
    } else if (which == "recovery") {
        const auto r = run_recovery(cfg);
        write_report(c.out, "recovery_runs", r.runs, cfg);
        write_report(c.out, "recovery", r.summary, cfg);
        std::cout << r.summary.to_csv();
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted score matching for point processes"};
    app.require_subcommand(1);
    Common c;
    const std::vector<std::pair<std::string, std::string>> subs = {
        {"simulate", "simulate a dataset to JSONL"},
        {"fit", "fit the configured objectives"},
        {"evaluate", "likelihood and goodness-of-fit of given parameters"},
        {"recovery", "parameter recovery table across objectives and seeds"},
        {"compare-weights", "MAE versus sample size for each weight"},
        {"demo-failure", "unweighted score matching on Weibull data"},
        {"check-equivalence", "explicit minus implicit loss over a parameter grid"},
        {"check-change-of-variable", "transformed SM against derived-weight WSM"},
        {"ablate-survival", "AWSM with and without the survival term"},
    };
    for (const auto& [name, help] : subs) {
        add_common(app.add_subcommand(name, help), c, name != "simulate");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const std::string which = app.get_subcommands().front()->get_name();
    try {
        if (which == "simulate") {
            return cmd_simulate(c);
        }
        if (which == "fit") {
            return cmd_fit(c);
        }
        if (which == "evaluate") {
            return cmd_evaluate(c);
        }
        return cmd_experiment(c, which);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
