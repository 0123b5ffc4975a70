#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wsm/metrics.hpp"
#include "wsm/objectives.hpp"
#include "wsm/optimize.hpp"
#include "wsm/survival.hpp"

namespace wsm {

/// How one model is fitted.
///   objective: mle | sm | wsm | asm | awsm | exp_family
struct FitSpec {
    std::string objective = "awsm";
    WeightKind weight = WeightKind::DistanceToBoundary;
    WeightKind spatial_weight = WeightKind::DistanceToBoundary;
    bool mark_ce = true;
    AdamConfig adam;
    int quad_nodes = 100;
};

struct FitOutcome {
    Eigen::VectorXd theta;
    AdamResult adam;       // empty trace for exp_family
    bool trend_ok = true;  // trailing-100 mean <= leading-100 mean
};

/// Objective for spec.objective (not exp_family). Box bounds come from the family.
[[nodiscard]] Objective make_objective(const FamilyPtr& family, SeqSpan data, const FitSpec& spec);
[[nodiscard]] FitOutcome fit_model(const FamilyPtr& family, SeqSpan data, const FitSpec& spec,
                                   const Eigen::VectorXd& theta0);

/// theta0 ~ U[0.5 theta*, 1.5 theta*] componentwise, from (seed, fixed stream).
[[nodiscard]] Eigen::VectorXd draw_theta0(const Eigen::VectorXd& truth, std::uint64_t seed);

/// Parsed experiment configuration; `raw` holds the input with every
/// default filled in and is what the manifest records.
struct ExperimentConfig {
    std::string experiment;
    ObservationDomain domain;
    FamilyPtr family;
    Eigen::VectorXd theta_true;
    std::size_t n_sequences = 1000;
    std::vector<std::uint64_t> seeds{1, 2, 3};
    std::size_t max_events = 100000;
    std::vector<std::string> objectives;
    FitSpec fit;
    // compare_weights
    std::vector<std::size_t> sample_sizes;
    std::vector<WeightKind> weights;
    // equivalence / change_of_variable
    std::vector<double> grid_scales;
    // ablate_survival
    double a_surv = 1.0;
    double a_k = 1.0;
    bool class_weighted = false;
    std::size_t test_sequences = 200;
    double bulk_margin = 5.0;
    std::optional<Eigen::VectorXd> theta0; // fixed start instead of the random draw
    json raw;
};

/// Throws ConfigError on missing or inconsistent fields.
[[nodiscard]] ExperimentConfig parse_config(const json& j);
[[nodiscard]] ExperimentConfig load_config(const std::string& path);

/// Simulated dataset for a seed (config family at theta_true).
[[nodiscard]] std::vector<PointSequence> simulate_for(const ExperimentConfig& cfg, std::uint64_t seed,
                                                      std::size_t n_sequences);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    [[nodiscard]] std::string to_csv() const;
};

/// Shortest round-trip decimal form.
[[nodiscard]] std::string fmt_num(double v);

struct DemoFailureResult {
    std::vector<double> theta0;
    std::vector<double> theta_hat;
    std::vector<double> formula_max_abs_err; // assembled minus closed form, 10 random theta
    Table table;
};
[[nodiscard]] DemoFailureResult run_demo_failure(const ExperimentConfig& cfg);

struct RecoveryRuns {
    std::vector<Eigen::VectorXd> theta0;
    std::vector<Eigen::VectorXd> theta_hat;
    std::vector<bool> trend_ok;
    std::vector<bool> aborted;
    MaeReport mae;
};
struct RecoveryResult {
    std::vector<std::string> param_names;
    std::map<std::string, RecoveryRuns> by_objective;
    Table runs;
    Table summary;
};
[[nodiscard]] RecoveryResult run_recovery(const ExperimentConfig& cfg);
/// Same, on datasets supplied per seed (shared across experiments).
[[nodiscard]] RecoveryResult run_recovery(const ExperimentConfig& cfg,
                                          const std::vector<std::vector<PointSequence>>& data);

struct CompareWeightsResult {
    // [weight][m] -> MAE over seeds
    std::map<std::string, std::map<std::size_t, MaeReport>> mae;
    Table table;
};
[[nodiscard]] CompareWeightsResult run_compare_weights(const ExperimentConfig& cfg);
[[nodiscard]] CompareWeightsResult run_compare_weights(const ExperimentConfig& cfg,
                                                       const std::vector<std::vector<PointSequence>>& data);

struct EquivalenceResult {
    std::vector<double> scales;
    std::vector<double> mean_diff; // D_j = mean_i (L_i - J_i)
    std::vector<double> se;        // SE of the centred differences
    double std_diff = 0.0;
    double rms_se = 0.0;
    [[nodiscard]] bool pass() const { return std_diff < 3.0 * rms_se; }
    Table table;
};
/// L_explicit - J_implicit over theta = scale * theta_true, with the true
/// family as the oracle. Uses fit.objective (wsm or awsm).
[[nodiscard]] EquivalenceResult run_equivalence(const ExperimentConfig& cfg);

struct ChangeOfVariableResult {
    ChangeOfVariableReport report;
    Table table;
};
[[nodiscard]] ChangeOfVariableResult run_change_of_variable(const ExperimentConfig& cfg);

struct SurvivalAblationResult {
    Eigen::VectorXd theta_awsm;
    Eigen::VectorXd theta_combined;
    json survival_model;
    ClassBalance balance;
    double sup_rel_err_awsm = 0.0;
    double sup_rel_err_combined = 0.0;
    double heldout_ce_model = 0.0;
    double heldout_ce_constant = 0.0;
    std::size_t n_histories = 0;
    Table table;
};
[[nodiscard]] SurvivalAblationResult run_ablate_survival(const ExperimentConfig& cfg);

/// CSV plus <name>.manifest.json (config with defaults, config hash,
/// git describe, seeds) into `dir`.
void write_report(const std::string& dir, const std::string& name, const Table& table, const ExperimentConfig& cfg,
                  const json& extra = json::object());

/// FNV-1a 64 of the canonical JSON dump.
[[nodiscard]] std::string config_hash(const json& j);
[[nodiscard]] std::string git_describe();

} // namespace wsm
