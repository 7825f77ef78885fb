#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "hessems/dpcore.hpp"
#include "hessems/predict.hpp"

namespace hessems::control {

/// Affine power-split law p_sc = slope * p_demand + intercept fitted to a
/// DP trajectory by ordinary least squares.
struct LinearRule {
    double slope = 0.0;
    double intercept_w = 0.0;
    double fit_r2 = 0.0;
    double source_load_factor = 0.0;
};

struct DegenerateFit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmsConfig {
    double horizon_s = 1200.0;
    double replan_period_s = 60.0;
    double apply_fraction = 0.05;
    double sc_buffer = 0.01;
    double rule_load_factor = 0.5;  // load factor the pure-rule baseline is extracted at

    void validate() const;
};

/// Pack-level supercapacitor power bounds the controller may command
/// (normally the DP control-axis extremes).
struct ScLimits {
    double p_min_w = -250e3;
    double p_max_w = 250e3;
};

struct PowerSplit {
    double p_sc_w = 0.0;
    double p_bat_w = 0.0;
};

LinearRule extract_rule(const dp::Trajectory& trajectory);

/// Rule evaluation with the buffer-zone logic: discharge disabled below
/// soc_min + buffer, charge disabled above 1 - buffer, and a hard
/// projection keeping the supercapacitor inside [soc_min, 1] within one
/// step. Never fails; the battery takes the remainder.
PowerSplit rule_step(const LinearRule& rule, double p_demand_w, double soc_sc,
                     const EmsConfig& ems, const hess::SupercapParams& sc, double dt_s,
                     const ScLimits& limits);

/// Receding-horizon reconciliation: shifts the reference supercapacitor
/// power by the rule response to the demand error, then applies the same
/// buffer-zone clamping as rule_step.
PowerSplit correction_step(const LinearRule& rule, double p_demand_w, double p_demand_ref_w,
                           double p_sc_ref_w, double soc_sc, const EmsConfig& ems,
                           const hess::SupercapParams& sc, double dt_s, const ScLimits& limits);

struct StrategyContext {
    vehicle::VehicleParams vehicle;
    dp::HessSystem sys;
    dp::CostParams cost;
    dp::Grid grid;
    EmsConfig ems;

    ScLimits sc_limits() const { return {grid.control_w.front(), grid.control_w.back()}; }
};

struct StrategyResult {
    dp::Trajectory trajectory;
    dp::CostBreakdown totals;
    std::string strategy;
    double load_prediction_error = 0.0;  // cloud only
    int fallback_blocks = 0;             // cloud only: blocks served by the last rule
};

/// Hour-of-day keyed scenario inputs. The load factor is piecewise
/// constant per hour; a run starting at t = 0 sits in start_hour.
struct HourlyScenario {
    int start_hour = 8;
    std::map<int, double> true_load_by_hour;
    std::map<int, predict::FeatureVector> features_by_hour;
};

/// Full-horizon DP with the true load: the benchmark optimum.
StrategyResult run_dp_oracle(const vehicle::DriveCycle& cycle, double true_load,
                             const hess::HessState& init, const StrategyContext& ctx);

/// Fixed offline rule applied step by step, no prediction, no updates.
StrategyResult run_pure_rule(const vehicle::DriveCycle& cycle, double true_load,
                             const LinearRule& fixed_rule, const hess::HessState& init,
                             const StrategyContext& ctx);

/// Receding-horizon planner: every replan period, predict the load,
/// solve the DP on the predicted demand over the remaining horizon,
/// extract a fresh rule, and apply the first block on the plant with
/// per-step correction against the true demand. Planner failures fall
/// back to the last valid rule.
StrategyResult run_cloud(const vehicle::DriveCycle& cycle, const HourlyScenario& scenario,
                         const std::function<double(int)>& predict_hour,
                         const hess::HessState& init, const StrategyContext& ctx);

StrategyResult run_cloud(const vehicle::DriveCycle& cycle, const HourlyScenario& scenario,
                         const predict::Predictor& model, const hess::HessState& init,
                         const StrategyContext& ctx);

/// Convenience: DP solve + rollout + rule extraction at one load factor.
LinearRule offline_rule(const vehicle::DriveCycle& cycle, double load_factor,
                        const hess::HessState& init, const StrategyContext& ctx);

struct ComparisonRow {
    std::string strategy;
    dp::CostBreakdown totals;
    double pct_vs_oracle = 0.0;
    double load_prediction_error = 0.0;
    int fallback_blocks = 0;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;  // dp_oracle, cloud, pure_rule
    std::map<std::string, dp::Trajectory> trajectories;
};

/// Runs all three strategies on one scenario hour and reports totals and
/// percentage gaps versus the DP benchmark.
ComparisonReport compare_strategies(const vehicle::DriveCycle& cycle,
                                    const HourlyScenario& scenario,
                                    const std::function<double(int)>& predict_hour,
                                    const LinearRule& fixed_rule, const hess::HessState& init,
                                    const StrategyContext& ctx);

}  // namespace hessems::control
