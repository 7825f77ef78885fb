#include "hessems/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hessems::control {

namespace {

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

// Pack terminal power at a given cell current (monotone in the current
// below the quadratic vertex, which the cell bounds stay under).
double pack_power_at_current(double ocv_v, double r_ohm, double i_cell, int cell_count) {
    return (ocv_v * i_cell - i_cell * i_cell * r_ohm) * cell_count;
}

// Buffer-zone logic plus the hard window projection shared by rule_step
// and correction_step.
double apply_sc_constraints(double p_sc_w, double soc_sc, const EmsConfig& ems,
                            const hess::SupercapParams& sc, double dt_s,
                            const ScLimits& limits) {
    double p = std::clamp(p_sc_w, limits.p_min_w, limits.p_max_w);

    const double lo = sc.soc_min;
    if (soc_sc < lo + ems.sc_buffer) p = std::min(p, 0.0);          // discharge disabled
    else if (soc_sc > 1.0 - ems.sc_buffer) p = std::max(p, 0.0);    // charge disabled

    // Currents that would leave [soc_min, 1] within one step, intersected
    // with the cell current bounds, converted back to pack power.
    const double cv = sc.capacitance_cell_f * sc.max_voltage_cell_v;
    const double soc = std::clamp(soc_sc, 0.0, 1.0);
    const double i_hi = std::min((soc_sc - lo) * cv / dt_s, sc.current_max_cell_a);
    const double i_lo = std::max((soc_sc - 1.0) * cv / dt_s, sc.current_min_cell_a);
    const double ocv = hess::supercap_ocv(sc, soc);
    const double p_hi = pack_power_at_current(ocv, sc.resistance_cell_ohm, i_hi, sc.cell_count());
    const double p_lo = pack_power_at_current(ocv, sc.resistance_cell_ohm, i_lo, sc.cell_count());
    return std::clamp(p, std::min(p_lo, p_hi), std::max(p_lo, p_hi));
}

// Pulls the supercapacitor share in so the battery remainder is within
// its deliverable power range. Rule controllers must always emit a
// command; this only rebalances, the SC-side hard window still applies
// upstream and in the final stage evaluation.
double rebalance_for_battery(double p_sc_w, double p_demand_w, double soc_bat,
                             const hess::BatteryParams& bat) {
    const double soc = std::clamp(soc_bat, 0.0, 1.0);
    const double ocv = hess::battery_ocv(bat, soc);
    const double r = hess::battery_resistance(bat, soc);
    const double p_max =
        pack_power_at_current(ocv, r, bat.current_max_cell_a, bat.cell_count());
    const double p_min =
        pack_power_at_current(ocv, r, bat.current_min_cell_a, bat.cell_count());
    // p_bat = p_demand - p_sc must land in [p_min, p_max].
    return std::clamp(p_sc_w, p_demand_w - p_max, p_demand_w - p_min);
}

}  // namespace

void EmsConfig::validate() const {
    require(horizon_s > 0.0, "ems.horizon_s must be positive");
    require(replan_period_s > 0.0 && replan_period_s <= horizon_s,
            "ems.replan_period_s must be in (0, horizon]");
    require(sc_buffer > 0.0, "ems.sc_buffer must be positive");
    require(rule_load_factor >= 0.0 && rule_load_factor <= 1.0,
            "ems.rule_load_factor must be in [0, 1]");
    require(std::abs(apply_fraction * horizon_s - replan_period_s) <= 1e-9 * horizon_s,
            "ems.apply_fraction * horizon_s must equal replan_period_s");
}

LinearRule extract_rule(const dp::Trajectory& trajectory) {
    const auto& steps = trajectory.steps;
    require(steps.size() >= 2, "rule extraction needs at least two steps");
    double sx = 0.0, sy = 0.0;
    for (const auto& s : steps) {
        sx += s.p_demand_w;
        sy += s.p_sc_w;
    }
    const double n = static_cast<double>(steps.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& s : steps) {
        const double dx = s.p_demand_w - mx;
        const double dy = s.p_sc_w - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0)
        throw DegenerateFit("rule extraction: power demand is constant over the trajectory");
    LinearRule rule;
    rule.slope = sxy / sxx;
    rule.intercept_w = my - rule.slope * mx;
    const double ss_res = syy - sxy * sxy / sxx;
    rule.fit_r2 = syy > 0.0 ? 1.0 - std::max(0.0, ss_res) / syy : 1.0;
    return rule;
}

PowerSplit rule_step(const LinearRule& rule, double p_demand_w, double soc_sc,
                     const EmsConfig& ems, const hess::SupercapParams& sc, double dt_s,
                     const ScLimits& limits) {
    const double raw = rule.slope * p_demand_w + rule.intercept_w;
    const double p_sc = apply_sc_constraints(raw, soc_sc, ems, sc, dt_s, limits);
    return {p_sc, p_demand_w - p_sc};
}

PowerSplit correction_step(const LinearRule& rule, double p_demand_w, double p_demand_ref_w,
                           double p_sc_ref_w, double soc_sc, const EmsConfig& ems,
                           const hess::SupercapParams& sc, double dt_s,
                           const ScLimits& limits) {
    // Affine rule: f(p) - f(p_ref) reduces to slope * (p - p_ref).
    const double corrected = p_sc_ref_w + rule.slope * (p_demand_w - p_demand_ref_w);
    const double p_sc = apply_sc_constraints(corrected, soc_sc, ems, sc, dt_s, limits);
    return {p_sc, p_demand_w - p_sc};
}

namespace {

// One plant step under a rule-style controller: takes the controller's
// split, rebalances for battery deliverability if needed, and evaluates.
dp::StageResult plant_step(const hess::HessState& state, double p_sc_w, double p_demand_w,
                           const StrategyContext& ctx, std::size_t step_index) {
    dp::StageResult r = dp::stage_cost(state, p_sc_w, p_demand_w, ctx.cost, ctx.sys);
    if (r.feasible) return r;
    const double rebalanced =
        rebalance_for_battery(p_sc_w, p_demand_w, state.soc_bat, ctx.sys.battery);
    r = dp::stage_cost(state, rebalanced, p_demand_w, ctx.cost, ctx.sys);
    if (r.feasible) return r;
    throw dp::RolloutInfeasible(
        "plant: demand not deliverable at step " + std::to_string(step_index), step_index);
}

dp::StageResult plant_step(const hess::HessState& state, const PowerSplit& split,
                           double p_demand_w, const StrategyContext& ctx,
                           std::size_t step_index) {
    return plant_step(state, split.p_sc_w, p_demand_w, ctx, step_index);
}

}  // namespace

StrategyResult run_dp_oracle(const vehicle::DriveCycle& cycle, double true_load,
                             const hess::HessState& init, const StrategyContext& ctx) {
    const vehicle::PowerProfile profile = vehicle::cycle_to_profile(cycle, ctx.vehicle, true_load);
    const dp::DPSolution solution = dp::solve_backward(profile, ctx.grid, init, ctx.cost, ctx.sys);
    StrategyResult result;
    result.strategy = "dp_oracle";
    result.trajectory = dp::rollout(solution, profile, init, ctx.cost, ctx.sys);
    result.totals = result.trajectory.totals;
    return result;
}

StrategyResult run_pure_rule(const vehicle::DriveCycle& cycle, double true_load,
                             const LinearRule& fixed_rule, const hess::HessState& init,
                             const StrategyContext& ctx) {
    const vehicle::PowerProfile profile = vehicle::cycle_to_profile(cycle, ctx.vehicle, true_load);
    const double dt = ctx.cost.sample_period_s;
    const ScLimits limits = ctx.sc_limits();

    StrategyResult result;
    result.strategy = "pure_rule";
    hess::HessState state = init;
    for (std::size_t k = 0; k < profile.demand_w.size(); ++k) {
        const double p_d = profile.demand_w[k];
        const PowerSplit split =
            rule_step(fixed_rule, p_d, state.soc_sc, ctx.ems, ctx.sys.supercap, dt, limits);
        const dp::StageResult r = plant_step(state, split, p_d, ctx, k);
        dp::append_step(result.trajectory, static_cast<double>(k) * dt, p_d,
                        p_d - r.p_bat_w, r);
        state = r.next;
    }
    dp::finalize_totals(result.trajectory);
    result.totals = result.trajectory.totals;
    return result;
}

StrategyResult run_cloud(const vehicle::DriveCycle& cycle, const HourlyScenario& scenario,
                         const std::function<double(int)>& predict_hour,
                         const hess::HessState& init, const StrategyContext& ctx) {
    ctx.ems.validate();
    const double dt = ctx.cost.sample_period_s;
    const std::size_t n = cycle.samples.size();
    const std::size_t block = static_cast<std::size_t>(std::llround(ctx.ems.replan_period_s / dt));
    const std::size_t horizon = static_cast<std::size_t>(std::llround(ctx.ems.horizon_s / dt));
    require(block >= 1 && horizon >= block, "cloud: bad block/horizon discretization");
    const ScLimits limits = ctx.sc_limits();

    const auto hour_at = [&](std::size_t sample) {
        return (scenario.start_hour + static_cast<int>(sample * dt / 3600.0)) % 24;
    };
    const auto true_load_at = [&](std::size_t sample) {
        return scenario.true_load_by_hour.at(hour_at(sample));
    };

    StrategyResult result;
    result.strategy = "cloud";
    hess::HessState state = init;
    LinearRule rule;  // zero rule until the first successful plan
    bool have_rule = false;
    double error_sum = 0.0;
    std::size_t blocks = 0;

    for (std::size_t t0 = 0; t0 < n; t0 += block) {
        const std::size_t apply_len = std::min(block, n - t0);
        const std::size_t plan_len = std::min(horizon, n - t0);
        const int hour = hour_at(t0);
        const double f_true = true_load_at(t0);
        const double f_hat = predict::clamp_load_factor(predict_hour(hour));
        error_sum += f_true > 0.0 ? std::abs(f_hat - f_true) / f_true : std::abs(f_hat);
        ++blocks;

        // Plan on the predicted demand over the remaining horizon
        // (truncated at the scenario end) from the measured plant state.
        bool planned = false;
        vehicle::PowerProfile reference;
        dp::Trajectory plan;
        try {
            reference = vehicle::profile_for_range(cycle, ctx.vehicle, f_hat, t0, plan_len);
            const dp::DPSolution solution =
                dp::solve_backward(reference, ctx.grid, state, ctx.cost, ctx.sys);
            plan = dp::rollout(solution, reference, state, ctx.cost, ctx.sys);
            planned = true;
            try {
                LinearRule fresh = extract_rule(plan);
                fresh.source_load_factor = f_hat;
                rule = fresh;
                have_rule = true;
            } catch (const DegenerateFit&) {
                // Constant-demand block (e.g. all-zero): keep the last rule;
                // the reference trajectory still drives the correction.
            }
        } catch (const dp::InfeasibleProblem&) {
            ++result.fallback_blocks;
        } catch (const dp::RolloutInfeasible&) {
            ++result.fallback_blocks;
        }

        for (std::size_t j = 0; j < apply_len; ++j) {
            const std::size_t t = t0 + j;
            const double p_actual =
                vehicle::profile_for_range(cycle, ctx.vehicle, true_load_at(t), t, 1)
                    .demand_w[0];
            PowerSplit split;
            if (planned) {
                split = correction_step(rule, p_actual, reference.demand_w[j],
                                        plan.steps[j].p_sc_w, state.soc_sc, ctx.ems,
                                        ctx.sys.supercap, dt, limits);
            } else {
                const LinearRule& fallback = have_rule ? rule : LinearRule{};
                split = rule_step(fallback, p_actual, state.soc_sc, ctx.ems, ctx.sys.supercap,
                                  dt, limits);
            }
            const dp::StageResult r = plant_step(state, split, p_actual, ctx, t);
            dp::append_step(result.trajectory, static_cast<double>(t) * dt, p_actual,
                            p_actual - r.p_bat_w, r);
            state = r.next;
        }
    }
    dp::finalize_totals(result.trajectory);
    result.totals = result.trajectory.totals;
    result.load_prediction_error = blocks > 0 ? error_sum / static_cast<double>(blocks) : 0.0;
    return result;
}

StrategyResult run_cloud(const vehicle::DriveCycle& cycle, const HourlyScenario& scenario,
                         const predict::Predictor& model, const hess::HessState& init,
                         const StrategyContext& ctx) {
    return run_cloud(
        cycle, scenario,
        [&](int hour) { return predict::predict(model, scenario.features_by_hour.at(hour)); },
        init, ctx);
}

LinearRule offline_rule(const vehicle::DriveCycle& cycle, double load_factor,
                        const hess::HessState& init, const StrategyContext& ctx) {
    const vehicle::PowerProfile profile =
        vehicle::cycle_to_profile(cycle, ctx.vehicle, load_factor);
    const dp::DPSolution solution = dp::solve_backward(profile, ctx.grid, init, ctx.cost, ctx.sys);
    const dp::Trajectory trajectory = dp::rollout(solution, profile, init, ctx.cost, ctx.sys);
    LinearRule rule = extract_rule(trajectory);
    rule.source_load_factor = load_factor;
    return rule;
}

ComparisonReport compare_strategies(const vehicle::DriveCycle& cycle,
                                    const HourlyScenario& scenario,
                                    const std::function<double(int)>& predict_hour,
                                    const LinearRule& fixed_rule, const hess::HessState& init,
                                    const StrategyContext& ctx) {
    const double f_true = scenario.true_load_by_hour.at(scenario.start_hour);

    StrategyResult oracle = run_dp_oracle(cycle, f_true, init, ctx);
    StrategyResult cloud = run_cloud(cycle, scenario, predict_hour, init, ctx);
    StrategyResult rule = run_pure_rule(cycle, f_true, fixed_rule, init, ctx);

    ComparisonReport report;
    const double base = oracle.totals.total_usd;
    const auto pct = [&](double total) {
        return base > 0.0 ? (total - base) / base * 100.0 : 0.0;
    };
    for (StrategyResult* r : {&oracle, &cloud, &rule}) {
        ComparisonRow row;
        row.strategy = r->strategy;
        row.totals = r->totals;
        row.pct_vs_oracle = pct(r->totals.total_usd);
        row.load_prediction_error = r->load_prediction_error;
        row.fallback_blocks = r->fallback_blocks;
        report.rows.push_back(row);
        report.trajectories[r->strategy] = std::move(r->trajectory);
    }
    return report;
}

}  // namespace hessems::control
