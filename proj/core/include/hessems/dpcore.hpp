#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hessems/hess.hpp"
#include "hessems/vehicle.hpp"

namespace hessems::dp {

/// Battery + aging + supercapacitor parameter bundle shared by the
/// optimizer and the plant simulations.
struct HessSystem {
    hess::BatteryParams battery;
    hess::AgingParams aging;
    hess::SupercapParams supercap;

    void validate() const;
};

struct CostParams {
    double price_capacity_loss_usd_per_ah = 694.4;
    double price_electricity_usd_per_kwh = 0.1685;
    double slack_weight_bat = 1e4;  // USD per unit SOC violation per step
    double slack_weight_sc = 1e4;
    double sample_period_s = 1.0;

    void validate() const;
};

/// Discretization of the (SOC_bat, SOC_sc) state space and the
/// supercapacitor pack-power control.
struct Grid {
    std::vector<double> soc_bat_axis;
    std::vector<double> soc_sc_axis;
    std::vector<double> control_w;

    void validate() const;
};

std::vector<double> make_axis(double lo, double hi, double step);
std::vector<double> make_axis_n(double lo, double hi, std::size_t n);

struct CostBreakdown {
    double aging_usd = 0.0;
    double electric_usd = 0.0;
    double penalty_usd = 0.0;
    double total_usd = 0.0;
};

struct TrajectoryStep {
    double t_s = 0.0;
    double p_demand_w = 0.0;
    double p_bat_w = 0.0;
    double p_sc_w = 0.0;
    double i_bat_a = 0.0;  // cell/string current
    double i_sc_a = 0.0;
    double soc_bat = 0.0;  // state after the step
    double soc_sc = 0.0;
    double dq_loss = 0.0;
    double de_loss_j = 0.0;
    double step_cost_usd = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    CostBreakdown totals;
};

/// One-step evaluation of a power split: currents, losses, fade, slack
/// penalties and the successor state. The fade increment is evaluated at
/// state.q_loss, so callers control whether the aging state is frozen or
/// dynamic.
struct StageResult {
    bool feasible = false;
    double cost_usd = 0.0;
    double aging_usd = 0.0;
    double electric_usd = 0.0;
    double penalty_usd = 0.0;
    double p_bat_w = 0.0;
    double i_bat_cell_a = 0.0;
    double i_sc_cell_a = 0.0;
    double dq_loss = 0.0;
    double de_loss_j = 0.0;
    hess::HessState next;
};

StageResult stage_cost(const hess::HessState& state, double p_sc_w, double p_demand_w,
                       const CostParams& cost, const HessSystem& sys);

/// Shared trajectory accounting so every simulation path (rollout,
/// oracle, rule controllers) accumulates costs identically.
void append_step(Trajectory& traj, double t_s, double p_demand_w, double p_sc_w,
                 const StageResult& r);
void finalize_totals(Trajectory& traj);

struct DPSolution {
    std::size_t horizon = 0;
    Grid grid;
    std::string profile_id;
    double frozen_q_loss = 0.0;
    std::vector<double> value;          // horizon x |bat axis| x |sc axis|
    std::vector<std::uint16_t> policy;  // control index; 0xFFFF marks infeasible

    static constexpr std::uint16_t kInfeasible = 0xFFFF;

    std::size_t node_count() const { return grid.soc_bat_axis.size() * grid.soc_sc_axis.size(); }
    double value_at(std::size_t stage, std::size_t ib, std::size_t is) const {
        return value[(stage * grid.soc_bat_axis.size() + ib) * grid.soc_sc_axis.size() + is];
    }
    std::uint16_t policy_at(std::size_t stage, std::size_t ib, std::size_t is) const {
        return policy[(stage * grid.soc_bat_axis.size() + ib) * grid.soc_sc_axis.size() + is];
    }
    /// Bilinearly interpolated cost-to-go at an off-grid state; stage ==
    /// horizon returns the terminal value 0.
    double interp_value(std::size_t stage, double soc_bat, double soc_sc) const;
};

struct InfeasibleProblem : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RolloutInfeasible : std::runtime_error {
    std::size_t step;
    RolloutInfeasible(const std::string& message, std::size_t step_index)
        : std::runtime_error(message), step(step_index) {}
};

struct OracleRefusal : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Backward value iteration over the grid. The aging state is frozen at
/// init.q_loss for every stage; ties in the per-node minimization go to
/// the smallest |p_sc|. Throws InfeasibleProblem when no control sequence
/// is feasible from the initial state.
DPSolution solve_backward(const vehicle::PowerProfile& profile, const Grid& grid,
                          const hess::HessState& init, const CostParams& cost,
                          const HessSystem& sys);

/// Forward simulation from the true (off-grid) state, re-minimizing
/// stage cost + interpolated cost-to-go each step and updating the aging
/// state dynamically. The profile may differ from the one the solution
/// was computed for (strategy-mismatch experiments); lengths must match.
Trajectory rollout(const DPSolution& solution, const vehicle::PowerProfile& profile,
                   const hess::HessState& init, const CostParams& cost,
                   const HessSystem& sys);

struct OracleResult {
    double total_usd = 0.0;
    std::vector<double> controls_w;
    Trajectory trajectory;
};

/// Ground truth for tiny instances: enumerates every control sequence
/// with the same per-step accounting as rollout. Refuses instances with
/// more than 10^7 sequences.
OracleResult exhaustive_oracle(const vehicle::PowerProfile& profile, const Grid& grid,
                               const hess::HessState& init, const CostParams& cost,
                               const HessSystem& sys);

}  // namespace hessems::dp
