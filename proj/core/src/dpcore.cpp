#include "hessems/dpcore.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace hessems::dp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

struct AxisPos {
    std::size_t cell = 0;
    double frac = 0.0;
};

AxisPos locate(const std::vector<double>& axis, double x) {
    const std::size_t n = axis.size();
    if (x <= axis.front()) return {0, 0.0};
    if (x >= axis.back()) return {n - 2, 1.0};
    const auto it = std::upper_bound(axis.begin(), axis.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - axis.begin());
    return {hi - 1, (x - axis[hi - 1]) / (axis[hi] - axis[hi - 1])};
}

// Zero-weight corners are skipped so an infinite value with no weight
// cannot poison the result (0 * inf would be NaN).
double bilinear(const double* v, std::size_t ns, const AxisPos& b, const AxisPos& s) {
    const double w00 = (1.0 - b.frac) * (1.0 - s.frac);
    const double w01 = (1.0 - b.frac) * s.frac;
    const double w10 = b.frac * (1.0 - s.frac);
    const double w11 = b.frac * s.frac;
    const double* row0 = v + b.cell * ns + s.cell;
    const double* row1 = row0 + ns;
    double sum = 0.0;
    if (w00 > 0.0) sum += w00 * row0[0];
    if (w01 > 0.0) sum += w01 * row0[1];
    if (w10 > 0.0) sum += w10 * row1[0];
    if (w11 > 0.0) sum += w11 * row1[1];
    return sum;
}

}  // namespace

void append_step(Trajectory& traj, double t_s, double p_demand_w, double p_sc_w,
                 const StageResult& r) {
    TrajectoryStep s;
    s.t_s = t_s;
    s.p_demand_w = p_demand_w;
    s.p_bat_w = r.p_bat_w;
    s.p_sc_w = p_sc_w;
    s.i_bat_a = r.i_bat_cell_a;
    s.i_sc_a = r.i_sc_cell_a;
    s.soc_bat = r.next.soc_bat;
    s.soc_sc = r.next.soc_sc;
    s.dq_loss = r.dq_loss;
    s.de_loss_j = r.de_loss_j;
    s.step_cost_usd = r.cost_usd;
    traj.steps.push_back(s);
    traj.totals.aging_usd += r.aging_usd;
    traj.totals.electric_usd += r.electric_usd;
    traj.totals.penalty_usd += r.penalty_usd;
}

void finalize_totals(Trajectory& traj) {
    traj.totals.total_usd =
        traj.totals.aging_usd + traj.totals.electric_usd + traj.totals.penalty_usd;
}

void HessSystem::validate() const {
    battery.validate();
    aging.validate();
    supercap.validate();
}

void CostParams::validate() const {
    require(price_capacity_loss_usd_per_ah >= 0.0, "cost.price_capacity_loss must be >= 0");
    require(price_electricity_usd_per_kwh >= 0.0, "cost.price_electricity must be >= 0");
    require(slack_weight_bat > 0.0, "cost.slack_weight_bat must be positive");
    require(slack_weight_sc > 0.0, "cost.slack_weight_sc must be positive");
    require(sample_period_s > 0.0, "cost.sample_period_s must be positive");
}

void Grid::validate() const {
    const auto check_axis = [](const std::vector<double>& axis, const char* name,
                               bool is_soc) {
        if (axis.size() < 2) throw std::invalid_argument(std::string(name) + ": need >= 2 points");
        for (std::size_t i = 1; i < axis.size(); ++i)
            if (!(axis[i] > axis[i - 1]))
                throw std::invalid_argument(std::string(name) + ": must be strictly ascending");
        if (is_soc && (axis.front() < 0.0 || axis.back() > 1.0))
            throw std::invalid_argument(std::string(name) + ": soc axis must lie in [0, 1]");
    };
    check_axis(soc_bat_axis, "grid.soc_bat_axis", true);
    check_axis(soc_sc_axis, "grid.soc_sc_axis", true);
    check_axis(control_w, "grid.control_w", false);
}

std::vector<double> make_axis(double lo, double hi, double step) {
    require(hi > lo && step > 0.0, "axis requires hi > lo and positive step");
    const std::size_t n = static_cast<std::size_t>(std::round((hi - lo) / step)) + 1;
    std::vector<double> axis(std::max<std::size_t>(n, 2));
    for (std::size_t i = 0; i < axis.size(); ++i) axis[i] = lo + static_cast<double>(i) * step;
    axis.back() = hi;
    return axis;
}

std::vector<double> make_axis_n(double lo, double hi, std::size_t n) {
    require(hi > lo && n >= 2, "axis requires hi > lo and n >= 2");
    std::vector<double> axis(n);
    for (std::size_t i = 0; i < n; ++i)
        axis[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    axis.back() = hi;
    return axis;
}

StageResult stage_cost(const hess::HessState& state, double p_sc_w, double p_demand_w,
                       const CostParams& cost, const HessSystem& sys) {
    StageResult r;
    const double dt = cost.sample_period_s;
    const auto& bat = sys.battery;
    const auto& sc = sys.supercap;
    r.p_bat_w = p_demand_w - p_sc_w;

    // Transient overshoots outside [0, 1] saturate for voltage lookup.
    const double soc_b = std::clamp(state.soc_bat, 0.0, 1.0);
    const double soc_s = std::clamp(state.soc_sc, 0.0, 1.0);

    const double ocv_b = hess::battery_ocv(bat, soc_b);
    const double r_cell_b = hess::battery_resistance(bat, soc_b);
    const auto i_b =
        hess::current_for_terminal_power(ocv_b, r_cell_b, r.p_bat_w / bat.cell_count());
    if (!i_b || *i_b < bat.current_min_cell_a || *i_b > bat.current_max_cell_a) return r;

    const double ocv_s = hess::supercap_ocv(sc, soc_s);
    const auto i_s = hess::current_for_terminal_power(ocv_s, sc.resistance_cell_ohm,
                                                      p_sc_w / sc.cell_count());
    if (!i_s || *i_s < sc.current_min_cell_a || *i_s > sc.current_max_cell_a) return r;

    r.i_bat_cell_a = *i_b;
    r.i_sc_cell_a = *i_s;
    r.dq_loss = hess::delta_q_loss(state.q_loss, *i_b, sys.aging, bat.capacity_cell_ah, dt);
    r.de_loss_j =
        bat.parallel_count *
            hess::electric_loss_energy(*i_b, r_cell_b * bat.series_count, 0.0, 0.0, dt) +
        sc.parallel_count *
            hess::electric_loss_energy(0.0, 0.0, *i_s, sc.series_resistance_ohm(), dt);

    r.next = hess::step_battery(state, bat, *i_b, dt);
    r.next = hess::step_supercap(r.next, sc, *i_s, dt);
    r.next.q_loss = state.q_loss + r.dq_loss;

    const double sigma_bat = std::max(0.0, bat.soc_min - r.next.soc_bat) +
                             std::max(0.0, r.next.soc_bat - bat.soc_max);
    const double sigma_sc = std::max(0.0, sc.soc_min - r.next.soc_sc) +
                            std::max(0.0, r.next.soc_sc - sc.soc_max);

    r.aging_usd = r.dq_loss * bat.pack_capacity_ah() * cost.price_capacity_loss_usd_per_ah;
    r.electric_usd = r.de_loss_j / 3.6e6 * cost.price_electricity_usd_per_kwh;
    r.penalty_usd = cost.slack_weight_bat * sigma_bat + cost.slack_weight_sc * sigma_sc;
    r.cost_usd = r.aging_usd + r.electric_usd + r.penalty_usd;
    r.feasible = true;
    return r;
}

double DPSolution::interp_value(std::size_t stage, double soc_bat, double soc_sc) const {
    if (stage >= horizon) return 0.0;
    const std::size_t ns = grid.soc_sc_axis.size();
    const AxisPos b = locate(grid.soc_bat_axis, soc_bat);
    const AxisPos s = locate(grid.soc_sc_axis, soc_sc);
    return bilinear(&value[stage * grid.soc_bat_axis.size() * ns], ns, b, s);
}

DPSolution solve_backward(const vehicle::PowerProfile& profile, const Grid& grid,
                          const hess::HessState& init, const CostParams& cost,
                          const HessSystem& sys) {
    require(!profile.demand_w.empty(), "profile must be non-empty");
    require(std::isfinite(init.q_loss) && init.q_loss >= 0.0, "init q_loss must be finite");
    grid.validate();
    cost.validate();
    sys.validate();

    const std::size_t N = profile.demand_w.size();
    const std::size_t nb = grid.soc_bat_axis.size();
    const std::size_t ns = grid.soc_sc_axis.size();
    const std::size_t nu = grid.control_w.size();
    require(nu < DPSolution::kInfeasible, "control axis too large for the policy encoding");

    const auto& bat = sys.battery;
    const auto& sc = sys.supercap;
    const double dt = cost.sample_period_s;

    DPSolution sol;
    sol.horizon = N;
    sol.grid = grid;
    sol.profile_id = profile.source_cycle_id;
    sol.frozen_q_loss = init.q_loss;
    sol.value.assign(N * nb * ns, kInf);
    sol.policy.assign(N * nb * ns, DPSolution::kInfeasible);

    // State-side quantities do not depend on the stage.
    std::vector<double> ocv_b(nb), r_cell_b(nb), r_ser_b(nb);
    for (std::size_t ib = 0; ib < nb; ++ib) {
        ocv_b[ib] = hess::battery_ocv(bat, grid.soc_bat_axis[ib]);
        r_cell_b[ib] = hess::battery_resistance(bat, grid.soc_bat_axis[ib]);
        r_ser_b[ib] = r_cell_b[ib] * bat.series_count;
    }
    std::vector<double> ocv_s(ns);
    for (std::size_t is = 0; is < ns; ++is)
        ocv_s[is] = hess::supercap_ocv(sc, grid.soc_sc_axis[is]);

    // Aging rate at the frozen fade level: one exp per battery current.
    const double z = sys.aging.power_exponent_z;
    const double rt = sys.aging.gas_constant * sys.aging.temperature_k;
    const double ln_m = std::log(sys.aging.prefactor);
    const double k0 = (ln_m - sys.aging.activation_base_j_per_mol / rt) / z;
    const double k1 = sys.aging.crate_coeff_j_per_mol / (rt * z);
    const double q_pow =
        sol.frozen_q_loss > 0.0 ? std::pow(sol.frozen_q_loss, (z - 1.0) / z) : 0.0;
    const auto frozen_dq = [&](double i_cell) {
        if (i_cell == 0.0) return 0.0;
        const double c_rate = std::abs(i_cell) / bat.capacity_cell_ah;
        const double d_ah = std::abs(i_cell) * dt / 3600.0;
        if (sol.frozen_q_loss > 0.0) return z * q_pow * d_ah * std::exp(k0 + k1 * c_rate);
        return std::exp(z * (k0 + k1 * c_rate)) * std::pow(d_ah, z);
    };

    const double price_q = bat.pack_capacity_ah() * cost.price_capacity_loss_usd_per_ah;
    const double price_e = cost.price_electricity_usd_per_kwh / 3.6e6;

    // Stage tables: the stage cost splits into a battery part over
    // (soc_bat, control) and a supercapacitor part over (soc_sc, control).
    std::vector<double> bat_cost(nb * nu), sc_cost(ns * nu);
    std::vector<AxisPos> bat_pos(nb * nu), sc_pos(ns * nu);
    std::vector<double> abs_u(nu);
    for (std::size_t iu = 0; iu < nu; ++iu) abs_u[iu] = std::abs(grid.control_w[iu]);

    for (std::size_t k = N; k-- > 0;) {
        const double p_d = profile.demand_w[k];

        for (std::size_t ib = 0; ib < nb; ++ib) {
            for (std::size_t iu = 0; iu < nu; ++iu) {
                const std::size_t idx = ib * nu + iu;
                const double p_cell = (p_d - grid.control_w[iu]) / bat.cell_count();
                const auto i = hess::current_for_terminal_power(ocv_b[ib], r_cell_b[ib], p_cell);
                if (!i || *i < bat.current_min_cell_a || *i > bat.current_max_cell_a) {
                    bat_cost[idx] = kInf;
                    continue;
                }
                const double next_sb =
                    grid.soc_bat_axis[ib] - *i * dt / (3600.0 * bat.capacity_cell_ah);
                const double sigma = std::max(0.0, bat.soc_min - next_sb) +
                                     std::max(0.0, next_sb - bat.soc_max);
                const double loss_w = bat.parallel_count * *i * *i * r_ser_b[ib];
                bat_cost[idx] = frozen_dq(*i) * price_q + loss_w * dt * price_e +
                                cost.slack_weight_bat * sigma;
                bat_pos[idx] = locate(grid.soc_bat_axis, next_sb);
            }
        }
        for (std::size_t is = 0; is < ns; ++is) {
            for (std::size_t iu = 0; iu < nu; ++iu) {
                const std::size_t idx = is * nu + iu;
                const double p_cell = grid.control_w[iu] / sc.cell_count();
                const auto i =
                    hess::current_for_terminal_power(ocv_s[is], sc.resistance_cell_ohm, p_cell);
                if (!i || *i < sc.current_min_cell_a || *i > sc.current_max_cell_a) {
                    sc_cost[idx] = kInf;
                    continue;
                }
                const double next_ss =
                    grid.soc_sc_axis[is] -
                    *i * dt / (sc.capacitance_cell_f * sc.max_voltage_cell_v);
                const double sigma = std::max(0.0, sc.soc_min - next_ss) +
                                     std::max(0.0, next_ss - sc.soc_max);
                const double loss_w =
                    sc.parallel_count * *i * *i * sc.series_resistance_ohm();
                sc_cost[idx] =
                    loss_w * dt * price_e + cost.slack_weight_sc * sigma;
                sc_pos[idx] = locate(grid.soc_sc_axis, next_ss);
            }
        }

        double* vk = &sol.value[k * nb * ns];
        std::uint16_t* pk = &sol.policy[k * nb * ns];
        const double* vnext = k + 1 < N ? &sol.value[(k + 1) * nb * ns] : nullptr;
        for (std::size_t ib = 0; ib < nb; ++ib) {
            const double* bc_row = &bat_cost[ib * nu];
            const AxisPos* bp_row = &bat_pos[ib * nu];
            for (std::size_t is = 0; is < ns; ++is) {
                const double* sc_row = &sc_cost[is * nu];
                const AxisPos* sp_row = &sc_pos[is * nu];
                double best = kInf;
                double best_abs_u = kInf;
                std::uint16_t best_iu = DPSolution::kInfeasible;
                for (std::size_t iu = 0; iu < nu; ++iu) {
                    const double bc = bc_row[iu];
                    if (bc == kInf) continue;
                    const double scc = sc_row[iu];
                    if (scc == kInf) continue;
                    double c = bc + scc;
                    if (vnext) {
                        const double cont = bilinear(vnext, ns, bp_row[iu], sp_row[iu]);
                        if (cont == kInf) continue;
                        c += cont;
                    }
                    if (c < best || (c == best && abs_u[iu] < best_abs_u)) {
                        best = c;
                        best_abs_u = abs_u[iu];
                        best_iu = static_cast<std::uint16_t>(iu);
                    }
                }
                vk[ib * ns + is] = best;
                pk[ib * ns + is] = best_iu;
            }
        }
    }

    if (sol.interp_value(0, init.soc_bat, init.soc_sc) == kInf)
        throw InfeasibleProblem("dp: no feasible control sequence from the initial state");
    return sol;
}

Trajectory rollout(const DPSolution& solution, const vehicle::PowerProfile& profile,
                   const hess::HessState& init, const CostParams& cost,
                   const HessSystem& sys) {
    require(profile.demand_w.size() == solution.horizon,
            "rollout profile length must match the solution horizon");
    const std::size_t N = solution.horizon;
    const std::vector<double>& controls = solution.grid.control_w;
    const double dt = cost.sample_period_s;

    Trajectory traj;
    traj.steps.reserve(N);
    hess::HessState state = init;
    for (std::size_t k = 0; k < N; ++k) {
        const double p_d = profile.demand_w[k];
        double best = kInf;
        double best_abs_u = kInf;
        double best_u = 0.0;
        StageResult best_r;
        for (double u : controls) {
            const StageResult r = stage_cost(state, u, p_d, cost, sys);
            if (!r.feasible) continue;
            const double cont = solution.interp_value(k + 1, r.next.soc_bat, r.next.soc_sc);
            if (cont == kInf) continue;
            const double c = r.cost_usd + cont;
            const double au = std::abs(u);
            if (c < best || (c == best && au < best_abs_u)) {
                best = c;
                best_abs_u = au;
                best_u = u;
                best_r = r;
            }
        }
        if (best == kInf)
            throw RolloutInfeasible("rollout: no feasible control at step " + std::to_string(k),
                                    k);
        append_step(traj, static_cast<double>(k) * dt, p_d, best_u, best_r);
        state = best_r.next;
    }
    finalize_totals(traj);
    return traj;
}

OracleResult exhaustive_oracle(const vehicle::PowerProfile& profile, const Grid& grid,
                               const hess::HessState& init, const CostParams& cost,
                               const HessSystem& sys) {
    require(!profile.demand_w.empty(), "profile must be non-empty");
    grid.validate();
    const std::size_t N = profile.demand_w.size();
    const std::size_t nu = grid.control_w.size();
    double sequences = 1.0;
    for (std::size_t k = 0; k < N; ++k) {
        sequences *= static_cast<double>(nu);
        if (sequences > 1e7)
            throw OracleRefusal("exhaustive oracle: instance exceeds 10^7 control sequences");
    }

    // Controls in |p_sc| order so the first strict minimum found is also
    // the per-step smallest-|p_sc| tie resolution.
    std::vector<std::size_t> order(nu);
    for (std::size_t i = 0; i < nu; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double aa = std::abs(grid.control_w[a]);
        const double ab = std::abs(grid.control_w[b]);
        if (aa != ab) return aa < ab;
        return grid.control_w[a] < grid.control_w[b];
    });

    double best = kInf;
    std::vector<std::size_t> current(N), best_seq;
    const std::function<void(std::size_t, const hess::HessState&, double)> search =
        [&](std::size_t k, const hess::HessState& state, double partial) {
            if (partial >= best) return;  // stage costs are non-negative
            if (k == N) {
                best = partial;
                best_seq = current;
                return;
            }
            for (std::size_t idx : order) {
                const StageResult r =
                    stage_cost(state, grid.control_w[idx], profile.demand_w[k], cost, sys);
                if (!r.feasible) continue;
                current[k] = idx;
                search(k + 1, r.next, partial + r.cost_usd);
            }
        };
    search(0, init, 0.0);
    if (best_seq.empty() && best == kInf)
        throw InfeasibleProblem("exhaustive oracle: no feasible control sequence");

    OracleResult out;
    out.controls_w.reserve(N);
    hess::HessState state = init;
    const double dt = cost.sample_period_s;
    for (std::size_t k = 0; k < N; ++k) {
        const double u = grid.control_w[best_seq[k]];
        const StageResult r = stage_cost(state, u, profile.demand_w[k], cost, sys);
        append_step(out.trajectory, static_cast<double>(k) * dt, profile.demand_w[k], u, r);
        out.controls_w.push_back(u);
        state = r.next;
    }
    finalize_totals(out.trajectory);
    out.total_usd = out.trajectory.totals.total_usd;
    return out;
}

}  // namespace hessems::dp
