#pragma once

#include <vector>

#include "hessems/dpcore.hpp"
#include "hessems/rng.hpp"
#include "hessems/vehicle.hpp"

namespace hessems::testsupport {

inline dp::HessSystem default_system() { return dp::HessSystem{}; }

struct TinyInstance {
    vehicle::PowerProfile profile;
    dp::Grid grid;
    hess::HessState init;
    dp::CostParams cost;
    dp::HessSystem sys;
};

/// Randomized small DP instance: horizon <= 5, grid <= 7x7, <= 9
/// controls, demands well inside the combined pack capability, initial
/// state inside both windows. The state axes cover the set reachable
/// over the horizon with cells small against the per-step SOC motion,
/// so the interpolated cost-to-go ranks controls the way the exact one
/// does and brute force is a meaningful ground truth.
inline TinyInstance make_tiny_instance(Rng& rng) {
    TinyInstance t;
    t.sys = default_system();
    t.cost = dp::CostParams{};

    const int horizon = rng.uniform_int(2, 5);
    t.profile.load_factor = 0.5;
    t.profile.source_cycle_id = "tiny";
    for (int k = 0; k < horizon; ++k)
        t.profile.demand_w.push_back(rng.uniform(-40e3, 100e3));

    const int nb = rng.uniform_int(5, 7);
    const int ns = rng.uniform_int(5, 7);
    const int nu = rng.uniform_int(5, 9);
    const double bat_center = rng.uniform(0.45, 0.70);
    const double sc_center = rng.uniform(0.66, 0.88);
    t.grid.soc_bat_axis =
        dp::make_axis_n(bat_center - 0.06, bat_center + 0.06, static_cast<std::size_t>(nb));
    t.grid.soc_sc_axis =
        dp::make_axis_n(sc_center - 0.08, sc_center + 0.08, static_cast<std::size_t>(ns));
    t.grid.control_w = dp::make_axis_n(-65e3, 65e3, static_cast<std::size_t>(nu));

    t.init.soc_bat = bat_center + rng.uniform(-0.02, 0.02);
    t.init.soc_sc = sc_center + rng.uniform(-0.02, 0.02);
    t.init.q_loss = rng.uniform(1e-4, 1e-2);
    t.init.ah_throughput_ah = 0.0;
    return t;
}

}  // namespace hessems::testsupport
