#pragma once

#include <cstdint>
#include <string>

#include "hessems/control.hpp"
#include "hessems/dpcore.hpp"
#include "hessems/vehicle.hpp"

namespace hessems::io {

struct GridSpec {
    double soc_bat_min = 0.08;
    double soc_bat_max = 0.92;
    double soc_bat_step = 0.005;
    double soc_sc_min = 0.45;
    double soc_sc_max = 1.00;
    double soc_sc_step = 0.01;
    double control_min_w = -250e3;
    double control_max_w = 250e3;
    int control_levels = 101;
};

struct PredictParams {
    int rt_max_depth = 8;
    int rt_min_leaf = 5;
    double rt_min_impurity_decrease = 1e-4;
    int gbdt_trees = 100;
    double gbdt_learning_rate = 0.1;
    int gbdt_max_depth = 3;
    int nn_epochs = 200;
    double nn_learning_rate = 0.01;
    int nn_hidden1 = 32;
    int nn_hidden2 = 16;
    int nn_weather_onehot = 4;
    int holdout_days = 7;
};

/// Flat `key = value` configuration covering every tunable in the
/// toolkit. Defaults reproduce the documented bus, pack, price and
/// solver settings; any key may be overridden from file or CLI.
struct Config {
    vehicle::VehicleParams vehicle;
    dp::HessSystem sys;
    dp::CostParams cost;
    GridSpec grid;
    PredictParams predict;
    control::EmsConfig ems;
    double init_soc_bat = 0.60;
    double init_soc_sc = 0.75;
    double init_q_loss = 0.0;
    std::uint64_t seed = 42;
    std::string battery_curve_file;  // optional csv: soc,ocv_v,r_ohm

    // Throws std::invalid_argument with a field-specific message.
    void validate() const;
    dp::Grid make_grid() const;
    hess::HessState initial_state() const;
    control::StrategyContext strategy_context() const;
};

Config load_config(const std::string& path);

/// Applies one `section.key=value` assignment; unknown keys or malformed
/// values throw with the offending key in the message.
void apply_setting(Config& cfg, const std::string& key, const std::string& value);

/// All recognized keys with their current values, in file format.
std::string dump_config(const Config& cfg);

}  // namespace hessems::io
