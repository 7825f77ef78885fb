#include "hessems/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "hessems/csv_io.hpp"

namespace hessems::io {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': bad number '" + value + "'");
    }
}

long long to_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': bad integer '" + value + "'");
    }
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

// Flat dispatcher: every key, its target and its parser on one line each.
void apply_setting(Config& cfg, const std::string& key, const std::string& value) {
    const auto d = [&](double& target) { target = to_double(key, value); };
    const auto i = [&](int& target) { target = static_cast<int>(to_int(key, value)); };

    auto& veh = cfg.vehicle;
    auto& bat = cfg.sys.battery;
    auto& aging = cfg.sys.aging;
    auto& sc = cfg.sys.supercap;
    auto& cost = cfg.cost;
    auto& grid = cfg.grid;
    auto& pred = cfg.predict;
    auto& ems = cfg.ems;

    if (key == "vehicle.empty_mass_kg") d(veh.empty_mass_kg);
    else if (key == "vehicle.person_mass_kg") d(veh.person_mass_kg);
    else if (key == "vehicle.max_passengers") d(veh.max_passengers);
    else if (key == "vehicle.gravity_mps2") d(veh.gravity_mps2);
    else if (key == "vehicle.frontal_area_m2") d(veh.frontal_area_m2);
    else if (key == "vehicle.rolling_coeff") d(veh.rolling_coeff);
    else if (key == "vehicle.drag_coeff") d(veh.drag_coeff);
    else if (key == "vehicle.air_density_kgpm3") d(veh.air_density_kgpm3);
    else if (key == "vehicle.eta_transmission") d(veh.eta_transmission);
    else if (key == "vehicle.eta_machine") d(veh.eta_machine);
    else if (key == "vehicle.eta_regen") d(veh.eta_regen);
    else if (key == "battery.capacity_cell_ah") d(bat.capacity_cell_ah);
    else if (key == "battery.stored_energy_cell_kwh") d(bat.stored_energy_cell_kwh);
    else if (key == "battery.soc_min") d(bat.soc_min);
    else if (key == "battery.soc_max") d(bat.soc_max);
    else if (key == "battery.series_count") i(bat.series_count);
    else if (key == "battery.parallel_count") i(bat.parallel_count);
    else if (key == "battery.current_min_cell_a") d(bat.current_min_cell_a);
    else if (key == "battery.current_max_cell_a") d(bat.current_max_cell_a);
    else if (key == "battery.ocv_soc0_v") {
        bat.ocv_curve.value.front() = to_double(key, value);
    } else if (key == "battery.ocv_soc1_v") {
        bat.ocv_curve.value.back() = to_double(key, value);
    } else if (key == "battery.resistance_cell_ohm") {
        bat.resistance_curve = hess::make_constant_curve(to_double(key, value));
    } else if (key == "battery.curve_file") {
        cfg.battery_curve_file = value;
    }
    else if (key == "aging.prefactor") d(aging.prefactor);
    else if (key == "aging.activation_base_j_per_mol") d(aging.activation_base_j_per_mol);
    else if (key == "aging.crate_coeff_j_per_mol") d(aging.crate_coeff_j_per_mol);
    else if (key == "aging.gas_constant") d(aging.gas_constant);
    else if (key == "aging.power_exponent_z") d(aging.power_exponent_z);
    else if (key == "aging.temperature_k") d(aging.temperature_k);
    else if (key == "supercap.max_voltage_cell_v") d(sc.max_voltage_cell_v);
    else if (key == "supercap.capacitance_cell_f") d(sc.capacitance_cell_f);
    else if (key == "supercap.stored_energy_cell_kwh") d(sc.stored_energy_cell_kwh);
    else if (key == "supercap.soc_min") d(sc.soc_min);
    else if (key == "supercap.soc_max") d(sc.soc_max);
    else if (key == "supercap.resistance_cell_ohm") d(sc.resistance_cell_ohm);
    else if (key == "supercap.series_count") i(sc.series_count);
    else if (key == "supercap.parallel_count") i(sc.parallel_count);
    else if (key == "supercap.current_min_cell_a") d(sc.current_min_cell_a);
    else if (key == "supercap.current_max_cell_a") d(sc.current_max_cell_a);
    else if (key == "cost.price_capacity_loss_usd_per_ah") d(cost.price_capacity_loss_usd_per_ah);
    else if (key == "cost.price_electricity_usd_per_kwh") d(cost.price_electricity_usd_per_kwh);
    else if (key == "cost.slack_weight_bat") d(cost.slack_weight_bat);
    else if (key == "cost.slack_weight_sc") d(cost.slack_weight_sc);
    else if (key == "cost.sample_period_s") d(cost.sample_period_s);
    else if (key == "grid.soc_bat_min") d(grid.soc_bat_min);
    else if (key == "grid.soc_bat_max") d(grid.soc_bat_max);
    else if (key == "grid.soc_bat_step") d(grid.soc_bat_step);
    else if (key == "grid.soc_sc_min") d(grid.soc_sc_min);
    else if (key == "grid.soc_sc_max") d(grid.soc_sc_max);
    else if (key == "grid.soc_sc_step") d(grid.soc_sc_step);
    else if (key == "grid.control_min_w") d(grid.control_min_w);
    else if (key == "grid.control_max_w") d(grid.control_max_w);
    else if (key == "grid.control_levels") i(grid.control_levels);
    else if (key == "predict.rt_max_depth") i(pred.rt_max_depth);
    else if (key == "predict.rt_min_leaf") i(pred.rt_min_leaf);
    else if (key == "predict.rt_min_impurity_decrease") d(pred.rt_min_impurity_decrease);
    else if (key == "predict.gbdt_trees") i(pred.gbdt_trees);
    else if (key == "predict.gbdt_learning_rate") d(pred.gbdt_learning_rate);
    else if (key == "predict.gbdt_max_depth") i(pred.gbdt_max_depth);
    else if (key == "predict.nn_epochs") i(pred.nn_epochs);
    else if (key == "predict.nn_learning_rate") d(pred.nn_learning_rate);
    else if (key == "predict.nn_hidden1") i(pred.nn_hidden1);
    else if (key == "predict.nn_hidden2") i(pred.nn_hidden2);
    else if (key == "predict.nn_weather_onehot") i(pred.nn_weather_onehot);
    else if (key == "predict.holdout_days") i(pred.holdout_days);
    else if (key == "ems.horizon_s") d(ems.horizon_s);
    else if (key == "ems.replan_period_s") d(ems.replan_period_s);
    else if (key == "ems.apply_fraction") d(ems.apply_fraction);
    else if (key == "ems.sc_buffer") d(ems.sc_buffer);
    else if (key == "ems.rule_load_factor") d(ems.rule_load_factor);
    else if (key == "init.soc_bat") d(cfg.init_soc_bat);
    else if (key == "init.soc_sc") d(cfg.init_soc_sc);
    else if (key == "init.q_loss") d(cfg.init_q_loss);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_int(key, value));
    else throw std::invalid_argument("unknown config key '" + key + "'");
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    Config cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                        ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            apply_setting(cfg, key, value);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!cfg.battery_curve_file.empty()) {
        auto [ocv, resistance] = read_battery_curve_csv(cfg.battery_curve_file);
        cfg.sys.battery.ocv_curve = std::move(ocv);
        cfg.sys.battery.resistance_curve = std::move(resistance);
    }
    cfg.validate();
    return cfg;
}

void Config::validate() const {
    vehicle.validate();
    sys.validate();
    cost.validate();
    ems.validate();
    require(grid.soc_bat_min >= 0.0 && grid.soc_bat_max <= 1.0 &&
                grid.soc_bat_min < grid.soc_bat_max,
            "grid.soc_bat window must satisfy 0 <= min < max <= 1");
    require(grid.soc_sc_min >= 0.0 && grid.soc_sc_max <= 1.0 && grid.soc_sc_min < grid.soc_sc_max,
            "grid.soc_sc window must satisfy 0 <= min < max <= 1");
    require(grid.soc_bat_step > 0.0 && grid.soc_sc_step > 0.0,
            "grid steps must be positive");
    require(grid.control_min_w < grid.control_max_w, "grid.control window must be non-empty");
    require(grid.control_levels >= 2, "grid.control_levels must be >= 2");
    require(predict.rt_max_depth >= 1, "predict.rt_max_depth must be >= 1");
    require(predict.rt_min_leaf >= 1, "predict.rt_min_leaf must be >= 1");
    require(predict.rt_min_impurity_decrease >= 0.0,
            "predict.rt_min_impurity_decrease must be >= 0");
    require(predict.gbdt_trees >= 0, "predict.gbdt_trees must be >= 0");
    require(predict.gbdt_learning_rate > 0.0 && predict.gbdt_learning_rate <= 1.0,
            "predict.gbdt_learning_rate must be in (0, 1]");
    require(predict.gbdt_max_depth >= 1, "predict.gbdt_max_depth must be >= 1");
    require(predict.nn_epochs >= 0, "predict.nn_epochs must be >= 0");
    require(predict.nn_learning_rate > 0.0, "predict.nn_learning_rate must be positive");
    require(predict.nn_hidden1 >= 1 && predict.nn_hidden2 >= 1,
            "predict.nn hidden widths must be >= 1");
    require(predict.nn_weather_onehot >= 1 && predict.nn_weather_onehot <= 32,
            "predict.nn_weather_onehot must be in [1, 32]");
    require(predict.holdout_days >= 1, "predict.holdout_days must be >= 1");
    require(init_soc_bat >= 0.0 && init_soc_bat <= 1.0, "init.soc_bat must be in [0, 1]");
    require(init_soc_sc >= 0.0 && init_soc_sc <= 1.0, "init.soc_sc must be in [0, 1]");
    require(init_q_loss >= 0.0, "init.q_loss must be >= 0");
    // The receding-horizon loop needs whole blocks.
    const double ratio = ems.horizon_s / ems.replan_period_s;
    require(std::abs(ratio - std::round(ratio)) < 1e-9,
            "ems.replan_period_s must divide ems.horizon_s");
}

dp::Grid Config::make_grid() const {
    dp::Grid g;
    g.soc_bat_axis = dp::make_axis(grid.soc_bat_min, grid.soc_bat_max, grid.soc_bat_step);
    g.soc_sc_axis = dp::make_axis(grid.soc_sc_min, grid.soc_sc_max, grid.soc_sc_step);
    g.control_w = dp::make_axis_n(grid.control_min_w, grid.control_max_w,
                                  static_cast<std::size_t>(grid.control_levels));
    g.validate();
    return g;
}

hess::HessState Config::initial_state() const {
    hess::HessState s;
    s.soc_bat = init_soc_bat;
    s.soc_sc = init_soc_sc;
    s.q_loss = init_q_loss;
    s.ah_throughput_ah = 0.0;
    return s;
}

control::StrategyContext Config::strategy_context() const {
    control::StrategyContext ctx;
    ctx.vehicle = vehicle;
    ctx.sys = sys;
    ctx.cost = cost;
    ctx.grid = make_grid();
    ctx.ems = ems;
    return ctx;
}

std::string dump_config(const Config& cfg) {
    std::ostringstream out;
    const auto put = [&](const char* key, const std::string& value) {
        out << key << " = " << value << "\n";
    };
    put("vehicle.empty_mass_kg", num(cfg.vehicle.empty_mass_kg));
    put("vehicle.person_mass_kg", num(cfg.vehicle.person_mass_kg));
    put("vehicle.max_passengers", num(cfg.vehicle.max_passengers));
    put("vehicle.gravity_mps2", num(cfg.vehicle.gravity_mps2));
    put("vehicle.frontal_area_m2", num(cfg.vehicle.frontal_area_m2));
    put("vehicle.rolling_coeff", num(cfg.vehicle.rolling_coeff));
    put("vehicle.drag_coeff", num(cfg.vehicle.drag_coeff));
    put("vehicle.air_density_kgpm3", num(cfg.vehicle.air_density_kgpm3));
    put("vehicle.eta_transmission", num(cfg.vehicle.eta_transmission));
    put("vehicle.eta_machine", num(cfg.vehicle.eta_machine));
    put("vehicle.eta_regen", num(cfg.vehicle.eta_regen));
    put("battery.capacity_cell_ah", num(cfg.sys.battery.capacity_cell_ah));
    put("battery.stored_energy_cell_kwh", num(cfg.sys.battery.stored_energy_cell_kwh));
    put("battery.soc_min", num(cfg.sys.battery.soc_min));
    put("battery.soc_max", num(cfg.sys.battery.soc_max));
    put("battery.series_count", std::to_string(cfg.sys.battery.series_count));
    put("battery.parallel_count", std::to_string(cfg.sys.battery.parallel_count));
    put("battery.current_min_cell_a", num(cfg.sys.battery.current_min_cell_a));
    put("battery.current_max_cell_a", num(cfg.sys.battery.current_max_cell_a));
    put("battery.ocv_soc0_v", num(cfg.sys.battery.ocv_curve.value.front()));
    put("battery.ocv_soc1_v", num(cfg.sys.battery.ocv_curve.value.back()));
    put("battery.resistance_cell_ohm", num(cfg.sys.battery.resistance_curve.value.front()));
    put("aging.prefactor", num(cfg.sys.aging.prefactor));
    put("aging.activation_base_j_per_mol", num(cfg.sys.aging.activation_base_j_per_mol));
    put("aging.crate_coeff_j_per_mol", num(cfg.sys.aging.crate_coeff_j_per_mol));
    put("aging.gas_constant", num(cfg.sys.aging.gas_constant));
    put("aging.power_exponent_z", num(cfg.sys.aging.power_exponent_z));
    put("aging.temperature_k", num(cfg.sys.aging.temperature_k));
    put("supercap.max_voltage_cell_v", num(cfg.sys.supercap.max_voltage_cell_v));
    put("supercap.capacitance_cell_f", num(cfg.sys.supercap.capacitance_cell_f));
    put("supercap.stored_energy_cell_kwh", num(cfg.sys.supercap.stored_energy_cell_kwh));
    put("supercap.soc_min", num(cfg.sys.supercap.soc_min));
    put("supercap.soc_max", num(cfg.sys.supercap.soc_max));
    put("supercap.resistance_cell_ohm", num(cfg.sys.supercap.resistance_cell_ohm));
    put("supercap.series_count", std::to_string(cfg.sys.supercap.series_count));
    put("supercap.parallel_count", std::to_string(cfg.sys.supercap.parallel_count));
    put("supercap.current_min_cell_a", num(cfg.sys.supercap.current_min_cell_a));
    put("supercap.current_max_cell_a", num(cfg.sys.supercap.current_max_cell_a));
    put("cost.price_capacity_loss_usd_per_ah", num(cfg.cost.price_capacity_loss_usd_per_ah));
    put("cost.price_electricity_usd_per_kwh", num(cfg.cost.price_electricity_usd_per_kwh));
    put("cost.slack_weight_bat", num(cfg.cost.slack_weight_bat));
    put("cost.slack_weight_sc", num(cfg.cost.slack_weight_sc));
    put("cost.sample_period_s", num(cfg.cost.sample_period_s));
    put("grid.soc_bat_min", num(cfg.grid.soc_bat_min));
    put("grid.soc_bat_max", num(cfg.grid.soc_bat_max));
    put("grid.soc_bat_step", num(cfg.grid.soc_bat_step));
    put("grid.soc_sc_min", num(cfg.grid.soc_sc_min));
    put("grid.soc_sc_max", num(cfg.grid.soc_sc_max));
    put("grid.soc_sc_step", num(cfg.grid.soc_sc_step));
    put("grid.control_min_w", num(cfg.grid.control_min_w));
    put("grid.control_max_w", num(cfg.grid.control_max_w));
    put("grid.control_levels", std::to_string(cfg.grid.control_levels));
    put("predict.rt_max_depth", std::to_string(cfg.predict.rt_max_depth));
    put("predict.rt_min_leaf", std::to_string(cfg.predict.rt_min_leaf));
    put("predict.rt_min_impurity_decrease", num(cfg.predict.rt_min_impurity_decrease));
    put("predict.gbdt_trees", std::to_string(cfg.predict.gbdt_trees));
    put("predict.gbdt_learning_rate", num(cfg.predict.gbdt_learning_rate));
    put("predict.gbdt_max_depth", std::to_string(cfg.predict.gbdt_max_depth));
    put("predict.nn_epochs", std::to_string(cfg.predict.nn_epochs));
    put("predict.nn_learning_rate", num(cfg.predict.nn_learning_rate));
    put("predict.nn_hidden1", std::to_string(cfg.predict.nn_hidden1));
    put("predict.nn_hidden2", std::to_string(cfg.predict.nn_hidden2));
    put("predict.nn_weather_onehot", std::to_string(cfg.predict.nn_weather_onehot));
    put("predict.holdout_days", std::to_string(cfg.predict.holdout_days));
    put("ems.horizon_s", num(cfg.ems.horizon_s));
    put("ems.replan_period_s", num(cfg.ems.replan_period_s));
    put("ems.apply_fraction", num(cfg.ems.apply_fraction));
    put("ems.sc_buffer", num(cfg.ems.sc_buffer));
    put("ems.rule_load_factor", num(cfg.ems.rule_load_factor));
    put("init.soc_bat", num(cfg.init_soc_bat));
    put("init.soc_sc", num(cfg.init_soc_sc));
    put("init.q_loss", num(cfg.init_q_loss));
    put("seed", std::to_string(cfg.seed));
    if (!cfg.battery_curve_file.empty()) put("battery.curve_file", cfg.battery_curve_file);
    return out.str();
}

}  // namespace hessems::io
