#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hessems/config.hpp"
#include "hessems/control.hpp"
#include "hessems/csv_io.hpp"
#include "hessems/dpcore.hpp"
#include "hessems/predict.hpp"
#include "hessems/synth.hpp"
#include "hessems/vehicle.hpp"

namespace hessems::cli {

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    double horizon_s = 0.0;
    bool horizon_set = false;
    double replan_s = 0.0;
    bool replan_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "configuration file (key = value)");
    cmd->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", opts.seed, "override the configured random seed")
        ->each([&](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--horizon", opts.horizon_s, "override ems.horizon_s (seconds)")
        ->each([&](const std::string&) { opts.horizon_set = true; });
    cmd->add_option("--replan", opts.replan_s, "override ems.replan_period_s (seconds)")
        ->each([&](const std::string&) { opts.replan_set = true; });
}

io::Config make_config(const CommonOpts& opts) {
    io::Config cfg;
    if (!opts.config_path.empty()) cfg = io::load_config(opts.config_path);
    if (opts.seed_set) cfg.seed = opts.seed;
    if (opts.horizon_set) cfg.ems.horizon_s = opts.horizon_s;
    if (opts.replan_set) cfg.ems.replan_period_s = opts.replan_s;
    if (opts.horizon_set || opts.replan_set)
        cfg.ems.apply_fraction = cfg.ems.replan_period_s / cfg.ems.horizon_s;
    cfg.validate();
    return cfg;
}

fs::path out_file(const CommonOpts& opts, const std::string& name) {
    fs::create_directories(opts.out_dir);
    return fs::path(opts.out_dir) / name;
}

void print_totals(const std::string& label, const dp::CostBreakdown& totals) {
    std::printf("%-10s total %.6f USD (aging %.6f, electric %.6f, penalty %.6f)\n",
                label.c_str(), totals.total_usd, totals.aging_usd, totals.electric_usd,
                totals.penalty_usd);
}

// ---------------------------------------------------------------------------
// Passenger pipeline shared by predict / compare / simulate-cloud

struct LoadPipeline {
    std::vector<predict::LoadRecord> train_records;
    std::vector<predict::LoadRecord> test_records;
    std::vector<predict::WeatherRecord> weather;
    predict::LoadDataset train;
    std::vector<predict::Date> test_dates;  // chronological
    double normalization_max = 0.0;
};

LoadPipeline split_and_normalize(const std::string& passengers_path,
                                 const std::string& weather_path, int holdout_days) {
    LoadPipeline p;
    auto records = io::read_passengers_csv(passengers_path);
    p.weather = io::read_weather_csv(weather_path);
    if (records.empty()) throw std::runtime_error(passengers_path + ": no records");

    std::set<long> dates;
    for (const auto& r : records) dates.insert(predict::days_from_epoch(r.date));
    if (static_cast<int>(dates.size()) <= holdout_days)
        throw std::runtime_error("not enough days to hold out the final " +
                                 std::to_string(holdout_days));
    std::vector<long> sorted(dates.begin(), dates.end());
    const long first_test = sorted[sorted.size() - static_cast<std::size_t>(holdout_days)];
    for (const auto& r : records)
        (predict::days_from_epoch(r.date) >= first_test ? p.test_records : p.train_records)
            .push_back(r);
    for (std::size_t i = sorted.size() - static_cast<std::size_t>(holdout_days);
         i < sorted.size(); ++i)
        p.test_dates.push_back(predict::date_from_epoch(sorted[i]));

    p.train = predict::normalize(p.train_records, p.weather);
    p.normalization_max = p.train.normalization_max;
    return p;
}

predict::FeatureVector features_for(const std::vector<predict::WeatherRecord>& weather,
                                    const predict::Date& date, int hour) {
    for (const auto& w : weather)
        if (w.date == date)
            return predict::FeatureVector{predict::day_of_week(date), hour, w.weather_code,
                                          w.temp_high_c, w.temp_low_c, w.wind_level,
                                          w.is_holiday};
    throw std::runtime_error("no weather row for date " + predict::to_string(date));
}

long count_for(const std::vector<predict::LoadRecord>& records, const predict::Date& date,
               int hour) {
    for (const auto& r : records)
        if (r.date == date && r.hour == hour) return r.passenger_count;
    throw std::runtime_error("no passenger record for " + predict::to_string(date) + " hour " +
                             std::to_string(hour));
}

struct CloudScenario {
    control::HourlyScenario scenario;
    predict::Predictor model;
    double true_load = 0.0;
    double predicted_load = 0.0;
};

CloudScenario build_cloud_scenario(const io::Config& cfg, const std::string& passengers_path,
                                   const std::string& weather_path, const predict::Date& date,
                                   int hour) {
    const LoadPipeline p =
        split_and_normalize(passengers_path, weather_path, cfg.predict.holdout_days);
    CloudScenario s;
    s.model = predict::train_gbdt(p.train, cfg.predict.gbdt_trees,
                                  cfg.predict.gbdt_learning_rate, cfg.predict.gbdt_max_depth);
    long count = 0;
    try {
        count = count_for(p.test_records, date, hour);
    } catch (const std::runtime_error&) {
        count = count_for(p.train_records, date, hour);
    }
    const double raw = static_cast<double>(count) / p.normalization_max;
    s.true_load = std::min(1.0, raw);
    s.scenario.start_hour = hour;
    s.scenario.true_load_by_hour[hour] = s.true_load;
    s.scenario.features_by_hour[hour] = features_for(p.weather, date, hour);
    s.predicted_load = std::min(
        1.0, predict::clamp_load_factor(predict::predict(s.model, s.scenario.features_by_hour[hour])));
    return s;
}

// ---------------------------------------------------------------------------
// Subcommand bodies

int cmd_synth_cycle(const CommonOpts& opts, std::uint64_t seed, int duration, double max_speed,
                    const std::string& out) {
    const auto cycle = io::synth_cycle(seed, duration, max_speed);
    fs::create_directories(fs::path(out).parent_path().empty() ? "." : fs::path(out).parent_path().string());
    io::write_cycle_csv(cycle, out);
    std::printf("wrote %zu samples to %s\n", cycle.samples.size(), out.c_str());
    (void)opts;
    return 0;
}

int cmd_synth_passengers(std::uint64_t seed, const std::string& start, const std::string& end,
                         const std::string& out_passengers, const std::string& out_weather) {
    const auto data =
        io::synth_passengers(seed, predict::parse_date(start), predict::parse_date(end));
    io::write_passengers_csv(data.records, out_passengers);
    io::write_weather_csv(data.weather, out_weather);
    std::printf("wrote %zu hourly records to %s and %zu weather rows to %s\n",
                data.records.size(), out_passengers.c_str(), data.weather.size(),
                out_weather.c_str());
    return 0;
}

int cmd_predict(const CommonOpts& opts, const std::string& passengers_path,
                const std::string& weather_path, const std::string& save_dir) {
    const io::Config cfg = make_config(opts);
    const LoadPipeline p =
        split_and_normalize(passengers_path, weather_path, cfg.predict.holdout_days);

    std::map<std::string, predict::Predictor> models;
    models.emplace("average", predict::train_average(p.train));
    models.emplace("rt", predict::train_regression_tree(p.train, cfg.predict.rt_max_depth,
                                                        cfg.predict.rt_min_leaf,
                                                        cfg.predict.rt_min_impurity_decrease));
    models.emplace("gbdt",
                   predict::train_gbdt(p.train, cfg.predict.gbdt_trees,
                                       cfg.predict.gbdt_learning_rate,
                                       cfg.predict.gbdt_max_depth));
    models.emplace("nn", predict::train_nn(p.train, cfg.predict.nn_epochs,
                                           cfg.predict.nn_learning_rate, cfg.seed,
                                           cfg.predict.nn_hidden1, cfg.predict.nn_hidden2,
                                           cfg.predict.nn_weather_onehot));

    static const char* kDayNames[7] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};
    const fs::path csv_path = out_file(opts, "rmse.csv");
    std::ofstream csv(csv_path);
    csv << "model";
    for (const auto& d : p.test_dates) csv << "," << kDayNames[predict::day_of_week(d)];
    csv << ",total,variance\n";

    std::printf("%-8s", "model");
    for (const auto& d : p.test_dates) std::printf(" %8s", kDayNames[predict::day_of_week(d)]);
    std::printf(" %8s %9s   (load-factor RMSE x100)\n", "total", "variance");

    const std::vector<std::string> order = {"rt", "gbdt", "nn", "average"};
    for (const auto& name : order) {
        const auto& model = models.at(name);
        std::vector<double> daily;
        std::vector<double> week_true, week_pred;
        for (const auto& date : p.test_dates) {
            std::vector<double> y_true, y_pred;
            for (const auto& r : p.test_records) {
                if (!(r.date == date)) continue;
                const auto x = features_for(p.weather, date, r.hour);
                y_true.push_back(static_cast<double>(r.passenger_count) / p.normalization_max);
                y_pred.push_back(predict::predict(model, x));
            }
            if (y_true.empty()) continue;
            daily.push_back(predict::rmse(y_true, y_pred));
            week_true.insert(week_true.end(), y_true.begin(), y_true.end());
            week_pred.insert(week_pred.end(), y_pred.begin(), y_pred.end());
        }
        const double total = predict::rmse(week_true, week_pred);
        const double variance = predict::rmse_variance(daily);
        csv << name;
        for (double d : daily) csv << "," << io::fmt9(d);
        csv << "," << io::fmt9(total) << "," << io::fmt9(variance) << "\n";
        std::printf("%-8s", name.c_str());
        for (double d : daily) std::printf(" %8.4f", d * 100.0);
        std::printf(" %8.4f %9.4f\n", total * 100.0, variance * 1e4);
    }
    std::printf("wrote %s\n", csv_path.string().c_str());

    if (!save_dir.empty()) {
        fs::create_directories(save_dir);
        for (const auto& [name, model] : models)
            predict::save_model_file(model, (fs::path(save_dir) / (name + ".model")).string());
        std::printf("saved models to %s\n", save_dir.c_str());
    }
    return 0;
}

int cmd_solve(const CommonOpts& opts, const std::string& cycle_path, double load_factor,
              bool dump_solution) {
    const io::Config cfg = make_config(opts);
    const auto cycle = io::read_cycle_csv(cycle_path);
    const auto profile = vehicle::cycle_to_profile(cycle, cfg.vehicle, load_factor);
    const auto grid = cfg.make_grid();
    const auto init = cfg.initial_state();
    const auto solution = dp::solve_backward(profile, grid, init, cfg.cost, cfg.sys);
    const auto trajectory = dp::rollout(solution, profile, init, cfg.cost, cfg.sys);

    const fs::path traj_path = out_file(opts, "trajectory.csv");
    io::write_trajectory_csv(trajectory, traj_path.string());
    print_totals("dp", trajectory.totals);
    std::printf("wrote %s\n", traj_path.string().c_str());
    if (dump_solution) {
        const fs::path sol_path = out_file(opts, "solution.csv");
        io::write_solution_csv(solution, sol_path.string());
        std::printf("wrote %s\n", sol_path.string().c_str());
    }
    return 0;
}

int cmd_extract_rule(const CommonOpts& opts, const std::string& cycle_path,
                     std::vector<double> load_factors) {
    const io::Config cfg = make_config(opts);
    const auto cycle = io::read_cycle_csv(cycle_path);
    const auto ctx = cfg.strategy_context();
    const auto init = cfg.initial_state();
    if (load_factors.empty()) load_factors = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};

    const fs::path csv_path = out_file(opts, "rules.csv");
    std::ofstream csv(csv_path);
    csv << "load_factor,slope,intercept_w,r2\n";
    std::printf("%-12s %10s %12s %8s\n", "load_factor", "slope", "intercept_w", "r2");
    for (double load : load_factors) {
        const auto rule = control::offline_rule(cycle, load, init, ctx);
        csv << io::fmt9(load) << "," << io::fmt9(rule.slope) << "," << io::fmt9(rule.intercept_w)
            << "," << io::fmt9(rule.fit_r2) << "\n";
        std::printf("%-12.2f %10.4f %12.1f %8.4f\n", load, rule.slope, rule.intercept_w,
                    rule.fit_r2);
    }
    std::printf("wrote %s\n", csv_path.string().c_str());
    return 0;
}

int cmd_simulate(const CommonOpts& opts, const std::string& strategy,
                 const std::string& cycle_path, double load_factor,
                 const std::string& passengers_path, const std::string& weather_path,
                 const std::string& date_str, int hour) {
    const io::Config cfg = make_config(opts);
    const auto cycle = io::read_cycle_csv(cycle_path);
    const auto ctx = cfg.strategy_context();
    const auto init = cfg.initial_state();

    control::StrategyResult result;
    if (strategy == "dp-oracle") {
        result = control::run_dp_oracle(cycle, load_factor, init, ctx);
    } else if (strategy == "rule") {
        const auto rule = control::offline_rule(cycle, cfg.ems.rule_load_factor, init, ctx);
        result = control::run_pure_rule(cycle, load_factor, rule, init, ctx);
    } else if (strategy == "cloud") {
        if (passengers_path.empty() || weather_path.empty() || date_str.empty())
            throw std::runtime_error(
                "strategy 'cloud' needs --passengers, --weather, --date and --hour");
        const auto scenario = build_cloud_scenario(cfg, passengers_path, weather_path,
                                                   predict::parse_date(date_str), hour);
        result = control::run_cloud(cycle, scenario.scenario, scenario.model, init, ctx);
        std::printf("true load %.4f, predicted %.4f, mean block error %.4f\n",
                    scenario.true_load, scenario.predicted_load, result.load_prediction_error);
    } else {
        throw std::runtime_error("unknown strategy '" + strategy +
                                 "' (expected dp-oracle, rule or cloud)");
    }

    const fs::path traj_path = out_file(opts, "trajectory_" + result.strategy + ".csv");
    io::write_trajectory_csv(result.trajectory, traj_path.string());
    print_totals(result.strategy, result.totals);
    std::printf("wrote %s\n", traj_path.string().c_str());
    return 0;
}

int cmd_compare(const CommonOpts& opts, const std::string& cycle_path,
                const std::string& passengers_path, const std::string& weather_path,
                const std::string& date_str, std::vector<int> hours) {
    const io::Config cfg = make_config(opts);
    const auto cycle = io::read_cycle_csv(cycle_path);
    const auto ctx = cfg.strategy_context();
    const auto init = cfg.initial_state();
    const auto date = predict::parse_date(date_str);
    if (hours.empty()) hours = {8};

    for (int hour : hours) {
        const auto s = build_cloud_scenario(cfg, passengers_path, weather_path, date, hour);
        const auto fixed = control::offline_rule(cycle, cfg.ems.rule_load_factor, init, ctx);
        const auto report = control::compare_strategies(
            cycle, s.scenario,
            [&](int h) { return predict::predict(s.model, s.scenario.features_by_hour.at(h)); },
            fixed, init, ctx);

        const std::string suffix = "_h" + std::to_string(hour);
        const fs::path csv_path = out_file(opts, "compare" + suffix + ".csv");
        io::write_comparison_csv(report, csv_path.string());
        for (const auto& [name, trajectory] : report.trajectories)
            io::write_trajectory_csv(
                trajectory, out_file(opts, "trajectory_" + name + suffix + ".csv").string());

        std::printf("hour %d: true load %.4f, predicted %.4f\n", hour, s.true_load,
                    s.predicted_load);
        for (const auto& row : report.rows) {
            print_totals(row.strategy, row.totals);
            if (row.strategy != "dp_oracle")
                std::printf("  -> %.4f %% vs dp_oracle\n", row.pct_vs_oracle);
        }
        std::printf("wrote %s\n", csv_path.string().c_str());
    }
    return 0;
}

}  // namespace

int run_command(int argc, const char* const* argv) {
    CLI::App app{"battery/supercapacitor city-bus energy management toolkit"};
    app.require_subcommand(1);

    // synth-cycle
    CommonOpts cycle_opts;
    std::uint64_t sc_seed = 42;
    int sc_duration = 1200;
    double sc_max_speed = 15.0;
    std::string sc_out = "cycle.csv";
    auto* synth_cycle_cmd =
        app.add_subcommand("synth-cycle", "generate a stop-and-go urban drive cycle");
    synth_cycle_cmd->add_option("--seed", sc_seed)->capture_default_str();
    synth_cycle_cmd->add_option("--duration", sc_duration, "seconds at 1 Hz")
        ->capture_default_str();
    synth_cycle_cmd->add_option("--max-speed", sc_max_speed, "m/s")->capture_default_str();
    synth_cycle_cmd->add_option("--out", sc_out)->capture_default_str();

    // synth-passengers
    std::uint64_t sp_seed = 42;
    std::string sp_start = "2014-08-01", sp_end = "2014-12-24";
    std::string sp_out_p = "passengers.csv", sp_out_w = "weather.csv";
    auto* synth_pax_cmd =
        app.add_subcommand("synth-passengers", "generate hourly ridership and weather data");
    synth_pax_cmd->add_option("--seed", sp_seed)->capture_default_str();
    synth_pax_cmd->add_option("--start", sp_start, "first date (YYYY-MM-DD)")
        ->capture_default_str();
    synth_pax_cmd->add_option("--end", sp_end, "last date (YYYY-MM-DD)")->capture_default_str();
    synth_pax_cmd->add_option("--out-passengers", sp_out_p)->capture_default_str();
    synth_pax_cmd->add_option("--out-weather", sp_out_w)->capture_default_str();

    // predict
    CommonOpts predict_opts;
    std::string pr_passengers, pr_weather, pr_save_dir;
    auto* predict_cmd = app.add_subcommand(
        "predict", "train the four load-factor models and report held-out RMSE");
    add_common(predict_cmd, predict_opts);
    predict_cmd->add_option("--passengers", pr_passengers)->required();
    predict_cmd->add_option("--weather", pr_weather)->required();
    predict_cmd->add_option("--save-model-dir", pr_save_dir, "save trained models here");

    // solve
    CommonOpts solve_opts;
    std::string so_cycle;
    double so_load = 1.0;
    bool so_dump = false;
    auto* solve_cmd =
        app.add_subcommand("solve", "single DP solve and rollout on a drive cycle");
    add_common(solve_cmd, solve_opts);
    solve_cmd->add_option("--cycle", so_cycle)->required();
    solve_cmd->add_option("--load-factor", so_load)->capture_default_str();
    solve_cmd->add_flag("--dump-solution", so_dump, "also dump the value/policy tables");

    // extract-rule
    CommonOpts rule_opts;
    std::string er_cycle;
    std::vector<double> er_loads;
    auto* rule_cmd = app.add_subcommand(
        "extract-rule", "fit linear power-split rules over a load-factor sweep");
    add_common(rule_cmd, rule_opts);
    rule_cmd->add_option("--cycle", er_cycle)->required();
    rule_cmd->add_option("--load-factors", er_loads, "comma-separated list")->delimiter(',');

    // simulate
    CommonOpts sim_opts;
    std::string si_strategy, si_cycle, si_passengers, si_weather, si_date;
    double si_load = 1.0;
    int si_hour = 8;
    auto* sim_cmd = app.add_subcommand("simulate", "run one strategy on a scenario");
    add_common(sim_cmd, sim_opts);
    sim_cmd->add_option("--strategy", si_strategy, "dp-oracle | rule | cloud")->required();
    sim_cmd->add_option("--cycle", si_cycle)->required();
    sim_cmd->add_option("--load-factor", si_load)->capture_default_str();
    sim_cmd->add_option("--passengers", si_passengers);
    sim_cmd->add_option("--weather", si_weather);
    sim_cmd->add_option("--date", si_date, "evaluation date (YYYY-MM-DD)");
    sim_cmd->add_option("--hour", si_hour)->capture_default_str();

    // compare
    CommonOpts cmp_opts;
    std::string cm_cycle, cm_passengers, cm_weather, cm_date;
    std::vector<int> cm_hours;
    auto* cmp_cmd =
        app.add_subcommand("compare", "run all three strategies and report the cost table");
    add_common(cmp_cmd, cmp_opts);
    cmp_cmd->add_option("--cycle", cm_cycle)->required();
    cmp_cmd->add_option("--passengers", cm_passengers)->required();
    cmp_cmd->add_option("--weather", cm_weather)->required();
    cmp_cmd->add_option("--date", cm_date, "evaluation date (YYYY-MM-DD)")->required();
    cmp_cmd->add_option("--hour", cm_hours, "evaluation hour(s)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (app.got_subcommand(synth_cycle_cmd))
            return cmd_synth_cycle(cycle_opts, sc_seed, sc_duration, sc_max_speed, sc_out);
        if (app.got_subcommand(synth_pax_cmd))
            return cmd_synth_passengers(sp_seed, sp_start, sp_end, sp_out_p, sp_out_w);
        if (app.got_subcommand(predict_cmd))
            return cmd_predict(predict_opts, pr_passengers, pr_weather, pr_save_dir);
        if (app.got_subcommand(solve_cmd))
            return cmd_solve(solve_opts, so_cycle, so_load, so_dump);
        if (app.got_subcommand(rule_cmd)) return cmd_extract_rule(rule_opts, er_cycle, er_loads);
        if (app.got_subcommand(sim_cmd))
            return cmd_simulate(sim_opts, si_strategy, si_cycle, si_load, si_passengers,
                                si_weather, si_date, si_hour);
        if (app.got_subcommand(cmp_cmd))
            return cmd_compare(cmp_opts, cm_cycle, cm_passengers, cm_weather, cm_date, cm_hours);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace hessems::cli
