#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hessems/config.hpp"
#include "hessems/csv_io.hpp"
#include "hessems/synth.hpp"

using namespace hessems;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
    const fs::path dir = HESSEMS_TEST_TMP;
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void spit(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("default config validates and builds a usable grid") {
    io::Config cfg;
    CHECK_NOTHROW(cfg.validate());
    const dp::Grid grid = cfg.make_grid();
    CHECK(grid.soc_bat_axis.size() == 169);
    CHECK(grid.soc_sc_axis.size() == 56);
    CHECK(grid.control_w.size() == 101);
    // the control axis contains exact zero so doing nothing is representable
    bool has_zero = false;
    for (double u : grid.control_w) has_zero |= (u == 0.0);
    CHECK(has_zero);
}

TEST_CASE("config file parsing: comments, overrides and diagnostics") {
    const fs::path path = tmp_dir() / "test.conf";
    spit(path,
         "# comment line\n"
         "battery.capacity_cell_ah = 55\n"
         "ems.horizon_s = 600   # trailing comment\n"
         "ems.replan_period_s = 30\n"
         "ems.apply_fraction = 0.05\n"
         "seed = 7\n");
    const io::Config cfg = io::load_config(path.string());
    CHECK(cfg.sys.battery.capacity_cell_ah == doctest::Approx(55.0));
    CHECK(cfg.ems.horizon_s == doctest::Approx(600.0));
    CHECK(cfg.seed == 7);

    spit(path, "battery.unknown_key = 3\n");
    CHECK_THROWS_WITH_AS((void)io::load_config(path.string()),
                         doctest::Contains("unknown config key"), std::invalid_argument);

    spit(path, "vehicle.eta_machine = oops\n");
    CHECK_THROWS_WITH_AS((void)io::load_config(path.string()), doctest::Contains("bad number"),
                         std::invalid_argument);
}

TEST_CASE("config validation rejects the documented bad values") {
    io::Config cfg;
    cfg.vehicle.eta_transmission = 1.5;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("eta_transmission"),
                         std::invalid_argument);

    cfg = io::Config{};
    cfg.sys.supercap.resistance_cell_ohm = -0.01;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = io::Config{};
    cfg.sys.battery.soc_max = 1.4;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    cfg = io::Config{};
    cfg.ems.replan_period_s = 70.0;  // does not divide 1200
    cfg.ems.apply_fraction = 70.0 / 1200.0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("must divide"),
                         std::invalid_argument);
}

TEST_CASE("config dump round-trips through the parser") {
    io::Config cfg;
    cfg.sys.battery.capacity_cell_ah = 58.5;
    cfg.seed = 99;
    const fs::path path = tmp_dir() / "dump.conf";
    spit(path, io::dump_config(cfg));
    const io::Config loaded = io::load_config(path.string());
    CHECK(loaded.sys.battery.capacity_cell_ah == cfg.sys.battery.capacity_cell_ah);
    CHECK(loaded.seed == cfg.seed);
    CHECK(io::dump_config(loaded) == io::dump_config(cfg));
}

TEST_CASE("synthetic cycle: determinism, bounds and phase limits") {
    const auto cycle = io::synth_cycle(42, 1200, 15.0);
    REQUIRE(cycle.samples.size() == 1200);
    CHECK(cycle.samples.front().speed_mps == 0.0);
    CHECK(cycle.samples.back().speed_mps == 0.0);

    double max_speed = 0.0;
    double min_speed = 1e9;
    for (const auto& s : cycle.samples) {
        max_speed = std::max(max_speed, s.speed_mps);
        min_speed = std::min(min_speed, s.speed_mps);
        CHECK(s.grade_rad == 0.0);
    }
    CHECK(max_speed <= 15.0);
    CHECK(max_speed > 5.0);  // actually drives
    CHECK(min_speed == 0.0);

    for (std::size_t i = 1; i < cycle.samples.size(); ++i) {
        const double accel = cycle.samples[i].speed_mps - cycle.samples[i - 1].speed_mps;
        CHECK(accel <= 1.5 + 1e-9);
        CHECK(accel >= -2.5 - 1e-9);
    }

    const auto again = io::synth_cycle(42, 1200, 15.0);
    CHECK(cycle.samples.size() == again.samples.size());
    for (std::size_t i = 0; i < cycle.samples.size(); ++i)
        CHECK(cycle.samples[i].speed_mps == again.samples[i].speed_mps);

    const auto different = io::synth_cycle(43, 1200, 15.0);
    bool any_diff = false;
    for (std::size_t i = 0; i < cycle.samples.size(); ++i)
        any_diff |= cycle.samples[i].speed_mps != different.samples[i].speed_mps;
    CHECK(any_diff);

    CHECK_THROWS_AS((void)io::synth_cycle(1, 30, 15.0), std::invalid_argument);
}

TEST_CASE("synthetic passengers: reproducible, non-negative, peaked on weekday mornings") {
    using predict::Date;
    const auto data = io::synth_passengers(7, Date{2014, 8, 1}, Date{2014, 9, 15});
    REQUIRE(!data.records.empty());
    CHECK(data.records.size() == data.weather.size() * 24);

    double sum8 = 0.0, sum12 = 0.0;
    int n8 = 0, n12 = 0;
    for (const auto& r : data.records) {
        CHECK(r.passenger_count >= 0);
        const int dow = predict::day_of_week(r.date);
        if (dow < 5) {
            if (r.hour == 8) {
                sum8 += static_cast<double>(r.passenger_count);
                ++n8;
            }
            if (r.hour == 12) {
                sum12 += static_cast<double>(r.passenger_count);
                ++n12;
            }
        }
    }
    REQUIRE(n8 > 0);
    CHECK(sum8 / n8 > sum12 / n12);

    const auto again = io::synth_passengers(7, Date{2014, 8, 1}, Date{2014, 9, 15});
    REQUIRE(again.records.size() == data.records.size());
    for (std::size_t i = 0; i < data.records.size(); ++i)
        CHECK(data.records[i].passenger_count == again.records[i].passenger_count);

    CHECK_THROWS_AS((void)io::synth_passengers(1, Date{2014, 8, 1}, Date{2014, 8, 5}),
                    std::invalid_argument);
}

TEST_CASE("cycle csv round trip is byte-stable") {
    const auto cycle = io::synth_cycle(5, 300, 14.0);
    const fs::path a = tmp_dir() / "cycle_a.csv";
    const fs::path b = tmp_dir() / "cycle_b.csv";
    io::write_cycle_csv(cycle, a.string());
    const auto back = io::read_cycle_csv(a.string());
    CHECK(back.sample_period_s == cycle.sample_period_s);
    io::write_cycle_csv(back, b.string());
    CHECK(slurp(a) == slurp(b));

    // grade column is optional
    const fs::path no_grade = tmp_dir() / "cycle_c.csv";
    spit(no_grade, "t_s,v_mps\n0,0\n1,2.5\n2,5\n");
    const auto cycle2 = io::read_cycle_csv(no_grade.string());
    REQUIRE(cycle2.samples.size() == 3);
    CHECK(cycle2.samples[1].grade_rad == 0.0);

    spit(no_grade, "wrong,header\n");
    CHECK_THROWS_AS((void)io::read_cycle_csv(no_grade.string()), std::runtime_error);
}

TEST_CASE("passenger and weather csv round trips are byte-stable") {
    using predict::Date;
    const auto data = io::synth_passengers(11, Date{2014, 8, 1}, Date{2014, 8, 20});
    const fs::path pa = tmp_dir() / "pax_a.csv";
    const fs::path pb = tmp_dir() / "pax_b.csv";
    io::write_passengers_csv(data.records, pa.string());
    io::write_passengers_csv(io::read_passengers_csv(pa.string()), pb.string());
    CHECK(slurp(pa) == slurp(pb));

    const fs::path wa = tmp_dir() / "weather_a.csv";
    const fs::path wb = tmp_dir() / "weather_b.csv";
    io::write_weather_csv(data.weather, wa.string());
    io::write_weather_csv(io::read_weather_csv(wa.string()), wb.string());
    CHECK(slurp(wa) == slurp(wb));
}

TEST_CASE("battery curve csv: load, validate, reject bad tables") {
    const fs::path path = tmp_dir() / "curve.csv";
    spit(path, "soc,ocv_v,r_ohm\n0,3.0,0.0015\n0.5,3.2,0.0016\n1,3.4,0.0015\n");
    const auto [ocv, resistance] = io::read_battery_curve_csv(path.string());
    CHECK(ocv.at(0.25) == doctest::Approx(3.1));
    CHECK(resistance.at(0.5) == doctest::Approx(0.0016));

    spit(path, "soc,ocv_v,r_ohm\n0,3.0,0.0015\n0,3.2,0.0015\n");
    CHECK_THROWS_AS((void)io::read_battery_curve_csv(path.string()), std::invalid_argument);

    spit(path, "soc,ocv_v,r_ohm\n0,3.0,0.0015\n1,3.4,-1\n");
    CHECK_THROWS_AS((void)io::read_battery_curve_csv(path.string()), std::invalid_argument);
}

TEST_CASE("trajectory csv uses the fixed header and round-trips") {
    dp::Trajectory t;
    for (int i = 0; i < 3; ++i) {
        dp::TrajectoryStep s;
        s.t_s = i;
        s.p_demand_w = 12345.6789 * (i + 1);
        s.p_bat_w = s.p_demand_w * 0.3;
        s.p_sc_w = s.p_demand_w * 0.7;
        s.i_bat_a = 1.234567891 * i;
        s.soc_bat = 0.6 - 0.001 * i;
        s.soc_sc = 0.75;
        s.dq_loss = 1.23e-9;
        s.de_loss_j = 17.5;
        s.step_cost_usd = 0.001234;
        t.steps.push_back(s);
    }
    const fs::path a = tmp_dir() / "traj_a.csv";
    const fs::path b = tmp_dir() / "traj_b.csv";
    io::write_trajectory_csv(t, a.string());
    const std::string first_line = slurp(a).substr(0, slurp(a).find('\n'));
    CHECK(first_line ==
          "t_s,p_demand_w,p_bat_w,p_sc_w,i_bat_a,i_sc_a,soc_bat,soc_sc,dq_loss,de_loss_j,"
          "step_cost_usd");
    io::write_trajectory_csv(io::read_trajectory_csv(a.string()), b.string());
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("9-significant-digit formatting") {
    CHECK(io::fmt9(0.0) == "0");
    CHECK(io::fmt9(12345.6789) == "12345.6789");
    CHECK(io::fmt9(1.234567891234e-9) == "1.23456789e-09");
}
