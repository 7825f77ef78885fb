#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "hessems/csv_io.hpp"
#include "hessems/predict.hpp"

using namespace hessems;
namespace fs = std::filesystem;

namespace {

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv = {"hessems"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli::run_command(static_cast<int>(argv.size()), argv.data());
}

fs::path tmp_dir(const std::string& sub) {
    const fs::path dir = fs::path(HESSEMS_TEST_TMP) / sub;
    fs::create_directories(dir);
    return dir;
}

void spit(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

TEST_CASE("cli: no arguments prints usage and fails") {
    CHECK(run({}) != 0);
    CHECK(run({"no-such-command"}) != 0);
}

TEST_CASE("cli: synth-cycle writes a readable deterministic file") {
    const fs::path dir = tmp_dir("cli_cycle");
    const fs::path out_a = dir / "a.csv";
    const fs::path out_b = dir / "b.csv";
    CHECK(run({"synth-cycle", "--seed", "5", "--duration", "300", "--max-speed", "14",
               "--out", out_a.string()}) == 0);
    CHECK(run({"synth-cycle", "--seed", "5", "--duration", "300", "--max-speed", "14",
               "--out", out_b.string()}) == 0);
    CHECK(slurp(out_a) == slurp(out_b));
    const auto cycle = io::read_cycle_csv(out_a.string());
    CHECK(cycle.samples.size() == 300);
}

TEST_CASE("cli: synth-passengers emits both files") {
    const fs::path dir = tmp_dir("cli_pax");
    const fs::path p = dir / "p.csv";
    const fs::path w = dir / "w.csv";
    CHECK(run({"synth-passengers", "--seed", "5", "--start", "2014-08-01", "--end",
               "2014-08-31", "--out-passengers", p.string(), "--out-weather", w.string()}) == 0);
    CHECK(io::read_passengers_csv(p.string()).size() == 31 * 24);
    CHECK(io::read_weather_csv(w.string()).size() == 31);
}

TEST_CASE("cli: predict on a toy file reproduces the hand-computed average-model RMSE") {
    const fs::path dir = tmp_dir("cli_predict");
    const fs::path p = dir / "p.csv";
    const fs::path w = dir / "w.csv";

    // Train: 2014-08-04 .. 08-17 (two full weeks); test: final 08-11..08-17.
    // Every day has two records, hours 8 and 12. Counts are scaled so
    // normalization_max = 100 (train max).
    std::ostringstream pax;
    pax << "date,hour,passenger_count\n";
    std::ostringstream weather;
    weather << "date,weather_code,temp_high_c,temp_low_c,wind_level,is_holiday\n";
    for (int day = 4; day <= 17; ++day) {
        const std::string date = day < 10 ? "2014-08-0" + std::to_string(day)
                                          : "2014-08-" + std::to_string(day);
        // first week 80 / 40, second week 100 / 60 at hours 8 / 12
        const bool second = day >= 11;
        pax << date << ",8," << (second ? 100 : 80) << "\n";
        pax << date << ",12," << (second ? 60 : 40) << "\n";
        weather << date << ",0,28,22,1,0\n";
    }
    spit(p, pax.str());
    spit(w, weather.str());

    const fs::path out = dir / "out";
    CHECK(run({"predict", "--passengers", p.string(), "--weather", w.string(), "--out",
               out.string()}) == 0);

    // Hand oracle for the average model: train week has counts 80/40,
    // train max is 80 (only the first 7 days are train), so train factors
    // are 1.0 and 0.5 per (day, hour) cell. Test factors: 100/80 and
    // 60/80. Per-day RMSE = sqrt(((1.25-1)^2 + (0.75-0.5)^2)/2) = 0.25.
    std::ifstream csv(out / "rmse.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line.substr(0, 5) == "model");
    double avg_total = -1.0, avg_first_day = -1.0, avg_variance = -1.0;
    while (std::getline(csv, line)) {
        if (line.rfind("average,", 0) != 0) continue;
        std::vector<std::string> fields;
        std::istringstream in(line);
        std::string f;
        while (std::getline(in, f, ',')) fields.push_back(f);
        REQUIRE(fields.size() == 1 + 7 + 2);
        avg_first_day = std::stod(fields[1]);
        avg_total = std::stod(fields[8]);
        avg_variance = std::stod(fields[9]);
    }
    CHECK(avg_first_day == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(avg_total == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(avg_variance == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("cli: solve and extract-rule on a small scenario") {
    const fs::path dir = tmp_dir("cli_solve");
    const fs::path cycle = dir / "cycle.csv";
    const fs::path conf = dir / "small.conf";
    CHECK(run({"synth-cycle", "--seed", "3", "--duration", "90", "--max-speed", "12", "--out",
               cycle.string()}) == 0);
    spit(conf,
         "grid.soc_bat_step = 0.02\n"
         "grid.soc_sc_step = 0.02\n"
         "grid.control_levels = 31\n"
         "ems.horizon_s = 90\n"
         "ems.replan_period_s = 30\n"
         "ems.apply_fraction = 0.333333333333333333\n"
         "init.q_loss = 0.002\n");

    const fs::path out = dir / "out";
    CHECK(run({"solve", "--cycle", cycle.string(), "--load-factor", "0.9", "--config",
               conf.string(), "--out", out.string(), "--dump-solution"}) == 0);
    const auto trajectory = io::read_trajectory_csv((out / "trajectory.csv").string());
    CHECK(trajectory.steps.size() == 90);
    CHECK(fs::exists(out / "solution.csv"));

    CHECK(run({"extract-rule", "--cycle", cycle.string(), "--config", conf.string(),
               "--load-factors", "0,0.5,1", "--out", out.string()}) == 0);
    std::ifstream rules(out / "rules.csv");
    std::string line;
    std::getline(rules, line);
    CHECK(line == "load_factor,slope,intercept_w,r2");
    int rows = 0;
    while (std::getline(rules, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);

    // bad inputs surface as nonzero exits
    CHECK(run({"solve", "--cycle", "/nonexistent.csv"}) != 0);
    CHECK(run({"solve", "--cycle", cycle.string(), "--load-factor", "0.5", "--config",
               "/nonexistent.conf"}) != 0);
}
