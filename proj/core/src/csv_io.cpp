#include "hessems/csv_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hessems::io {

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& s, const std::string& path, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad number '" + s +
                                 "'");
    }
}

long parse_long(const std::string& s, const std::string& path, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad integer '" + s +
                                 "'");
    }
}

// Strips a trailing '\r' so files written on other platforms read back.
bool get_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

}  // namespace

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

vehicle::DriveCycle read_cycle_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!get_line(in, line)) throw std::runtime_error(path + ": empty file");
    bool has_grade = false;
    if (line == "t_s,v_mps,grade_rad")
        has_grade = true;
    else if (line != "t_s,v_mps")
        throw std::runtime_error(path + ": expected header 't_s,v_mps,grade_rad' or 't_s,v_mps'");

    vehicle::DriveCycle cycle;
    cycle.id = path;
    std::size_t line_no = 1;
    while (get_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != (has_grade ? 3u : 2u))
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad column count");
        vehicle::CycleSample s;
        s.t_s = parse_double(fields[0], path, line_no);
        s.speed_mps = parse_double(fields[1], path, line_no);
        s.grade_rad = has_grade ? parse_double(fields[2], path, line_no) : 0.0;
        if (s.speed_mps < 0.0)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": negative speed");
        cycle.samples.push_back(s);
    }
    if (cycle.samples.empty()) throw std::runtime_error(path + ": no samples");
    if (cycle.samples.size() >= 2) {
        const double period = cycle.samples[1].t_s - cycle.samples[0].t_s;
        if (period <= 0.0) throw std::runtime_error(path + ": time must be strictly increasing");
        for (std::size_t i = 1; i < cycle.samples.size(); ++i) {
            const double dt = cycle.samples[i].t_s - cycle.samples[i - 1].t_s;
            if (std::abs(dt - period) > 1e-9)
                throw std::runtime_error(path + ": samples must be at a fixed period");
        }
        cycle.sample_period_s = period;
    }
    return cycle;
}

void write_cycle_csv(const vehicle::DriveCycle& cycle, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "t_s,v_mps,grade_rad\n";
    for (const auto& s : cycle.samples)
        out << fmt9(s.t_s) << "," << fmt9(s.speed_mps) << "," << fmt9(s.grade_rad) << "\n";
}

std::vector<predict::LoadRecord> read_passengers_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!get_line(in, line) || line != "date,hour,passenger_count")
        throw std::runtime_error(path + ": expected header 'date,hour,passenger_count'");
    std::vector<predict::LoadRecord> records;
    std::size_t line_no = 1;
    while (get_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 3)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad column count");
        predict::LoadRecord r;
        r.date = predict::parse_date(fields[0]);
        r.hour = static_cast<int>(parse_long(fields[1], path, line_no));
        r.passenger_count = parse_long(fields[2], path, line_no);
        if (r.hour < 0 || r.hour > 23)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": hour out of range");
        if (r.passenger_count < 0)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": negative count");
        records.push_back(r);
    }
    return records;
}

void write_passengers_csv(const std::vector<predict::LoadRecord>& records,
                          const std::string& path) {
    std::ofstream out = open_out(path);
    out << "date,hour,passenger_count\n";
    for (const auto& r : records)
        out << predict::to_string(r.date) << "," << r.hour << "," << r.passenger_count << "\n";
}

std::vector<predict::WeatherRecord> read_weather_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!get_line(in, line) ||
        line != "date,weather_code,temp_high_c,temp_low_c,wind_level,is_holiday")
        throw std::runtime_error(
            path + ": expected header 'date,weather_code,temp_high_c,temp_low_c,wind_level,is_holiday'");
    std::vector<predict::WeatherRecord> records;
    std::size_t line_no = 1;
    while (get_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 6)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad column count");
        predict::WeatherRecord w;
        w.date = predict::parse_date(fields[0]);
        w.weather_code = static_cast<int>(parse_long(fields[1], path, line_no));
        w.temp_high_c = parse_double(fields[2], path, line_no);
        w.temp_low_c = parse_double(fields[3], path, line_no);
        w.wind_level = static_cast<int>(parse_long(fields[4], path, line_no));
        const long holiday = parse_long(fields[5], path, line_no);
        if (holiday != 0 && holiday != 1)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": is_holiday must be 0 or 1");
        w.is_holiday = holiday == 1;
        records.push_back(w);
    }
    return records;
}

void write_weather_csv(const std::vector<predict::WeatherRecord>& records,
                       const std::string& path) {
    std::ofstream out = open_out(path);
    out << "date,weather_code,temp_high_c,temp_low_c,wind_level,is_holiday\n";
    for (const auto& w : records)
        out << predict::to_string(w.date) << "," << w.weather_code << "," << fmt9(w.temp_high_c)
            << "," << fmt9(w.temp_low_c) << "," << w.wind_level << "," << (w.is_holiday ? 1 : 0)
            << "\n";
}

std::pair<hess::SocCurve, hess::SocCurve> read_battery_curve_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!get_line(in, line) || line != "soc,ocv_v,r_ohm")
        throw std::runtime_error(path + ": expected header 'soc,ocv_v,r_ohm'");
    hess::SocCurve ocv, resistance;
    std::size_t line_no = 1;
    while (get_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 3)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad column count");
        const double soc = parse_double(fields[0], path, line_no);
        ocv.soc.push_back(soc);
        ocv.value.push_back(parse_double(fields[1], path, line_no));
        resistance.soc.push_back(soc);
        resistance.value.push_back(parse_double(fields[2], path, line_no));
    }
    ocv.validate((path + " (ocv)").c_str(), ocv.soc.size() > 1);
    resistance.validate((path + " (resistance)").c_str(), false);
    for (double r : resistance.value)
        if (r <= 0.0) throw std::invalid_argument(path + ": resistance values must be positive");
    return {ocv, resistance};
}

void write_trajectory_csv(const dp::Trajectory& trajectory, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "t_s,p_demand_w,p_bat_w,p_sc_w,i_bat_a,i_sc_a,soc_bat,soc_sc,dq_loss,de_loss_j,"
           "step_cost_usd\n";
    for (const auto& s : trajectory.steps)
        out << fmt9(s.t_s) << "," << fmt9(s.p_demand_w) << "," << fmt9(s.p_bat_w) << ","
            << fmt9(s.p_sc_w) << "," << fmt9(s.i_bat_a) << "," << fmt9(s.i_sc_a) << ","
            << fmt9(s.soc_bat) << "," << fmt9(s.soc_sc) << "," << fmt9(s.dq_loss) << ","
            << fmt9(s.de_loss_j) << "," << fmt9(s.step_cost_usd) << "\n";
}

dp::Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!get_line(in, line) ||
        line !=
            "t_s,p_demand_w,p_bat_w,p_sc_w,i_bat_a,i_sc_a,soc_bat,soc_sc,dq_loss,de_loss_j,"
            "step_cost_usd")
        throw std::runtime_error(path + ": bad trajectory header");
    dp::Trajectory trajectory;
    std::size_t line_no = 1;
    while (get_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 11)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad column count");
        dp::TrajectoryStep s;
        double* cols[] = {&s.t_s,     &s.p_demand_w, &s.p_bat_w, &s.p_sc_w,
                          &s.i_bat_a, &s.i_sc_a,     &s.soc_bat, &s.soc_sc,
                          &s.dq_loss, &s.de_loss_j,  &s.step_cost_usd};
        for (std::size_t i = 0; i < 11; ++i) *cols[i] = parse_double(fields[i], path, line_no);
        trajectory.steps.push_back(s);
    }
    return trajectory;
}

void write_comparison_csv(const control::ComparisonReport& report, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "strategy,total_usd,aging_usd,electric_usd,penalty_usd,pct_vs_oracle\n";
    for (const auto& row : report.rows)
        out << row.strategy << "," << fmt9(row.totals.total_usd) << ","
            << fmt9(row.totals.aging_usd) << "," << fmt9(row.totals.electric_usd) << ","
            << fmt9(row.totals.penalty_usd) << "," << fmt9(row.pct_vs_oracle) << "\n";
}

void write_solution_csv(const dp::DPSolution& solution, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "stage,soc_bat,soc_sc,value_usd,policy_p_sc_w\n";
    const auto& grid = solution.grid;
    for (std::size_t k = 0; k < solution.horizon; ++k)
        for (std::size_t ib = 0; ib < grid.soc_bat_axis.size(); ++ib)
            for (std::size_t is = 0; is < grid.soc_sc_axis.size(); ++is) {
                const std::uint16_t pol = solution.policy_at(k, ib, is);
                out << k << "," << fmt9(grid.soc_bat_axis[ib]) << ","
                    << fmt9(grid.soc_sc_axis[is]) << "," << fmt9(solution.value_at(k, ib, is))
                    << ",";
                if (pol == dp::DPSolution::kInfeasible)
                    out << "inf";
                else
                    out << fmt9(grid.control_w[pol]);
                out << "\n";
            }
}

}  // namespace hessems::io
