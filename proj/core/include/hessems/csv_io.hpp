#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hessems/control.hpp"
#include "hessems/dpcore.hpp"
#include "hessems/hess.hpp"
#include "hessems/predict.hpp"
#include "hessems/vehicle.hpp"

namespace hessems::io {

/// Drive-cycle CSV, header `t_s,v_mps,grade_rad`; the grade column is
/// optional on read and defaults to zero.
vehicle::DriveCycle read_cycle_csv(const std::string& path);
void write_cycle_csv(const vehicle::DriveCycle& cycle, const std::string& path);

/// Passenger CSV: `date,hour,passenger_count`.
std::vector<predict::LoadRecord> read_passengers_csv(const std::string& path);
void write_passengers_csv(const std::vector<predict::LoadRecord>& records,
                          const std::string& path);

/// Weather CSV: `date,weather_code,temp_high_c,temp_low_c,wind_level,is_holiday`.
std::vector<predict::WeatherRecord> read_weather_csv(const std::string& path);
void write_weather_csv(const std::vector<predict::WeatherRecord>& records,
                       const std::string& path);

/// Battery curve CSV: `soc,ocv_v,r_ohm` with strictly increasing soc.
/// Returns the OCV curve and the resistance curve.
std::pair<hess::SocCurve, hess::SocCurve> read_battery_curve_csv(const std::string& path);

/// Trajectory CSV with the fixed column order
/// `t_s,p_demand_w,p_bat_w,p_sc_w,i_bat_a,i_sc_a,soc_bat,soc_sc,dq_loss,de_loss_j,step_cost_usd`,
/// numbers at 9 significant digits.
void write_trajectory_csv(const dp::Trajectory& trajectory, const std::string& path);
dp::Trajectory read_trajectory_csv(const std::string& path);

/// Comparison report CSV:
/// `strategy,total_usd,aging_usd,electric_usd,penalty_usd,pct_vs_oracle`.
void write_comparison_csv(const control::ComparisonReport& report, const std::string& path);

/// Per-stage value/policy dump for debugging a DP solution.
void write_solution_csv(const dp::DPSolution& solution, const std::string& path);

/// 9-significant-digit number formatting used by all report writers.
std::string fmt9(double v);

}  // namespace hessems::io
