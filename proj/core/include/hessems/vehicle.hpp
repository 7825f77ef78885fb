#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace hessems::vehicle {

/// Longitudinal-dynamics parameters of the bus. Defaults describe a
/// 13.5 t electric city bus with 145-passenger capacity.
struct VehicleParams {
    double empty_mass_kg = 13500.0;
    double person_mass_kg = 70.0;
    double max_passengers = 145.0;
    double gravity_mps2 = 9.8;
    double frontal_area_m2 = 7.5;
    double rolling_coeff = 0.018;
    double drag_coeff = 0.7;
    double air_density_kgpm3 = 1.29;
    double eta_transmission = 0.90;  // (0, 1]
    double eta_machine = 0.85;       // (0, 1]
    double eta_regen = 0.65;         // (0, 1]

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct CycleSample {
    double t_s = 0.0;
    double speed_mps = 0.0;
    double grade_rad = 0.0;
};

/// Speed/grade trace sampled at a fixed period (1 Hz by default).
struct DriveCycle {
    std::vector<CycleSample> samples;
    double sample_period_s = 1.0;
    std::string id;

    std::size_t size() const { return samples.size(); }
    double duration_s() const { return samples.size() * sample_period_s; }
};

/// Electrical power demand at the HESS bus bar, one value per cycle sample.
struct PowerProfile {
    std::vector<double> demand_w;
    double load_factor = 0.0;
    std::string source_cycle_id;

    std::size_t size() const { return demand_w.size(); }
};

/// Whole-vehicle mass at the given passenger load factor in [0, 1].
double effective_mass(const VehicleParams& params, double load_factor);

/// Electrical power demand for one operating point. Traction power is
/// divided by the driveline efficiencies; braking power (negative wheel
/// power) is scaled by the regeneration efficiency.
double power_demand(const VehicleParams& params, double speed_mps,
                    double accel_mps2, double grade_rad, double load_factor);

/// Demand profile for a contiguous sample range [start, start + count).
/// Acceleration is the backward difference over the *whole* cycle, so a
/// mid-cycle slice sees the same accelerations as the full conversion;
/// only the cycle's first sample has acceleration zero.
PowerProfile profile_for_range(const DriveCycle& cycle, const VehicleParams& params,
                               double load_factor, std::size_t start, std::size_t count);

/// Full-cycle conversion; equals profile_for_range over the whole cycle.
PowerProfile cycle_to_profile(const DriveCycle& cycle, const VehicleParams& params,
                              double load_factor);

}  // namespace hessems::vehicle
