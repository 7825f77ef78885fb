#include "hessems/vehicle.hpp"

#include <cmath>
#include <stdexcept>

namespace hessems::vehicle {

namespace {

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

}  // namespace

void VehicleParams::validate() const {
    require(empty_mass_kg > 0.0, "vehicle.empty_mass_kg must be positive");
    require(person_mass_kg > 0.0, "vehicle.person_mass_kg must be positive");
    require(max_passengers > 0.0, "vehicle.max_passengers must be positive");
    require(gravity_mps2 > 0.0, "vehicle.gravity_mps2 must be positive");
    require(frontal_area_m2 > 0.0, "vehicle.frontal_area_m2 must be positive");
    require(rolling_coeff > 0.0, "vehicle.rolling_coeff must be positive");
    require(drag_coeff > 0.0, "vehicle.drag_coeff must be positive");
    require(air_density_kgpm3 > 0.0, "vehicle.air_density_kgpm3 must be positive");
    require(eta_transmission > 0.0 && eta_transmission <= 1.0,
            "vehicle.eta_transmission must be in (0, 1]");
    require(eta_machine > 0.0 && eta_machine <= 1.0,
            "vehicle.eta_machine must be in (0, 1]");
    require(eta_regen > 0.0 && eta_regen <= 1.0,
            "vehicle.eta_regen must be in (0, 1]");
}

double effective_mass(const VehicleParams& params, double load_factor) {
    if (load_factor < 0.0 || load_factor > 1.0)
        throw std::invalid_argument("load_factor must be in [0, 1]");
    return params.empty_mass_kg +
           params.person_mass_kg * params.max_passengers * load_factor;
}

double power_demand(const VehicleParams& params, double speed_mps,
                    double accel_mps2, double grade_rad, double load_factor) {
    if (speed_mps < 0.0) throw std::invalid_argument("speed must be non-negative");
    const double mass = effective_mass(params, load_factor);
    const double rolling = mass * params.gravity_mps2 * params.rolling_coeff *
                           speed_mps * std::cos(grade_rad);
    const double aero = 0.5 * params.drag_coeff * params.frontal_area_m2 *
                        params.air_density_kgpm3 * speed_mps * speed_mps * speed_mps;
    const double inertial = mass * accel_mps2 * speed_mps;
    const double climb = mass * params.gravity_mps2 * speed_mps * std::sin(grade_rad);
    const double wheel_w = rolling + aero + inertial + climb;
    // Both efficiency maps preserve sign, so branching on wheel power is
    // equivalent to branching on the demand sign.
    if (wheel_w > 0.0)
        return wheel_w / (params.eta_transmission * params.eta_machine);
    return wheel_w * params.eta_regen;
}

PowerProfile profile_for_range(const DriveCycle& cycle, const VehicleParams& params,
                               double load_factor, std::size_t start, std::size_t count) {
    if (cycle.samples.empty()) throw std::invalid_argument("drive cycle is empty");
    if (start + count > cycle.samples.size())
        throw std::invalid_argument("sample range exceeds cycle length");
    PowerProfile profile;
    profile.load_factor = load_factor;
    profile.source_cycle_id = cycle.id;
    profile.demand_w.reserve(count);
    for (std::size_t i = start; i < start + count; ++i) {
        const CycleSample& s = cycle.samples[i];
        const double accel =
            i == 0 ? 0.0
                   : (s.speed_mps - cycle.samples[i - 1].speed_mps) / cycle.sample_period_s;
        profile.demand_w.push_back(
            power_demand(params, s.speed_mps, accel, s.grade_rad, load_factor));
    }
    return profile;
}

PowerProfile cycle_to_profile(const DriveCycle& cycle, const VehicleParams& params,
                              double load_factor) {
    return profile_for_range(cycle, params, load_factor, 0, cycle.samples.size());
}

}  // namespace hessems::vehicle
