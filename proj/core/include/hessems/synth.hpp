#pragma once

#include <cstdint>
#include <vector>

#include "hessems/predict.hpp"
#include "hessems/vehicle.hpp"

namespace hessems::io {

/// Stop-and-go urban bus cycle: alternating dwell, acceleration (at most
/// 1.5 m/s^2), cruise and braking (at most 2.5 m/s^2) phases at 1 Hz,
/// starting and ending at rest. Deterministic per seed.
vehicle::DriveCycle synth_cycle(std::uint64_t seed, int duration_s, double max_speed_mps);

struct SynthPassengerData {
    std::vector<predict::LoadRecord> records;
    std::vector<predict::WeatherRecord> weather;
};

/// Hourly ridership with weekday morning/evening peaks, flatter
/// weekends, weather/temperature/wind modulation, holiday suppression
/// and multiplicative noise. Deterministic per seed; the range must span
/// at least 14 days.
SynthPassengerData synth_passengers(std::uint64_t seed, const predict::Date& start,
                                    const predict::Date& end);

}  // namespace hessems::io
