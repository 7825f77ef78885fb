#include "hessems/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hessems/rng.hpp"

namespace hessems::io {

vehicle::DriveCycle synth_cycle(std::uint64_t seed, int duration_s, double max_speed_mps) {
    if (duration_s < 60) throw std::invalid_argument("synth_cycle: duration must be >= 60 s");
    if (max_speed_mps <= 0.0) throw std::invalid_argument("synth_cycle: max speed must be positive");

    const std::size_t n = static_cast<std::size_t>(duration_s);
    Rng rng(seed);
    std::vector<double> speed;
    speed.reserve(n);

    const auto dwell = [&](std::size_t len) {
        for (std::size_t i = 0; i < len && speed.size() < n; ++i) speed.push_back(0.0);
    };

    dwell(static_cast<std::size_t>(rng.uniform_int(10, 40)));
    while (speed.size() < n) {
        const std::size_t remaining = n - speed.size();
        if (remaining < 25) {
            dwell(remaining);
            break;
        }
        const double accel = rng.uniform(0.6, 1.5);
        const double brake = rng.uniform(1.2, 2.5);
        // Cap the target speed so accel + brake + a short cruise and
        // dwell still fit in the remaining samples.
        const double cap = (static_cast<double>(remaining) - 10.0) / (1.0 / accel + 1.0 / brake);
        const double target = std::min(rng.uniform(0.4, 1.0) * max_speed_mps, cap);
        if (target < 1.0) {
            dwell(remaining);
            break;
        }

        double v = 0.0;
        while (v < target && speed.size() < n) {
            v = std::min(target, v + accel);
            speed.push_back(v);
        }
        const std::size_t brake_steps = static_cast<std::size_t>(std::ceil(v / brake));
        std::size_t cruise = static_cast<std::size_t>(rng.uniform_int(3, 25));
        if (speed.size() + brake_steps + 5 > n) cruise = 0;
        else cruise = std::min(cruise, n - speed.size() - brake_steps - 5);
        for (std::size_t i = 0; i < cruise && speed.size() < n; ++i) speed.push_back(v);
        while (v > 0.0 && speed.size() < n) {
            v = std::max(0.0, v - brake);
            speed.push_back(v);
        }
        dwell(static_cast<std::size_t>(rng.uniform_int(10, 40)));
    }

    vehicle::DriveCycle cycle;
    cycle.sample_period_s = 1.0;
    cycle.id = "synth-cycle-seed" + std::to_string(seed);
    cycle.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        cycle.samples[i] = {static_cast<double>(i), speed[i], 0.0};
    // End at rest even if the loop was cut mid-brake.
    if (!cycle.samples.empty()) cycle.samples.back().speed_mps = 0.0;
    return cycle;
}

namespace {

// Weekday shape: pronounced morning and evening commute peaks.
constexpr double kWeekdayShape[24] = {
    0.03, 0.02, 0.02, 0.02, 0.04, 0.12, 0.45, 0.72, 1.00, 0.70, 0.50, 0.45,
    0.48, 0.46, 0.44, 0.48, 0.60, 0.82, 0.92, 0.65, 0.45, 0.30, 0.15, 0.07};
// Weekend shape: flatter, midday-centered.
constexpr double kWeekendShape[24] = {
    0.04, 0.03, 0.02, 0.02, 0.03, 0.06, 0.15, 0.28, 0.42, 0.52, 0.58, 0.60,
    0.58, 0.56, 0.55, 0.52, 0.50, 0.48, 0.42, 0.35, 0.28, 0.20, 0.12, 0.06};

bool synthetic_holiday(const predict::Date& d) {
    // National-holiday week plus one mid-autumn day.
    return (d.month == 10 && d.day <= 7) || (d.month == 9 && d.day == 22);
}

}  // namespace

SynthPassengerData synth_passengers(std::uint64_t seed, const predict::Date& start,
                                    const predict::Date& end) {
    const long first = predict::days_from_epoch(start);
    const long last = predict::days_from_epoch(end);
    if (last - first + 1 < 14)
        throw std::invalid_argument("synth_passengers: range must span at least 14 days");

    Rng rng(seed);
    SynthPassengerData out;
    const double base_scale = 2400.0;

    for (long day = first; day <= last; ++day) {
        const predict::Date date = predict::date_from_epoch(day);
        const int dow = predict::day_of_week(date);
        const bool weekend = dow >= 5;
        const bool holiday = synthetic_holiday(date);

        // Seasonal temperatures (subtropical: hot Aug, mild Dec).
        const long doy = day - predict::days_from_epoch({date.year, 1, 1});
        const double season = std::cos(2.0 * 3.14159265358979 *
                                       (static_cast<double>(doy) - 196.0) / 365.0);
        predict::WeatherRecord w;
        w.date = date;
        w.temp_high_c = std::round((22.0 + 12.0 * season + rng.normal(0.0, 1.5)) * 10.0) / 10.0;
        w.temp_low_c =
            std::round((w.temp_high_c - rng.uniform(6.0, 10.0)) * 10.0) / 10.0;
        const double wu = rng.uniform();
        w.weather_code = wu < 0.45 ? 0 : wu < 0.75 ? 1 : wu < 0.95 ? 2 : 3;
        w.wind_level = rng.uniform_int(0, 4) + (w.weather_code == 3 ? 2 : 0);
        w.is_holiday = holiday;
        out.weather.push_back(w);

        double modifier = 1.0;
        if (w.weather_code == 1) modifier *= 0.97;
        if (w.weather_code == 2) modifier *= 0.85;
        if (w.weather_code == 3) modifier *= 0.70;
        if (w.temp_high_c > 32.0) modifier *= 0.93;
        if (w.temp_high_c < 10.0) modifier *= 0.95;
        if (w.wind_level >= 6) modifier *= 0.95;

        const double* shape = (weekend || holiday) ? kWeekendShape : kWeekdayShape;
        const double holiday_factor = holiday ? 0.60 : 1.0;
        for (int hour = 0; hour < 24; ++hour) {
            const double noise = std::exp(rng.normal(0.0, 0.06));
            const double mean = base_scale * shape[hour] * modifier * holiday_factor;
            predict::LoadRecord r;
            r.date = date;
            r.hour = hour;
            r.passenger_count = std::max(0L, std::lround(mean * noise));
            out.records.push_back(r);
        }
    }
    return out;
}

}  // namespace hessems::io
