#include "hessems/hess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hessems::hess {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

void check_soc_arg(double soc) {
    if (!(soc >= 0.0 && soc <= 1.0))
        throw std::invalid_argument("soc must be in [0, 1]");
}

}  // namespace

double SocCurve::at(double s) const {
    if (soc.size() == 1) return value.front();
    if (s <= soc.front()) return value.front();
    if (s >= soc.back()) return value.back();
    const auto it = std::upper_bound(soc.begin(), soc.end(), s);
    const std::size_t hi = static_cast<std::size_t>(it - soc.begin());
    const std::size_t lo = hi - 1;
    const double w = (s - soc[lo]) / (soc[hi] - soc[lo]);
    return value[lo] + w * (value[hi] - value[lo]);
}

void SocCurve::validate(const char* name, bool strictly_increasing_values) const {
    require(!soc.empty() && soc.size() == value.size(),
            std::string(name) + ": knot and value counts must match and be non-empty");
    for (std::size_t i = 1; i < soc.size(); ++i) {
        require(soc[i] > soc[i - 1], std::string(name) + ": soc knots must be strictly increasing");
        if (strictly_increasing_values)
            require(value[i] > value[i - 1],
                    std::string(name) + ": values must be strictly increasing in soc");
    }
}

SocCurve make_affine_curve(double value_at_0, double value_at_1) {
    return SocCurve{{0.0, 1.0}, {value_at_0, value_at_1}};
}

SocCurve make_constant_curve(double value) {
    return SocCurve{{0.0}, {value}};
}

double BatteryParams::series_resistance_ohm(double soc) const {
    return resistance_curve.at(soc) * series_count;
}

void BatteryParams::validate() const {
    require(capacity_cell_ah > 0.0, "battery.capacity_cell_ah must be positive");
    require(stored_energy_cell_kwh > 0.0, "battery.stored_energy_cell_kwh must be positive");
    require(soc_min >= 0.0 && soc_max <= 1.0 && soc_min < soc_max,
            "battery soc window must satisfy 0 <= min < max <= 1");
    ocv_curve.validate("battery.ocv_curve", /*strictly_increasing_values=*/ocv_curve.soc.size() > 1);
    resistance_curve.validate("battery.resistance_curve", false);
    for (double r : resistance_curve.value)
        require(r > 0.0, "battery.resistance_curve values must be positive");
    require(series_count > 0 && parallel_count > 0, "battery pack counts must be positive");
    require(current_min_cell_a < 0.0 && current_max_cell_a > 0.0,
            "battery cell current bounds must bracket zero");
}

void AgingParams::validate() const {
    require(prefactor > 0.0, "aging.prefactor must be positive");
    require(activation_base_j_per_mol > 0.0, "aging.activation_base_j_per_mol must be positive");
    require(crate_coeff_j_per_mol > 0.0, "aging.crate_coeff_j_per_mol must be positive");
    require(gas_constant > 0.0, "aging.gas_constant must be positive");
    require(power_exponent_z > 0.0 && power_exponent_z < 1.0,
            "aging.power_exponent_z must be in (0, 1)");
    require(temperature_k > 0.0, "aging.temperature_k must be positive");
}

void SupercapParams::validate() const {
    require(max_voltage_cell_v > 0.0, "supercap.max_voltage_cell_v must be positive");
    require(capacitance_cell_f > 0.0, "supercap.capacitance_cell_f must be positive");
    require(resistance_cell_ohm > 0.0, "supercap.resistance_cell_ohm must be positive");
    require(soc_min >= 0.0 && soc_max <= 1.0 && soc_min < soc_max,
            "supercap soc window must satisfy 0 <= min < max <= 1");
    require(series_count > 0 && parallel_count > 0, "supercap pack counts must be positive");
    require(current_min_cell_a < 0.0 && current_max_cell_a > 0.0,
            "supercap cell current bounds must bracket zero");
}

double battery_ocv(const BatteryParams& params, double soc) {
    check_soc_arg(soc);
    return params.ocv_curve.at(soc);
}

double battery_resistance(const BatteryParams& params, double soc) {
    check_soc_arg(soc);
    return params.resistance_curve.at(soc);
}

double supercap_ocv(const SupercapParams& params, double soc) {
    check_soc_arg(soc);
    return soc * params.max_voltage_cell_v;
}

std::optional<double> current_for_terminal_power(double ocv_v, double resistance_ohm,
                                                 double power_w) {
    if (resistance_ohm <= 0.0) throw std::invalid_argument("resistance must be positive");
    if (power_w == 0.0) return 0.0;
    const double disc = ocv_v * ocv_v - 4.0 * resistance_ohm * power_w;
    if (disc < 0.0) return std::nullopt;
    // Rationalized form of (OCV - sqrt(disc)) / (2R): exact zero at P = 0
    // and no cancellation for small powers.
    const double denom = ocv_v + std::sqrt(disc);
    if (denom <= 0.0) return std::nullopt;
    return 2.0 * power_w / denom;
}

HessState step_battery(const HessState& state, const BatteryParams& params,
                       double current_cell_a, double dt_s) {
    if (dt_s <= 0.0) throw std::invalid_argument("dt must be positive");
    HessState next = state;
    next.soc_bat = state.soc_bat - current_cell_a * dt_s / (3600.0 * params.capacity_cell_ah);
    next.ah_throughput_ah = state.ah_throughput_ah + std::abs(current_cell_a) * dt_s / 3600.0;
    return next;
}

HessState step_supercap(const HessState& state, const SupercapParams& params,
                        double current_cell_a, double dt_s) {
    if (dt_s <= 0.0) throw std::invalid_argument("dt must be positive");
    HessState next = state;
    next.soc_sc = state.soc_sc -
                  current_cell_a * dt_s / (params.capacitance_cell_f * params.max_voltage_cell_v);
    return next;
}

double electric_loss_energy(double i_bat_string_a, double r_bat_series_ohm,
                            double i_sc_string_a, double r_sc_series_ohm, double dt_s) {
    if (dt_s <= 0.0) throw std::invalid_argument("dt must be positive");
    if (r_bat_series_ohm < 0.0 || r_sc_series_ohm < 0.0)
        throw std::invalid_argument("series resistances must be non-negative");
    return (i_bat_string_a * i_bat_string_a * r_bat_series_ohm +
            i_sc_string_a * i_sc_string_a * r_sc_series_ohm) *
           dt_s;
}

double closed_form_q_loss(double ah_throughput, double c_rate, const AgingParams& params) {
    if (ah_throughput < 0.0) throw std::invalid_argument("ah_throughput must be non-negative");
    if (ah_throughput == 0.0) return 0.0;
    const double rt = params.gas_constant * params.temperature_k;
    const double arrhenius =
        std::exp(-(params.activation_base_j_per_mol - params.crate_coeff_j_per_mol * c_rate) / rt);
    return params.prefactor * arrhenius * std::pow(ah_throughput, params.power_exponent_z);
}

double delta_q_loss(double q_loss, double current_cell_a, const AgingParams& params,
                    double capacity_ah, double dt_s) {
    if (dt_s <= 0.0) throw std::invalid_argument("dt must be positive");
    if (q_loss < 0.0) throw std::invalid_argument("q_loss must be non-negative");
    if (current_cell_a == 0.0) return 0.0;
    const double c_rate = std::abs(current_cell_a) / capacity_ah;
    const double d_ah = std::abs(current_cell_a) * dt_s / 3600.0;
    if (q_loss == 0.0) return closed_form_q_loss(d_ah, c_rate, params);
    const double z = params.power_exponent_z;
    const double rt = params.gas_constant * params.temperature_k;
    // ln(A) with A = prefactor * exp(-(Ea - b*C)/(R*T)); the rate is
    // A^(1/z) * z * q^((z-1)/z), one exp total.
    const double ln_a =
        std::log(params.prefactor) -
        (params.activation_base_j_per_mol - params.crate_coeff_j_per_mol * c_rate) / rt;
    return std::exp(ln_a / z) * z * std::pow(q_loss, (z - 1.0) / z) * d_ah;
}

double soh_from_q_loss(double q_loss) {
    if (q_loss < 0.0) throw std::invalid_argument("q_loss must be non-negative");
    return std::max(0.0, 1.0 - q_loss / 0.20);
}

}  // namespace hessems::hess
