#pragma once

#include <optional>
#include <vector>

namespace hessems::hess {

/// Piecewise-linear lookup table over SOC in [0, 1]. Queries clamp to the
/// endpoint values outside the knot range.
struct SocCurve {
    std::vector<double> soc;
    std::vector<double> value;

    double at(double s) const;
    // Throws std::invalid_argument unless soc is strictly increasing and
    // sizes match (>= 2 knots, or exactly 1 for a constant curve).
    void validate(const char* name, bool strictly_increasing_values) const;
};

SocCurve make_affine_curve(double value_at_0, double value_at_1);
SocCurve make_constant_curve(double value);

struct BatteryParams {
    double capacity_cell_ah = 60.0;
    double stored_energy_cell_kwh = 0.192;
    double soc_min = 0.10;
    double soc_max = 0.90;
    SocCurve ocv_curve = make_affine_curve(3.0, 3.4);       // V per cell
    SocCurve resistance_curve = make_constant_curve(1.5e-3);  // ohm per cell
    int series_count = 217;
    int parallel_count = 7;
    double current_min_cell_a = -180.0;  // -3 C charge
    double current_max_cell_a = 180.0;   // +3 C discharge

    int cell_count() const { return series_count * parallel_count; }
    double pack_capacity_ah() const { return capacity_cell_ah * parallel_count; }
    double series_resistance_ohm(double soc) const;
    void validate() const;
};

/// Semi-empirical capacity-fade model coefficients.
struct AgingParams {
    double prefactor = 0.0032;
    double activation_base_j_per_mol = 15162.0;
    double crate_coeff_j_per_mol = 1516.0;
    double gas_constant = 8.3145;
    double power_exponent_z = 0.824;
    double temperature_k = 298.15;

    void validate() const;
};

struct SupercapParams {
    double max_voltage_cell_v = 27.0;
    double capacitance_cell_f = 140.0;
    double stored_energy_cell_kwh = 0.0142;
    double soc_min = 0.50;
    double soc_max = 0.99;
    double resistance_cell_ohm = 15e-3;
    int series_count = 20;
    int parallel_count = 6;
    double current_min_cell_a = -150.0;
    double current_max_cell_a = 150.0;

    int cell_count() const { return series_count * parallel_count; }
    double series_resistance_ohm() const { return resistance_cell_ohm * series_count; }
    void validate() const;
};

/// Instantaneous state of the hybrid storage system. q_loss is the
/// capacity fade as a fraction of nominal capacity; ah_throughput is the
/// cumulative absolute cell-level charge moved through the battery.
struct HessState {
    double soc_bat = 0.6;
    double soc_sc = 0.75;
    double q_loss = 0.0;
    double ah_throughput_ah = 0.0;
};

/// Cell-level open-circuit voltage at the given SOC.
double battery_ocv(const BatteryParams& params, double soc);
double battery_resistance(const BatteryParams& params, double soc);

/// OCV of a supercapacitor cell: proportional to SOC.
double supercap_ocv(const SupercapParams& params, double soc);

/// Solves P = OCV*I - I^2*R for the smaller-magnitude root. Positive
/// current discharges. Returns nullopt when the requested power exceeds
/// the maximum deliverable OCV^2/(4R).
std::optional<double> current_for_terminal_power(double ocv_v, double resistance_ohm,
                                                 double power_w);

/// Integrates battery SOC and Ah throughput over one step (cell level).
HessState step_battery(const HessState& state, const BatteryParams& params,
                       double current_cell_a, double dt_s);

/// Integrates supercapacitor SOC over one step (cell level).
HessState step_supercap(const HessState& state, const SupercapParams& params,
                        double current_cell_a, double dt_s);

/// Resistive loss energy of one battery string and one supercapacitor
/// string over dt, in joules. Callers sum over parallel strings.
double electric_loss_energy(double i_bat_string_a, double r_bat_series_ohm,
                            double i_sc_string_a, double r_sc_series_ohm, double dt_s);

/// Capacity fade after the given Ah throughput at a constant C-rate.
double closed_form_q_loss(double ah_throughput, double c_rate, const AgingParams& params);

/// Per-step capacity-fade increment at the current fade level. The first
/// step from q_loss = 0 uses the closed form over the step's throughput;
/// afterwards the discretized rate applies.
double delta_q_loss(double q_loss, double current_cell_a, const AgingParams& params,
                    double capacity_ah, double dt_s);

/// State of health: 1 at zero fade, 0 at 20% capacity loss (end of life).
double soh_from_q_loss(double q_loss);

/// Fade fraction corresponding to a state of health in [0, 1].
inline double q_loss_from_soh(double soh) { return 0.20 * (1.0 - soh); }

}  // namespace hessems::hess
