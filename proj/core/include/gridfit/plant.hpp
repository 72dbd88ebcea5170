#pragma once

#include <cstdint>
#include <numbers>

#include "gridfit/signal.hpp"
#include "gridfit/volt_var.hpp"

namespace gridfit {

/// Which output-current channel a simulation records.
enum class OutputChannel {
    reactive_current,   // i_q in A (signed), the Volt-VAr identification channel
    current_magnitude,  // sqrt(i_d^2 + i_q^2) in A
};

/// Averaged reference model of a grid-tied PV inverter running Volt-VAr:
/// a first-order voltage-magnitude filter standing in for the PLL
/// measurement path, the exact piecewise curve plus capability-circle cap,
/// and a first-order output-current lag standing in for the closed current
/// loop. Defaults put the settling dynamics inside a 1-32 Hz probing band.
struct PlantParams {
    double s_rating_kva = 8.4;
    double pll_bandwidth_rad_s = 2.0 * std::numbers::pi * 10.0;
    double current_loop_tau_s = 0.02;
    double v_base_v = 240.0;
    VoltVarCurve curve{};
    bool volt_var_enabled = true;

    OutputChannel channel = OutputChannel::reactive_current;

    // optional additive uniform measurement noise on the recorded channel
    double noise_amplitude_a = 0.0;
    std::uint64_t noise_seed = 0;

    double max_step() const { return current_loop_tau_s / 5.0; }
    void validate() const;
};

struct PlantState {
    double v_filt_pu = 1.0;  // filtered terminal-voltage magnitude
    double i_d_a = 0.0;      // active-axis output current
    double i_q_a = 0.0;      // reactive-axis output current
};

/// Steady state for a held terminal voltage and available power.
PlantState plant_equilibrium(double v_terminal_pu, double p_avail_kw,
                             const PlantParams& params);

/// One fixed RK4 step of the plant ODE. Terminal voltage and available power
/// are held over the step. Throws std::domain_error when dt exceeds
/// current_loop_tau/5 and std::invalid_argument on non-finite inputs.
PlantState plant_step(const PlantState& state, double v_terminal_pu, double p_avail_kw,
                      double dt, const PlantParams& params);

/// Active/reactive power currently delivered, in kW / kVAr.
double plant_p_kw(const PlantState& state, const PlantParams& params);
double plant_q_kvar(const PlantState& state, const PlantParams& params);

double plant_output(const PlantState& state, OutputChannel channel);

/// Simulates the plant against a uniformly sampled terminal-voltage signal,
/// sub-stepping at dt (which must divide the sample spacing). The available
/// power profile must be sampled on the same grid. Starts from equilibrium at
/// the first sample; records the configured channel at every input sample.
Signal simulate_plant(const Signal& input, const Signal& p_avail_profile,
                      const PlantParams& params, double dt);

}  // namespace gridfit
