#include "gridfit/plant.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "gridfit/errors.hpp"

namespace gridfit {

namespace {

struct Derivative {
    double dv_filt;
    double di_d;
    double di_q;
};

// Current references for a given filtered voltage. Voltage is floored well
// below the operating range so a collapsed measurement cannot divide to inf.
void current_references(double v_filt, double p_avail_kw, const PlantParams& p,
                        double& i_d_ref, double& i_q_ref) {
    const double v_eff = std::max(v_filt, 0.1);
    const double p_star = std::min(p_avail_kw, p.s_rating_kva);
    double q_ref = 0.0;
    if (p.volt_var_enabled) {
        const double q_curve = volt_var_q(v_filt, p.curve);
        q_ref = q_reference(q_curve, p_star, p.s_rating_kva);
    }
    const double v_volts = v_eff * p.v_base_v;
    i_d_ref = p_star * 1e3 / v_volts;
    i_q_ref = q_ref * 1e3 / v_volts;
}

Derivative rhs(const PlantState& s, double v_terminal, double p_avail_kw,
               const PlantParams& p) {
    double i_d_ref = 0.0, i_q_ref = 0.0;
    current_references(s.v_filt_pu, p_avail_kw, p, i_d_ref, i_q_ref);
    return {
        p.pll_bandwidth_rad_s * (v_terminal - s.v_filt_pu),
        (i_d_ref - s.i_d_a) / p.current_loop_tau_s,
        (i_q_ref - s.i_q_a) / p.current_loop_tau_s,
    };
}

PlantState advance(const PlantState& s, const Derivative& d, double h) {
    return {s.v_filt_pu + h * d.dv_filt, s.i_d_a + h * d.di_d, s.i_q_a + h * d.di_q};
}

// Keeps delivered apparent power on or inside the capability circle.
void clamp_capability(PlantState& s, const PlantParams& p) {
    const double v_volts = std::max(s.v_filt_pu, 0.1) * p.v_base_v;
    const double i_mag = std::hypot(s.i_d_a, s.i_q_a);
    const double i_max = p.s_rating_kva * 1e3 / v_volts;
    if (i_mag > i_max) {
        const double scale = i_max / i_mag;
        s.i_d_a *= scale;
        s.i_q_a *= scale;
    }
}

}  // namespace

void PlantParams::validate() const {
    if (!(s_rating_kva > 0.0)) throw ConfigError("PlantParams: rating must be positive");
    if (!(pll_bandwidth_rad_s > 0.0)) throw ConfigError("PlantParams: PLL bandwidth must be positive");
    if (!(current_loop_tau_s > 0.0)) throw ConfigError("PlantParams: current-loop tau must be positive");
    if (!(v_base_v > 0.0)) throw ConfigError("PlantParams: voltage base must be positive");
    if (noise_amplitude_a < 0.0) throw ConfigError("PlantParams: noise amplitude must be >= 0");
    curve.validate();
}

PlantState plant_equilibrium(double v_terminal_pu, double p_avail_kw,
                             const PlantParams& params) {
    PlantState s;
    s.v_filt_pu = v_terminal_pu;
    current_references(v_terminal_pu, p_avail_kw, params, s.i_d_a, s.i_q_a);
    clamp_capability(s, params);
    return s;
}

PlantState plant_step(const PlantState& state, double v_terminal_pu, double p_avail_kw,
                      double dt, const PlantParams& params) {
    if (!std::isfinite(v_terminal_pu) || !std::isfinite(p_avail_kw) ||
        !std::isfinite(state.v_filt_pu) || !std::isfinite(state.i_d_a) ||
        !std::isfinite(state.i_q_a))
        throw std::invalid_argument("plant_step: non-finite input");
    if (!(dt > 0.0) || dt > params.max_step())
        throw std::domain_error("plant_step: dt must be in (0, current_loop_tau/5]");

    const Derivative k1 = rhs(state, v_terminal_pu, p_avail_kw, params);
    const Derivative k2 = rhs(advance(state, k1, dt / 2), v_terminal_pu, p_avail_kw, params);
    const Derivative k3 = rhs(advance(state, k2, dt / 2), v_terminal_pu, p_avail_kw, params);
    const Derivative k4 = rhs(advance(state, k3, dt), v_terminal_pu, p_avail_kw, params);

    PlantState next{
        state.v_filt_pu + dt / 6.0 * (k1.dv_filt + 2 * k2.dv_filt + 2 * k3.dv_filt + k4.dv_filt),
        state.i_d_a + dt / 6.0 * (k1.di_d + 2 * k2.di_d + 2 * k3.di_d + k4.di_d),
        state.i_q_a + dt / 6.0 * (k1.di_q + 2 * k2.di_q + 2 * k3.di_q + k4.di_q),
    };
    clamp_capability(next, params);
    return next;
}

double plant_p_kw(const PlantState& s, const PlantParams& p) {
    return s.i_d_a * s.v_filt_pu * p.v_base_v * 1e-3;
}

double plant_q_kvar(const PlantState& s, const PlantParams& p) {
    return s.i_q_a * s.v_filt_pu * p.v_base_v * 1e-3;
}

double plant_output(const PlantState& s, OutputChannel channel) {
    switch (channel) {
        case OutputChannel::reactive_current: return s.i_q_a;
        case OutputChannel::current_magnitude: return std::hypot(s.i_d_a, s.i_q_a);
    }
    throw std::logic_error("plant_output: unknown channel");
}

Signal simulate_plant(const Signal& input, const Signal& p_avail_profile,
                      const PlantParams& params, double dt) {
    params.validate();
    input.validate();
    if (p_avail_profile.size() != input.size())
        throw ConfigError("simulate_plant: available-power profile length mismatch");
    if (input.size() < 2) throw ConfigError("simulate_plant: input too short");

    const double spacing = input.dt();
    const auto substeps = static_cast<std::size_t>(std::llround(spacing / dt));
    if (substeps == 0 || std::abs(spacing - static_cast<double>(substeps) * dt) > 1e-9 * spacing)
        throw ConfigError("simulate_plant: dt must divide the input sample spacing");

    PlantState state = plant_equilibrium(input.values[0], p_avail_profile.values[0], params);

    std::mt19937_64 rng(params.noise_seed);
    std::uniform_real_distribution<double> noise(-params.noise_amplitude_a,
                                                 params.noise_amplitude_a);
    const bool noisy = params.noise_amplitude_a > 0.0;

    std::vector<double> out;
    out.reserve(input.size());
    for (std::size_t k = 0; k < input.size(); ++k) {
        double y = plant_output(state, params.channel);
        if (noisy) y += noise(rng);
        out.push_back(y);
        if (k + 1 == input.size()) break;
        // hold u(k) over [t_k, t_{k+1})
        for (std::size_t s = 0; s < substeps; ++s)
            state = plant_step(state, input.values[k], p_avail_profile.values[k], dt, params);
    }
    Signal result = Signal::uniform(1.0 / spacing, std::move(out));
    result.timestamps = input.timestamps;
    return result;
}

}  // namespace gridfit
