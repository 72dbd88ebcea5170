#include "gridfit/chirp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gridfit/errors.hpp"

namespace gridfit {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void ChirpSpec::validate() const {
    if (!(f0_hz > 0.0) || !(f1_hz > 0.0))
        throw ConfigError("ChirpSpec: frequencies must be positive");
    if (!(duration_s > 0.0)) throw ConfigError("ChirpSpec: duration must be positive");
    if (!(sample_rate_hz > 2.0 * std::max(f0_hz, f1_hz)))
        throw ConfigError("ChirpSpec: sample rate violates Nyquist for sweep content");
}

void PartitionPlan::validate() const {
    if (!(v_low_pu < v_max_pu)) throw ConfigError("PartitionPlan: v_low must be below v_max");
    if (n_partitions < 1) throw ConfigError("PartitionPlan: need at least one partition");
    if (!(dwell_time_s > 0.0)) throw ConfigError("PartitionPlan: dwell time must be positive");
}

double chirp_frequency(double t, const ChirpSpec& spec) {
    if (t < 0.0 || t > spec.duration_s)
        throw std::domain_error("chirp_frequency: t=" + std::to_string(t) +
                                " outside [0, " + std::to_string(spec.duration_s) + "]");
    return spec.f0_hz * std::pow(spec.f1_hz / spec.f0_hz, t / spec.duration_s);
}

double chirp_phase(double t, const ChirpSpec& spec) {
    if (t < 0.0 || t > spec.duration_s)
        throw std::domain_error("chirp_phase: t outside sweep duration");
    const double ratio_log = std::log(spec.f1_hz / spec.f0_hz);
    double integral;  // Int_0^t f(tau) dtau
    if (std::abs(ratio_log) < 1e-12) {
        integral = spec.f0_hz * t;  // constant-frequency limit
    } else {
        const double k = ratio_log / spec.duration_s;
        integral = spec.f0_hz * std::expm1(k * t) / k;
    }
    return kTwoPi * integral + spec.phi0_rad;
}

double square_chirp_sample(double t, const ChirpSpec& spec, double v1, double v2) {
    if (!(v1 < v2)) throw std::invalid_argument("square_chirp_sample: requires v1 < v2");
    return std::cos(chirp_phase(t, spec)) >= 0.0 ? v2 : v1;
}

std::pair<double, double> partition_bounds(double t, const PartitionPlan& plan) {
    plan.validate();
    if (t < 0.0 || t >= plan.run_time())
        throw std::domain_error("partition_bounds: t outside probing run");
    const double dv = plan.band_width();
    const auto k = static_cast<long>(std::floor(t / plan.dwell_time_s));
    double v1 = plan.v_low_pu + static_cast<double>(k) * dv;
    double v2 = v1 + dv;
    if (v2 > plan.v_max_pu) {  // clamp of the final band
        v1 = plan.v_max_pu - dv;
        v2 = plan.v_max_pu;
    }
    return {v1, v2};
}

Signal generate_probing_signal(const PartitionPlan& plan, const ChirpSpec& spec) {
    plan.validate();
    spec.validate();

    const auto samples_per_dwell =
        static_cast<std::size_t>(std::llround(spec.sample_rate_hz * plan.dwell_time_s));
    if (samples_per_dwell == 0)
        throw ConfigError("generate_probing_signal: dwell shorter than one sample");

    std::vector<double> values;
    values.reserve(samples_per_dwell * static_cast<std::size_t>(plan.n_partitions));
    for (int k = 0; k < plan.n_partitions; ++k) {
        const double t_band = (static_cast<double>(k) + 0.5) * plan.dwell_time_s;
        const auto [v1, v2] = partition_bounds(t_band, plan);
        for (std::size_t i = 0; i < samples_per_dwell; ++i) {
            // phase restarts at each partition boundary: local sweep time only
            const double tau = static_cast<double>(i) / spec.sample_rate_hz;
            values.push_back(square_chirp_sample(tau, spec, v1, v2));
        }
    }
    return Signal::uniform(spec.sample_rate_hz, std::move(values));
}

Signal generate_step_signal(const std::vector<std::pair<double, double>>& levels,
                            double sample_rate_hz) {
    if (levels.empty()) throw std::invalid_argument("generate_step_signal: empty level list");
    if (levels.size() < 2)
        throw std::invalid_argument("generate_step_signal: need at least two levels");
    std::vector<double> values;
    for (const auto& [level, duration] : levels) {
        if (!(duration > 0.0))
            throw std::invalid_argument("generate_step_signal: durations must be positive");
        const auto n = static_cast<std::size_t>(std::llround(sample_rate_hz * duration));
        values.insert(values.end(), n, level);
    }
    return Signal::uniform(sample_rate_hz, std::move(values));
}

}  // namespace gridfit
