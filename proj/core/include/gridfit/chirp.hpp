#pragma once

#include <utility>
#include <vector>

#include "gridfit/signal.hpp"

namespace gridfit {

/// Logarithmic frequency sweep parameters for one partition dwell.
///
/// The instantaneous frequency runs from f0 at t=0 to f1 at t=T along
/// f(t) = f0 * (f1/f0)^(t/T); the generated waveform uses the integrated
/// phase of that sweep so frequency transitions stay continuous.
struct ChirpSpec {
    double f0_hz = 1.0;         // sweep start frequency
    double f1_hz = 32.0;        // sweep end frequency
    double duration_s = 6.0;    // per-partition sweep time T
    double phi0_rad = 0.0;      // starting phase
    double sample_rate_hz = 1000.0;

    /// Throws ConfigError unless f0,f1,T > 0 and the sample rate clears
    /// Nyquist for the fastest sweep frequency.
    void validate() const;
};

/// Amplitude partitioning of the probing run: the operating range
/// [v_low, v_max] is split into n_partitions equal voltage bands, each
/// excited for dwell_time seconds.
struct PartitionPlan {
    double v_low_pu = 0.88;
    double v_max_pu = 1.10;
    int n_partitions = 22;
    double dwell_time_s = 6.0;

    double band_width() const { return (v_max_pu - v_low_pu) / n_partitions; }
    double run_time() const { return dwell_time_s * n_partitions; }

    void validate() const;
};

/// Instantaneous sweep frequency f(t), t in [0, T]. Exact at the endpoints:
/// f(0) == f0 and f(T) == f1.
double chirp_frequency(double t, const ChirpSpec& spec);

/// Integrated phase 2*pi*Int_0^t f(tau) dtau + phi0, closed form.
double chirp_phase(double t, const ChirpSpec& spec);

/// Two-level (square) chirp sample: v2 while cos(phase)>=0, else v1.
double square_chirp_sample(double t, const ChirpSpec& spec, double v1, double v2);

/// Voltage band (v1, v2) active at run time t: k = floor(t/T),
/// v1 = v_low + k*dV, v2 = v1 + dV, clamped so v2 never exceeds v_max.
std::pair<double, double> partition_bounds(double t, const PartitionPlan& plan);

/// Full probing run: per partition, a fresh f0->f1 square chirp between that
/// partition's voltage bounds. Length = sample_rate * T * n_partitions.
Signal generate_probing_signal(const PartitionPlan& plan, const ChirpSpec& spec);

/// Piecewise-constant validation signal visiting each (level, duration) entry.
Signal generate_step_signal(const std::vector<std::pair<double, double>>& levels,
                            double sample_rate_hz);

}  // namespace gridfit
