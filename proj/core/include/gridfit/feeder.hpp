#pragma once

#include <complex>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "gridfit/partition.hpp"
#include "gridfit/plant.hpp"

namespace gridfit {

struct LineSegment {
    enum class Kind { backbone, drop };

    double length_km = 0.02;
    double r_ohm_per_km = 0.346;
    double l_mh_per_km = 0.24;
    double c_uf_per_km = 0.072;  // carried for completeness; the sweep solver neglects shunts
    Kind kind = Kind::backbone;

    std::complex<double> impedance_ohm(double frequency_hz) const;
    void validate() const;
};

/// Split-phase service transformer record. Winding impedances are per unit on
/// the (rating, secondary voltage) base; the magnetizing branch is kept for
/// reference but never enters the sweep solver.
struct TransformerModel {
    double rating_kva = 75.0;
    double v_primary_kv = 14.4;
    double v_secondary_v = 240.0;
    double r1_pu = 0.06;
    double x1_pu = 0.020;
    double r2_pu = 0.0264;
    double x2_pu = 0.0550;
    double rm_pu = 500.0;
    double xm_pu = 500.0;

    double series_r_pu() const { return r1_pu + r2_pu; }
    double series_x_pu() const { return x1_pu + x2_pu; }
    double z_base_ohm() const { return v_secondary_v * v_secondary_v / (rating_kva * 1e3); }
    void validate() const;
};

/// Voltage-dependent load: P and Q are quadratics in V/V0 whose coefficients
/// sum to one.
struct ZipLoad {
    double p0_kw = 1.0;
    double q0_kvar = 0.33;
    double zp = 1.31, ip = -1.94, pp = 1.63;
    double zq = 9.20, iq = -15.27, pq = 7.07;
    double v0_pu = 1.0;

    void validate() const;
};

/// Residential ZIP coefficient strata (consumer classes A..F). Two
/// constant-power entries (A reactive: 5.56, F active: 1.46) are adjusted by
/// 0.01 so every row satisfies the unity sum identity.
ZipLoad zip_stratum(char stratum, double p0_kw, double q0_kvar);

struct PowerKw {
    double p_kw = 0.0;
    double q_kvar = 0.0;
};

/// Exact evaluation of the ZIP quadratics at voltage v (p.u. of v0).
PowerKw zip_power(const ZipLoad& load, double v_pu);

/// Maximum-power-point estimate mu * I * A, in kW.
double pv_available_power_kw(double irradiance_w_m2, double efficiency, double area_m2);

struct House {
    LineSegment drop{0.02, 0.549, 0.23, 0.055, LineSegment::Kind::drop};
    ZipLoad zip{};
    double pv_area_m2 = 50.2605;
    double pv_efficiency = 0.167;
};

/// Uniformly resampled load/irradiance series shared by a simulation run.
struct Profiles {
    double dt_s = 1.0;
    std::vector<std::vector<double>> load_kw;  // [house][sample]
    std::vector<double> irradiance_w_m2;       // [sample]

    std::size_t samples() const { return irradiance_w_m2.size(); }
    double horizon_s() const { return samples() < 2 ? 0.0 : dt_s * static_cast<double>(samples() - 1); }
    void validate(std::size_t n_houses) const;
};

/// Reads hour-or-finer CSV profiles (load: time_s + one kW column per house;
/// irradiance: time_s + W/m^2), linearly interpolates onto a uniform
/// target_dt grid and clamps irradiance at zero. Throws ParseError with the
/// line number on malformed rows and ConfigError when horizons disagree.
Profiles ingest_profiles(const std::filesystem::path& load_csv,
                         const std::filesystem::path& irradiance_csv, double target_dt);

/// Radial feeder: regulated source -> effective series source impedance ->
/// secondary bus -> backbone spans -> taps, two houses with individual drop
/// lines per tap. House i connects at tap i/2; tap 0 is the secondary bus.
struct FeederCase {
    TransformerModel transformer{};
    double source_v_pu = 1.02;
    // Effective source + transformer series impedance on the transformer
    // rating base. Set to transformer.series_*_pu() to model the nameplate
    // winding impedances literally.
    double source_series_r_pu = 0.024;
    double source_series_x_pu = 0.045;

    std::vector<LineSegment> backbone;  // spans between consecutive taps
    std::vector<House> houses;          // size 2 * (backbone.size() + 1)

    PlantParams plant{};      // per-house inverter (identical units)
    double frequency_hz = 60.0;
    double timestep_s = 1.0;  // network coupling step
    double device_dt_s = 1e-3;
    Profiles profiles{};

    std::size_t n_taps() const { return backbone.size() + 1; }
    void validate() const;

    /// Fig-7-style default: 5 backbone spans of 20 m, 12 houses on 20 m
    /// drops, stratum-D ZIP loads, 8.4 kVA inverters.
    static FeederCase twelve_house_benchmark();
};

struct NetworkSolution {
    std::complex<double> v_bus_v;                 // secondary bus phasor, volts
    std::vector<std::complex<double>> v_tap_v;    // per tap
    std::vector<std::complex<double>> v_house_v;  // per house
    std::vector<std::complex<double>> i_house_a;  // consumed current per house
    std::vector<std::complex<double>> i_span_a;   // backbone span currents
    std::complex<double> i_source_a;
    int sweeps = 0;

    double v_house_pu(std::size_t i, const FeederCase& c) const {
        return std::abs(v_house_v[i]) / c.transformer.v_secondary_v;
    }
};

/// Backward/forward sweep with constant-PQ injections (per-house consumed
/// power). Converges to max |dV| < 1e-8 p.u.; throws DivergenceError with the
/// worst mismatch after 100 sweeps. `warm_start` seeds node voltages.
NetworkSolution solve_network(const FeederCase& c, std::span<const PowerKw> consumed,
                              const NetworkSolution* warm_start = nullptr);

enum class GsfMode { no_gsf, volt_var };
enum class InverterBinding { detailed, partitioned };

struct TimeseriesResult {
    GsfMode mode{};
    InverterBinding binding{};
    std::vector<double> time_s;
    std::vector<double> v_bus_pu;
    std::vector<std::vector<double>> v_house_pu;     // [house][step]
    std::vector<std::vector<double>> i_house_a;      // injected current magnitude
    std::vector<std::vector<double>> q_house_kvar;   // injected reactive power
    double wall_time_s = 0.0;  // device stepping + network solving only
};

/// Quasi-static time series over the case profiles: devices are sub-stepped
/// against held node voltages, then injections and the network solve are
/// fixed-point iterated (<= 10 inner rounds to 1e-6 p.u.) before committing
/// the step. `model` is required for the partitioned binding and must share
/// the plant's sampling assumptions.
TimeseriesResult run_timeseries(const FeederCase& c, GsfMode mode, InverterBinding binding,
                                const PartitionedModel* model = nullptr);

struct SweepResult {
    std::vector<double> net_load_kw;              // total, consumption positive
    std::vector<std::vector<double>> v_house_pu;  // [house][step]
};

/// Uniform unity-power-factor net-load sweep with grid support off.
SweepResult load_sweep(const FeederCase& c, double p_min_kw, double p_max_kw, int steps);

}  // namespace gridfit
