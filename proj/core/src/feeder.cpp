#include "gridfit/feeder.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numbers>

#include "gridfit/csv.hpp"
#include "gridfit/errors.hpp"
#include "gridfit/parallel.hpp"

namespace gridfit {

using Complex = std::complex<double>;

std::complex<double> LineSegment::impedance_ohm(double frequency_hz) const {
    const double x = 2.0 * std::numbers::pi * frequency_hz * l_mh_per_km * 1e-3;
    return Complex(r_ohm_per_km, x) * length_km;
}

void LineSegment::validate() const {
    if (!(length_km > 0.0)) throw ConfigError("LineSegment: length must be positive");
    if (r_ohm_per_km < 0.0 || l_mh_per_km < 0.0 || c_uf_per_km < 0.0)
        throw ConfigError("LineSegment: negative per-length parameter");
}

void TransformerModel::validate() const {
    if (!(rating_kva > 0.0)) throw ConfigError("TransformerModel: rating must be positive");
    if (!(v_secondary_v > 0.0) || !(v_primary_kv > 0.0))
        throw ConfigError("TransformerModel: voltages must be positive");
    for (double z : {r1_pu, x1_pu, r2_pu, x2_pu, rm_pu, xm_pu})
        if (z < 0.0) throw ConfigError("TransformerModel: negative impedance");
}

void ZipLoad::validate() const {
    if (!(v0_pu > 0.0)) throw ConfigError("ZipLoad: reference voltage must be positive");
    if (std::abs(zp + ip + pp - 1.0) > 1e-9)
        throw ConfigError("ZipLoad: active coefficients must sum to 1");
    if (std::abs(zq + iq + pq - 1.0) > 1e-9)
        throw ConfigError("ZipLoad: reactive coefficients must sum to 1");
}

ZipLoad zip_stratum(char stratum, double p0_kw, double q0_kvar) {
    ZipLoad load;
    load.p0_kw = p0_kw;
    load.q0_kvar = q0_kvar;
    switch (stratum) {
        case 'A': load.zp = 1.50; load.ip = -2.31; load.pp = 1.81;
                  load.zq = 7.41; load.iq = -11.97; load.pq = 5.56; break;
        case 'B': load.zp = 1.57; load.ip = -2.48; load.pp = 1.91;
                  load.zq = 9.28; load.iq = -15.29; load.pq = 7.01; break;
        case 'C': load.zp = 1.56; load.ip = -2.49; load.pp = 1.93;
                  load.zq = 10.1; load.iq = -16.75; load.pq = 7.65; break;
        case 'D': load.zp = 1.31; load.ip = -1.94; load.pp = 1.63;
                  load.zq = 9.20; load.iq = -15.27; load.pq = 7.07; break;
        case 'E': load.zp = 0.96; load.ip = -1.17; load.pp = 1.21;
                  load.zq = 6.28; load.iq = -10.16; load.pq = 4.88; break;
        case 'F': load.zp = 1.18; load.ip = -1.64; load.pp = 1.46;
                  load.zq = 8.29; load.iq = -13.67; load.pq = 6.38; break;
        default: throw ConfigError(std::string("zip_stratum: unknown stratum '") + stratum + "'");
    }
    load.validate();
    return load;
}

PowerKw zip_power(const ZipLoad& load, double v_pu) {
    if (!(v_pu > 0.0)) throw std::domain_error("zip_power: voltage must be positive");
    const double vr = v_pu / load.v0_pu;
    return {load.p0_kw * (load.zp * vr * vr + load.ip * vr + load.pp),
            load.q0_kvar * (load.zq * vr * vr + load.iq * vr + load.pq)};
}

double pv_available_power_kw(double irradiance_w_m2, double efficiency, double area_m2) {
    return efficiency * irradiance_w_m2 * area_m2 * 1e-3;
}

void Profiles::validate(std::size_t n_houses) const {
    if (!(dt_s > 0.0)) throw ConfigError("Profiles: dt must be positive");
    if (load_kw.size() != n_houses)
        throw ConfigError("Profiles: expected " + std::to_string(n_houses) + " load series, got " +
                          std::to_string(load_kw.size()));
    for (const auto& series : load_kw)
        if (series.size() != samples())
            throw ConfigError("Profiles: load/irradiance length mismatch");
    if (samples() < 2) throw ConfigError("Profiles: need at least two samples");
}

namespace {

std::vector<double> resample_linear(const std::vector<double>& t, const std::vector<double>& v,
                                    double dt, double horizon) {
    const auto n_out = static_cast<std::size_t>(std::floor(horizon / dt + 0.5)) + 1;
    std::vector<double> out(n_out);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < n_out; ++k) {
        const double tk = std::min(static_cast<double>(k) * dt, t.back());
        while (seg + 2 < t.size() && t[seg + 1] < tk) ++seg;
        const double t0 = t[seg], t1 = t[seg + 1];
        const double w = (tk - t0) / (t1 - t0);
        out[k] = v[seg] + w * (v[seg + 1] - v[seg]);
    }
    return out;
}

void check_time_column(const std::vector<std::vector<double>>& rows,
                       const std::filesystem::path& path) {
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i][0] > rows[i - 1][0]))
            throw ParseError("non-monotone timestamps in " + path.string(), i + 2);
    if (rows.size() < 2) throw ConfigError("profile too short: " + path.string());
    if (std::abs(rows.front()[0]) > 1e-9)
        throw ConfigError("profile must start at t=0: " + path.string());
}

}  // namespace

Profiles ingest_profiles(const std::filesystem::path& load_csv,
                         const std::filesystem::path& irradiance_csv, double target_dt) {
    if (!(target_dt > 0.0)) throw ConfigError("ingest_profiles: target_dt must be positive");
    const CsvTable load_tab = read_csv(load_csv);
    const CsvTable irr_tab = read_csv(irradiance_csv);
    if (load_tab.cols() < 2) throw ConfigError("load profile needs time + house columns");
    if (irr_tab.cols() != 2) throw ConfigError("irradiance profile needs exactly two columns");
    check_time_column(load_tab.rows, load_csv);
    check_time_column(irr_tab.rows, irradiance_csv);

    const double load_end = load_tab.rows.back()[0];
    const double irr_end = irr_tab.rows.back()[0];
    if (std::abs(load_end - irr_end) > 1e-6)
        throw ConfigError("ingest_profiles: profile horizons differ (" +
                          format_double(load_end) + " s vs " + format_double(irr_end) + " s)");

    std::vector<double> t_load(load_tab.rows.size()), t_irr(irr_tab.rows.size());
    for (std::size_t i = 0; i < load_tab.rows.size(); ++i) t_load[i] = load_tab.rows[i][0];
    for (std::size_t i = 0; i < irr_tab.rows.size(); ++i) t_irr[i] = irr_tab.rows[i][0];

    Profiles out;
    out.dt_s = target_dt;
    const double horizon = std::min(load_end, irr_end);
    const std::size_t n_houses = load_tab.cols() - 1;
    out.load_kw.resize(n_houses);
    for (std::size_t h = 0; h < n_houses; ++h) {
        std::vector<double> col(load_tab.rows.size());
        for (std::size_t i = 0; i < load_tab.rows.size(); ++i) col[i] = load_tab.rows[i][h + 1];
        out.load_kw[h] = resample_linear(t_load, col, target_dt, horizon);
    }
    std::vector<double> irr_col(irr_tab.rows.size());
    std::size_t clamped = 0;
    for (std::size_t i = 0; i < irr_tab.rows.size(); ++i) {
        irr_col[i] = irr_tab.rows[i][1];
        if (irr_col[i] < 0.0) {
            irr_col[i] = 0.0;
            ++clamped;
        }
    }
    if (clamped > 0)
        std::cerr << "warning: clamped " << clamped << " negative irradiance value(s) to zero\n";
    out.irradiance_w_m2 = resample_linear(t_irr, irr_col, target_dt, horizon);
    return out;
}

void FeederCase::validate() const {
    transformer.validate();
    plant.validate();
    if (!(source_v_pu > 0.0)) throw ConfigError("FeederCase: source voltage must be positive");
    if (source_series_r_pu < 0.0 || source_series_x_pu < 0.0)
        throw ConfigError("FeederCase: negative source impedance");
    if (houses.empty() || houses.size() != 2 * n_taps())
        throw ConfigError("FeederCase: expected two houses per tap (" +
                          std::to_string(2 * n_taps()) + "), got " +
                          std::to_string(houses.size()));
    for (const auto& seg : backbone) seg.validate();
    for (const auto& h : houses) {
        h.drop.validate();
        h.zip.validate();
        if (h.pv_area_m2 < 0.0 || h.pv_efficiency < 0.0 || h.pv_efficiency > 1.0)
            throw ConfigError("FeederCase: invalid PV parameters");
    }
    if (!(timestep_s > 0.0) || !(device_dt_s > 0.0))
        throw ConfigError("FeederCase: timesteps must be positive");
    if (!(frequency_hz > 0.0)) throw ConfigError("FeederCase: frequency must be positive");
}

FeederCase FeederCase::twelve_house_benchmark() {
    FeederCase c;
    c.backbone.assign(5, LineSegment{0.02, 0.346, 0.24, 0.072, LineSegment::Kind::backbone});
    House house;
    house.drop = LineSegment{0.02, 0.549, 0.23, 0.055, LineSegment::Kind::drop};
    house.zip = zip_stratum('D', 1.0, 0.33);
    c.houses.assign(12, house);
    return c;
}

NetworkSolution solve_network(const FeederCase& c, std::span<const PowerKw> consumed,
                              const NetworkSolution* warm_start) {
    const std::size_t n_houses = c.houses.size();
    const std::size_t n_taps = c.n_taps();
    if (consumed.size() != n_houses)
        throw ConfigError("solve_network: one injection per house required");

    const double v_base = c.transformer.v_secondary_v;
    const Complex e_src(c.source_v_pu * v_base, 0.0);
    const double z_base = c.transformer.z_base_ohm();
    const Complex z_src = Complex(c.source_series_r_pu, c.source_series_x_pu) * z_base;

    std::vector<Complex> z_span(c.backbone.size());
    for (std::size_t j = 0; j < c.backbone.size(); ++j)
        z_span[j] = c.backbone[j].impedance_ohm(c.frequency_hz);
    std::vector<Complex> z_drop(n_houses);
    for (std::size_t i = 0; i < n_houses; ++i)
        z_drop[i] = c.houses[i].drop.impedance_ohm(c.frequency_hz);

    NetworkSolution sol;
    sol.v_tap_v.assign(n_taps, e_src);
    sol.v_house_v.assign(n_houses, e_src);
    sol.v_bus_v = e_src;
    if (warm_start && warm_start->v_house_v.size() == n_houses &&
        warm_start->v_tap_v.size() == n_taps) {
        sol.v_tap_v = warm_start->v_tap_v;
        sol.v_house_v = warm_start->v_house_v;
        sol.v_bus_v = warm_start->v_bus_v;
    }
    sol.i_house_a.assign(n_houses, Complex(0.0, 0.0));
    sol.i_span_a.assign(c.backbone.size(), Complex(0.0, 0.0));

    constexpr int kMaxSweeps = 100;
    constexpr double kTol = 1e-8;
    double mismatch = 0.0;
    for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
        // backward: accumulate consumed currents from the leaves
        for (std::size_t i = 0; i < n_houses; ++i) {
            const Complex s_va(consumed[i].p_kw * 1e3, consumed[i].q_kvar * 1e3);
            sol.i_house_a[i] = std::conj(s_va / sol.v_house_v[i]);
        }
        std::vector<Complex> i_tap(n_taps, Complex(0.0, 0.0));
        for (std::size_t i = 0; i < n_houses; ++i) i_tap[i / 2] += sol.i_house_a[i];
        Complex downstream(0.0, 0.0);
        for (std::size_t j = c.backbone.size(); j-- > 0;) {
            downstream += i_tap[j + 1];
            sol.i_span_a[j] = downstream;
        }
        sol.i_source_a = downstream + i_tap[0];

        // forward: drop voltages from the source through the series impedances
        mismatch = 0.0;
        const Complex v_bus_new = e_src - z_src * sol.i_source_a;
        mismatch = std::max(mismatch, std::abs(v_bus_new - sol.v_bus_v) / v_base);
        sol.v_bus_v = v_bus_new;
        std::vector<Complex> v_tap_new(n_taps);
        v_tap_new[0] = v_bus_new;
        for (std::size_t j = 0; j < c.backbone.size(); ++j)
            v_tap_new[j + 1] = v_tap_new[j] - z_span[j] * sol.i_span_a[j];
        for (std::size_t t = 0; t < n_taps; ++t) {
            mismatch = std::max(mismatch, std::abs(v_tap_new[t] - sol.v_tap_v[t]) / v_base);
            sol.v_tap_v[t] = v_tap_new[t];
        }
        for (std::size_t i = 0; i < n_houses; ++i) {
            const Complex v_new = sol.v_tap_v[i / 2] - z_drop[i] * sol.i_house_a[i];
            mismatch = std::max(mismatch, std::abs(v_new - sol.v_house_v[i]) / v_base);
            sol.v_house_v[i] = v_new;
        }
        sol.sweeps = sweep;
        if (mismatch < kTol) return sol;
    }
    throw DivergenceError("solve_network: no convergence after 100 sweeps (worst |dV| " +
                              format_double(mismatch) + " p.u.)",
                          mismatch);
}

namespace {

// Per-house device state for one run; restored between fixed-point rounds.
struct DeviceArray {
    InverterBinding binding;
    GsfMode mode;
    PlantParams params;  // volt_var_enabled follows the mode
    std::vector<PlantState> plant_states;
    std::vector<PartitionedSimulator> sims;
    const PartitionedModel* model = nullptr;

    std::vector<PlantState> plant_snapshot;
    std::vector<PartitionedSimulator::Snapshot> sim_snapshots;

    void snapshot() {
        if (binding == InverterBinding::detailed) {
            plant_snapshot = plant_states;
        } else {
            sim_snapshots.clear();
            for (const auto& s : sims) sim_snapshots.push_back(s.snapshot());
        }
    }
    void restore() {
        if (binding == InverterBinding::detailed) {
            plant_states = plant_snapshot;
        } else {
            for (std::size_t i = 0; i < sims.size(); ++i) sims[i].restore(sim_snapshots[i]);
        }
    }
};

struct Injection {
    double p_kw;
    double q_kvar;
    double i_mag_a;
};

// The load profile sets the instantaneous base power; reactive scales with
// the template's power factor.
ZipLoad scaled_zip(const ZipLoad& tpl, double p0_now_kw) {
    ZipLoad z = tpl;
    const double ratio = tpl.p0_kw != 0.0 ? p0_now_kw / tpl.p0_kw : 0.0;
    z.p0_kw = p0_now_kw;
    z.q0_kvar = tpl.q0_kvar * ratio;
    return z;
}

}  // namespace

TimeseriesResult run_timeseries(const FeederCase& c, GsfMode mode, InverterBinding binding,
                                const PartitionedModel* model) {
    c.validate();
    c.profiles.validate(c.houses.size());
    if (binding == InverterBinding::partitioned && model == nullptr)
        throw ConfigError("run_timeseries: partitioned binding needs a model");
    if (std::abs(c.profiles.dt_s - c.timestep_s) > 1e-9)
        throw ConfigError("run_timeseries: profiles must be sampled at the coupling step");

    const std::size_t n_houses = c.houses.size();
    const std::size_t steps = c.profiles.samples();
    const double v_base = c.transformer.v_secondary_v;

    DeviceArray devices;
    devices.binding = binding;
    devices.mode = mode;
    devices.params = c.plant;
    devices.params.volt_var_enabled = (mode == GsfMode::volt_var);
    devices.model = model;

    std::size_t n_sub = 0;
    double sub_dt = 0.0;
    if (binding == InverterBinding::detailed) {
        sub_dt = c.device_dt_s;
        n_sub = static_cast<std::size_t>(std::llround(c.timestep_s / sub_dt));
        if (n_sub == 0 || std::abs(c.timestep_s - static_cast<double>(n_sub) * sub_dt) > 1e-9)
            throw ConfigError("run_timeseries: device_dt must divide the coupling step");
        devices.plant_states.assign(
            n_houses, plant_equilibrium(c.source_v_pu,
                                        pv_available_power_kw(c.profiles.irradiance_w_m2[0],
                                                              c.houses[0].pv_efficiency,
                                                              c.houses[0].pv_area_m2),
                                        devices.params));
    } else {
        sub_dt = model->ts;
        n_sub = static_cast<std::size_t>(std::llround(c.timestep_s / sub_dt));
        if (n_sub == 0 || std::abs(c.timestep_s - static_cast<double>(n_sub) * sub_dt) > 1e-9)
            throw ConfigError("run_timeseries: model sampling time must divide the coupling step");
        devices.sims.assign(n_houses, PartitionedSimulator(*model));
        for (auto& sim : devices.sims) sim.settle(c.source_v_pu);
    }

    TimeseriesResult res;
    res.mode = mode;
    res.binding = binding;
    res.time_s.reserve(steps);
    res.v_bus_pu.reserve(steps);
    res.v_house_pu.assign(n_houses, {});
    res.i_house_a.assign(n_houses, {});
    res.q_house_kvar.assign(n_houses, {});
    for (auto& v : res.v_house_pu) v.reserve(steps);

    std::vector<double> v_guess(n_houses, c.source_v_pu);
    std::vector<Injection> inj(n_houses);
    std::vector<PowerKw> consumed(n_houses);
    NetworkSolution sol;
    bool have_sol = false;

    const bool parallel_devices = n_houses * n_sub >= 4096 && thread_budget() > 1;

    const auto step_devices = [&](const std::vector<double>& v_nodes,
                                  const std::vector<double>& p_avail) {
        const auto one_house = [&](std::size_t i) {
            const double v = v_nodes[i];
            if (binding == InverterBinding::detailed) {
                PlantState s = devices.plant_states[i];
                for (std::size_t k = 0; k < n_sub; ++k)
                    s = plant_step(s, v, p_avail[i], sub_dt, devices.params);
                devices.plant_states[i] = s;
                inj[i] = {plant_p_kw(s, devices.params), plant_q_kvar(s, devices.params),
                          std::hypot(s.i_d_a, s.i_q_a)};
            } else {
                const double p_star = std::min(p_avail[i], devices.params.s_rating_kva);
                double i_q = 0.0;
                if (mode == GsfMode::volt_var) {
                    auto& sim = devices.sims[i];
                    for (std::size_t k = 0; k < n_sub; ++k) i_q = sim.step(v);
                } else {
                    // surrogate of a unit with grid support off: no reactive output,
                    // but the recursion still advances so a later enable is seamless
                    auto& sim = devices.sims[i];
                    for (std::size_t k = 0; k < n_sub; ++k) i_q = sim.step(v);
                    i_q = 0.0;
                }
                const double v_volts = std::max(v, 0.1) * v_base;
                const double i_d = p_star * 1e3 / v_volts;
                double q = i_q * v * v_base * 1e-3;
                // rating cap is known hardware logic, not learned dynamics
                const double headroom =
                    std::sqrt(std::max(0.0, devices.params.s_rating_kva * devices.params.s_rating_kva -
                                                p_star * p_star));
                q = std::copysign(std::min(std::abs(q), headroom), q);
                const double i_q_eff = q * 1e3 / v_volts;
                inj[i] = {p_star, q, std::hypot(i_d, i_q_eff)};
            }
        };
        if (parallel_devices)
            parallel_for(n_houses, one_house);
        else
            for (std::size_t i = 0; i < n_houses; ++i) one_house(i);
    };

    const auto t_start = std::chrono::steady_clock::now();
    std::vector<double> p_avail(n_houses);
    for (std::size_t step = 0; step < steps; ++step) {
        const double t_now = static_cast<double>(step) * c.timestep_s;
        for (std::size_t i = 0; i < n_houses; ++i)
            p_avail[i] = pv_available_power_kw(c.profiles.irradiance_w_m2[step],
                                               c.houses[i].pv_efficiency, c.houses[i].pv_area_m2);

        devices.snapshot();
        constexpr int kMaxInner = 10;
        for (int inner = 0; inner < kMaxInner; ++inner) {
            if (inner > 0) devices.restore();
            step_devices(v_guess, p_avail);
            for (std::size_t i = 0; i < n_houses; ++i) {
                const PowerKw load = zip_power(scaled_zip(c.houses[i].zip,
                                                          c.profiles.load_kw[i][step]),
                                               v_guess[i]);
                consumed[i] = {load.p_kw - inj[i].p_kw, load.q_kvar - inj[i].q_kvar};
            }
            try {
                sol = solve_network(c, consumed, have_sol ? &sol : nullptr);
            } catch (const DivergenceError& e) {
                throw DivergenceError("run_timeseries: " + std::string(e.what()) + " at t=" +
                                          format_double(t_now) + " s",
                                      e.worst_mismatch());
            }
            have_sol = true;
            double delta = 0.0;
            for (std::size_t i = 0; i < n_houses; ++i) {
                const double v_new = sol.v_house_pu(i, c);
                delta = std::max(delta, std::abs(v_new - v_guess[i]));
                v_guess[i] = v_new;
            }
            if (delta < 1e-6) break;  // device states stay committed
        }

        res.time_s.push_back(t_now);
        res.v_bus_pu.push_back(std::abs(sol.v_bus_v) / v_base);
        for (std::size_t i = 0; i < n_houses; ++i) {
            res.v_house_pu[i].push_back(v_guess[i]);
            res.i_house_a[i].push_back(inj[i].i_mag_a);
            res.q_house_kvar[i].push_back(inj[i].q_kvar);
        }
    }
    res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

SweepResult load_sweep(const FeederCase& c, double p_min_kw, double p_max_kw, int steps) {
    c.validate();
    if (steps < 2) throw ConfigError("load_sweep: need at least two sweep points");

    SweepResult res;
    res.net_load_kw.resize(static_cast<std::size_t>(steps));
    res.v_house_pu.assign(c.houses.size(), std::vector<double>(static_cast<std::size_t>(steps)));

    std::vector<PowerKw> consumed(c.houses.size());
    NetworkSolution sol;
    bool have_sol = false;
    for (int k = 0; k < steps; ++k) {
        const double w = static_cast<double>(k) / (steps - 1);
        const double p_total = p_min_kw + w * (p_max_kw - p_min_kw);
        for (auto& inj : consumed) inj = {p_total / static_cast<double>(c.houses.size()), 0.0};
        sol = solve_network(c, consumed, have_sol ? &sol : nullptr);
        have_sol = true;
        res.net_load_kw[static_cast<std::size_t>(k)] = p_total;
        for (std::size_t i = 0; i < c.houses.size(); ++i)
            res.v_house_pu[i][static_cast<std::size_t>(k)] = sol.v_house_pu(i, c);
    }
    return res;
}

}  // namespace gridfit
