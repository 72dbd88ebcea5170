#include "gridfit/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "gridfit/csv.hpp"
#include "gridfit/errors.hpp"

namespace gridfit {

namespace {

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void write_overlay(const std::filesystem::path& path, const Signal& reference,
                   const Signal& candidate, const char* ref_name, const char* cand_name) {
    CsvTable table;
    table.header = {"time_s", ref_name, cand_name};
    table.rows.reserve(reference.size());
    for (std::size_t i = 0; i < reference.size(); ++i)
        table.rows.push_back({reference.timestamps[i], reference.values[i], candidate.values[i]});
    write_csv(path, table);
}

}  // namespace

double trace_nrmse(std::span<const double> y, std::span<const double> y_hat) {
    if (y.size() != y_hat.size() || y.size() < 2)
        throw ConfigError("trace_nrmse: series must match and have >= 2 points");
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double sse = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        sse += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
        sst += (y[i] - mean) * (y[i] - mean);
    }
    if (sst == 0.0) throw ConfigError("trace_nrmse: constant reference trace");
    return std::sqrt(sse / sst);
}

double step_trace_nrmse(std::span<const double> y, std::span<const double> y_hat) {
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    if (*hi - *lo > 1e-9) return trace_nrmse(y, y_hat);
    double sse = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) sse += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
    return std::sqrt(sse / static_cast<double>(y.size())) < 1e-3 ? 0.0 : 1.0;
}

SingleHouseValidation run_single_house_validation(const SearchConfig& cfg,
                                                  const PlantParams& plant,
                                                  const std::filesystem::path& out_dir) {
    SingleHouseValidation out;
    out.search = binary_search_partitions(cfg, plant);
    const PartitionedModel& model = out.search.model;

    // chirp replay overlay at the selected partition count
    PartitionPlan plan{cfg.v_low, cfg.v_max, out.search.n_star, cfg.chirp.duration_s};
    const Signal probe = generate_probing_signal(plan, cfg.chirp);
    const Signal p_avail = Signal::constant_like(probe, cfg.probe_p_avail_kw);

    const auto t_det = std::chrono::steady_clock::now();
    const Signal detailed = simulate_plant(probe, p_avail, plant, cfg.sim_dt);
    const double wall_detailed = elapsed_s(t_det);

    const auto t_par = std::chrono::steady_clock::now();
    const Signal replay = simulate_partitioned(model, probe);
    const double wall_partitioned = elapsed_s(t_par);

    write_signal_csv(out_dir / "probing_signal.csv", probe, "value_pu");
    write_overlay(out_dir / "chirp_overlay.csv", detailed, replay, "i_detailed_a",
                  "i_partitioned_a");

    const double replay_nrmse = trace_nrmse(detailed.values, replay.values);

    // step suite across the five curve regions
    const VoltVarCurve& curve = plant.curve;
    const double edges[6] = {curve.v_low, curve.v1, curve.v2, curve.v3, curve.v4, curve.v_high};
    for (int s = 0; s < 5; ++s) {
        const Signal step = generate_step_signal({{edges[s], 1.0}, {edges[s + 1], 1.0}},
                                                 cfg.chirp.sample_rate_hz);
        const Signal step_p = Signal::constant_like(step, cfg.probe_p_avail_kw);
        const Signal det = simulate_plant(step, step_p, plant, cfg.sim_dt);
        const Signal par = simulate_partitioned(model, step);
        write_overlay(out_dir / ("step_overlay_" + std::to_string(s + 1) + ".csv"), det, par,
                      "i_detailed_a", "i_partitioned_a");
        const auto [lo, hi] = std::minmax_element(det.values.begin(), det.values.end());
        double sse = 0.0;
        for (std::size_t i = 0; i < det.size(); ++i)
            sse += (det.values[i] - par.values[i]) * (det.values[i] - par.values[i]);
        out.step_ref_span_a.push_back(*hi - *lo);
        out.step_rms_error_a.push_back(std::sqrt(sse / static_cast<double>(det.size())));
        out.step_nrmse.push_back(step_trace_nrmse(det.values, par.values));
    }

    out.result.scenario = "single_house";
    out.result.nrmse_percent = 100.0 * replay_nrmse;
    out.result.fit_percent = model.overall_fit;
    out.result.wall_time_detailed_s = wall_detailed;
    out.result.wall_time_partitioned_s = wall_partitioned;
    out.result.speedup = wall_detailed / wall_partitioned;

    CsvTable trace;
    trace.header = {"n", "overall_fit_percent", "wall_time_s"};
    for (const auto& e : out.search.trace)
        trace.rows.push_back({static_cast<double>(e.n), e.overall_fit, e.wall_time_s});
    write_csv(out_dir / "search_trace.csv", trace);
    return out;
}

FeederComparison run_feeder_comparison(const FeederCase& c, const PartitionedModel& model,
                                       GsfMode mode, const std::filesystem::path& out_dir,
                                       int repeats) {
    if (repeats < 1) throw ConfigError("run_feeder_comparison: repeats must be >= 1");

    FeederComparison out;
    std::vector<double> wall_det, wall_par;
    for (int r = 0; r < repeats; ++r) {
        TimeseriesResult det = run_timeseries(c, mode, InverterBinding::detailed);
        TimeseriesResult par = run_timeseries(c, mode, InverterBinding::partitioned, &model);
        wall_det.push_back(det.wall_time_s);
        wall_par.push_back(par.wall_time_s);
        if (r == 0) {
            out.detailed = std::move(det);
            out.partitioned = std::move(par);
        }
    }

    double nrmse_sum = 0.0;
    for (std::size_t h = 0; h < c.houses.size(); ++h) {
        const double e = trace_nrmse(out.detailed.i_house_a[h], out.partitioned.i_house_a[h]);
        out.per_house_nrmse.push_back(e);
        nrmse_sum += e;
    }
    const double avg_nrmse = nrmse_sum / static_cast<double>(c.houses.size());

    const char* mode_name = mode == GsfMode::volt_var ? "volt_var" : "no_gsf";
    out.result.scenario = std::string("feeder_") + mode_name;
    out.result.nrmse_percent = 100.0 * avg_nrmse;
    out.result.fit_percent = 100.0 * (1.0 - avg_nrmse);
    out.result.wall_time_detailed_s = median(wall_det);
    out.result.wall_time_partitioned_s = median(wall_par);
    out.result.speedup = out.result.wall_time_detailed_s / out.result.wall_time_partitioned_s;

    const auto dump = [&](const TimeseriesResult& ts, const char* tag) {
        CsvTable currents, voltages, reactive;
        currents.header = {"time_s"};
        voltages.header = {"time_s", "v_bus_pu"};
        reactive.header = {"time_s"};
        for (std::size_t h = 0; h < c.houses.size(); ++h) {
            const std::string col = "h" + std::to_string(h + 1);
            currents.header.push_back(col + "_i_a");
            voltages.header.push_back(col + "_v_pu");
            reactive.header.push_back(col + "_q_kvar");
        }
        for (std::size_t k = 0; k < ts.time_s.size(); ++k) {
            std::vector<double> ci{ts.time_s[k]}, vi{ts.time_s[k], ts.v_bus_pu[k]},
                qi{ts.time_s[k]};
            for (std::size_t h = 0; h < c.houses.size(); ++h) {
                ci.push_back(ts.i_house_a[h][k]);
                vi.push_back(ts.v_house_pu[h][k]);
                qi.push_back(ts.q_house_kvar[h][k]);
            }
            currents.rows.push_back(std::move(ci));
            voltages.rows.push_back(std::move(vi));
            reactive.rows.push_back(std::move(qi));
        }
        write_csv(out_dir / (std::string("currents_") + tag + "_" + mode_name + ".csv"), currents);
        write_csv(out_dir / (std::string("voltages_") + tag + "_" + mode_name + ".csv"), voltages);
        write_csv(out_dir / (std::string("reactive_") + tag + "_" + mode_name + ".csv"), reactive);
    };
    dump(out.detailed, "detailed");
    dump(out.partitioned, "partitioned");
    return out;
}

SweepResult run_load_sweep_report(const FeederCase& c, const std::filesystem::path& out_csv,
                                  double p_min_kw, double p_max_kw, int steps) {
    SweepResult sweep = load_sweep(c, p_min_kw, p_max_kw, steps);
    CsvTable table;
    table.header = {"net_load_kw"};
    for (std::size_t h = 0; h < c.houses.size(); ++h)
        table.header.push_back("h" + std::to_string(h + 1) + "_v_pu");
    for (std::size_t k = 0; k < sweep.net_load_kw.size(); ++k) {
        std::vector<double> row{sweep.net_load_kw[k]};
        for (std::size_t h = 0; h < c.houses.size(); ++h) row.push_back(sweep.v_house_pu[h][k]);
        table.rows.push_back(std::move(row));
    }
    write_csv(out_csv, table);
    return sweep;
}

void print_bench_summary(std::ostream& os, std::span<const BenchResult> results) {
    os << "scenario            nrmse_%   fit_%     t_detailed_s  t_partitioned_s  speedup\n";
    for (const auto& r : results) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-18s  %-8.4f  %-8.4f  %-12.3f  %-15.3f  %.2fx\n",
                      r.scenario.c_str(), r.nrmse_percent, r.fit_percent,
                      r.wall_time_detailed_s, r.wall_time_partitioned_s, r.speedup);
        os << line;
    }
}

}  // namespace gridfit
