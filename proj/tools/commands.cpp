#include "commands.hpp"

#include <chrono>
#include <iostream>

#include "gridfit/bench.hpp"
#include "gridfit/csv.hpp"
#include "gridfit/errors.hpp"
#include "model_store.hpp"

namespace gridfit::cli {

namespace {

RunConfig load_with_overrides(const CommonOptions& opts) {
    RunConfig cfg = load_run_config(opts.config_path);
    if (opts.out_dir) cfg.output_dir = *opts.out_dir;
    if (opts.seed) {
        cfg.seed = *opts.seed;
        cfg.plant.noise_seed = *opts.seed;
        if (cfg.feeder) cfg.feeder->plant.noise_seed = *opts.seed;
    }
    std::filesystem::create_directories(cfg.output_dir);
    return cfg;
}

Signal probe_signal(const RunConfig& cfg, int partitions) {
    PartitionPlan plan{cfg.search.v_low, cfg.search.v_max, partitions,
                       cfg.search.chirp.duration_s};
    return generate_probing_signal(plan, cfg.search.chirp);
}

void write_timeseries(const TimeseriesResult& ts, std::size_t n_houses,
                      const std::filesystem::path& dir, const std::string& tag) {
    CsvTable currents, voltages, reactive;
    currents.header = {"time_s"};
    voltages.header = {"time_s", "v_bus_pu"};
    reactive.header = {"time_s"};
    for (std::size_t h = 0; h < n_houses; ++h) {
        const std::string col = "h" + std::to_string(h + 1);
        currents.header.push_back(col + "_i_a");
        voltages.header.push_back(col + "_v_pu");
        reactive.header.push_back(col + "_q_kvar");
    }
    for (std::size_t k = 0; k < ts.time_s.size(); ++k) {
        std::vector<double> ci{ts.time_s[k]}, vi{ts.time_s[k], ts.v_bus_pu[k]}, qi{ts.time_s[k]};
        for (std::size_t h = 0; h < n_houses; ++h) {
            ci.push_back(ts.i_house_a[h][k]);
            vi.push_back(ts.v_house_pu[h][k]);
            qi.push_back(ts.q_house_kvar[h][k]);
        }
        currents.rows.push_back(std::move(ci));
        voltages.rows.push_back(std::move(vi));
        reactive.rows.push_back(std::move(qi));
    }
    write_csv(dir / ("currents_" + tag + ".csv"), currents);
    write_csv(dir / ("voltages_" + tag + ".csv"), voltages);
    write_csv(dir / ("reactive_" + tag + ".csv"), reactive);
}

std::int64_t now_unix() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

GsfMode parse_mode(const std::string& mode) {
    if (mode == "no_gsf") return GsfMode::no_gsf;
    if (mode == "volt_var") return GsfMode::volt_var;
    throw ConfigError("unknown mode '" + mode + "' (expected no_gsf or volt_var)");
}

InverterBinding parse_binding(const std::string& binding) {
    if (binding == "detailed") return InverterBinding::detailed;
    if (binding == "partitioned") return InverterBinding::partitioned;
    throw ConfigError("unknown binding '" + binding + "' (expected detailed or partitioned)");
}

}  // namespace

int cmd_probe(const CommonOptions& opts, int partitions) {
    const RunConfig cfg = load_with_overrides(opts);
    const int n = partitions > 0 ? partitions : cfg.search.n_max;
    const Signal probe = probe_signal(cfg, n);
    const Signal p_avail = Signal::constant_like(probe, cfg.search.probe_p_avail_kw);
    const Signal response = simulate_plant(probe, p_avail, cfg.plant, cfg.search.sim_dt);

    write_signal_csv(cfg.output_dir / "probing_signal.csv", probe, "value_pu");
    write_signal_csv(cfg.output_dir / "plant_response.csv", response, "i_out_A");
    std::cout << "probe: " << n << " partitions, " << probe.duration() << " s, wrote "
              << (cfg.output_dir / "probing_signal.csv").string() << " and "
              << (cfg.output_dir / "plant_response.csv").string() << "\n";
    return 0;
}

int cmd_fit(const CommonOptions& opts, const std::string& u_csv, const std::string& y_csv,
            int partitions) {
    const RunConfig cfg = load_with_overrides(opts);

    ModelStore store;
    store.config_hash = cfg.config_hash;
    store.created_unix_s = now_unix();

    if (!u_csv.empty() || !y_csv.empty()) {
        if (u_csv.empty() || y_csv.empty())
            throw ConfigError("fit: --u and --y must be given together");
        const int n = partitions > 0 ? partitions : cfg.search.n_max;
        const Signal u = read_signal_csv(u_csv);
        const Signal y = read_signal_csv(y_csv);
        store.model = fit_partitioned_from_records(u, y, n, cfg.search);
        std::cout << "fit (from records): " << n << " partitions, overall fit "
                  << store.model.overall_fit << "%\n";
    } else {
        const BinarySearchResult res = binary_search_partitions(cfg.search, cfg.plant);
        store.model = res.model;
        CsvTable trace;
        trace.header = {"n", "overall_fit_percent", "wall_time_s"};
        for (const auto& e : res.trace)
            trace.rows.push_back({static_cast<double>(e.n), e.overall_fit, e.wall_time_s});
        write_csv(cfg.output_dir / "search_trace.csv", trace);
        std::cout << "fit: selected " << res.n_star << " partitions, overall fit "
                  << store.model.overall_fit << "% (" << res.trace.size() << " evaluations)\n";
        if (!res.check)
            std::cout << "fit: search exited through the non-monotone branch; see warnings\n";
    }
    const auto model_path = cfg.output_dir / "model.json";
    store.save(model_path);
    std::cout << "fit: model written to " << model_path.string() << "\n";
    return 0;
}

int cmd_validate(const CommonOptions& opts, const std::filesystem::path& model_path,
                 const std::string& scenario) {
    const RunConfig cfg = load_with_overrides(opts);
    const ModelStore store = ModelStore::load(model_path);
    const PartitionedModel& model = store.model;

    if (std::abs(model.v_low - cfg.search.v_low) > 1e-9 ||
        std::abs(model.v_max - cfg.search.v_max) > 1e-9)
        throw ConfigError("validate: model voltage limits [" + format_double(model.v_low) + ", " +
                          format_double(model.v_max) + "] do not match the configured scenario [" +
                          format_double(cfg.search.v_low) + ", " +
                          format_double(cfg.search.v_max) + "]");

    if (scenario == "chirp") {
        const int n = static_cast<int>(model.ranges.size());
        const Signal probe = probe_signal(cfg, n);
        const Signal p_avail = Signal::constant_like(probe, cfg.search.probe_p_avail_kw);
        const Signal detailed = simulate_plant(probe, p_avail, cfg.plant, cfg.search.sim_dt);
        const Signal replay = simulate_partitioned(model, probe);
        CsvTable overlay;
        overlay.header = {"time_s", "i_detailed_a", "i_partitioned_a"};
        for (std::size_t i = 0; i < probe.size(); ++i)
            overlay.rows.push_back({probe.timestamps[i], detailed.values[i], replay.values[i]});
        write_csv(cfg.output_dir / "validate_chirp_overlay.csv", overlay);
        const double fit = 100.0 * (1.0 - trace_nrmse(detailed.values, replay.values));
        std::cout << "validate chirp: replay fit " << fit << "% (stored overall "
                  << model.overall_fit << "%)\n";
        return 0;
    }
    if (scenario == "steps") {
        const VoltVarCurve& curve = cfg.plant.curve;
        const double edges[6] = {curve.v_low, curve.v1, curve.v2, curve.v3, curve.v4,
                                 curve.v_high};
        for (int s = 0; s < 5; ++s) {
            const Signal input = generate_step_signal({{edges[s], 1.0}, {edges[s + 1], 1.0}},
                                                      cfg.search.chirp.sample_rate_hz);
            const Signal p_avail = Signal::constant_like(input, cfg.search.probe_p_avail_kw);
            const Signal detailed = simulate_plant(input, p_avail, cfg.plant, cfg.search.sim_dt);
            const Signal replay = simulate_partitioned(model, input);
            CsvTable overlay;
            overlay.header = {"time_s", "v_pu", "i_detailed_a", "i_partitioned_a"};
            for (std::size_t i = 0; i < input.size(); ++i)
                overlay.rows.push_back({input.timestamps[i], input.values[i], detailed.values[i],
                                        replay.values[i]});
            write_csv(cfg.output_dir / ("validate_step_" + std::to_string(s + 1) + ".csv"),
                      overlay);
            double sse = 0.0;
            for (std::size_t i = 0; i < detailed.size(); ++i)
                sse += (detailed.values[i] - replay.values[i]) *
                       (detailed.values[i] - replay.values[i]);
            std::cout << "validate step " << edges[s] << " -> " << edges[s + 1] << ": NRMSE "
                      << 100.0 * step_trace_nrmse(detailed.values, replay.values)
                      << "%, rms error "
                      << std::sqrt(sse / static_cast<double>(detailed.size())) << " A\n";
        }
        return 0;
    }
    throw ConfigError("unknown scenario '" + scenario + "' (expected chirp or steps)");
}

int cmd_simulate(const CommonOptions& opts, const std::string& mode_str,
                 const std::string& binding_str, const std::filesystem::path& model_path) {
    const RunConfig cfg = load_with_overrides(opts);
    if (!cfg.feeder) throw ConfigError("simulate: config has no feeder section");
    const GsfMode mode = parse_mode(mode_str);
    const InverterBinding binding = parse_binding(binding_str);

    std::optional<ModelStore> store;
    if (binding == InverterBinding::partitioned) {
        if (model_path.empty())
            throw ConfigError("simulate: partitioned binding needs --model");
        store = ModelStore::load(model_path);
    }
    const TimeseriesResult res = run_timeseries(*cfg.feeder, mode, binding,
                                                store ? &store->model : nullptr);
    const std::string tag = std::string(binding == InverterBinding::detailed ? "detailed"
                                                                             : "partitioned") +
                            "_" + mode_str;
    write_timeseries(res, cfg.feeder->houses.size(), cfg.output_dir, tag);
    std::cout << "simulate " << tag << ": " << res.time_s.size() << " steps, device+solve "
              << res.wall_time_s << " s\n";
    return 0;
}

int cmd_sweep(const CommonOptions& opts) {
    const RunConfig cfg = load_with_overrides(opts);
    if (!cfg.feeder) throw ConfigError("sweep: config has no feeder section");
    const auto path = cfg.output_dir / "load_sweep.csv";
    run_load_sweep_report(*cfg.feeder, path);
    std::cout << "sweep: wrote " << path.string() << "\n";
    return 0;
}

int cmd_bench(const CommonOptions& opts, const std::filesystem::path& model_path, int repeats) {
    const RunConfig cfg = load_with_overrides(opts);

    std::vector<BenchResult> results;
    const SingleHouseValidation single =
        run_single_house_validation(cfg.search, cfg.plant, cfg.output_dir);
    results.push_back(single.result);
    std::cout << "single house: " << single.search.n_star << " partitions, overall fit "
              << single.search.model.overall_fit << "%\n";

    if (cfg.feeder) {
        PartitionedModel model;
        if (!model_path.empty()) {
            model = ModelStore::load(model_path).model;
        } else {
            model = single.search.model;
        }
        for (GsfMode mode : {GsfMode::no_gsf, GsfMode::volt_var}) {
            const FeederComparison cmp =
                run_feeder_comparison(*cfg.feeder, model, mode, cfg.output_dir, repeats);
            results.push_back(cmp.result);
        }
    }
    print_bench_summary(std::cout, results);

    CsvTable table;
    table.header = {"scenario_idx", "nrmse_percent", "fit_percent", "wall_detailed_s",
                    "wall_partitioned_s", "speedup"};
    for (std::size_t i = 0; i < results.size(); ++i)
        table.rows.push_back({static_cast<double>(i), results[i].nrmse_percent,
                              results[i].fit_percent, results[i].wall_time_detailed_s,
                              results[i].wall_time_partitioned_s, results[i].speedup});
    write_csv(cfg.output_dir / "bench_summary.csv", table);
    return 0;
}

}  // namespace gridfit::cli
