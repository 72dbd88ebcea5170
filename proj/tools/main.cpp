#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "gridfit/errors.hpp"

using namespace gridfit;
using namespace gridfit::cli;

int main(int argc, char** argv) {
    CLI::App app{
        "gridfit - data-driven partitioned transfer-function models of a Volt-VAr\n"
        "inverter, with a 12-house feeder testbed for validation and speedup\n"
        "measurements. GRIDFIT_THREADS caps internal parallelism."};
    app.require_subcommand(1);

    CommonOptions common;
    std::string out_dir, mode = "volt_var", binding = "detailed", scenario = "chirp";
    std::string u_csv, y_csv, model_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int partitions = 0;
    int repeats = 3;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "run configuration JSON")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--seed", seed, "noise seed (overrides config)")
            ->each([&](const std::string&) { seed_set = true; });
    };

    CLI::App* probe = app.add_subcommand("probe", "generate the probing signal and plant response");
    add_common(probe);
    probe->add_option("--partitions", partitions, "partition count (default: search n_max)");

    CLI::App* fit = app.add_subcommand("fit", "identify the partitioned model (binary search)");
    add_common(fit);
    fit->add_option("--u", u_csv, "recorded input CSV (fit from records instead of searching)");
    fit->add_option("--y", y_csv, "recorded output CSV");
    fit->add_option("--partitions", partitions, "partition count for record fitting");

    CLI::App* validate = app.add_subcommand("validate", "replay a stored model against the plant");
    add_common(validate);
    validate->add_option("--model", model_path, "model store JSON")->required();
    validate->add_option("--scenario", scenario, "chirp | steps");

    CLI::App* simulate = app.add_subcommand("simulate", "feeder time-series simulation");
    add_common(simulate);
    simulate->add_option("--mode", mode, "no_gsf | volt_var");
    simulate->add_option("--binding", binding, "detailed | partitioned");
    simulate->add_option("--model", model_path, "model store JSON (partitioned binding)");

    CLI::App* sweep = app.add_subcommand("sweep", "net-load sweep of the feeder");
    add_common(sweep);

    CLI::App* bench = app.add_subcommand("bench", "single-house and feeder comparisons");
    add_common(bench);
    bench->add_option("--model", model_path, "model store JSON (default: fit in place)");
    bench->add_option("--repeats", repeats, "timing repeats per binding");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (!out_dir.empty()) common.out_dir = out_dir;
    if (seed_set) common.seed = seed;

    try {
        if (probe->parsed()) return cmd_probe(common, partitions);
        if (fit->parsed()) return cmd_fit(common, u_csv, y_csv, partitions);
        if (validate->parsed()) return cmd_validate(common, model_path, scenario);
        if (simulate->parsed()) return cmd_simulate(common, mode, binding, model_path);
        if (sweep->parsed()) return cmd_sweep(common);
        if (bench->parsed()) return cmd_bench(common, model_path, repeats);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
