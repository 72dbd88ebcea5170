#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gridfit/feeder.hpp"
#include "gridfit/partition.hpp"

namespace gridfit {

struct BenchResult {
    std::string scenario;
    double nrmse_percent = 0.0;
    double fit_percent = 0.0;
    double wall_time_detailed_s = 0.0;
    double wall_time_partitioned_s = 0.0;
    double speedup = 0.0;  // wall_time_detailed / wall_time_partitioned
};

/// ||y - y_hat||_2 / ||y - mean(y)||_2 (fraction, not percent).
double trace_nrmse(std::span<const double> y, std::span<const double> y_hat);

/// Step-test variant: a reference trace without any response (a step inside
/// the dead band) scores 0 when the candidate matches it to measurement
/// resolution and 1 otherwise.
double step_trace_nrmse(std::span<const double> y, std::span<const double> y_hat);

struct SingleHouseValidation {
    BenchResult result;
    BinarySearchResult search;
    // one entry per Volt-VAr region step test; small-amplitude regions (the
    // dead band, the saturated tail) are judged by absolute error since their
    // reference span is near zero
    std::vector<double> step_nrmse;
    std::vector<double> step_rms_error_a;
    std::vector<double> step_ref_span_a;
};

/// Full probing -> fitting -> binary-search pipeline against the reference
/// plant, then a chirp replay overlay and the five set-point step tests.
/// Overlay and trace CSVs land in out_dir.
SingleHouseValidation run_single_house_validation(const SearchConfig& cfg,
                                                  const PlantParams& plant,
                                                  const std::filesystem::path& out_dir);

struct FeederComparison {
    BenchResult result;
    TimeseriesResult detailed;
    TimeseriesResult partitioned;
    std::vector<double> per_house_nrmse;  // fraction
};

/// Runs the 24-h (or configured) horizon once per binding per repeat in the
/// same process configuration; wall times are medians across repeats, traces
/// come from the first repeat (runs are deterministic). Current traces are
/// written next to out_dir for recomputation.
FeederComparison run_feeder_comparison(const FeederCase& c, const PartitionedModel& model,
                                       GsfMode mode, const std::filesystem::path& out_dir,
                                       int repeats = 3);

/// Net-load sweep report (net_load_kw plus one voltage column per house).
SweepResult run_load_sweep_report(const FeederCase& c, const std::filesystem::path& out_csv,
                                  double p_min_kw = -75.0, double p_max_kw = 75.0,
                                  int steps = 61);

void print_bench_summary(std::ostream& os, std::span<const BenchResult> results);

}  // namespace gridfit
