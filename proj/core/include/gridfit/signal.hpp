#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace gridfit {

/// Uniformly sampled scalar time series. Timestamps are kept explicit so that
/// exported CSV files are self-describing; spacing must stay uniform.
struct Signal {
    std::vector<double> timestamps;  // seconds, strictly increasing, uniform
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    bool empty() const noexcept { return values.empty(); }

    /// Sample spacing in seconds. Requires at least two samples.
    double dt() const;
    double duration() const { return timestamps.empty() ? 0.0 : timestamps.back(); }

    /// Builds a signal on the grid t_i = i/sample_rate, i = 0..n-1.
    static Signal uniform(double sample_rate, std::vector<double> values);
    /// Same timestamps as `like`, every value set to `value`.
    static Signal constant_like(const Signal& like, double value);

    /// Throws ConfigError when lengths differ, timestamps are non-monotone, or
    /// spacing deviates from uniform by more than 1 ppm.
    void validate() const;
};

/// Two-column CSV (`time_s,<value_header>`), full round-trip precision, LF endings.
void write_signal_csv(const std::filesystem::path& path, const Signal& sig,
                      const char* value_header = "value_pu");
Signal read_signal_csv(const std::filesystem::path& path);

}  // namespace gridfit
