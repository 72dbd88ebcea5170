#include "gridfit/signal.hpp"

#include <cmath>
#include <utility>

#include "gridfit/csv.hpp"
#include "gridfit/errors.hpp"

namespace gridfit {

double Signal::dt() const {
    if (timestamps.size() < 2) throw ConfigError("Signal::dt needs at least two samples");
    return timestamps[1] - timestamps[0];
}

Signal Signal::uniform(double sample_rate, std::vector<double> values) {
    if (!(sample_rate > 0.0)) throw ConfigError("sample_rate must be positive");
    Signal sig;
    sig.values = std::move(values);
    sig.timestamps.resize(sig.values.size());
    for (std::size_t i = 0; i < sig.timestamps.size(); ++i)
        sig.timestamps[i] = static_cast<double>(i) / sample_rate;
    return sig;
}

Signal Signal::constant_like(const Signal& like, double value) {
    Signal sig;
    sig.timestamps = like.timestamps;
    sig.values.assign(like.values.size(), value);
    return sig;
}

void Signal::validate() const {
    if (timestamps.size() != values.size())
        throw ConfigError("Signal: timestamp/value length mismatch");
    if (timestamps.size() < 2) return;
    const double step = timestamps[1] - timestamps[0];
    if (!(step > 0.0)) throw ConfigError("Signal: timestamps not strictly increasing");
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        const double d = timestamps[i] - timestamps[i - 1];
        if (!(d > 0.0) || std::abs(d - step) > 1e-6 * step)
            throw ConfigError("Signal: non-uniform sampling at index " + std::to_string(i));
    }
    for (double v : values)
        if (!std::isfinite(v)) throw ConfigError("Signal: non-finite value");
}

void write_signal_csv(const std::filesystem::path& path, const Signal& sig,
                      const char* value_header) {
    CsvTable table;
    table.header = {"time_s", value_header};
    table.rows.reserve(sig.size());
    for (std::size_t i = 0; i < sig.size(); ++i)
        table.rows.push_back({sig.timestamps[i], sig.values[i]});
    write_csv(path, table);
}

Signal read_signal_csv(const std::filesystem::path& path) {
    CsvTable table = read_csv(path);
    if (table.cols() != 2)
        throw ParseError("expected two columns in " + path.string(), 1);
    Signal sig;
    sig.timestamps.reserve(table.rows.size());
    sig.values.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        sig.timestamps.push_back(row[0]);
        sig.values.push_back(row[1]);
    }
    sig.validate();
    return sig;
}

}  // namespace gridfit
