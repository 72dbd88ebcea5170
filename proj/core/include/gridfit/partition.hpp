#pragma once

#include <functional>
#include <vector>

#include "gridfit/chirp.hpp"
#include "gridfit/plant.hpp"
#include "gridfit/signal.hpp"
#include "gridfit/sysid.hpp"

namespace gridfit {

/// One voltage band of a partitioned model: the local transfer function plus
/// the operating point (input/output offsets) it was linearized around.
struct RangeModel {
    double v_lo = 0.0;
    double v_hi = 0.0;
    DiscreteTransferFunction tf;
    double u_offset = 0.0;
    double y_offset = 0.0;
    FitReport report;
};

/// Ordered set of range models tiling [v_low, v_max].
struct PartitionedModel {
    double v_low = 0.0;
    double v_max = 0.0;
    double ts = 1e-3;
    std::vector<RangeModel> ranges;
    double overall_fit = 0.0;  // length-weighted held-out fit, percent

    /// Index of the range owning v: a shared boundary belongs to the lower
    /// range; values outside the limits clamp to the end ranges.
    std::size_t range_index(double v) const;

    /// Checks contiguous tiling and non-empty ranges.
    void validate() const;
};

/// Knobs of the partition-count search and of every identification run it
/// launches. The chirp's duration doubles as the per-partition dwell time.
struct SearchConfig {
    int n_min = 1;
    int n_max = 22;
    double fit_req = 95.0;  // required overall fit, percent
    double v_low = 0.88;
    double v_max = 1.10;
    int max_order_n = 4;
    int max_order_m = 4;
    double split = 0.7;
    ChirpSpec chirp{};
    double probe_p_avail_kw = 0.0;  // available power held during probing
    double sim_dt = 1e-3;           // plant integration step
    // Discarded from the head of every dwell record before fitting: the
    // band-entry transient is an initial-condition response, not dynamics the
    // local model should be asked to reproduce from rest.
    double settle_time_s = 0.2;

    void validate() const;
};

/// Identifies one model per voltage band from recorded probing input/output
/// signals laid out as n dwells of cfg.chirp.duration_s each, and assembles
/// the partitioned model. Partitions whose held-out response is constant
/// relative to the experiment scale (dead band) are stored as zero-gain
/// operating-point models. Throws NoModelError naming the voltage range when
/// a partition with genuine dynamics cannot be identified.
PartitionedModel fit_partitioned_from_records(const Signal& probe, const Signal& response,
                                              int n, const SearchConfig& cfg);

/// Probes the plant with an n-partition signal, simulates the response and
/// fits the partitioned model from the records.
PartitionedModel evaluate_partition_count(int n, const SearchConfig& cfg,
                                          const PlantParams& plant);

struct SearchTraceEntry {
    int n = 0;
    double overall_fit = 0.0;
    double wall_time_s = 0.0;
};

struct BinarySearchOutcome {
    int n_star = 0;
    double fit = 0.0;
    bool check = true;  // false when the search exited through the non-monotone branch
    std::vector<SearchTraceEntry> trace;
};

/// The bisection over partition counts, decoupled from the identification
/// pipeline for testing: fit_fn(n) must return the overall fit for n bands.
/// Evaluations are memoized; the trace records first evaluations in order.
BinarySearchOutcome binary_search_core(int n_min, int n_max, double fit_req,
                                       const std::function<double(int)>& fit_fn);

struct BinarySearchResult {
    int n_star = 0;
    PartitionedModel model;
    bool check = true;
    std::vector<SearchTraceEntry> trace;
};

/// Full search: the two endpoint evaluations run concurrently, the bisection
/// is sequential. When the search exits through the non-monotone branch a
/// warning listing every evaluated (n, fit) pair goes to stderr.
BinarySearchResult binary_search_partitions(const SearchConfig& cfg, const PlantParams& plant);

/// Streaming simulator of a partitioned model. On a range switch the incoming
/// model is warm-started from the recent aggregate output history
/// (offset-adjusted), so the aggregate trace stays continuous. Shared
/// boundaries are handled with hysteresis: a sample sitting exactly on the
/// active range's edge keeps the active model (both neighbours were trained
/// with that level), and a switch happens only when the input strictly leaves
/// the range. This prevents chattering between neighbours when a two-level
/// excitation rides on a boundary.
class PartitionedSimulator {
public:
    explicit PartitionedSimulator(const PartitionedModel& model);

    double step(double v_input);
    void reset();

    /// Seeds the history with the active range's settled response to a held
    /// input, mirroring a plant that starts at equilibrium.
    void settle(double v_input);

    struct Snapshot {
        std::vector<double> u_hist;
        std::vector<double> y_hist;
        std::size_t seen = 0;
        std::ptrdiff_t active = -1;
    };
    Snapshot snapshot() const { return {u_hist_, y_hist_, seen_, active_}; }
    void restore(const Snapshot& s);

private:
    const PartitionedModel* model_;
    std::vector<double> u_hist_;  // raw inputs, newest first
    std::vector<double> y_hist_;  // raw aggregate outputs, newest first
    std::size_t seen_ = 0;        // samples processed since reset
    std::ptrdiff_t active_ = -1;  // current range, -1 before the first sample
};

/// Free-run replay of the aggregate model over a voltage signal.
Signal simulate_partitioned(const PartitionedModel& model, const Signal& v_input);

}  // namespace gridfit
