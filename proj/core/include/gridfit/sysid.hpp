#pragma once

#include <span>
#include <vector>

#include "gridfit/transfer_function.hpp"

namespace gridfit {

/// Input/output record for one identification experiment.
struct Dataset {
    std::vector<double> u;  // input, p.u. voltage
    std::vector<double> y;  // output, A
    double ts = 1e-3;       // sampling time, s

    std::size_t size() const noexcept { return u.size(); }
    void validate() const;
};

/// Goodness-of-fit metrics for a simulated-vs-measured comparison.
struct FitReport {
    double fit_percent = 0.0;  // 100 * (1 - nrmse)
    double nrmse = 0.0;        // ||y - y_hat|| / ||y - mean(y)||
    double adj_r2 = 0.0;
    double aicc = 0.0;
    double bic = 0.0;
    int n_params = 0;   // d = m + n + 1
    int n_points = 0;   // N
};

/// Least-squares ARX fit of orders (n, m): minimizes the one-step
/// prediction-error cost over the regressor
/// [-y(k-1)..-y(k-n), u(k)..u(k-m)], regression starting at k = n (zero
/// initial-condition term). Requires m <= n and more than 10*(n+m+1) points.
/// Throws UnidentifiableError on a rank-deficient regressor and
/// InsufficientDataError on short records.
DiscreteTransferFunction fit_arx(const Dataset& data, int n, int m);

/// Metrics of Eq-style NRMSE scoring plus information criteria with the
/// Gaussian profiled log-likelihood -2L = N ln(SSE/N).
/// Throws std::domain_error when y is constant (NRMSE undefined) or when
/// N <= n_params + 1 (AICc denominator).
FitReport score(std::span<const double> y, std::span<const double> y_hat, int n_params);

/// Result of order selection: the winning model plus the training-set
/// operating point that was removed before fitting (re-added on simulation).
struct OrderSelection {
    DiscreteTransferFunction tf;
    FitReport report;       // held-out free-run score
    double u_offset = 0.0;  // training-set input mean
    double y_offset = 0.0;  // training-set output mean
};

/// Fits every (n, m) with 1 <= n <= max_n, 0 <= m <= min(n, max_m) on the
/// first `split` fraction (chronological), free-runs over the record and
/// scores the held-out remainder. Ranks by held-out fit_percent; ties (within
/// 1e-6 points) break by lowest AICc, then BIC, then smallest n+m. Throws
/// NoModelError when every candidate is unidentifiable or blows up.
OrderSelection select_order(const Dataset& data, int max_n, int max_m, double split = 0.7);

}  // namespace gridfit
