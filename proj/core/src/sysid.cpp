#include "gridfit/sysid.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "gridfit/errors.hpp"
#include "gridfit/parallel.hpp"

namespace gridfit {

void Dataset::validate() const {
    if (u.size() != y.size()) throw ConfigError("Dataset: input/output length mismatch");
    if (u.size() < 10) throw InsufficientDataError("Dataset: fewer than 10 samples");
    if (!(ts > 0.0)) throw ConfigError("Dataset: sampling time must be positive");
    for (std::size_t i = 0; i < u.size(); ++i)
        if (!std::isfinite(u[i]) || !std::isfinite(y[i]))
            throw ConfigError("Dataset: non-finite sample at index " + std::to_string(i));
}

DiscreteTransferFunction fit_arx(const Dataset& data, int n, int m) {
    data.validate();
    if (n < 1) throw std::invalid_argument("fit_arx: denominator order must be >= 1");
    if (m > n) throw std::invalid_argument("fit_arx: numerator order must not exceed n");
    if (m < 0) throw std::invalid_argument("fit_arx: numerator order must be >= 0");

    const auto N = static_cast<int>(data.size());
    const int n_params = n + m + 1;
    if (N <= 10 * n_params)
        throw InsufficientDataError("fit_arx: need more than " + std::to_string(10 * n_params) +
                                    " samples for orders (" + std::to_string(n) + ", " +
                                    std::to_string(m) + ")");

    const int rows = N - n;
    Eigen::MatrixXd phi(rows, n_params);
    Eigen::VectorXd target(rows);
    for (int k = n; k < N; ++k) {
        const int r = k - n;
        for (int i = 1; i <= n; ++i) phi(r, i - 1) = -data.y[static_cast<std::size_t>(k - i)];
        for (int j = 0; j <= m; ++j) phi(r, n + j) = data.u[static_cast<std::size_t>(k - j)];
        target(r) = data.y[static_cast<std::size_t>(k)];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
    qr.setThreshold(1e-10);
    if (qr.rank() < n_params)
        throw UnidentifiableError("fit_arx: rank-deficient regressor (rank " +
                                  std::to_string(qr.rank()) + " of " + std::to_string(n_params) +
                                  "); input is not persistently exciting");
    const Eigen::VectorXd theta = qr.solve(target);

    DiscreteTransferFunction tf;
    tf.ts = data.ts;
    tf.a.assign(theta.data(), theta.data() + n);
    tf.b.assign(theta.data() + n, theta.data() + n_params);
    return tf;
}

FitReport score(std::span<const double> y, std::span<const double> y_hat, int n_params) {
    if (y.size() != y_hat.size()) throw std::invalid_argument("score: length mismatch");
    if (y.size() < 2) throw std::invalid_argument("score: need at least two points");
    const auto N = static_cast<int>(y.size());
    if (N <= n_params + 1)
        throw std::domain_error("score: AICc undefined for N <= n_params + 1");

    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / N;
    double sse = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = y[i] - y_hat[i];
        const double d = y[i] - mean;
        sse += e * e;
        sst += d * d;
    }
    if (sst == 0.0) throw std::domain_error("score: constant measured series, NRMSE undefined");

    FitReport rep;
    rep.n_params = n_params;
    rep.n_points = N;
    rep.nrmse = std::sqrt(sse / sst);
    rep.fit_percent = 100.0 * (1.0 - rep.nrmse);
    rep.adj_r2 = 1.0 - (static_cast<double>(N - 1) / (N - n_params)) * (sse / sst);
    // Gaussian likelihood with the variance profiled out. Residuals at the
    // double-precision floor carry no information, so the SSE is floored
    // there; otherwise numerically perfect fits would be ranked by rounding
    // noise instead of by the parameter-count terms.
    const double sse_floor = 1e-24 * sst;
    const double neg2_loglik = N * std::log(std::max(sse, sse_floor) / N);
    const double d = n_params;
    rep.aicc = neg2_loglik + 2.0 * d + 2.0 * d * (d + 1.0) / (N - d - 1.0);
    rep.bic = neg2_loglik + d * std::log(static_cast<double>(N));
    return rep;
}

namespace {

struct Candidate {
    int n;
    int m;
    std::optional<OrderSelection> result;  // empty when rejected
};

}  // namespace

OrderSelection select_order(const Dataset& data, int max_n, int max_m, double split) {
    data.validate();
    if (max_n < 1) throw std::invalid_argument("select_order: max_n must be >= 1");
    if (max_m < 0) throw std::invalid_argument("select_order: max_m must be >= 0");
    if (!(split > 0.0 && split < 1.0))
        throw std::invalid_argument("select_order: split must lie in (0, 1)");

    const std::size_t N = data.size();
    const auto n_train = static_cast<std::size_t>(std::llround(split * static_cast<double>(N)));
    if (n_train < 2 || n_train >= N)
        throw InsufficientDataError("select_order: degenerate train/test split");

    // remove the training-set operating point from both channels
    const double u_off =
        std::accumulate(data.u.begin(), data.u.begin() + n_train, 0.0) / n_train;
    const double y_off =
        std::accumulate(data.y.begin(), data.y.begin() + n_train, 0.0) / n_train;
    std::vector<double> u_c(N), y_c(N);
    for (std::size_t i = 0; i < N; ++i) {
        u_c[i] = data.u[i] - u_off;
        y_c[i] = data.y[i] - y_off;
    }

    std::vector<Candidate> candidates;
    for (int n = 1; n <= max_n; ++n)
        for (int m = 0; m <= std::min(n, max_m); ++m) candidates.push_back({n, m, {}});

    Dataset train;
    train.ts = data.ts;
    train.u.assign(u_c.begin(), u_c.begin() + n_train);
    train.y.assign(y_c.begin(), y_c.begin() + n_train);

    parallel_for(candidates.size(), [&](std::size_t idx) {
        Candidate& c = candidates[idx];
        try {
            DiscreteTransferFunction tf = fit_arx(train, c.n, c.m);
            // one free run over the whole record; held-out tail is scored
            const std::vector<double> sim = simulate_tf(tf, u_c);
            FitReport rep = score(std::span(y_c).subspan(n_train),
                                  std::span(sim).subspan(n_train), c.n + c.m + 1);
            c.result = OrderSelection{std::move(tf), rep, u_off, y_off};
        } catch (const UnidentifiableError&) {
        } catch (const InsufficientDataError&) {
        } catch (const NumericBlowupError&) {
        } catch (const std::domain_error&) {
        }
    });

    const OrderSelection* best = nullptr;
    double best_fit = -std::numeric_limits<double>::infinity();
    for (const auto& c : candidates)
        if (c.result) best_fit = std::max(best_fit, c.result->report.fit_percent);
    // Fits within a thousandth of a point carry no evidence about order; such
    // ties fall through to the information criteria.
    constexpr double kFitTie = 1e-3;
    for (const auto& c : candidates) {
        if (!c.result || c.result->report.fit_percent < best_fit - kFitTie) continue;
        if (!best) {
            best = &*c.result;
            continue;
        }
        const FitReport& a = c.result->report;
        const FitReport& b = best->report;
        const int oa = c.result->tf.denominator_order() + c.result->tf.numerator_order();
        const int ob = best->tf.denominator_order() + best->tf.numerator_order();
        if (a.aicc < b.aicc || (a.aicc == b.aicc && (a.bic < b.bic || (a.bic == b.bic && oa < ob))))
            best = &*c.result;
    }
    if (!best)
        throw NoModelError("select_order: every candidate order was unidentifiable or divergent");
    return *best;
}

}  // namespace gridfit
