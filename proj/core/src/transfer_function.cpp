#include "gridfit/transfer_function.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "gridfit/errors.hpp"

namespace gridfit {

double DiscreteTransferFunction::max_pole_radius() const {
    const auto n = static_cast<Eigen::Index>(a.size());
    if (n == 0) return 0.0;
    // companion matrix of z^n + a1 z^(n-1) + ... + an
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) companion(0, i) = -a[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    const auto eigenvalues = companion.eigenvalues();
    double radius = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) radius = std::max(radius, std::abs(eigenvalues(i)));
    return radius;
}

void DiscreteTransferFunction::validate() const {
    if (b.empty()) throw ConfigError("DiscreteTransferFunction: empty numerator");
    if (!(ts > 0.0)) throw ConfigError("DiscreteTransferFunction: sampling time must be positive");
    for (double c : b)
        if (!std::isfinite(c)) throw ConfigError("DiscreteTransferFunction: non-finite numerator");
    for (double c : a)
        if (!std::isfinite(c)) throw ConfigError("DiscreteTransferFunction: non-finite denominator");
}

std::vector<double> simulate_tf(const DiscreteTransferFunction& tf,
                                std::span<const double> u,
                                std::span<const double> y_init) {
    tf.validate();
    const std::size_t n = tf.a.size();
    const std::size_t m1 = tf.b.size();  // m + 1 taps
    if (!y_init.empty() && y_init.size() != n)
        throw std::invalid_argument("simulate_tf: y_init must be empty or of length n");

    std::vector<double> y(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m1 && j <= k; ++j) acc += tf.b[j] * u[k - j];
        for (std::size_t i = 1; i <= n; ++i) {
            double past;
            if (i <= k) {
                past = y[k - i];
            } else if (!y_init.empty()) {
                past = y_init[n - (i - k)];  // y(-(i-k))
            } else {
                past = 0.0;
            }
            acc -= tf.a[i - 1] * past;
        }
        if (!std::isfinite(acc))
            throw NumericBlowupError(
                "simulate_tf: non-finite output at sample " + std::to_string(k) +
                    " (max pole radius " + std::to_string(tf.max_pole_radius()) + ")",
                tf.max_pole_radius());
        y[k] = acc;
    }
    return y;
}

}  // namespace gridfit
