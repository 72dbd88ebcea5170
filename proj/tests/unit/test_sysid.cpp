#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "gridfit/errors.hpp"
#include "gridfit/sysid.hpp"
#include "gridfit/transfer_function.hpp"

using namespace gridfit;

namespace {

// smooth chirp excitation, rich across the band
std::vector<double> chirp_excitation(std::size_t n, double fs, unsigned seed = 0) {
    std::vector<double> u(n);
    const double f0 = 1.0, f1 = 0.4 * fs;
    const double k = std::log(f1 / f0) * fs / static_cast<double>(n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        const double phase =
            2.0 * std::numbers::pi * f0 * (std::expm1(k * t)) / k;
        u[i] = std::cos(phase) + jitter(rng);
    }
    return u;
}

std::vector<double> simulate_arx(const std::vector<double>& a, const std::vector<double>& b,
                                 const std::vector<double>& u, double noise_sigma = 0.0,
                                 unsigned seed = 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    std::vector<double> y(u.size(), 0.0);
    for (std::size_t k = 0; k < u.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < b.size() && j <= k; ++j) acc += b[j] * u[k - j];
        for (std::size_t i = 1; i <= a.size() && i <= k; ++i) acc -= a[i - 1] * y[k - i];
        y[k] = acc + (noise_sigma > 0.0 ? noise(rng) : 0.0);
    }
    return y;
}

}  // namespace

TEST_CASE("free-run recursion basics") {
    DiscreteTransferFunction gain{{2.5}, {}, 1e-3};
    const std::vector<double> u{1.0, -1.0, 0.5, 0.0};
    const auto y = simulate_tf(gain, u);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(y[i] == 2.5 * u[i]);

    // y(k) = 0.5 y(k-1) + u(k-1), unit step -> 2.0
    DiscreteTransferFunction lag{{0.0, 1.0}, {-0.5}, 1e-3};
    std::vector<double> step(200, 1.0);
    const auto ys = simulate_tf(lag, step);
    CHECK(ys.back() == doctest::Approx(2.0).epsilon(1e-12));

    const std::vector<double> zeros(50, 0.0);
    for (double v : simulate_tf(lag, zeros)) CHECK(v == 0.0);
}

TEST_CASE("y_init seeds the recursion history") {
    DiscreteTransferFunction lag{{0.0, 1.0}, {-0.5}, 1e-3};
    const std::vector<double> u(10, 0.0);
    const std::vector<double> init{4.0};  // y(-1)
    const auto y = simulate_tf(lag, u, init);
    CHECK(y[0] == doctest::Approx(2.0));  // 0.5 * 4
    CHECK(y[1] == doctest::Approx(1.0));
    CHECK_THROWS_AS(simulate_tf(lag, u, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("unstable recursion raises a blow-up error naming the pole") {
    DiscreteTransferFunction unstable{{1.0}, {-1.5}, 1e-3};
    CHECK(unstable.max_pole_radius() == doctest::Approx(1.5).epsilon(1e-12));
    CHECK_FALSE(unstable.is_stable());
    std::vector<double> u(5000, 1.0);
    try {
        simulate_tf(unstable, u);
        FAIL("expected NumericBlowupError");
    } catch (const NumericBlowupError& e) {
        CHECK(e.pole_radius() == doctest::Approx(1.5).epsilon(1e-12));
    }
}

TEST_CASE("pole radius via companion matrix") {
    // (z - 0.5)^2 = z^2 - z + 0.25
    DiscreteTransferFunction tf{{1.0}, {-1.0, 0.25}, 1.0};
    CHECK(tf.max_pole_radius() == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(tf.is_stable());
    DiscreteTransferFunction fir{{1.0, 0.5}, {}, 1.0};
    CHECK(fir.max_pole_radius() == 0.0);
}

TEST_CASE("ARX fit recovers a first-order system exactly") {
    Dataset data;
    data.ts = 1e-3;
    data.u = chirp_excitation(2000, 1000.0);
    data.y = simulate_arx({-0.5}, {0.0, 1.0}, data.u);
    const auto tf = fit_arx(data, 1, 1);
    CHECK(tf.a[0] == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(tf.b[0] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(tf.b[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("constant records are unidentifiable") {
    Dataset data;
    data.ts = 1e-3;
    data.u.assign(500, 1.0);
    data.y.assign(500, 2.0);
    CHECK_THROWS_AS(fit_arx(data, 1, 1), UnidentifiableError);
}

TEST_CASE("noisy second-order fit lands within 5 percent") {
    const std::vector<double> a_true{-1.2, 0.45};
    const std::vector<double> b_true{0.0, 0.8, 0.3};
    Dataset data;
    data.ts = 1e-3;
    data.u = chirp_excitation(6000, 1000.0, 9);
    data.y = simulate_arx(a_true, b_true, data.u, 0.01, 123);
    const auto tf = fit_arx(data, 2, 2);
    CHECK(tf.a[0] == doctest::Approx(a_true[0]).epsilon(0.05));
    CHECK(tf.a[1] == doctest::Approx(a_true[1]).epsilon(0.05));
    CHECK(tf.b[1] == doctest::Approx(b_true[1]).epsilon(0.05));
    CHECK(tf.b[2] == doctest::Approx(b_true[2]).epsilon(0.05));
}

TEST_CASE("fit precondition errors") {
    Dataset tiny;
    tiny.ts = 1.0;
    tiny.u = chirp_excitation(25, 10.0);
    tiny.y = tiny.u;
    CHECK_THROWS_AS(fit_arx(tiny, 1, 1), InsufficientDataError);  // needs > 30
    Dataset ok;
    ok.ts = 1.0;
    ok.u = chirp_excitation(200, 10.0);
    ok.y = ok.u;
    CHECK_THROWS_AS(fit_arx(ok, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(fit_arx(ok, 1, 2), std::invalid_argument);  // m > n
}

TEST_CASE("score identities and hand-computed case") {
    const std::vector<double> y{0.0, 1.0, 2.0, 3.0};
    const std::vector<double> yh{0.0, 1.0, 2.0, 4.0};
    const FitReport rep = score(y, yh, 1);
    CHECK(rep.nrmse == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
    CHECK(rep.fit_percent == doctest::Approx(100.0 * (1.0 - 1.0 / std::sqrt(5.0))).epsilon(1e-12));

    const FitReport perfect = score(y, y, 1);
    CHECK(perfect.nrmse == 0.0);
    CHECK(perfect.fit_percent == 100.0);
    CHECK(perfect.adj_r2 == 1.0);

    const std::vector<double> mean_pred(4, 1.5);
    const FitReport base = score(y, mean_pred, 1);
    CHECK(base.nrmse == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(base.fit_percent == doctest::Approx(0.0).epsilon(1e-13));

    CHECK_THROWS_AS(score(std::vector<double>(5, 2.0), std::vector<double>(5, 2.0), 1),
                    std::domain_error);
    CHECK_THROWS_AS(score(y, yh, 3), std::domain_error);  // N <= d + 1
}

TEST_CASE("fit percent complements NRMSE across random series") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> y(40), yh(40);
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] = dist(rng);
            yh[i] = y[i] + 0.3 * dist(rng);
        }
        const FitReport rep = score(y, yh, 2);
        CHECK(std::abs(rep.fit_percent + 100.0 * rep.nrmse - 100.0) <= 1e-10);
        CHECK(score(y, y, 2).nrmse == 0.0);
    }
}

TEST_CASE("information criteria grow with parameter count at fixed SSE") {
    const std::vector<double> y{0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0};
    std::vector<double> yh = y;
    yh[3] += 0.5;
    const FitReport d3 = score(y, yh, 3);
    const FitReport d5 = score(y, yh, 5);
    CHECK(d3.aicc < d5.aicc);
    CHECK(d3.bic < d5.bic);
    CHECK(d3.nrmse == d5.nrmse);
}

TEST_CASE("order selection favors the true parsimonious model") {
    Dataset data;
    data.ts = 1e-3;
    data.u = chirp_excitation(4000, 1000.0, 2);
    data.y = simulate_arx({-0.7}, {0.0, 0.9}, data.u);  // noiseless: ties resolve by AICc
    const OrderSelection sel = select_order(data, 4, 4, 0.7);
    CHECK(sel.tf.denominator_order() == 1);
    CHECK(sel.tf.a[0] == doctest::Approx(-0.7).epsilon(1e-3));
    CHECK(sel.report.fit_percent > 99.0);
    CHECK(sel.report.n_points == 1200);  // 30% of 4000

    // argmax correctness: no candidate beats the winner on held-out fit by
    // more than the tie window that hands ranking to the information criteria
    const std::size_t n_train = 2800;
    std::vector<double> u_c(data.size()), y_c(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        u_c[i] = data.u[i] - sel.u_offset;
        y_c[i] = data.y[i] - sel.y_offset;
    }
    Dataset train{std::vector<double>(u_c.begin(), u_c.begin() + n_train),
                  std::vector<double>(y_c.begin(), y_c.begin() + n_train), data.ts};
    for (int n = 1; n <= 4; ++n) {
        for (int m = 0; m <= n; ++m) {
            try {
                const auto tf = fit_arx(train, n, m);
                const auto sim = simulate_tf(tf, u_c);
                const FitReport rep = score(std::span(y_c).subspan(n_train),
                                            std::span(sim).subspan(n_train), n + m + 1);
                CHECK(sel.report.fit_percent >= rep.fit_percent - 1e-3);
            } catch (const UnidentifiableError&) {
                // over-parameterized orders on noiseless data collapse the regressor
            }
        }
    }
}

TEST_CASE("noiseless round trip through selection recovers coefficients") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> pole(-0.85, 0.85), coef(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        const double p1 = pole(rng), p2 = pole(rng);
        const std::vector<double> a_true{-(p1 + p2), p1 * p2};
        const std::vector<double> b_true{0.0, coef(rng) + 1.5, coef(rng)};
        Dataset data;
        data.ts = 1e-3;
        data.u = chirp_excitation(3000, 1000.0, 100 + trial);
        data.y = simulate_arx(a_true, b_true, data.u);
        const auto tf = fit_arx(data, 2, 2);
        for (std::size_t i = 0; i < 2; ++i)
            CHECK(std::abs(tf.a[i] - a_true[i]) <=
                  1e-6 * std::max(1.0, std::abs(a_true[i])));
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(std::abs(tf.b[i] - b_true[i]) <=
                  1e-6 * std::max(1.0, std::abs(b_true[i])));
    }
}

TEST_CASE("selection reports no model when nothing is identifiable") {
    Dataset data;
    data.ts = 1e-3;
    data.u.assign(600, 0.5);
    data.y.assign(600, 0.0);
    CHECK_THROWS_AS(select_order(data, 3, 3, 0.7), NoModelError);
}
