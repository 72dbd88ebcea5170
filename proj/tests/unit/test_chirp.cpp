#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <set>

#include "doctest.h"
#include "gridfit/chirp.hpp"
#include "gridfit/errors.hpp"

using namespace gridfit;

namespace {

// Independent oracle: Simpson quadrature of the instantaneous frequency.
double quad_phase(double t, const ChirpSpec& spec, int panels = 20000) {
    const double h = t / panels;
    double acc = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double a = i * h;
        const double fa = chirp_frequency(a, spec);
        const double fm = chirp_frequency(a + h / 2, spec);
        const double fb = chirp_frequency(a + h, spec);
        acc += h / 6.0 * (fa + 4.0 * fm + fb);
    }
    return 2.0 * std::numbers::pi * acc + spec.phi0_rad;
}

}  // namespace

TEST_CASE("chirp frequency endpoints and midpoint") {
    ChirpSpec spec{1.0, 32.0, 6.0, 0.0, 1000.0};
    CHECK(chirp_frequency(0.0, spec) == 1.0);
    CHECK(chirp_frequency(spec.duration_s, spec) == doctest::Approx(32.0).epsilon(1e-15));
    // geometric midpoint of the exponential sweep
    CHECK(chirp_frequency(3.0, spec) == doctest::Approx(std::sqrt(32.0)).epsilon(1e-12));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> freq(0.1, 60.0), dur(0.5, 20.0);
    for (int i = 0; i < 200; ++i) {
        ChirpSpec s{freq(rng), freq(rng), dur(rng), 0.0, 1000.0};
        CHECK(chirp_frequency(0.0, s) == s.f0_hz);
        CHECK(chirp_frequency(s.duration_s, s) == doctest::Approx(s.f1_hz).epsilon(1e-13));
        const double tm = 0.37 * s.duration_s;
        CHECK(chirp_frequency(tm, s) > 0.0);
        CHECK((chirp_frequency(tm, s) >= std::min(s.f0_hz, s.f1_hz) &&
               chirp_frequency(tm, s) <= std::max(s.f0_hz, s.f1_hz)));
    }
    CHECK_THROWS_AS(chirp_frequency(-0.1, spec), std::domain_error);
    CHECK_THROWS_AS(chirp_frequency(6.1, spec), std::domain_error);
}

TEST_CASE("integrated phase matches quadrature oracle") {
    ChirpSpec spec{1.0, 32.0, 6.0, 0.4, 1000.0};
    for (double t : {0.01, 0.3, 1.0, 2.5, 4.0, 6.0}) {
        const double expected = quad_phase(t, spec);
        CHECK(chirp_phase(t, spec) == doctest::Approx(expected).epsilon(1e-9));
    }
    // constant-frequency limit
    ChirpSpec flat{5.0, 5.0, 2.0, 0.0, 1000.0};
    CHECK(chirp_phase(1.0, flat) ==
          doctest::Approx(2.0 * std::numbers::pi * 5.0).epsilon(1e-12));
}

TEST_CASE("square chirp levels and first sign flip") {
    ChirpSpec spec{1.0, 32.0, 6.0, 0.0, 1000.0};
    CHECK(square_chirp_sample(0.0, spec, 0.88, 0.89) == 0.89);  // cos(0) = 1
    CHECK_THROWS_AS(square_chirp_sample(0.0, spec, 0.89, 0.88), std::invalid_argument);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> time(0.0, 6.0);
    for (int i = 0; i < 2000; ++i) {
        const double v = square_chirp_sample(time(rng), spec, 0.88, 0.89);
        CHECK((v == 0.88 || v == 0.89));
    }

    // first flip where the integrated phase crosses pi/2, located by bisecting
    // the quadrature oracle
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (quad_phase(mid, spec, 4000) < std::numbers::pi / 2 ? lo : hi) = mid;
    }
    const double t_flip = 0.5 * (lo + hi);
    const double fs = spec.sample_rate_hz;
    std::size_t first_low = 0;
    for (std::size_t k = 0;; ++k) {
        if (square_chirp_sample(k / fs, spec, 0.88, 0.89) == 0.88) {
            first_low = k;
            break;
        }
        REQUIRE(k < 10000);
    }
    CHECK(std::abs(first_low / fs - t_flip) <= 1.0 / fs);
}

TEST_CASE("partition bounds follow the dwell schedule") {
    PartitionPlan plan{0.88, 1.10, 22, 6.0};
    for (double t : {0.0, 3.0, 5.999}) {
        const auto [v1, v2] = partition_bounds(t, plan);
        CHECK(v1 == doctest::Approx(0.88).epsilon(1e-14));
        CHECK(v2 == doctest::Approx(0.89).epsilon(1e-14));
    }
    const auto [w1, w2] = partition_bounds(126.0, plan);
    CHECK(w1 == doctest::Approx(1.09).epsilon(1e-12));
    CHECK(w2 == doctest::Approx(1.10).epsilon(1e-12));

    PartitionPlan single{0.88, 1.10, 1, 6.0};
    const auto [s1, s2] = partition_bounds(2.0, single);
    CHECK(s1 == 0.88);
    CHECK(s2 == 1.10);

    CHECK_THROWS_AS(partition_bounds(132.0, plan), std::domain_error);
    CHECK_THROWS_AS(partition_bounds(-1.0, plan), std::domain_error);
}

TEST_CASE("probing signal: duration, levels, histogram, coverage, determinism") {
    PartitionPlan plan{0.88, 1.10, 22, 6.0};
    ChirpSpec spec{1.0, 32.0, 6.0, 0.0, 1000.0};
    const Signal sig = generate_probing_signal(plan, spec);

    CHECK(sig.size() == 132000);
    CHECK(sig.timestamps.back() == doctest::Approx(131.999).epsilon(1e-12));
    const std::size_t spd = 6000;

    // every dwell holds exactly its two levels, for exactly 6 s of samples
    for (int k = 0; k < 22; ++k) {
        const auto [v1, v2] = partition_bounds(k * 6.0 + 3.0, plan);
        std::size_t n1 = 0, n2 = 0;
        for (std::size_t i = k * spd; i < (k + 1) * spd; ++i) {
            if (sig.values[i] == v1) ++n1;
            else if (sig.values[i] == v2) ++n2;
        }
        CHECK(n1 + n2 == spd);
        CHECK(n1 > 0);
        CHECK(n2 > 0);
    }

    // coverage: bands tile [v_low, v_max] with shared endpoints only
    for (int k = 0; k + 1 < 22; ++k) {
        const auto [a1, a2] = partition_bounds(k * 6.0 + 3.0, plan);
        const auto [b1, b2] = partition_bounds((k + 1) * 6.0 + 3.0, plan);
        (void)a1;
        (void)b2;
        CHECK(a2 == doctest::Approx(b1).epsilon(1e-13));
    }
    CHECK(partition_bounds(0.0, plan).first == 0.88);
    CHECK(partition_bounds(131.9, plan).second == 1.10);

    // phase restarts each partition: the two-level pattern repeats exactly
    for (int k : {1, 7, 21}) {
        const auto [v1, v2] = partition_bounds(k * 6.0 + 3.0, plan);
        const auto [u1, u2] = partition_bounds(3.0, plan);
        (void)v1;
        (void)u1;
        for (std::size_t i = 0; i < spd; i += 97)
            CHECK((sig.values[k * spd + i] == v2) == (sig.values[i] == u2));
    }

    const Signal again = generate_probing_signal(plan, spec);
    CHECK(sig.values == again.values);
    CHECK(sig.timestamps == again.timestamps);
}

TEST_CASE("degenerate single-partition fixed-frequency square wave") {
    PartitionPlan plan{0.88, 1.10, 1, 2.0};
    ChirpSpec spec{4.0, 4.0, 2.0, 0.0, 1000.0};
    const Signal sig = generate_probing_signal(plan, spec);
    CHECK(sig.size() == 2000);
    // 4 Hz square wave: cos stays non-negative until the pi/2 crossing at 62.5 ms
    CHECK(sig.values[0] == 1.10);
    CHECK(sig.values[62] == 1.10);
    CHECK(sig.values[63] == 0.88);
    CHECK(sig.values[100] == 0.88);
    for (double v : sig.values) CHECK((v == 0.88 || v == 1.10));
}

TEST_CASE("step signal generation") {
    const Signal two = generate_step_signal({{0.88, 1.0}, {0.92, 1.0}}, 1000.0);
    CHECK(two.size() == 2000);
    CHECK(two.values[0] == 0.88);
    CHECK(two.values[999] == 0.88);
    CHECK(two.values[1000] == 0.92);
    CHECK(two.values.back() == 0.92);

    const Signal flat = generate_step_signal({{0.98, 2.0}, {0.98, 2.0}}, 100.0);
    for (double v : flat.values) CHECK(v == 0.98);

    // five-range suite: transitions exactly at the 1 s boundaries
    const std::vector<std::pair<double, double>> suite = {
        {0.88, 1.0}, {0.92, 1.0}, {0.98, 1.0}, {1.02, 1.0}, {1.08, 1.0}, {1.10, 1.0}};
    const Signal steps = generate_step_signal(suite, 1000.0);
    CHECK(steps.size() == 6000);
    std::size_t transitions = 0;
    for (std::size_t i = 1; i < steps.size(); ++i)
        if (steps.values[i] != steps.values[i - 1]) {
            CHECK(i % 1000 == 0);
            ++transitions;
        }
    CHECK(transitions == 5);

    CHECK_THROWS_AS(generate_step_signal({}, 1000.0), std::invalid_argument);
    CHECK_THROWS_AS(generate_step_signal({{0.9, 1.0}}, 1000.0), std::invalid_argument);
    CHECK_THROWS_AS(generate_step_signal({{0.9, -1.0}, {1.0, 1.0}}, 1000.0),
                    std::invalid_argument);
}

TEST_CASE("signal CSV round trip preserves every bit") {
    PartitionPlan plan{0.88, 1.10, 3, 0.5};
    ChirpSpec spec{1.0, 32.0, 0.5, 0.1, 1000.0};
    const Signal sig = generate_probing_signal(plan, spec);
    const auto path = std::filesystem::temp_directory_path() / "gridfit_sig_roundtrip.csv";
    write_signal_csv(path, sig, "value_pu");
    const Signal back = read_signal_csv(path);
    CHECK(back.values == sig.values);
    CHECK(back.timestamps == sig.timestamps);
    std::filesystem::remove(path);
}

TEST_CASE("spec validation errors") {
    CHECK_THROWS_AS((ChirpSpec{0.0, 32.0, 6.0, 0.0, 1000.0}.validate()), ConfigError);
    CHECK_THROWS_AS((ChirpSpec{1.0, 32.0, 6.0, 0.0, 60.0}.validate()), ConfigError);  // Nyquist
    CHECK_THROWS_AS((PartitionPlan{1.1, 0.9, 4, 6.0}.validate()), ConfigError);
    CHECK_THROWS_AS((PartitionPlan{0.9, 1.1, 0, 6.0}.validate()), ConfigError);
}
