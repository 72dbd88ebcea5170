#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "gridfit/errors.hpp"
#include "gridfit/feeder.hpp"

using namespace gridfit;

namespace {

FeederCase small_case() {
    // one tap, two houses: the smallest legal feeder
    FeederCase c;
    c.backbone.clear();
    House h;
    h.zip = zip_stratum('D', 1.0, 0.33);
    c.houses = {h, h};
    return c;
}

Profiles flat_profiles(std::size_t houses, std::size_t samples, double load_kw, double irr) {
    Profiles p;
    p.dt_s = 1.0;
    p.load_kw.assign(houses, std::vector<double>(samples, load_kw));
    p.irradiance_w_m2.assign(samples, irr);
    return p;
}

}  // namespace

TEST_CASE("ZIP identities and hand-derived stratum D values") {
    for (char s : {'A', 'B', 'C', 'D', 'E', 'F'}) {
        const ZipLoad z = zip_stratum(s, 2.0, 0.7);
        CHECK(std::abs(z.zp + z.ip + z.pp - 1.0) <= 1e-9);
        CHECK(std::abs(z.zq + z.iq + z.pq - 1.0) <= 1e-9);
        const PowerKw at_ref = zip_power(z, 1.0);
        CHECK(at_ref.p_kw == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(at_ref.q_kvar == doctest::Approx(0.7).epsilon(1e-12));
    }
    const ZipLoad d = zip_stratum('D', 1.0, 1.0);
    const PowerKw at95 = zip_power(d, 0.95);
    CHECK(at95.p_kw == doctest::Approx(0.969275).epsilon(1e-12));
    // 9.20 * 0.9025 - 15.27 * 0.95 + 7.07 = 8.3030 - 14.5065 + 7.07
    CHECK(at95.q_kvar == doctest::Approx(0.8665).epsilon(1e-12));
    CHECK_THROWS_AS(zip_stratum('X', 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(zip_power(d, 0.0), std::domain_error);
}

TEST_CASE("PV available power") {
    CHECK(pv_available_power_kw(1000.0, 0.167, 50.2605) ==
          doctest::Approx(8.3935).epsilon(1e-4));
    CHECK(pv_available_power_kw(1000.0, 0.167, 50.2605) ==
          doctest::Approx(0.167 * 1000.0 * 50.2605 * 1e-3).epsilon(1e-15));
    CHECK(pv_available_power_kw(0.0, 0.167, 50.2605) == 0.0);
    CHECK(pv_available_power_kw(500.0, 0.167, 50.2605) ==
          doctest::Approx(0.5 * pv_available_power_kw(1000.0, 0.167, 50.2605)).epsilon(1e-12));
}

TEST_CASE("zero injection leaves every node at the source voltage") {
    FeederCase c = FeederCase::twelve_house_benchmark();
    std::vector<PowerKw> none(12, PowerKw{0.0, 0.0});
    const NetworkSolution sol = solve_network(c, none);
    for (std::size_t i = 0; i < 12; ++i)
        CHECK(std::abs(sol.v_house_pu(i, c) - 1.02) <= 1e-12);
    CHECK(std::abs(std::abs(sol.v_bus_v) / 240.0 - 1.02) <= 1e-12);
    CHECK(sol.sweeps == 1);
}

TEST_CASE("uniform generation raises voltage monotonically along the backbone") {
    FeederCase c = FeederCase::twelve_house_benchmark();
    std::vector<PowerKw> gen(12, PowerKw{-6.25, 0.0});
    const NetworkSolution sol = solve_network(c, gen);
    for (std::size_t t = 1; t < sol.v_tap_v.size(); ++t)
        CHECK(std::abs(sol.v_tap_v[t]) > std::abs(sol.v_tap_v[t - 1]));
    // and uniform load lowers it monotonically
    std::vector<PowerKw> load(12, PowerKw{6.25, 0.0});
    const NetworkSolution sol2 = solve_network(c, load);
    for (std::size_t t = 1; t < sol2.v_tap_v.size(); ++t)
        CHECK(std::abs(sol2.v_tap_v[t]) < std::abs(sol2.v_tap_v[t - 1]));
}

TEST_CASE("single remote load pulls the backbone down toward its tap") {
    FeederCase c = FeederCase::twelve_house_benchmark();
    std::vector<PowerKw> inj(12, PowerKw{0.0, 0.0});
    inj[10] = {10.0, 2.0};  // H11 at the last tap
    const NetworkSolution sol = solve_network(c, inj);
    for (std::size_t t = 1; t < sol.v_tap_v.size(); ++t)
        CHECK(std::abs(sol.v_tap_v[t]) < std::abs(sol.v_tap_v[t - 1]));
}

TEST_CASE("converged solution satisfies the power constraints and balance") {
    FeederCase c = FeederCase::twelve_house_benchmark();
    // exercise the literal nameplate winding impedances here
    c.source_series_r_pu = c.transformer.series_r_pu();
    c.source_series_x_pu = c.transformer.series_x_pu();
    std::vector<PowerKw> inj(12);
    for (std::size_t i = 0; i < 12; ++i)
        inj[i] = {1.5 - 0.4 * static_cast<double>(i % 3), 0.3 + 0.1 * static_cast<double>(i % 2)};
    const NetworkSolution sol = solve_network(c, inj);

    // constant-PQ constraint holds at every house
    for (std::size_t i = 0; i < 12; ++i) {
        const std::complex<double> s = sol.v_house_v[i] * std::conj(sol.i_house_a[i]);
        CHECK(s.real() == doctest::Approx(inj[i].p_kw * 1e3).epsilon(1e-6));
        CHECK(s.imag() == doctest::Approx(inj[i].q_kvar * 1e3).epsilon(1e-6));
    }

    // bus input power equals consumed power plus line losses (per-unit check)
    const std::complex<double> s_bus = sol.v_bus_v * std::conj(sol.i_source_a);
    std::complex<double> s_houses{0.0, 0.0};
    for (std::size_t i = 0; i < 12; ++i)
        s_houses += sol.v_house_v[i] * std::conj(sol.i_house_a[i]);
    std::complex<double> s_lines{0.0, 0.0};
    for (std::size_t j = 0; j < c.backbone.size(); ++j)
        s_lines += std::norm(sol.i_span_a[j]) * c.backbone[j].impedance_ohm(c.frequency_hz);
    for (std::size_t i = 0; i < 12; ++i)
        s_lines += std::norm(sol.i_house_a[i]) * c.houses[i].drop.impedance_ohm(c.frequency_hz);
    const double s_base_va = c.transformer.rating_kva * 1e3;
    CHECK(std::abs(s_bus - s_houses - s_lines) / s_base_va <= 1e-6);
}

TEST_CASE("identical tap pairs see identical voltages") {
    FeederCase c = FeederCase::twelve_house_benchmark();
    std::vector<PowerKw> inj(12, PowerKw{-4.0, 0.5});
    const NetworkSolution sol = solve_network(c, inj);
    for (std::size_t pair = 0; pair < 6; ++pair)
        CHECK(sol.v_house_v[2 * pair] == sol.v_house_v[2 * pair + 1]);
}

TEST_CASE("pathological load diverges with a report") {
    FeederCase c = small_case();
    std::vector<PowerKw> inj(2, PowerKw{5e5, 0.0});
    CHECK_THROWS_AS(solve_network(c, inj), DivergenceError);
}

TEST_CASE("load sweep: flat at zero, symmetric pairs, monotone columns") {
    FeederCase c = FeederCase::twelve_house_benchmark();
    const SweepResult sweep = load_sweep(c, -75.0, 75.0, 31);
    // zero net load row sits in the middle of an odd grid
    const std::size_t mid = 15;
    CHECK(sweep.net_load_kw[mid] == doctest::Approx(0.0).epsilon(1e-12));
    for (std::size_t h = 0; h < 12; ++h)
        CHECK(sweep.v_house_pu[h][mid] == doctest::Approx(1.02).epsilon(1e-10));
    for (std::size_t pair = 0; pair < 6; ++pair)
        CHECK(sweep.v_house_pu[2 * pair] == sweep.v_house_pu[2 * pair + 1]);
    for (std::size_t h = 0; h < 12; ++h)
        for (std::size_t k = 1; k < sweep.net_load_kw.size(); ++k)
            CHECK(sweep.v_house_pu[h][k] < sweep.v_house_pu[h][k - 1]);
}

TEST_CASE("profile ingestion: interpolation, clamping, errors") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "gridfit_profiles";
    fs::create_directories(dir);

    {
        std::ofstream load(dir / "load.csv");
        load << "time_s,h1,h2\n0,1.0,2.0\n3600,2.0,1.0\n";
        std::ofstream irr(dir / "irr.csv");
        irr << "time_s,irradiance_w_m2\n0,0\n3600,600\n";
    }
    const Profiles p = ingest_profiles(dir / "load.csv", dir / "irr.csv", 1.0);
    CHECK(p.load_kw.size() == 2);
    CHECK(p.samples() == 3601);
    CHECK(p.irradiance_w_m2[1800] == doctest::Approx(300.0).epsilon(1e-12));
    CHECK(p.load_kw[0][1800] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(p.load_kw[1].back() == doctest::Approx(1.0).epsilon(1e-12));

    {
        std::ofstream irr(dir / "irr_neg.csv");
        irr << "time_s,irradiance_w_m2\n0,-50\n3600,600\n";
    }
    const Profiles clamped = ingest_profiles(dir / "load.csv", dir / "irr_neg.csv", 1.0);
    CHECK(clamped.irradiance_w_m2[0] == 0.0);

    {
        std::ofstream bad(dir / "bad.csv");
        bad << "time_s,h1\n0,1.0\n60,not_a_number\n";
        std::ofstream irr(dir / "irr_s.csv");
        irr << "time_s,irr\n0,0\n60,10\n";
    }
    try {
        ingest_profiles(dir / "bad.csv", dir / "irr_s.csv", 1.0);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }

    {
        std::ofstream shorter(dir / "short.csv");
        shorter << "time_s,h1\n0,1.0\n1800,1.0\n";
    }
    CHECK_THROWS_AS(ingest_profiles(dir / "short.csv", dir / "irr.csv", 1.0), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("one-second-resolution profiles pass through unchanged") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "gridfit_profiles_1s";
    fs::create_directories(dir);
    const std::size_t rows = 86400;
    {
        std::ofstream load(dir / "load.csv");
        load << "time_s";
        for (int h = 1; h <= 12; ++h) load << ",h" << h;
        load << "\n";
        std::ofstream irr(dir / "irr.csv");
        irr << "time_s,irr\n";
        for (std::size_t t = 0; t <= rows; t += 1) {
            load << t;
            for (int h = 1; h <= 12; ++h) load << ',' << (0.5 + 0.001 * (t % 7) + 0.01 * h);
            load << "\n";
            irr << t << ',' << (t % 100) << "\n";
        }
    }
    const Profiles p = ingest_profiles(dir / "load.csv", dir / "irr.csv", 1.0);
    CHECK(p.samples() == rows + 1);
    CHECK(p.load_kw.size() == 12);
    CHECK(p.load_kw[3][12345] == doctest::Approx(0.5 + 0.001 * (12345 % 7) + 0.04).epsilon(1e-12));
    CHECK(p.irradiance_w_m2[54321] == doctest::Approx(54321 % 100).epsilon(1e-12));
    fs::remove_all(dir);
}

TEST_CASE("quiet night: all voltages at or below source, reactive output near zero") {
    FeederCase c = FeederCase::twelve_house_benchmark();
    c.profiles = flat_profiles(12, 60, 0.8, 0.0);
    const TimeseriesResult res = run_timeseries(c, GsfMode::volt_var, InverterBinding::detailed);
    CHECK(res.time_s.size() == 60);
    for (std::size_t h = 0; h < 12; ++h) {
        for (std::size_t k = 10; k < 60; ++k) {
            CHECK(res.v_house_pu[h][k] <= 1.02 + 1e-9);
            CHECK(std::abs(res.q_house_kvar[h][k]) <= 1e-6);  // dead band
        }
    }
    // deterministic repeat
    const TimeseriesResult again =
        run_timeseries(c, GsfMode::volt_var, InverterBinding::detailed);
    CHECK(res.v_house_pu == again.v_house_pu);
    CHECK(res.i_house_a == again.i_house_a);
}

TEST_CASE("generation without support lifts voltage; volt-var pulls it back") {
    FeederCase c = FeederCase::twelve_house_benchmark();
    c.profiles = flat_profiles(12, 90, 0.5, 850.0);  // strong sun, light load
    const TimeseriesResult off = run_timeseries(c, GsfMode::no_gsf, InverterBinding::detailed);
    const TimeseriesResult on = run_timeseries(c, GsfMode::volt_var, InverterBinding::detailed);
    const std::size_t last = off.time_s.size() - 1;
    CHECK(off.v_house_pu[10][last] > 1.05);
    CHECK(on.v_house_pu[10][last] < off.v_house_pu[10][last] - 0.005);
    CHECK(on.q_house_kvar[10][last] < -0.5);  // absorbing
}

TEST_CASE("run_timeseries validates its inputs") {
    FeederCase c = FeederCase::twelve_house_benchmark();
    c.profiles = flat_profiles(12, 10, 0.5, 0.0);
    CHECK_THROWS_AS(run_timeseries(c, GsfMode::volt_var, InverterBinding::partitioned, nullptr),
                    ConfigError);
    c.profiles.dt_s = 2.0;  // disagrees with the coupling step
    CHECK_THROWS_AS(run_timeseries(c, GsfMode::volt_var, InverterBinding::detailed), ConfigError);
    FeederCase odd = FeederCase::twelve_house_benchmark();
    odd.houses.pop_back();
    CHECK_THROWS_AS(odd.validate(), ConfigError);
}
