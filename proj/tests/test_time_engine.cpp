#include <cmath>
#include <fstream>
#include <numbers>

#include "biphoton/error.hpp"
#include "biphoton/time_engine.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "tables.hpp"

using namespace biphoton;

namespace {
ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidConfig;
}
}  // namespace

TEST_CASE("eight shifted amplitudes") {
    const auto a = temporal_amplitudes({2.0, 3.0});
    const double want[8][3] = {{0, 0, 1}, {2, 2, -1}, {0, 3, 1}, {3, 0, -1}, {2, 5, 1}, {5, 2, -1}, {5, 5, 1}, {3, 3, -1}};
    for (int k = 0; k < 8; ++k) {
        CHECK(a[k].index == k + 1);
        CHECK(a[k].shift_s == want[k][0]);
        CHECK(a[k].shift_i == want[k][1]);
        CHECK(a[k].sign == int(want[k][2]));
    }
}

TEST_CASE("gaussian temporal amplitude is the Fourier transform of the JSA") {
    const double sp = 1.0, sm = 0.6, wp = 40.0;
    const auto jsa = make_gaussian_jsa(sp, sm, wp);
    const auto f = oracle::gaussian(sp, sm);
    const double h = 0.02, half = 10.0;
    const int n = int(half / h);
    for (auto [ts, ti] : {std::pair{0.0, 0.0}, std::pair{0.3, -0.5}, std::pair{1.1, 0.9}}) {
        oracle::cd s = 0;
        for (int i = -n; i <= n; ++i)
            for (int j = -n; j <= n; ++j) {
                const double ds = i * h, di = j * h;
                s += f(ds, di) * std::polar(1.0, -((0.5 * wp + ds) * ts + (0.5 * wp + di) * ti));
            }
        s *= h * h / (2 * std::numbers::pi);
        CHECK(std::abs(base_amplitude(jsa, ts, ti) - s) < 1e-10);
    }
}

TEST_CASE("time-domain rate equals the closed form") {
    for (auto [sp, sm] : {std::pair{1.0, 10.0}, std::pair{1.0, 0.1}, std::pair{1.0, 1.0}}) {
        const auto jsa = make_gaussian_jsa(sp, sm, 200.0);
        const TemporalModel m(jsa);
        CHECK(m.single_norm() == doctest::Approx(std::numbers::pi * sp * sm).epsilon(1e-9));
        for (DelayPair d : {DelayPair{5.0, 0.0}, DelayPair{5.0, 2.0}, DelayPair{-2.5, 5.0}, DelayPair{0.0, -1.0}}) {
            CHECK(std::abs(rate_from_time_domain(m, d) - oracle::closed_rate(sp, sm, 200.0, d.tau1, d.tau2)) < 1e-9);
        }
    }
}

TEST_CASE("cross-term audit reproduces each named term") {
    const double sp = 1.0, sm = 1.0, wp = 200.0;
    const auto jsa = make_gaussian_jsa(sp, sm, wp);
    for (DelayPair d : {DelayPair{5.0, 2.0}, DelayPair{2.5, -5.0}, DelayPair{0.3, 0.4}}) {
        const auto a = audit_cross_terms(jsa, d);
        const double t1 = d.tau1, t2 = d.tau2;
        const double want[4] = {-0.5 * oracle::gp(sp, wp, t1) * oracle::gm(sm, t2), -0.5 * oracle::gp(sp, wp, t2),
                                -0.5 * oracle::gm(sm, t2),
                                0.25 * oracle::gp(sp, wp, t2 + t1) + 0.25 * oracle::gp(sp, wp, t2 - t1)};
        const char* names[4] = {"second", "third", "fourth", "last_two"};
        for (int g = 0; g < 4; ++g) {
            CHECK(a.groups[g].name == names[g]);
            CHECK(a.groups[g].terms.size() == 4);
            CHECK(std::abs(a.groups[g].sum - want[g]) < 1e-12);
        }
        CHECK(a.baseline_group == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(a.residual) < 1e-12);
        CHECK(std::abs(a.total - oracle::closed_rate(sp, sm, wp, t1, t2)) < 1e-12);
    }
}

TEST_CASE("time engine refuses non-symmetric models") {
    const auto anti = make_gaussian_jsa(1.0, 1.0, 200.0, Symmetry::antisymmetric());
    CHECK(code_of([&] { TemporalModel m(anti); }) == ErrorCode::UnsupportedModel);
    CHECK(code_of([&] { rate_from_time_domain(anti, {1.0, 1.0}); }) == ErrorCode::UnsupportedModel);
}

TEST_CASE("time grid validation") {
    const auto jsa = make_gaussian_jsa(1.0, 1.0, 200.0);
    const DelayPair d{5.0, 2.0};
    const TimeGrid good = auto_time_grid(jsa, d);
    CHECK_NOTHROW(validate_time_grid(jsa, d, good));
    TimeGrid coarse = good;
    coarse.u = UniformGrid::from_range(good.u.front(), good.u.back(), good.u.size / 4);
    CHECK(code_of([&] { validate_time_grid(jsa, d, coarse); }) == ErrorCode::TimeGridTooCoarse);
    TimeGrid narrow = good;
    narrow.v = UniformGrid::from_range(-1.0, 1.0, 11);
    CHECK(code_of([&] { validate_time_grid(jsa, d, narrow); }) == ErrorCode::TimeGridTooNarrow);
    CHECK(code_of([&] { rate_from_time_domain(jsa, d, narrow); }) == ErrorCode::TimeGridTooNarrow);
}

TEST_CASE("tabulated time-domain path") {
    const double sp = 1.0, sm = 0.8, wp = 200.0;
    const auto t = testutil::sample_table([&](double a, double b) { return testutil::gaussian_amp(sp, sm, a, b); },
                                          8.0, 161);
    const auto jsa = make_tabulated_jsa(t, wp);
    const TemporalModel m(jsa);
    for (DelayPair d : {DelayPair{0.0, 0.0}, DelayPair{1.0, 2.0}, DelayPair{3.0, -1.5}}) {
        CHECK(std::abs(rate_from_time_domain(m, d) - oracle::closed_rate(sp, sm, wp, d.tau1, d.tau2)) < 1e-6);
        const auto a = audit_cross_terms(jsa, d);
        CHECK(std::abs(a.residual) < 1e-9);
        for (const auto& g : a.groups) CHECK(std::abs(g.sum - g.expected) < 1e-6);
    }
}

TEST_CASE("joint temporal intensity and its CSV") {
    const auto jsa = make_gaussian_jsa(1.0, 1.0, 200.0);
    const DelayPair d{2.0, 1.0};
    const auto ts = UniformGrid::symmetric(4.0, 9), ti = UniformGrid::symmetric(4.0, 7);
    const auto j = joint_temporal_intensity(jsa, d, ts, ti);
    REQUIRE(j.values.size() == 63);
    CHECK(j.values[3 * 7 + 2] == doctest::Approx(std::norm(effective_wavefunction(jsa, ts[3], ti[2], d))));
    const auto dir = testutil::scratch_dir("jti");
    const auto path = (dir / "jti.csv").string();
    write_jti_csv(j, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "ts,ti,intensity");
}
