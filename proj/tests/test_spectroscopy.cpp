#include <cmath>
#include <algorithm>
#include <random>

#include "biphoton/error.hpp"
#include "biphoton/spectroscopy.hpp"
#include "doctest.h"
#include "oracles.hpp"

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

// τ2 scan filled from the hand-written closed form (library engines not involved).
Interferogram oracle_scan(double sp, double sm, double wp, double tau1, double half, std::size_t n) {
    Interferogram ig;
    ig.scan_axis = ScanAxis::Tau2AtFixedTau1;
    ig.fixed_delay = tau1;
    ig.delays = UniformGrid::symmetric(half, n);
    ig.rates.resize(n);
    for (std::size_t i = 0; i < n; ++i) ig.rates[i] = oracle::closed_rate(sp, sm, wp, tau1, ig.delays[i]);
    ig.metadata.sigma_plus = sp;
    ig.metadata.sigma_minus = sm;
    ig.metadata.pump_frequency = wp;
    ig.metadata.delay_spacing = ig.delays.step;
    return ig;
}
}  // namespace

TEST_CASE("log-parabola gaussian fit") {
    std::vector<double> x, y;
    for (int i = 0; i < 201; ++i) {
        x.push_back(-5.0 + 0.05 * i);
        y.push_back(3.0 * std::exp(-std::pow(x.back() - 0.7, 2) / (2 * 0.8 * 0.8)));
    }
    const auto f = fit_gaussian_log_parabola(x, y);
    CHECK(f.sigma == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(f.centre == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(f.points > 3);
    std::vector<double> spike(x.size(), 0.0);
    spike[100] = 1.0;
    CHECK(code_of([&] { fit_gaussian_log_parabola(x, spike); }) == ErrorCode::PacketsOverlap);
}

TEST_CASE("correlation class thresholds") {
    CHECK(classify_ratio(0.1).verdict == CorrelationVerdict::AntiCorrelated);
    CHECK(classify_ratio(0.49).verdict == CorrelationVerdict::AntiCorrelated);
    CHECK(classify_ratio(0.5).verdict == CorrelationVerdict::Uncorrelated);
    CHECK(classify_ratio(1.0).verdict == CorrelationVerdict::Uncorrelated);
    CHECK(classify_ratio(2.0).verdict == CorrelationVerdict::Uncorrelated);
    CHECK(classify_ratio(2.01).verdict == CorrelationVerdict::Correlated);
    CHECK(to_string(CorrelationVerdict::AntiCorrelated) == "AntiCorrelated");
}

TEST_CASE("round trip on the three correlation regimes") {
    struct Case {
        double sm, half;
        std::size_t n;
        CorrelationVerdict v;
    };
    for (const Case c : {Case{10.0, 10.0, 4096, CorrelationVerdict::AntiCorrelated},
                         Case{0.1, 60.0, 16384, CorrelationVerdict::Correlated},
                         Case{1.0, 10.0, 4096, CorrelationVerdict::Uncorrelated}}) {
        CAPTURE(c.sm);
        const auto ig = oracle_scan(1.0, c.sm, 200.0, 5.0, c.half, c.n);
        const auto r = reconstruct(ig);
        CHECK(r.sigma_plus_hat == doctest::Approx(1.0).epsilon(0.01));
        CHECK(r.sigma_minus_hat == doctest::Approx(c.sm).epsilon(0.01));
        CHECK(r.tau1_hat == doctest::Approx(5.0).epsilon(0.01));
        CHECK(classify_correlation(r).verdict == c.v);
        CHECK(r.central_visibility == doctest::Approx(0.5).epsilon(0.01));
        CHECK(r.side_visibility == doctest::Approx(0.25).epsilon(0.01));
        CHECK(r.resynthesis_residual < 1e-2);

        double err = 0.0, peak = 0.0;
        for (std::size_t a = 0; a < r.jsi.plus.size; ++a)
            for (std::size_t b = 0; b < r.jsi.minus.size; ++b) {
                const double wp_ = r.jsi.plus[a], wm = r.jsi.minus[b];
                const double truth = std::exp(-wp_ * wp_ / 2.0 - wm * wm / (2 * c.sm * c.sm));
                peak = std::max(peak, truth);
                err = std::max(err, std::abs(r.jsi.values[a * r.jsi.minus.size + b] - truth));
            }
        CHECK(err <= 0.02 * peak);
    }
}

TEST_CASE("reconstruction tolerates small additive noise") {
    auto ig = oracle_scan(1.0, 1.0, 200.0, 5.0, 10.0, 4096);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> noise(0.0, 1e-3);
    for (double& r : ig.rates) r += noise(rng);
    const auto r = reconstruct(ig);
    MESSAGE("noisy sigma+ " << r.sigma_plus_hat << " sigma- " << r.sigma_minus_hat << " tau1 " << r.tau1_hat);
    CHECK(std::abs(r.sigma_plus_hat - 1.0) < 0.01);
    CHECK(std::abs(r.sigma_minus_hat - 1.0) < 0.01);
    CHECK(std::abs(r.tau1_hat - 5.0) < 0.01);
}

TEST_CASE("time scales and visibilities from the envelopes") {
    const auto ig = oracle_scan(1.0, 10.0, 200.0, 5.0, 10.0, 4096);
    const auto ts = estimate_time_scales(ig);
    CHECK(ts.envelope_width == doctest::Approx(1.0).epsilon(0.01));
    CHECK(ts.dip_width == doctest::Approx(0.1).epsilon(0.01));
    CHECK(ts.separation() == doctest::Approx(10.0).epsilon(0.01));
    const auto v = packet_visibility(ig);
    CHECK(v.central == doctest::Approx(0.5).epsilon(0.01));
    CHECK(v.side == doctest::Approx(0.25).epsilon(0.01));

    const auto env = extract_envelopes(ig);
    REQUIRE(env.upper.size() == ig.size());
    const std::size_t mid = ig.size() / 2;
    CHECK(env.upper[mid] >= env.lower[mid]);
}

TEST_CASE("envelope values at the landmarks") {
    const auto ig = oracle_scan(1.0, 10.0, 200.0, 5.0, 10.0, 4096);
    const auto env = extract_envelopes(ig);
    const auto at = [&](const std::vector<double>& v, double t) {
        return v[static_cast<std::size_t>(std::lround((t - env.delays.front()) / env.delays.step))];
    };
    CHECK(std::abs(at(env.lower, 0.0)) < 5e-3);
    CHECK(at(env.upper, 5.0) == doctest::Approx(1.25).epsilon(2e-3));
    CHECK(at(env.lower, 5.0) == doctest::Approx(0.75).epsilon(2e-3));
    CHECK(at(env.upper, -5.0) == doctest::Approx(1.25).epsilon(2e-3));
    for (double t : {-8.5, 8.5}) {
        CHECK(std::abs(at(env.upper, t) - 1.0) < 2e-3);
        CHECK(std::abs(at(env.lower, t) - 1.0) < 2e-3);
    }
}

TEST_CASE("time scales follow the synthesis parameters") {
    const auto c = estimate_time_scales(oracle_scan(1.0, 1.0, 200.0, 5.0, 10.0, 4096));
    CHECK(c.envelope_width == doctest::Approx(1.0).epsilon(0.03));
    CHECK(c.dip_width == doctest::Approx(1.0).epsilon(0.03));
    CHECK(c.half_separation == doctest::Approx(5.0).epsilon(0.03));
    const auto d = estimate_time_scales(oracle_scan(1.0, 1.0, 200.0, 10.0, 20.0, 8192));
    CHECK(d.half_separation == doctest::Approx(2.0 * c.half_separation).epsilon(1e-3));
}

TEST_CASE("JSI shape and spectra") {
    const auto r = reconstruct(oracle_scan(1.0, 10.0, 200.0, 5.0, 10.0, 4096));
    double peak = 0.0;
    for (double v : r.jsi.values) peak = std::max(peak, v);
    CHECK(peak == doctest::Approx(1.0).epsilon(1e-3));
    // anti-correlated: the ellipse is long along Ω−
    CHECK(r.jsi.minus.back() > 5.0 * r.jsi.plus.back());
    const auto [fp, fm] = recover_spectra(oracle_scan(1.0, 10.0, 200.0, 5.0, 10.0, 4096));
    CHECK(fp.coordinate == Coordinate::Sum);
    CHECK(fm.coordinate == Coordinate::Difference);
    CHECK(*std::max_element(fp.values.begin(), fp.values.end()) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("input checks") {
    auto coarse = oracle_scan(1.0, 1.0, 200.0, 5.0, 10.0, 512);
    CHECK(code_of([&] { demodulate(coarse); }) == ErrorCode::CarrierNotResolved);

    auto close = oracle_scan(1.0, 1.0, 200.0, 1.5, 10.0, 4096);
    CHECK(code_of([&] { reconstruct(close); }) == ErrorCode::PacketsOverlap);

    auto flipped = oracle_scan(1.0, 1.0, 200.0, 5.0, 10.0, 4096);
    for (double& r : flipped.rates) r = 2.0 - r;
    CHECK(code_of([&] { reconstruct(flipped); }) == ErrorCode::AntisymmetricInput);

    auto wrong_axis = oracle_scan(1.0, 1.0, 200.0, 5.0, 10.0, 4096);
    wrong_axis.scan_axis = ScanAxis::Tau1AtFixedTau2;
    CHECK(code_of([&] { demodulate(wrong_axis); }) == ErrorCode::InvalidConfig);

    const auto r = reconstruct(oracle_scan(1.0, 1.0, 200.0, 5.0, 10.0, 4096));
    CHECK(code_of([&] { reconstruct_jsi(r.f_minus, r.f_plus); }) == ErrorCode::IncompatibleGrids);
    const auto sig = jsi_signal_idler(r.f_plus, r.f_minus, UniformGrid::symmetric(3.0, 61));
    CHECK(sig.values.size() == 61 * 61);
}
