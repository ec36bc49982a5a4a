#include <cmath>
#include <fstream>

#include "biphoton/error.hpp"
#include "biphoton/spectral_model.hpp"
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

TEST_CASE("gaussian JSA matches the product form and its exchange symmetry") {
    const auto f = make_gaussian_jsa(1.0, 3.0, 200.0);
    const auto o = oracle::gaussian(1.0, 3.0);
    for (double ds : {-1.3, 0.0, 0.4, 2.1})
        for (double di : {-0.7, 0.0, 1.1}) {
            CHECK(std::abs(f.evaluate_detuning(ds, di) - o(ds, di)) < 1e-15);
            CHECK(std::abs(f.evaluate(100.0 + ds, 100.0 + di) - o(ds, di)) < 1e-13);
            CHECK(std::abs(f.evaluate_detuning(ds, di) - f.evaluate_detuning(di, ds)) < 1e-15);
        }
}

TEST_CASE("antisymmetric and anyonic exchange relations") {
    const auto a = make_gaussian_jsa(1.0, 2.0, 200.0, Symmetry::antisymmetric());
    CHECK(std::abs(a.evaluate_detuning(0.5, -0.2) + a.evaluate_detuning(-0.2, 0.5)) < 1e-15);
    CHECK(std::abs(a.evaluate_detuning(0.3, 0.3)) == 0.0);

    const double phi = 0.9;
    const auto y = make_gaussian_jsa(1.0, 2.0, 200.0, Symmetry::anyonic(phi));
    const complex lhs = y.evaluate_detuning(0.7, -0.1);  // ωs > ωi
    const complex rhs = std::polar(1.0, phi) * y.evaluate_detuning(-0.1, 0.7);
    CHECK(std::abs(lhs - rhs) < 1e-15);
    CHECK_FALSE(y.is_symmetric());
    CHECK(to_string(y.symmetry()) == "anyonic");
}

TEST_CASE("parameter validation") {
    CHECK(code_of([] { make_gaussian_jsa(0.0, 1.0, 200.0); }) == ErrorCode::NonPositiveParameter);
    CHECK(code_of([] { make_gaussian_jsa(1.0, -1.0, 200.0); }) == ErrorCode::NonPositiveParameter);
    CHECK(code_of([] { make_gaussian_jsa(1.0, 1.0, 5.0); }) == ErrorCode::PumpTooSmall);
    try {
        make_gaussian_jsa(-1.0, 1.0, 200.0);
    } catch (const Error& e) {
        CHECK(std::string(e.what()) == "NonPositiveParameter: sigma_plus");
        CHECK(e.category() == ErrorCategory::Config);
    }
    CHECK(code_of([] { parse_symmetry("bosonic-ish"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("gaussian collective densities and correlation functions") {
    const auto f = make_gaussian_jsa(1.0, 0.25, 200.0);
    const auto dp = spectral_density(f, Coordinate::Sum);
    const auto dm = spectral_density(f, Coordinate::Difference);
    for (std::size_t k = 0; k < dp.values.size(); k += 97) {
        const double w = dp.detunings[k];
        CHECK(dp.values[k] == doctest::Approx(std::exp(-w * w / 2.0)).epsilon(1e-12));
    }
    const auto delays = UniformGrid::symmetric(30.0, 601);
    const auto gpl = correlation_function(dp, delays);
    const auto gmi = correlation_function(dm, delays);
    for (double t : {-3.0, -0.5, 0.0, 1.2, 4.0, 20.0}) {
        CHECK(std::abs(gpl.at(t) - oracle::gm(1.0, t)) < 1e-12);
        CHECK(std::abs(gmi.at(t) - oracle::gm(0.25, t)) < 1e-12);
        CHECK(std::abs(gpl.with_carrier(t, 200.0) - oracle::gp(1.0, 200.0, t)) < 1e-12);
    }
    CHECK(code_of([&] { gpl.at(31.0); }) == ErrorCode::DelayOutsideTabulatedRange);
}

TEST_CASE("a density grid that truncates the spectrum is rejected") {
    const auto f = make_gaussian_jsa(1.0, 1.0, 200.0);
    const auto d = spectral_density(f, Coordinate::Sum, UniformGrid::symmetric(2.0, 101));
    CHECK(code_of([&] { correlation_function(d, UniformGrid::symmetric(5.0, 11)); }) == ErrorCode::GridTooNarrow);
}

TEST_CASE("tabulated gaussian: normalization, rms widths and densities") {
    const double sp = 1.0, sm = 0.5;
    const auto t = testutil::sample_table([&](double a, double b) { return testutil::gaussian_amp(sp, sm, a, b); },
                                          8.0, 161);
    const auto f = make_tabulated_jsa(t, 200.0);
    CHECK(f.kind() == ModelKind::TabulatedGrid);
    CHECK(f.sigma_plus() == doctest::Approx(sp).epsilon(2e-3));
    CHECK(f.sigma_minus() == doctest::Approx(sm).epsilon(2e-3));

    double norm = 0.0;
    const auto& p = f.table();
    for (const auto& v : p.values) norm += std::norm(v) * p.signal.step * p.idler.step;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(factorization_residual(f) < kFactorizationTolerance);

    // Off-node evaluation interpolates and stays exchange symmetric.
    const complex a = f.evaluate_detuning(0.313, -0.271), b = f.evaluate_detuning(-0.271, 0.313);
    CHECK(std::abs(a - b) < 1e-14);
    CHECK(code_of([&] { f.evaluate_detuning(9.0, 0.0); }) == ErrorCode::OutOfGridBounds);

    const auto dp = spectral_density(f, Coordinate::Sum, UniformGrid::symmetric(4.0, 81));
    for (std::size_t k = 0; k < dp.values.size(); k += 8) {
        const double w = dp.detunings[k];
        CHECK(std::abs(dp.values[k] - std::exp(-w * w / (2 * sp * sp))) < 5e-3);
    }
}

TEST_CASE("non-factorizable table is refused for collective densities") {
    const auto t = testutil::sample_table(
        [](double a, double b) {
            return testutil::gaussian_amp(1.0, 0.3, a, b) + testutil::gaussian_amp(0.3, 1.0, a, b);
        },
        6.0, 121);
    const auto f = make_tabulated_jsa(t, 200.0);
    CHECK(factorization_residual(f) > kFactorizationTolerance);
    CHECK(code_of([&] { spectral_density(f, Coordinate::Sum); }) == ErrorCode::NotFactorizable);
}

TEST_CASE("antisymmetric projection of a table") {
    const auto t = testutil::sample_table([](double a, double b) { return testutil::gaussian_amp(1.0, 0.5, a, b) * (a - b); },
                                          6.0, 81);
    const auto f = make_tabulated_jsa(t, 200.0, Symmetry::antisymmetric());
    const auto& p = f.table();
    const std::size_t n = p.signal.size;
    for (std::size_t i = 0; i < n; i += 7)
        for (std::size_t j = 0; j < n; j += 5) CHECK(std::abs(p.values[i * n + j] + p.values[j * n + i]) < 1e-15);
    // nothing survives the symmetric projection of an antisymmetric source
    CHECK(code_of([&] { f.with_symmetry(Symmetry::symmetric()); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("tabulated CSV loader") {
    const auto dir = testutil::scratch_dir("csv");
    const auto good = (dir / "good.csv").string();
    {
        std::ofstream o(good);
        o << "omega_s,omega_i,re,im\n";
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) o << 99.0 + i << ',' << 99.0 + j << ',' << (i == j ? 1.0 : 0.5) << ",0\n";
    }
    const auto t = load_tabulated_csv(good, 200.0);
    CHECK(t.signal.size == 3);
    CHECK(t.signal.front() == doctest::Approx(-1.0));
    CHECK(t.values[4].real() == doctest::Approx(1.0));

    const auto bad = (dir / "bad.csv").string();
    std::ofstream(bad) << "ws,wi,re,im\n1,1,1,0\n";
    CHECK(code_of([&] { load_tabulated_csv(bad, 200.0); }) == ErrorCode::ParseError);
    const auto ragged = (dir / "ragged.csv").string();
    std::ofstream(ragged) << "omega_s,omega_i,re,im\n99,99,1,0\n99,100,1,0\n100,99,1,0\n";
    CHECK(code_of([&] { load_tabulated_csv(ragged, 200.0); }) == ErrorCode::ParseError);
    CHECK(code_of([&] { load_tabulated_csv((dir / "missing.csv").string(), 200.0); }) == ErrorCode::IoError);
}
