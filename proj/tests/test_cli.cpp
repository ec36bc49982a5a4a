#include <filesystem>
#include <fstream>
#include <sstream>

#include "biphoton/cli/commands.hpp"
#include "biphoton/cli/config.hpp"
#include "biphoton/cli/interferogram_io.hpp"
#include "biphoton/scan.hpp"
#include "doctest.h"
#include "tables.hpp"

using namespace biphoton;
namespace fs = std::filesystem;

namespace {
struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream o, e;
    const int c = cli::run(args, o, e);
    return {c, o.str(), e.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

cli::json read_json(const fs::path& p) { return cli::json::parse(slurp(p)); }
}  // namespace

TEST_CASE("presets list names all five presets") {
    const auto r = run({"presets", "list"});
    CHECK(r.code == 0);
    for (const char* n : {"fig2a", "fig2b", "fig2c", "fig3a", "fig3b"}) CHECK(r.out.find(n) != std::string::npos);
    CHECK(run({"presets", "show", "fig2b"}).code == 0);
    CHECK(run({"presets", "show", "nope"}).code == 2);
}

TEST_CASE("preset parameters") {
    const auto& a = cli::find_preset("fig2a").members.front().config;
    CHECK(a.model.sigma_plus / a.model.sigma_minus == doctest::Approx(0.1));
    CHECK(a.model.sigma_plus * a.scan.fixed_delay == doctest::Approx(5.0));
    const auto& b = cli::find_preset("fig3b");
    REQUIRE(b.members.size() == 4);
    for (const auto& m : b.members) {
        CHECK(m.config.scan.min == b.members.front().config.scan.min);
        CHECK(m.config.scan.points == b.members.front().config.scan.points);
    }
}

TEST_CASE("simulate then reconstruct") {
    const auto dir = testutil::scratch_dir("cli_round");
    const auto prefix = (dir / "c").string();
    auto r = run({"simulate", "--preset", "fig2c", "-o", prefix, "--emit-plot-data"});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(prefix + ".csv"));
    CHECK(fs::exists(prefix + ".envelope.csv"));
    const auto side = read_json(prefix + ".json");
    CHECK(side["schema"] == 1);
    CHECK(side["preset"] == "fig2c");
    CHECK(side["engine"] == "closed_form");
    CHECK(side["config"]["model"]["sigma_minus"] == 1.0);
    CHECK(side["metadata"].contains("timestamp"));
    CHECK(side["data_file"] == "c.csv");

    r = run({"reconstruct", prefix + ".csv", "--dump-prefix", prefix});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("Uncorrelated") != std::string::npos);
    const auto rep = read_json(prefix + ".report.json");
    CHECK(rep["verdict"] == "Uncorrelated");
    CHECK(rep["ratio_hat"].get<double>() == doctest::Approx(1.0).epsilon(0.02));
    CHECK(fs::exists(prefix + ".jsi.csv"));
    CHECK(fs::exists(prefix + ".f_plus.csv"));
}

TEST_CASE("physical units round-trip through the sidecar") {
    const auto dir = testutil::scratch_dir("cli_units");
    const auto prefix = (dir / "u").string();
    // σ+ = 2: delays on disk are in the caller's units, working units carry σ+ = 1.
    REQUIRE(run({"simulate", "--preset", "fig2a", "--sigma-plus", "2", "--sigma-minus", "20", "--pump", "400",
                 "--fixed-delay", "2.5", "--min", "-5", "--max", "5", "-o", prefix})
                .code == 0);
    const auto ig = cli::read_interferogram(prefix + ".json");
    CHECK(ig.metadata.frequency_scale == 2.0);
    CHECK(*ig.fixed_delay == doctest::Approx(5.0));
    CHECK(ig.delays.front() == doctest::Approx(-10.0));
    const auto r = run({"reconstruct", prefix + ".csv"});
    REQUIRE(r.code == 0);
    const auto rep = read_json(prefix + ".report.json");
    CHECK(rep["sigma_plus_hat"].get<double>() == doctest::Approx(2.0).epsilon(0.02));
    CHECK(rep["tau1_hat"].get<double>() == doctest::Approx(2.5).epsilon(0.02));
    CHECK(rep["verdict"] == "AntiCorrelated");
}

TEST_CASE("exit codes") {
    const auto dir = testutil::scratch_dir("cli_codes");
    auto r = run({"simulate", "--preset", "fig2a", "--sigma-plus", "0", "-o", (dir / "x").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("NonPositiveParameter: sigma_plus") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "x.csv"));

    CHECK(run({"simulate", "--preset", "fig2a", "--points", "64", "-o", (dir / "x").string()}).code == 2);
    CHECK(run({"simulate", "--preset", "fig2a", "--symmetry", "antisymmetric", "--engine", "closed_form", "-o",
               (dir / "x").string()})
              .code == 2);
    CHECK(run({"simulate", "--preset", "fig2a", "--symmetry", "antisymmetric", "--engine", "time_domain", "-o",
               (dir / "x").string()})
              .code == 3);
    CHECK(run({"simulate"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);

    // reconstruction errors
    const auto near = (dir / "near").string();
    REQUIRE(run({"simulate", "--preset", "fig2c", "--fixed-delay", "1", "-o", near}).code == 0);
    r = run({"reconstruct", near + ".csv"});
    CHECK(r.code == 4);
    CHECK(r.err.find("PacketsOverlap") != std::string::npos);

    // truncated data file
    const auto full = (dir / "full").string();
    REQUIRE(run({"simulate", "--preset", "fig2c", "-o", full}).code == 0);
    std::string csv = slurp(full + ".csv");
    std::ofstream(full + ".csv", std::ios::binary) << csv.substr(0, csv.size() / 2);
    r = run({"reconstruct", full + ".csv"});
    CHECK(r.code == 2);
    CHECK(r.err.find("ParseError") != std::string::npos);
    CHECK(run({"reconstruct", (dir / "absent.csv").string()}).code == 2);
}

TEST_CASE("config file parsing and overrides") {
    const auto dir = testutil::scratch_dir("cli_config");
    const auto cfg = (dir / "c.json").string();
    std::ofstream(cfg) << R"({"model": {"kind": "gaussian", "sigma_plus": 1, "sigma_minus": 2, "pump_frequency": 100},
                           "scan": {"axis": "tau2", "fixed_delay": 1.0, "min": -1, "max": 1, "points": 256},
                           "engine": "all", "output": {"path": ")" +
                               (dir / "cfg").string() + R"("}})";
    auto r = run({"simulate", cfg});
    REQUIRE(r.code == 0);
    for (const char* e : {"closed_form", "quadrature", "time_domain"}) {
        CHECK(fs::exists(dir / (std::string("cfg.") + e + ".csv")));
    }
    const auto a = cli::read_interferogram((dir / "cfg.closed_form.csv").string());
    const auto b = cli::read_interferogram((dir / "cfg.quadrature.csv").string());
    const auto c = cli::read_interferogram((dir / "cfg.time_domain.csv").string());
    double dev = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dev = std::max(dev, std::abs(a.rates[i] - b.rates[i]));
        dev = std::max(dev, std::abs(c.rates[i] - b.rates[i]));
    }
    CHECK(dev < 1e-9);

    const auto bad = (dir / "bad.json").string();
    std::ofstream(bad) << R"({"model": {"sigma_pluss": 1}})";
    r = run({"simulate", bad});
    CHECK(r.code == 2);
    CHECK(r.err.find("sigma_pluss") != std::string::npos);
    std::ofstream(bad) << "{not json";
    CHECK(run({"simulate", bad}).code == 2);

    const ScanConfig parsed = cli::parse_config(cli::json::parse(slurp(cfg)));
    const ScanConfig again = cli::parse_config(cli::config_to_json(parsed));
    CHECK(cli::config_to_json(again) == cli::config_to_json(parsed));
}

TEST_CASE("envelope families always write envelopes") {
    const auto dir = testutil::scratch_dir("cli_family");
    const auto r = run({"simulate", "--preset", "fig3a", "-o", (dir / "f").string()});
    REQUIRE(r.code == 0);
    std::size_t envelopes = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().string().find(".envelope.csv") != std::string::npos) ++envelopes;
    }
    CHECK(envelopes == 4);
}

TEST_CASE("audit command") {
    const auto dir = testutil::scratch_dir("cli_audit");
    const auto report = (dir / "a.json").string();
    auto r = run({"audit", "--preset", "fig2c", "--tau1", "-5,0,5", "--tau2", "0,2", "--report", report});
    CHECK(r.code == 0);
    CHECK(r.out.find("audit passed") != std::string::npos);
    const auto rep = read_json(report);
    CHECK(rep["pairs"].size() == 6);
    CHECK(rep["failures"].empty());
    CHECK(rep["homi"]["symmetric_at_zero"].get<double>() == doctest::Approx(0.0));

    r = run({"audit", "--preset", "fig2c", "--tau1", "0,1,2,3,4,5,6,7", "--tau2", "0,1,2,3,4,5,6"});
    CHECK(r.code == 2);
    CHECK(run({"audit", "--preset", "fig2c", "--tau1", "1,x"}).code == 2);
}
