#include "biphoton/cli/interferogram_io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>

#include "biphoton/error.hpp"

namespace biphoton::cli {

using json = nlohmann::json;

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_write(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "w"));
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
    return f;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ScanAxis axis_from(const std::string& s) {
    if (s == "tau2") return ScanAxis::Tau2AtFixedTau1;
    if (s == "tau1") return ScanAxis::Tau1AtFixedTau2;
    if (s == "grid") return ScanAxis::Grid2D;
    throw Error(ErrorCode::ParseError, "sidecar: unknown scan axis '" + s + "'");
}

Engine engine_from(const std::string& s) {
    if (s == "quadrature") return Engine::Quadrature;
    if (s == "closed_form") return Engine::ClosedForm;
    if (s == "time_domain") return Engine::TimeDomain;
    throw Error(ErrorCode::ParseError, "sidecar: unknown engine '" + s + "'");
}

json grid_json(const UniformGrid& g, double scale) {
    return {{"min", g.front() / scale}, {"max", g.back() / scale}, {"points", g.size}};
}

UniformGrid grid_from(const json& j, double scale) {
    return UniformGrid::from_range(j.at("min").get<double>() * scale, j.at("max").get<double>() * scale,
                                   j.at("points").get<std::size_t>());
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * (1.0 + std::abs(b)); }

}  // namespace

std::string strip_extension(const std::string& path) {
    for (const char* ext : {".csv", ".json"}) {
        const std::string e(ext);
        if (path.size() > e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0) {
            return path.substr(0, path.size() - e.size());
        }
    }
    return path;
}

void write_interferogram(const Interferogram& ig, const std::string& prefix, const json& config_echo,
                         const std::string& preset) {
    const double s = ig.metadata.frequency_scale;
    {
        FilePtr f = open_write(prefix + ".csv");
        std::fputs("tau1,tau2,rate\n", f.get());
        for (std::size_t i = 0; i < ig.size(); ++i) {
            const DelayPair d = ig.pair_at(i);
            std::fprintf(f.get(), "%.17g,%.17g,%.17g\n", d.tau1 / s, d.tau2 / s, ig.rates[i]);
        }
        if (std::ferror(f.get())) throw Error(ErrorCode::IoError, "write failed for " + prefix + ".csv");
    }

    const auto& md = ig.metadata;
    json scan = {{"axis", to_string(ig.scan_axis)}, {"delays", grid_json(ig.delays, s)}};
    if (ig.fixed_delay) scan["fixed_delay"] = *ig.fixed_delay / s;
    if (ig.delays2) scan["delays2"] = grid_json(*ig.delays2, s);

    std::string data_file = prefix + ".csv";
    if (const auto slash = data_file.find_last_of('/'); slash != std::string::npos) data_file.erase(0, slash + 1);

    json side = {
        {"schema", kSidecarSchema},
        {"engine", to_string(ig.engine)},
        {"scan", scan},
        {"model",
         {{"kind", md.model_kind},
          {"symmetry", md.symmetry},
          {"phase", md.symmetry_phase},
          {"sigma_plus", md.sigma_plus * s},
          {"sigma_minus", md.sigma_minus * s},
          {"pump_frequency", md.pump_frequency * s}}},
        {"units",
         {{"frequency_scale", s},
          {"delay", "caller units; multiply by frequency_scale for working units (sigma_plus = 1)"}}},
        {"config", config_echo},
        {"data_file", data_file},
        {"rows", ig.size()},
        {"metadata",
         {{"timestamp", utc_timestamp()},
          {"formula", md.formula},
          {"delay_spacing", md.delay_spacing / s},
          {"working",
           {{"sigma_plus", md.sigma_plus}, {"sigma_minus", md.sigma_minus}, {"pump_frequency", md.pump_frequency}}}}},
    };
    side["preset"] = preset.empty() ? json(nullptr) : json(preset);

    std::ofstream out(prefix + ".json");
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + prefix + ".json");
    out << side.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + prefix + ".json");
}

Interferogram read_interferogram(const std::string& path) {
    const std::string prefix = strip_extension(path);
    json side;
    {
        std::ifstream in(prefix + ".json");
        if (!in) throw Error(ErrorCode::IoError, "cannot open " + prefix + ".json");
        try {
            side = json::parse(in);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::ParseError, prefix + ".json: " + e.what());
        }
    }

    Interferogram ig;
    double s = 1.0;
    std::size_t rows = 0;
    try {
        if (side.at("schema").get<int>() != kSidecarSchema) {
            throw Error(ErrorCode::ParseError, "unsupported sidecar schema " + side.at("schema").dump());
        }
        s = side.at("units").at("frequency_scale").get<double>();
        if (!(s > 0.0)) throw Error(ErrorCode::ParseError, "sidecar: frequency_scale must be positive");
        const json& scan = side.at("scan");
        ig.scan_axis = axis_from(scan.at("axis").get<std::string>());
        ig.engine = engine_from(side.at("engine").get<std::string>());
        ig.delays = grid_from(scan.at("delays"), s);
        if (ig.scan_axis == ScanAxis::Grid2D) {
            ig.delays2 = grid_from(scan.at("delays2"), s);
        } else {
            ig.fixed_delay = scan.at("fixed_delay").get<double>() * s;
        }
        const json& w = side.at("metadata").at("working");
        auto& md = ig.metadata;
        md.model_kind = side.at("model").at("kind").get<std::string>();
        md.symmetry = side.at("model").at("symmetry").get<std::string>();
        md.symmetry_phase = side.at("model").at("phase").get<double>();
        md.sigma_plus = w.at("sigma_plus").get<double>();
        md.sigma_minus = w.at("sigma_minus").get<double>();
        md.pump_frequency = w.at("pump_frequency").get<double>();
        md.frequency_scale = s;
        md.delay_spacing = ig.delays.step;
        md.formula = side.at("metadata").at("formula").get<std::string>();
        rows = side.at("rows").get<std::size_t>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, prefix + ".json: " + e.what());
    }

    const std::size_t expected = ig.delays.size * (ig.delays2 ? ig.delays2->size : 1);
    if (rows != expected) throw Error(ErrorCode::ParseError, "sidecar row count disagrees with scan grid");

    std::ifstream in(prefix + ".csv");
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + prefix + ".csv");
    std::string line;
    if (!std::getline(in, line) || line != "tau1,tau2,rate") {
        throw Error(ErrorCode::ParseError, prefix + ".csv: expected header tau1,tau2,rate");
    }
    ig.rates.reserve(expected);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        double t1 = 0, t2 = 0, r = 0;
        char tail = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf%c", &t1, &t2, &r, &tail) != 3) {
            throw Error(ErrorCode::ParseError, prefix + ".csv:" + std::to_string(lineno) + ": malformed row");
        }
        const std::size_t i = ig.rates.size();
        if (i >= expected) throw Error(ErrorCode::ParseError, prefix + ".csv: more rows than the sidecar declares");
        const DelayPair d = ig.pair_at(i);
        const double tol = 1e-9 * std::max(1.0, ig.delays.step / s);
        if (!close(t1, d.tau1 / s, tol) || !close(t2, d.tau2 / s, tol)) {
            throw Error(ErrorCode::ParseError, prefix + ".csv:" + std::to_string(lineno) + ": delay off the declared grid");
        }
        ig.rates.push_back(r);
    }
    if (ig.rates.size() != expected) {
        throw Error(ErrorCode::ParseError, prefix + ".csv: truncated, " + std::to_string(ig.rates.size()) + " of " +
                                               std::to_string(expected) + " rows");
    }
    return ig;
}

void write_envelopes(const EnvelopePair& env, double frequency_scale, const std::string& path, std::size_t max_rows) {
    FilePtr f = open_write(path);
    std::fputs("tau,upper,lower\n", f.get());
    const std::size_t n = env.upper.size();
    const std::size_t stride = std::max<std::size_t>(1, (n + max_rows - 1) / max_rows);
    for (std::size_t i = 0; i < n; i += stride) {
        std::fprintf(f.get(), "%.17g,%.17g,%.17g\n", env.delays[i] / frequency_scale, env.upper[i], env.lower[i]);
    }
    if (std::ferror(f.get())) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace biphoton::cli
