#include "biphoton/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "biphoton/error.hpp"

namespace biphoton::cli {

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw Error(ErrorCode::InvalidConfig, where + " must be an object");
    for (const auto& [k, v] : obj.items()) {
        if (!allowed.count(k)) throw Error(ErrorCode::InvalidConfig, "unknown key '" + where + "." + k + "'");
    }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::InvalidConfig, where + "." + key + " has the wrong type");
    }
}

ScanAxis parse_axis(const std::string& s) {
    if (s == "tau2") return ScanAxis::Tau2AtFixedTau1;
    if (s == "tau1") return ScanAxis::Tau1AtFixedTau2;
    if (s == "grid") return ScanAxis::Grid2D;
    throw Error(ErrorCode::InvalidConfig, "unknown scan axis '" + s + "' (tau2|tau1|grid)");
}

ScanConfig gaussian_preset(double sigma_plus, double sigma_minus, double tau1, const std::string& name) {
    ScanConfig c;
    c.model.kind = ModelKind::GaussianProduct;
    c.model.sigma_plus = sigma_plus;
    c.model.sigma_minus = sigma_minus;
    c.model.pump_frequency = 200.0 * sigma_plus;
    c.scan = default_tau2_scan(sigma_plus, sigma_minus, c.model.pump_frequency, tau1);
    c.preset = name;
    c.output.path = name;
    return c;
}

std::string ratio_label(double r) {
    std::ostringstream os;
    os << "ratio_" << r;
    return os.str();
}

Preset family(const std::string& name, const std::string& description, const std::vector<double>& ratios) {
    Preset p{name, description, true, {}};
    ScanSpec widest;
    double widest_half = 0.0;
    for (double r : ratios) {
        const ScanSpec s = default_tau2_scan(1.0, 1.0 / r, 200.0, 5.0);
        if (s.max > widest_half) {
            widest_half = s.max;
            widest = s;
        }
    }
    for (double r : ratios) {
        ScanConfig c = gaussian_preset(1.0, 1.0 / r, 5.0, name);
        c.scan = widest;  // one common axis so the family overlays directly
        c.output.path = name + "." + ratio_label(r);
        p.members.push_back({ratio_label(r), c});
    }
    return p;
}

}  // namespace

ScanConfig parse_config(const json& doc) {
    reject_unknown(doc, {"model", "scan", "engine", "quadrature", "output", "preset"}, "config");
    ScanConfig c;
    if (doc.contains("preset")) {
        std::string name;
        read(doc, "preset", name, "config");
        c = find_preset(name).members.front().config;
    }
    if (doc.contains("model")) {
        const json& m = doc.at("model");
        reject_unknown(m, {"kind", "sigma_plus", "sigma_minus", "pump_frequency", "symmetry", "phase", "table"}, "model");
        std::string kind = c.model.kind == ModelKind::GaussianProduct ? "gaussian" : "tabulated";
        read(m, "kind", kind, "model");
        if (kind == "gaussian") c.model.kind = ModelKind::GaussianProduct;
        else if (kind == "tabulated") c.model.kind = ModelKind::TabulatedGrid;
        else throw Error(ErrorCode::InvalidConfig, "unknown model kind '" + kind + "'");
        read(m, "sigma_plus", c.model.sigma_plus, "model");
        read(m, "sigma_minus", c.model.sigma_minus, "model");
        read(m, "pump_frequency", c.model.pump_frequency, "model");
        read(m, "table", c.model.table_path, "model");
        std::string sym = to_string(c.model.symmetry);
        double phase = c.model.symmetry.phase;
        read(m, "symmetry", sym, "model");
        read(m, "phase", phase, "model");
        c.model.symmetry = parse_symmetry(sym, phase);
    }
    if (doc.contains("scan")) {
        const json& s = doc.at("scan");
        reject_unknown(s, {"axis", "fixed_delay", "min", "max", "points", "min2", "max2", "points2"}, "scan");
        std::string axis = "tau2";
        if (c.scan.axis == ScanAxis::Tau1AtFixedTau2) axis = "tau1";
        if (c.scan.axis == ScanAxis::Grid2D) axis = "grid";
        read(s, "axis", axis, "scan");
        c.scan.axis = parse_axis(axis);
        read(s, "fixed_delay", c.scan.fixed_delay, "scan");
        read(s, "min", c.scan.min, "scan");
        read(s, "max", c.scan.max, "scan");
        read(s, "points", c.scan.points, "scan");
        read(s, "min2", c.scan.min2, "scan");
        read(s, "max2", c.scan.max2, "scan");
        read(s, "points2", c.scan.points2, "scan");
    }
    if (doc.contains("engine")) {
        std::string e;
        read(doc, "engine", e, "config");
        c.engine = parse_engine(e);
    }
    if (doc.contains("quadrature")) {
        const json& q = doc.at("quadrature");
        reject_unknown(q, {"nodes_per_panel", "max_phase_per_panel", "truncation_sigmas", "min_panels", "panels_plus",
                           "panels_minus", "estimate_error"},
                       "quadrature");
        read(q, "nodes_per_panel", c.quadrature.nodes_per_panel, "quadrature");
        read(q, "max_phase_per_panel", c.quadrature.max_phase_per_panel, "quadrature");
        read(q, "truncation_sigmas", c.quadrature.truncation_sigmas, "quadrature");
        read(q, "min_panels", c.quadrature.min_panels, "quadrature");
        read(q, "estimate_error", c.quadrature.estimate_error, "quadrature");
        if (q.contains("panels_plus")) {
            std::size_t v = 0;
            read(q, "panels_plus", v, "quadrature");
            c.quadrature.panels_plus = v;
        }
        if (q.contains("panels_minus")) {
            std::size_t v = 0;
            read(q, "panels_minus", v, "quadrature");
            c.quadrature.panels_minus = v;
        }
    }
    if (doc.contains("output")) {
        const json& o = doc.at("output");
        reject_unknown(o, {"path", "emit_plot_data"}, "output");
        read(o, "path", c.output.path, "output");
        read(o, "emit_plot_data", c.output.emit_plot_data, "output");
    }
    return c;
}

ScanConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    return parse_config(doc);
}

json config_to_json(const ScanConfig& c) {
    json j;
    j["model"] = {
        {"kind", c.model.kind == ModelKind::GaussianProduct ? "gaussian" : "tabulated"},
        {"sigma_plus", c.model.sigma_plus},
        {"sigma_minus", c.model.sigma_minus},
        {"pump_frequency", c.model.pump_frequency},
        {"symmetry", to_string(c.model.symmetry)},
        {"phase", c.model.symmetry.phase},
    };
    if (c.model.kind == ModelKind::TabulatedGrid) j["model"]["table"] = c.model.table_path;
    j["scan"] = {
        {"axis", to_string(c.scan.axis)},
        {"fixed_delay", c.scan.fixed_delay},
        {"min", c.scan.min},
        {"max", c.scan.max},
        {"points", c.scan.points},
    };
    if (c.scan.axis == ScanAxis::Grid2D) {
        j["scan"]["min2"] = c.scan.min2;
        j["scan"]["max2"] = c.scan.max2;
        j["scan"]["points2"] = c.scan.points2;
    }
    j["engine"] = to_string(c.engine);
    j["quadrature"] = {
        {"nodes_per_panel", c.quadrature.nodes_per_panel},
        {"max_phase_per_panel", c.quadrature.max_phase_per_panel},
        {"truncation_sigmas", c.quadrature.truncation_sigmas},
        {"min_panels", c.quadrature.min_panels},
        {"estimate_error", c.quadrature.estimate_error},
    };
    if (c.quadrature.panels_plus) j["quadrature"]["panels_plus"] = *c.quadrature.panels_plus;
    if (c.quadrature.panels_minus) j["quadrature"]["panels_minus"] = *c.quadrature.panels_minus;
    j["output"] = {{"path", c.output.path}, {"emit_plot_data", c.output.emit_plot_data}};
    if (!c.preset.empty()) j["preset"] = c.preset;
    return j;
}

const std::vector<Preset>& presets() {
    static const std::vector<Preset> all = [] {
        std::vector<Preset> v;
        v.push_back({"fig2a", "frequency anti-correlated, sigma+/sigma- = 0.1, sigma+ tau1 = 5", false,
                     {{"", gaussian_preset(1.0, 10.0, 5.0, "fig2a")}}});
        v.push_back({"fig2b", "frequency correlated, sigma+/sigma- = 10, sigma+ tau1 = 5", false,
                     {{"", gaussian_preset(1.0, 0.1, 5.0, "fig2b")}}});
        v.push_back({"fig2c", "frequency uncorrelated, sigma+/sigma- = 1, sigma+ tau1 = 5", false,
                     {{"", gaussian_preset(1.0, 1.0, 5.0, "fig2c")}}});
        v.push_back(family("fig3a", "anti-correlated envelope family, ratios 0.1, 0.2, 0.5 with uncorrelated contrast",
                           {0.1, 0.2, 0.5, 1.0}));
        v.push_back(family("fig3b", "correlated envelope family, ratios 2, 5, 10 with uncorrelated contrast",
                           {2.0, 5.0, 10.0, 1.0}));
        return v;
    }();
    return all;
}

const Preset& find_preset(const std::string& name) {
    const auto& all = presets();
    const auto it = std::find_if(all.begin(), all.end(), [&](const Preset& p) { return p.name == name; });
    if (it == all.end()) throw Error(ErrorCode::InvalidConfig, "unknown preset '" + name + "'");
    return *it;
}

}  // namespace biphoton::cli
