#include "biphoton/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "biphoton/cli/config.hpp"
#include "biphoton/cli/interferogram_io.hpp"
#include "biphoton/freq_engine.hpp"
#include "biphoton/scan.hpp"
#include "biphoton/spectroscopy.hpp"
#include "biphoton/time_engine.hpp"

namespace biphoton::cli {

int exit_code(ErrorCategory c) noexcept {
    switch (c) {
        case ErrorCategory::Config: return 2;
        case ErrorCategory::Engine: return 3;
        case ErrorCategory::Reconstruction: return 4;
    }
    return 1;
}

namespace {

// Flags shared by simulate and audit; every one overrides the config/preset value when given.
struct Overrides {
    std::string config_path;
    std::string preset;
    std::optional<std::string> engine;
    std::optional<double> sigma_plus, sigma_minus, pump, phase, fixed_delay, min, max;
    std::optional<std::size_t> points;
    std::optional<std::string> symmetry, table, axis, out;
    bool emit_plot_data{false};

    void attach(CLI::App* app) {
        app->add_option("config", config_path, "JSON config file");
        app->add_option("--preset", preset, "fig2a|fig2b|fig2c|fig3a|fig3b");
        app->add_option("--engine", engine, "auto|quadrature|closed_form|time_domain|all");
        app->add_option("--sigma-plus", sigma_plus);
        app->add_option("--sigma-minus", sigma_minus);
        app->add_option("--pump", pump, "pump frequency");
        app->add_option("--symmetry", symmetry, "symmetric|antisymmetric|anyonic");
        app->add_option("--phase", phase, "anyonic exchange phase");
        app->add_option("--table", table, "tabulated JSA CSV (switches the model to tabulated)");
        app->add_option("--axis", axis, "tau2|tau1|grid");
        app->add_option("--fixed-delay", fixed_delay, "delay held fixed during the scan");
        app->add_option("--min", min);
        app->add_option("--max", max);
        app->add_option("--points", points);
        app->add_option("-o,--out", out, "output prefix");
        app->add_flag("--emit-plot-data", emit_plot_data, "also write a downsampled envelope CSV");
    }

    bool has_source() const { return !config_path.empty() || !preset.empty(); }

    std::vector<PresetMember> members() const {
        std::vector<PresetMember> base;
        if (!preset.empty() && config_path.empty()) {
            base = find_preset(preset).members;
        } else {
            ScanConfig c;
            if (!config_path.empty()) {
                c = load_config(config_path);
                if (!preset.empty()) {
                    throw Error(ErrorCode::InvalidConfig, "give either a config file or --preset, not both");
                }
            }
            base.push_back({"", c});
        }
        for (auto& m : base) apply(m.config);
        return base;
    }

    void apply(ScanConfig& c) const {
        if (engine) c.engine = parse_engine(*engine);
        if (table) {
            c.model.kind = ModelKind::TabulatedGrid;
            c.model.table_path = *table;
        }
        if (sigma_plus) c.model.sigma_plus = *sigma_plus;
        if (sigma_minus) c.model.sigma_minus = *sigma_minus;
        if (pump) c.model.pump_frequency = *pump;
        if (symmetry || phase) {
            c.model.symmetry = parse_symmetry(symmetry.value_or(to_string(c.model.symmetry)),
                                              phase.value_or(c.model.symmetry.phase));
        }
        if (axis) {
            if (*axis == "tau2") c.scan.axis = ScanAxis::Tau2AtFixedTau1;
            else if (*axis == "tau1") c.scan.axis = ScanAxis::Tau1AtFixedTau2;
            else if (*axis == "grid") c.scan.axis = ScanAxis::Grid2D;
            else throw Error(ErrorCode::InvalidConfig, "unknown scan axis '" + *axis + "'");
        }
        if (fixed_delay) c.scan.fixed_delay = *fixed_delay;
        if (min) c.scan.min = *min;
        if (max) c.scan.max = *max;
        if (points) c.scan.points = *points;
        if (emit_plot_data) c.output.emit_plot_data = true;
    }
};

std::string member_prefix(const ScanConfig& c, const std::string& label, const std::optional<std::string>& out) {
    std::string p;
    if (out) p = label.empty() ? *out : *out + "." + label;
    else if (!c.output.path.empty()) p = c.output.path;
    else p = "interferogram";
    return p;
}

int cmd_simulate(const Overrides& o, std::ostream& out) {
    if (!o.has_source()) throw Error(ErrorCode::InvalidConfig, "simulate needs a config file or --preset");
    const auto members = o.members();
    const bool family = !o.preset.empty() && o.config_path.empty() && find_preset(o.preset).family;
    for (const auto& m : members) validate(m.config);  // fail before writing anything

    for (const auto& m : members) {
        const ScanConfig& c = m.config;
        const auto engines = resolve_engines(c);
        const std::string base = member_prefix(c, m.label, o.out);
        for (Engine e : engines) {
            const std::string prefix = engines.size() > 1 ? base + "." + to_string(e) : base;
            const Interferogram ig = scan(c, e);
            write_interferogram(ig, prefix, config_to_json(c), c.preset);
            out << "wrote " << prefix << ".csv (" << ig.size() << " rows, " << to_string(e) << ")\n";
            if (family || c.output.emit_plot_data) {
                if (c.scan.axis != ScanAxis::Tau2AtFixedTau1) {
                    throw Error(ErrorCode::InvalidConfig, "envelope export needs a tau2 scan");
                }
                write_envelopes(extract_envelopes(ig), ig.metadata.frequency_scale, prefix + ".envelope.csv");
                out << "wrote " << prefix << ".envelope.csv\n";
            }
        }
    }
    return 0;
}

void write_density_csv(const SpectralDensity& d, double scale, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
    std::fputs("omega,density\n", f);
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        std::fprintf(f, "%.17g,%.17g\n", d.detunings[i] * scale, d.values[i]);
    }
    std::fclose(f);
}

void write_jsi_csv(const JointSpectralIntensity& j, double scale, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
    std::fputs("omega_plus,omega_minus,intensity\n", f);
    for (std::size_t r = 0; r < j.plus.size; ++r) {
        for (std::size_t c = 0; c < j.minus.size; ++c) {
            std::fprintf(f, "%.17g,%.17g,%.17g\n", j.plus[r] * scale, j.minus[c] * scale,
                         j.values[r * j.minus.size + c]);
        }
    }
    std::fclose(f);
}

int cmd_reconstruct(const std::string& input, const std::string& report_path, const std::string& dump_prefix,
                    std::ostream& out) {
    const Interferogram ig = read_interferogram(input);
    const ReconstructionResult r = reconstruct(ig);
    const CorrelationClass cls = classify_correlation(r);
    const double s = ig.metadata.frequency_scale;

    json rep = {
        {"input", strip_extension(input) + ".csv"},
        {"verdict", to_string(cls.verdict)},
        {"ratio_hat", cls.ratio_hat},
        {"sigma_plus_hat", r.sigma_plus_hat * s},
        {"sigma_minus_hat", r.sigma_minus_hat * s},
        {"tau1_hat", r.tau1_hat / s},
        {"time_scales",
         {{"envelope_width", r.time_scales.envelope_width / s},
          {"dip_width", r.time_scales.dip_width / s},
          {"separation", r.time_scales.separation() / s}}},
        {"central_visibility", r.central_visibility},
        {"side_visibility", r.side_visibility},
        {"resynthesis_residual", r.resynthesis_residual},
        {"units", {{"frequency_scale", s}}},
    };
    const std::string path = report_path.empty() ? strip_extension(input) + ".report.json" : report_path;
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
    f << rep.dump(2) << '\n';

    if (!dump_prefix.empty()) {
        write_density_csv(r.f_plus, s, dump_prefix + ".f_plus.csv");
        write_density_csv(r.f_minus, s, dump_prefix + ".f_minus.csv");
        write_jsi_csv(r.jsi, s, dump_prefix + ".jsi.csv");
    }

    char line[256];
    std::snprintf(line, sizeof line, "verdict %s  ratio_hat %.6g  sigma_plus %.6g  sigma_minus %.6g  tau1 %.6g\n",
                  to_string(cls.verdict).c_str(), cls.ratio_hat, r.sigma_plus_hat * s, r.sigma_minus_hat * s,
                  r.tau1_hat / s);
    out << line << "report " << path << '\n';
    return 0;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidConfig, "bad number '" + item + "' in delay list");
        }
    }
    if (v.empty()) throw Error(ErrorCode::InvalidConfig, "empty delay list");
    return v;
}

// Refines a sign change of f on [a, b] by a few regula falsi steps.
template <class F>
double refine_crossing(F&& f, double a, double fa, double b, double fb) {
    for (int it = 0; it < 6; ++it) {
        const double m = a - fa * (b - a) / (fb - fa);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    return a - fa * (b - a) / (fb - fa);
}

int cmd_audit(const Overrides& o, const std::string& tau1_list, const std::string& tau2_list,
              const std::string& report_path, std::ostream& out) {
    Overrides src = o;
    if (!src.has_source()) src.preset = "fig2c";
    const ScanConfig c = src.members().front().config;
    const ResolvedModel rm = resolve_model(c.model);
    const JointSpectralAmplitude& jsa = rm.jsa;
    const double s = rm.frequency_scale;

    const std::vector<double> t1 = parse_list(tau1_list);
    const std::vector<double> t2 = parse_list(tau2_list);
    if (t1.size() * t2.size() > kMaxAuditPairs) {
        throw Error(ErrorCode::InvalidConfig, "audit is limited to " + std::to_string(kMaxAuditPairs) + " delay pairs");
    }

    const bool symmetric = jsa.is_symmetric();
    const bool closed = symmetric && jsa.kind() == ModelKind::GaussianProduct;
    const GaussianParams gp{jsa.sigma_plus(), jsa.sigma_minus(), jsa.pump_frequency()};
    std::optional<TemporalModel> tm;
    if (symmetric) tm.emplace(jsa);

    struct Row {
        DelayPair d;
        double quad, closed, time;
        double group_err, residual;
    };
    std::vector<DelayPair> pairs;
    for (double a : t1)
        for (double b : t2) pairs.push_back({a * s, b * s});

    std::vector<Row> rows(pairs.size());
    double dev_td = 0.0, dev_cf = 0.0, max_group = 0.0, max_resid = 0.0;
    json jrows = json::array();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        Row& r = rows[k];
        r.d = pairs[k];
        r.quad = normalized_rate_quadrature(jsa, r.d, c.quadrature).value;
        r.closed = closed ? rate_gaussian_closed(gp, r.d) : std::nan("");
        r.time = tm ? rate_from_time_domain(*tm, r.d) : std::nan("");
        r.group_err = r.residual = std::nan("");
        json jr = {{"tau1", r.d.tau1 / s}, {"tau2", r.d.tau2 / s}, {"quadrature", r.quad}};
        if (closed) {
            dev_cf = std::max(dev_cf, std::abs(r.closed - r.quad));
            jr["closed_form"] = r.closed;
        }
        if (tm) {
            dev_td = std::max(dev_td, std::abs(r.time - r.quad));
            jr["time_domain"] = r.time;
            const CrossTermAudit a = audit_cross_terms(jsa, r.d);
            r.group_err = 0.0;
            json groups = json::object();
            for (const auto& g : a.groups) {
                r.group_err = std::max(r.group_err, std::abs(g.sum - g.expected));
                groups[g.name] = {{"sum", g.sum}, {"expected", g.expected}};
            }
            r.residual = std::abs(a.residual);
            max_group = std::max(max_group, r.group_err);
            max_resid = std::max(max_resid, r.residual);
            jr["cross_terms"] = {{"baseline_group", a.baseline_group},
                                 {"groups", groups},
                                 {"residual", a.residual},
                                 {"total", a.total}};
        }
        jrows.push_back(jr);
    }

    // HOMI at zero delay: dip to 0 for the symmetric model, peak at 2 for the antisymmetric one.
    const JointSpectralAmplitude sym = jsa.with_symmetry(Symmetry{Symmetry::Kind::Symmetric, 0.0});
    const JointSpectralAmplitude anti = jsa.with_symmetry(Symmetry{Symmetry::Kind::Antisymmetric, 0.0});
    const double homi_sym = homi_rate(sym, 0.0, c.quadrature).value;
    const double homi_anti = homi_rate(anti, 0.0, c.quadrature).value;

    // NOONI fringe period from zero crossings of R − 1 over a few carrier periods.
    const double wp = jsa.pump_frequency();
    const double expected_period = 2.0 * std::numbers::pi / wp;
    const auto f = [&](double tau) { return nooni_rate(sym, tau, c.quadrature).value - 1.0; };
    const int periods = 6;
    const int per_period = 32;
    std::vector<double> crossings;
    double prev_t = 0.25 * expected_period / per_period;
    double prev_f = f(prev_t);
    for (int i = 1; i <= periods * per_period; ++i) {
        const double t = prev_t + expected_period / per_period;
        const double ft = f(t);
        if ((ft < 0) != (prev_f < 0)) crossings.push_back(refine_crossing(f, prev_t, prev_f, t, ft));
        prev_t = t;
        prev_f = ft;
    }
    double period = std::nan("");
    if (crossings.size() >= 3) {
        period = 2.0 * (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
    }

    json rep = {
        {"model", config_to_json(c)["model"]},
        {"pairs", jrows},
        {"max_deviation",
         {{"time_domain_vs_quadrature", tm ? json(dev_td) : json(nullptr)},
          {"closed_form_vs_quadrature", closed ? json(dev_cf) : json(nullptr)}}},
        {"cross_term_audit",
         tm ? json{{"max_group_error", max_group}, {"max_residual", max_resid}} : json(nullptr)},
        {"homi", {{"symmetric_at_zero", homi_sym}, {"antisymmetric_at_zero", homi_anti}}},
        {"nooni",
         {{"period", std::isnan(period) ? json(nullptr) : json(period / s)},
          {"expected_period", expected_period / s},
          {"crossings", crossings.size()}}},
    };

    std::vector<std::string> failures;
    char buf[256];
    if (tm && dev_td > kDualDomainTolerance) {
        std::snprintf(buf, sizeof buf, "time_domain vs quadrature deviation %.3g > %.0e", dev_td, kDualDomainTolerance);
        failures.emplace_back(buf);
    }
    if (closed && dev_cf > kDualDomainTolerance) {
        std::snprintf(buf, sizeof buf, "closed_form vs quadrature deviation %.3g > %.0e", dev_cf, kDualDomainTolerance);
        failures.emplace_back(buf);
    }
    if (tm && max_group > kAuditTermTolerance) {
        std::snprintf(buf, sizeof buf, "cross-term group error %.3g > %.0e", max_group, kAuditTermTolerance);
        failures.emplace_back(buf);
    }
    if (tm && max_resid > kAuditResidualTolerance) {
        std::snprintf(buf, sizeof buf, "cross-term residual %.3g > %.0e", max_resid, kAuditResidualTolerance);
        failures.emplace_back(buf);
    }
    if (std::abs(homi_sym) > kHomDipTolerance) {
        std::snprintf(buf, sizeof buf, "HOMI symmetric dip %.3g not at 0", homi_sym);
        failures.emplace_back(buf);
    }
    if (std::abs(homi_anti - 2.0) > kHomPeakTolerance) {
        std::snprintf(buf, sizeof buf, "HOMI antisymmetric peak %.9g not at 2", homi_anti);
        failures.emplace_back(buf);
    }
    if (std::isnan(period) || std::abs(period / expected_period - 1.0) > kNoonPeriodTolerance) {
        std::snprintf(buf, sizeof buf, "NOONI period %.9g vs %.9g", period / s, expected_period / s);
        failures.emplace_back(buf);
    }
    rep["failures"] = failures;

    if (!report_path.empty()) {
        std::ofstream fr(report_path);
        if (!fr) throw Error(ErrorCode::IoError, "cannot write " + report_path);
        fr << rep.dump(2) << '\n';
    }

    const auto fmt = [](bool have, double v) {
        if (!have) return std::string("n/a");
        char t[32];
        std::snprintf(t, sizeof t, "%.3g", v);
        return std::string(t);
    };
    out << "pairs " << pairs.size() << "  max |td-quad| " << fmt(tm.has_value(), dev_td) << "  max |cf-quad| "
        << fmt(closed, dev_cf) << '\n';
    if (tm) {
        std::snprintf(buf, sizeof buf, "cross terms: max group error %.3g  max residual %.3g\n", max_group, max_resid);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "HOMI(0) symmetric %.3g antisymmetric %.12g  NOONI period %.9g (expected %.9g)\n",
                  homi_sym, homi_anti, period / s, expected_period / s);
    out << buf;

    if (!failures.empty()) {
        std::string msg = failures.front();
        for (std::size_t i = 1; i < failures.size(); ++i) msg += "; " + failures[i];
        throw Error(ErrorCode::AuditFailed, msg);
    }
    out << "audit passed\n";
    return 0;
}

int cmd_presets_list(std::ostream& out) {
    for (const auto& p : presets()) out << p.name << "  " << p.description << '\n';
    return 0;
}

int cmd_presets_show(const std::string& name, std::ostream& out) {
    const Preset& p = find_preset(name);
    json j = json::array();
    for (const auto& m : p.members) j.push_back(config_to_json(m.config));
    out << j.dump(2) << '\n';
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"biphoton: two-photon interferometry simulator and spectroscopy"};
    app.require_subcommand(1);

    Overrides sim;
    auto* simulate = app.add_subcommand("simulate", "compute an interferogram and write CSV + JSON sidecar");
    sim.attach(simulate);

    std::string input, report, dump_prefix;
    auto* recon = app.add_subcommand("reconstruct", "recover spectra and correlation class from an interferogram");
    recon->add_option("input", input, "interferogram CSV or JSON sidecar")->required();
    recon->add_option("--report", report, "report path (default <input>.report.json)");
    recon->add_option("--dump-prefix", dump_prefix, "write recovered F+, F-, JSI as CSV");

    Overrides aud;
    std::string tau1_list = "-5,-2.5,0,2.5,5";
    std::string tau2_list = "-5,-2,0,2,5";
    std::string audit_report;
    auto* audit = app.add_subcommand("audit", "cross-check the engines on a small delay grid");
    aud.attach(audit);
    audit->add_option("--tau1", tau1_list, "comma-separated tau1 values");
    audit->add_option("--tau2", tau2_list, "comma-separated tau2 values");
    audit->add_option("--report", audit_report, "write the JSON audit report here");

    auto* pre = app.add_subcommand("presets", "list or show built-in presets");
    pre->require_subcommand(1);
    auto* list = pre->add_subcommand("list", "list preset names");
    std::string show_name;
    auto* show = pre->add_subcommand("show", "print a preset's resolved configs");
    show->add_option("name", show_name)->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, e2;
        const int code = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim, out);
        if (recon->parsed()) return cmd_reconstruct(input, report, dump_prefix, out);
        if (audit->parsed()) return cmd_audit(aud, tau1_list, tau2_list, audit_report, out);
        if (list->parsed()) return cmd_presets_list(out);
        if (show->parsed()) return cmd_presets_show(show_name, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.category());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace biphoton::cli
