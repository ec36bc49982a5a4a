#include "biphoton/scan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

#include "biphoton/error.hpp"
#include "biphoton/numerics.hpp"
#include "biphoton/time_engine.hpp"

namespace biphoton {

namespace {

double nyquist_spacing(double pump, double sigma_plus) {
    return std::numbers::pi / (pump + 8.0 * sigma_plus) / 2.0;
}

void check_axis(double lo, double hi, std::size_t points, const char* name) {
    if (points < 2) throw Error(ErrorCode::InvalidConfig, std::string(name) + ": points must be >= 2");
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw Error(ErrorCode::InvalidConfig, std::string(name) + ": min must be < max");
    }
}

template <class F>
std::vector<double> parallel_map(std::size_t n, F&& f) {
    std::vector<double> out(n);
    const std::size_t workers = worker_count(n);
    std::vector<std::exception_ptr> errors(workers);
    auto run = [&](std::size_t w) {
        const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
        try {
            for (std::size_t i = lo; i < hi; ++i) out[i] = f(i);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers <= 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

}  // namespace

std::string to_string(EngineChoice e) {
    switch (e) {
        case EngineChoice::Auto: return "auto";
        case EngineChoice::Quadrature: return "quadrature";
        case EngineChoice::ClosedForm: return "closed_form";
        case EngineChoice::TimeDomain: return "time_domain";
        case EngineChoice::All: return "all";
    }
    return "auto";
}

EngineChoice parse_engine(const std::string& s) {
    if (s == "auto") return EngineChoice::Auto;
    if (s == "quadrature") return EngineChoice::Quadrature;
    if (s == "closed_form" || s == "closed") return EngineChoice::ClosedForm;
    if (s == "time_domain" || s == "time") return EngineChoice::TimeDomain;
    if (s == "all") return EngineChoice::All;
    throw Error(ErrorCode::InvalidConfig, "unknown engine '" + s + "'");
}

std::size_t worker_count(std::size_t work_items) {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("BIPHOTON_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) n = static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::min(n, work_items));
}

ResolvedModel resolve_model(const ModelConfig& m) {
    if (m.kind == ModelKind::GaussianProduct) {
        if (!(m.sigma_plus > 0.0)) throw Error(ErrorCode::NonPositiveParameter, "sigma_plus");
        const double s = m.sigma_plus;
        return {make_gaussian_jsa(1.0, m.sigma_minus / s, m.pump_frequency / s, m.symmetry), s};
    }
    if (m.table_path.empty()) throw Error(ErrorCode::InvalidConfig, "tabulated model needs a table path");
    if (!(m.pump_frequency > 0.0)) throw Error(ErrorCode::NonPositiveParameter, "pump_frequency");
    const ComplexTable raw = load_tabulated_csv(m.table_path, m.pump_frequency);
    const JointSpectralAmplitude probe = make_tabulated_jsa(raw, m.pump_frequency, m.symmetry);
    const double s = probe.sigma_plus();
    ComplexTable scaled = raw;
    scaled.signal = UniformGrid(raw.signal.start / s, raw.signal.step / s, raw.signal.size);
    scaled.idler = UniformGrid(raw.idler.start / s, raw.idler.step / s, raw.idler.size);
    return {make_tabulated_jsa(scaled, m.pump_frequency / s, m.symmetry), s};
}

void validate(const ScanConfig& c) {
    const ResolvedModel rm = resolve_model(c.model);
    const auto& sc = c.scan;
    check_axis(sc.min, sc.max, sc.points, "scan");
    if (sc.axis == ScanAxis::Grid2D) check_axis(sc.min2, sc.max2, sc.points2, "scan (second axis)");
    if (!std::isfinite(sc.fixed_delay)) throw Error(ErrorCode::InvalidConfig, "fixed_delay must be finite");
    const bool gaussian_symmetric = rm.jsa.kind() == ModelKind::GaussianProduct && rm.jsa.is_symmetric();
    if (c.engine == EngineChoice::ClosedForm && !gaussian_symmetric) {
        throw Error(ErrorCode::InvalidConfig, "closed_form engine requires a symmetric Gaussian model");
    }
    if (c.engine == EngineChoice::TimeDomain && !rm.jsa.is_symmetric()) {
        throw Error(ErrorCode::UnsupportedModel, "time_domain engine requires a symmetric model");
    }
    const double limit = nyquist_spacing(rm.jsa.pump_frequency(), rm.jsa.sigma_plus());
    const auto check_spacing = [&](double lo, double hi, std::size_t n) {
        const double spacing = (hi - lo) * rm.frequency_scale / static_cast<double>(n - 1);
        if (spacing > limit * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "delay spacing " << spacing << " (units 1/sigma_plus) exceeds pi/(wp + 8 sigma_plus)/2 = " << limit;
            throw Error(ErrorCode::NyquistViolated, os.str());
        }
    };
    check_spacing(sc.min, sc.max, sc.points);
    if (sc.axis == ScanAxis::Grid2D) check_spacing(sc.min2, sc.max2, sc.points2);
}

std::vector<Engine> resolve_engines(const ScanConfig& c) {
    const bool gaussian_symmetric = c.model.kind == ModelKind::GaussianProduct &&
                                    c.model.symmetry.kind == Symmetry::Kind::Symmetric;
    switch (c.engine) {
        case EngineChoice::Auto: return {gaussian_symmetric ? Engine::ClosedForm : Engine::Quadrature};
        case EngineChoice::Quadrature: return {Engine::Quadrature};
        case EngineChoice::ClosedForm: return {Engine::ClosedForm};
        case EngineChoice::TimeDomain: return {Engine::TimeDomain};
        case EngineChoice::All: {
            std::vector<Engine> e;
            if (gaussian_symmetric) e.push_back(Engine::ClosedForm);
            e.push_back(Engine::Quadrature);
            if (c.model.symmetry.kind == Symmetry::Kind::Symmetric) e.push_back(Engine::TimeDomain);
            return e;
        }
    }
    return {Engine::ClosedForm};
}

Interferogram scan(const ScanConfig& c) { return scan(c, resolve_engines(c).front()); }

Interferogram scan(const ScanConfig& c, Engine engine) {
    validate(c);
    const ResolvedModel rm = resolve_model(c.model);
    const JointSpectralAmplitude& jsa = rm.jsa;
    const double s = rm.frequency_scale;
    const auto& sc = c.scan;

    Interferogram ig;
    ig.scan_axis = sc.axis;
    ig.engine = engine;
    ig.delays = UniformGrid::from_range(sc.min * s, sc.max * s, sc.points);
    if (sc.axis == ScanAxis::Grid2D) {
        ig.delays2 = UniformGrid::from_range(sc.min2 * s, sc.max2 * s, sc.points2);
    } else {
        ig.fixed_delay = sc.fixed_delay * s;
    }
    const std::size_t n = sc.axis == ScanAxis::Grid2D ? sc.points * sc.points2 : sc.points;

    auto& md = ig.metadata;
    md.model_kind = jsa.kind() == ModelKind::GaussianProduct ? "gaussian" : "tabulated";
    md.symmetry = to_string(jsa.symmetry());
    md.symmetry_phase = jsa.symmetry().phase;
    md.sigma_plus = jsa.sigma_plus();
    md.sigma_minus = jsa.sigma_minus();
    md.pump_frequency = jsa.pump_frequency();
    md.delay_spacing = ig.delays.step;
    md.frequency_scale = s;
    md.formula = to_string(engine);

    switch (engine) {
        case Engine::ClosedForm: {
            if (jsa.kind() != ModelKind::GaussianProduct || !jsa.is_symmetric()) {
                throw Error(ErrorCode::UnsupportedModel, "closed form requires a symmetric Gaussian model");
            }
            const GaussianParams p{jsa.sigma_plus(), jsa.sigma_minus(), jsa.pump_frequency()};
            ig.rates = parallel_map(n, [&](std::size_t i) { return rate_gaussian_closed(p, ig.pair_at(i)); });
            break;
        }
        case Engine::Quadrature: {
            const QuadratureSpec q = c.quadrature;
            ig.rates = parallel_map(n, [&](std::size_t i) { return normalized_rate_quadrature(jsa, ig.pair_at(i), q).value; });
            break;
        }
        case Engine::TimeDomain: {
            const TemporalModel model(jsa);
            ig.rates = parallel_map(n, [&](std::size_t i) { return rate_from_time_domain(model, ig.pair_at(i)); });
            break;
        }
    }
    return ig;
}

ScanSpec default_tau2_scan(double sigma_plus, double sigma_minus, double pump_frequency, double tau1) {
    ScanSpec s;
    s.axis = ScanAxis::Tau2AtFixedTau1;
    s.fixed_delay = tau1;
    const double half = std::max({2.0 * std::abs(tau1), 10.0 / sigma_plus, 6.0 / sigma_minus});
    s.min = -half;
    s.max = half;
    const double limit = nyquist_spacing(pump_frequency, sigma_plus);
    const auto need = static_cast<std::size_t>(std::ceil(2.0 * half / limit)) + 1;
    s.points = numerics::next_pow2(need);
    return s;
}

}  // namespace biphoton
