#include "biphoton/freq_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "biphoton/error.hpp"
#include "biphoton/numerics.hpp"

namespace biphoton {

namespace {

constexpr std::size_t kMaxDelays = 2;

// Rates along the rotated axes are bounded by the spread of the delay set {0, τ1, τ2, τ1+τ2}.
double delay_spread(std::initializer_list<double> taus) {
    double lo = 0.0, hi = 0.0;
    for (double t : taus) {
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    return hi - lo;
}

struct Axis {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Composite Gauss–Legendre on [−half, half]; the negative half mirrors the positive one
// exactly so that node m and node (n−1−m) are exact negatives.
Axis gl_axis(double half, std::size_t panels, std::size_t per_panel) {
    if (panels % 2) ++panels;
    const auto& rule = numerics::gauss_legendre(per_panel);
    const std::size_t hp = panels / 2;
    const double width = half / static_cast<double>(hp);
    std::vector<double> pos, posw;
    pos.reserve(hp * per_panel);
    for (std::size_t k = 0; k < hp; ++k) {
        const double c = (static_cast<double>(k) + 0.5) * width;
        for (std::size_t q = 0; q < per_panel; ++q) {
            pos.push_back(c + 0.5 * width * rule.nodes[q]);
            posw.push_back(0.5 * width * rule.weights[q]);
        }
    }
    Axis a;
    a.nodes.reserve(2 * pos.size());
    for (std::size_t k = pos.size(); k-- > 0;) {
        a.nodes.push_back(-pos[k]);
        a.weights.push_back(posw[k]);
    }
    for (std::size_t k = 0; k < pos.size(); ++k) {
        a.nodes.push_back(pos[k]);
        a.weights.push_back(posw[k]);
    }
    return a;
}

double max_gap(const Axis& a) {
    double g = 0.0;
    for (std::size_t k = 1; k < a.nodes.size(); ++k) g = std::max(g, a.nodes[k] - a.nodes[k - 1]);
    return g;
}

std::size_t auto_panels(double range, double rate, const QuadratureSpec& q) {
    const double need = std::ceil(range * rate / q.max_phase_per_panel);
    return std::max<std::size_t>(q.min_panels, static_cast<std::size_t>(need));
}

struct Sums {
    double value{0.0};
    double baseline{0.0};
    double value_coarse{0.0};     // trapezoid at 2h (tabulated only)
    double baseline_coarse{0.0};
    std::size_t evaluations{0};
};

// Phase factors x = e^{-iωτ} for signal and idler, split as row·column products.
struct PhaseTables {
    std::size_t count{0};
    std::array<std::vector<complex>, kMaxDelays> sig_row, sig_col, idl_row, idl_col;
};

// Kernel(fsi, fis, xs, xi) -> {density, baseline density}
template <class Kernel>
Sums integrate_rotated(const JointSpectralAmplitude& jsa, const std::vector<double>& taus, double spread,
                       const QuadratureSpec& q, Kernel&& kernel, bool coarse) {
    if (q.nodes_per_panel < 2) throw Error(ErrorCode::InvalidConfig, "nodes_per_panel must be >= 2");
    if (!(q.truncation_sigmas > 0.0)) throw Error(ErrorCode::InvalidConfig, "truncation_sigmas must be positive");
    const double hp = q.truncation_sigmas * jsa.sigma_plus();
    const double hm = q.truncation_sigmas * jsa.sigma_minus();
    std::size_t np = q.panels_plus.value_or(auto_panels(2.0 * hp, spread, q));
    std::size_t nm = q.panels_minus.value_or(auto_panels(2.0 * hm, spread, q));
    if (coarse) {
        np = std::max<std::size_t>(2, np / 2);
        nm = std::max<std::size_t>(2, nm / 2);
    }
    const Axis ap = gl_axis(hp, np, q.nodes_per_panel);
    const Axis am = gl_axis(hm, nm, q.nodes_per_panel);
    if (!coarse && spread > 0.0) {
        const double limit = std::numbers::pi / (2.0 * spread);
        const double gap = std::max(max_gap(ap), max_gap(am));
        if (gap > limit) {
            std::ostringstream os;
            os << "node spacing " << gap << " exceeds pi/(2*" << spread << ") = " << limit;
            throw Error(ErrorCode::QuadratureUnderResolved, os.str());
        }
    }

    const double half_pump = 0.5 * jsa.pump_frequency();
    PhaseTables ph;
    ph.count = taus.size();
    for (std::size_t k = 0; k < taus.size(); ++k) {
        const double t = taus[k];
        const complex c = std::polar(1.0, -half_pump * t);
        auto& sr = ph.sig_row[k];
        auto& sc = ph.sig_col[k];
        auto& ir = ph.idl_row[k];
        auto& ic = ph.idl_col[k];
        sr.resize(ap.nodes.size());
        for (std::size_t p = 0; p < ap.nodes.size(); ++p) sr[p] = c * std::polar(1.0, -0.5 * ap.nodes[p] * t);
        ir = sr;
        sc.resize(am.nodes.size());
        ic.resize(am.nodes.size());
        for (std::size_t m = 0; m < am.nodes.size(); ++m) {
            sc[m] = std::polar(1.0, -0.5 * am.nodes[m] * t);
            ic[m] = std::conj(sc[m]);
        }
    }

    const std::size_t nc = am.nodes.size();
    std::vector<complex> f(nc);
    std::vector<double> row_v(nc), row_b(nc);
    std::vector<double> acc_v(ap.nodes.size()), acc_b(ap.nodes.size());
    std::array<complex, kMaxDelays> xs{}, xi{};
    Sums out;
    for (std::size_t p = 0; p < ap.nodes.size(); ++p) {
        const double P = ap.nodes[p];
        for (std::size_t m = 0; m < nc; ++m) {
            const double M = am.nodes[m];
            f[m] = jsa.evaluate_detuning(0.5 * (P + M), 0.5 * (P - M));
        }
        for (std::size_t m = 0; m < nc; ++m) {
            const double M = am.nodes[m];
            const double ds = 0.5 * (P + M), di = 0.5 * (P - M);
            if (half_pump + ds <= 0.0 || half_pump + di <= 0.0) {
                row_v[m] = row_b[m] = 0.0;
                continue;
            }
            for (std::size_t k = 0; k < ph.count; ++k) {
                xs[k] = ph.sig_row[k][p] * ph.sig_col[k][m];
                xi[k] = ph.idl_row[k][p] * ph.idl_col[k][m];
            }
            // f(ωi, ωs) sits at the mirrored Ω− node.
            const auto [v, b] = kernel(f[m], f[nc - 1 - m], xs.data(), xi.data());
            row_v[m] = am.weights[m] * v;
            row_b[m] = am.weights[m] * b;
        }
        acc_v[p] = ap.weights[p] * numerics::pairwise_sum(row_v);
        acc_b[p] = ap.weights[p] * numerics::pairwise_sum(row_b);
    }
    out.evaluations = ap.nodes.size() * nc;
    // dωs dωi = ½ dΩ+ dΩ−
    out.value = 0.5 * numerics::pairwise_sum(acc_v);
    out.baseline = 0.5 * numerics::pairwise_sum(acc_b);
    return out;
}

template <class Kernel>
Sums integrate_table(const JointSpectralAmplitude& jsa, const std::vector<double>& taus, double kmax,
                     Kernel&& kernel) {
    const ComplexTable& t = jsa.table();
    const std::size_t n = t.signal.size;
    const double h = t.signal.step;
    if (kmax > 0.0 && h > std::numbers::pi / (4.0 * kmax)) {
        std::ostringstream os;
        os << "table spacing " << h << " exceeds pi/(4*" << kmax << ")";
        throw Error(ErrorCode::QuadratureUnderResolved, os.str());
    }
    const double half_pump = 0.5 * jsa.pump_frequency();
    PhaseTables ph;
    ph.count = taus.size();
    for (std::size_t k = 0; k < taus.size(); ++k) {
        ph.sig_row[k].resize(n);
        ph.idl_col[k].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = half_pump + t.signal[i];
            ph.sig_row[k][i] = std::polar(1.0, -w * taus[k]);
            ph.idl_col[k][i] = ph.sig_row[k][i];
        }
    }
    auto trap = [n](std::size_t i) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; };
    // Coarse rule: every second node with spacing 2h.
    const std::size_t last_even = (n - 1) - ((n - 1) % 2);
    auto trap2 = [last_even](std::size_t i) {
        if (i % 2) return 0.0;
        return (i == 0 || i == last_even) ? 1.0 : 2.0;
    };
    std::vector<double> rv(n), rb(n), rv2(n), rb2(n);
    std::vector<double> av(n), ab(n), av2(n), ab2(n);
    std::array<complex, kMaxDelays> xs{}, xi{};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < ph.count; ++k) {
                xs[k] = ph.sig_row[k][i];
                xi[k] = ph.idl_col[k][j];
            }
            const auto [v, b] = kernel(jsa.node(i, j), jsa.node(j, i), xs.data(), xi.data());
            rv[j] = trap(j) * v;
            rb[j] = trap(j) * b;
            rv2[j] = trap2(j) * v;
            rb2[j] = trap2(j) * b;
        }
        av[i] = trap(i) * numerics::pairwise_sum(rv);
        ab[i] = trap(i) * numerics::pairwise_sum(rb);
        av2[i] = trap2(i) * numerics::pairwise_sum(rv2);
        ab2[i] = trap2(i) * numerics::pairwise_sum(rb2);
    }
    Sums out;
    out.evaluations = n * n;
    out.value = numerics::pairwise_sum(av) * h * h;
    out.baseline = numerics::pairwise_sum(ab) * h * h;
    out.value_coarse = numerics::pairwise_sum(av2) * h * h;
    out.baseline_coarse = numerics::pairwise_sum(ab2) * h * h;
    return out;
}

struct CombinedKernel {
    std::pair<double, double> operator()(complex fsi, complex fis, const complex* xs, const complex* xi) const {
        const complex x_s = xs[0], y_s = xs[1], x_i = xi[0], y_i = xi[1];
        const complex xy_s = x_s * y_s, xy_i = x_i * y_i;
        const complex a = xy_s + x_s + y_s - 1.0;
        const complex b = xy_i - x_i - y_i - 1.0;
        const complex c = xy_i + y_i - x_i + 1.0;
        const complex d = xy_s - y_s + x_s + 1.0;
        const double r = std::norm(fsi * a * b + fis * c * d);
        return {r, 16.0 * (std::norm(fsi) + std::norm(fis))};
    }
};

struct HomKernel {
    std::pair<double, double> operator()(complex fsi, complex fis, const complex* xs, const complex* xi) const {
        return {std::norm(fis * xs[0] - fsi * xi[0]), std::norm(fsi) + std::norm(fis)};
    }
};

struct NoonKernel {
    std::pair<double, double> operator()(complex fsi, complex fis, const complex* xs, const complex* xi) const {
        const complex v = fis * (xi[0] + 1.0) * (xs[0] + 1.0) + fsi * (xs[0] - 1.0) * (xi[0] - 1.0);
        return {std::norm(v), 4.0 * (std::norm(fsi) + std::norm(fis))};
    }
};

template <class Kernel>
Sums run(const JointSpectralAmplitude& jsa, const std::vector<double>& taus, double spread, double kmax,
         const QuadratureSpec& q, Kernel kernel, double& error_out, bool normalized) {
    for (double t : taus) {
        if (!std::isfinite(t)) throw Error(ErrorCode::InvalidConfig, "delays must be finite");
    }
    if (jsa.kind() == ModelKind::TabulatedGrid) {
        Sums s = integrate_table(jsa, taus, kmax, kernel);
        error_out = normalized ? std::abs(s.value / s.baseline - s.value_coarse / s.baseline_coarse) / 3.0
                               : std::abs(s.value - s.value_coarse) / 3.0;
        return s;
    }
    Sums s = integrate_rotated(jsa, taus, spread, q, kernel, false);
    error_out = 0.0;
    if (q.estimate_error) {
        const Sums c = integrate_rotated(jsa, taus, spread, q, kernel, true);
        error_out = normalized ? std::abs(s.value / s.baseline - c.value / c.baseline) : std::abs(s.value - c.value);
        s.evaluations += c.evaluations;
    }
    return s;
}

double gp(const GaussianParams& p, double t) {
    return std::cos(p.pump_frequency * t) * std::exp(-0.5 * p.sigma_plus * p.sigma_plus * t * t);
}
double gm(const GaussianParams& p, double t) { return std::exp(-0.5 * p.sigma_minus * p.sigma_minus * t * t); }

void check_params(const GaussianParams& p) {
    if (!(p.sigma_plus > 0.0)) throw Error(ErrorCode::NonPositiveParameter, "sigma_plus");
    if (!(p.sigma_minus > 0.0)) throw Error(ErrorCode::NonPositiveParameter, "sigma_minus");
    if (!(p.pump_frequency > 0.0)) throw Error(ErrorCode::NonPositiveParameter, "pump_frequency");
}

}  // namespace

double coincidence_density(const JointSpectralAmplitude& jsa, double omega_s, double omega_i, DelayPair d) {
    const complex fsi = jsa.evaluate(omega_s, omega_i);
    const complex fis = jsa.evaluate(omega_i, omega_s);
    const complex xs[2] = {std::polar(1.0, -omega_s * d.tau1), std::polar(1.0, -omega_s * d.tau2)};
    const complex xi[2] = {std::polar(1.0, -omega_i * d.tau1), std::polar(1.0, -omega_i * d.tau2)};
    return CombinedKernel{}(fsi, fis, xs, xi).first;
}

double baseline_density(const JointSpectralAmplitude& jsa, double omega_s, double omega_i) {
    return 16.0 * (std::norm(jsa.evaluate(omega_s, omega_i)) + std::norm(jsa.evaluate(omega_i, omega_s)));
}

double homi_density(const JointSpectralAmplitude& jsa, double omega_s, double omega_i, double tau) {
    const complex xs = std::polar(1.0, -omega_s * tau), xi = std::polar(1.0, -omega_i * tau);
    return HomKernel{}(jsa.evaluate(omega_s, omega_i), jsa.evaluate(omega_i, omega_s), &xs, &xi).first;
}

double nooni_density(const JointSpectralAmplitude& jsa, double omega_s, double omega_i, double tau) {
    const complex xs = std::polar(1.0, -omega_s * tau), xi = std::polar(1.0, -omega_i * tau);
    return NoonKernel{}(jsa.evaluate(omega_s, omega_i), jsa.evaluate(omega_i, omega_s), &xs, &xi).first;
}

QuadratureResult rate_quadrature(const JointSpectralAmplitude& jsa, DelayPair d, const QuadratureSpec& q) {
    double err = 0.0;
    const double spread = delay_spread({d.tau1, d.tau2, d.tau1 + d.tau2});
    const double kmax = std::max({std::abs(d.tau1), std::abs(d.tau2), std::abs(d.tau1 + d.tau2)});
    const Sums s = run(jsa, {d.tau1, d.tau2}, spread, kmax, q, CombinedKernel{}, err, false);
    return {s.value / 64.0, err / 64.0, s.evaluations};
}

QuadratureResult baseline_rate(const JointSpectralAmplitude& jsa, const QuadratureSpec& q) {
    double err = 0.0;
    const Sums s = run(jsa, {0.0, 0.0}, 0.0, 0.0, q, CombinedKernel{}, err, false);
    double e = 0.0;
    if (jsa.kind() == ModelKind::TabulatedGrid) e = std::abs(s.baseline - s.baseline_coarse) / 3.0;
    return {s.baseline / 64.0, e / 64.0, s.evaluations};
}

double normalize(double raw_rate, double baseline) {
    if (!(baseline > 0.0)) throw Error(ErrorCode::InvalidConfig, "baseline must be positive");
    return raw_rate / baseline;
}

QuadratureResult normalized_rate_quadrature(const JointSpectralAmplitude& jsa, DelayPair d, const QuadratureSpec& q) {
    double err = 0.0;
    const double spread = delay_spread({d.tau1, d.tau2, d.tau1 + d.tau2});
    const double kmax = std::max({std::abs(d.tau1), std::abs(d.tau2), std::abs(d.tau1 + d.tau2)});
    const Sums s = run(jsa, {d.tau1, d.tau2}, spread, kmax, q, CombinedKernel{}, err, true);
    return {normalize(s.value, s.baseline), err, s.evaluations};
}

QuadratureResult homi_rate(const JointSpectralAmplitude& jsa, double tau, const QuadratureSpec& q) {
    double err = 0.0;
    const Sums s = run(jsa, {tau}, delay_spread({tau}), std::abs(tau), q, HomKernel{}, err, true);
    return {normalize(s.value, s.baseline), err, s.evaluations};
}

QuadratureResult nooni_rate(const JointSpectralAmplitude& jsa, double tau, const QuadratureSpec& q) {
    double err = 0.0;
    const Sums s = run(jsa, {tau}, delay_spread({tau}), std::abs(tau), q, NoonKernel{}, err, true);
    return {normalize(s.value, s.baseline), err, s.evaluations};
}

double rate_factorized(const CorrelationFunction& g_plus, const CorrelationFunction& g_minus,
                       double pump_frequency, DelayPair d) {
    if (g_plus.coordinate() != Coordinate::Sum || g_minus.coordinate() != Coordinate::Difference) {
        throw Error(ErrorCode::InvalidConfig, "rate_factorized expects (sum, difference) correlation functions");
    }
    const double t1 = d.tau1, t2 = d.tau2;
    const auto gpc = [&](double t) { return g_plus.with_carrier(t, pump_frequency); };
    return 1.0 - 0.5 * gpc(t1) * g_minus.at(t2) - 0.5 * gpc(t2) - 0.5 * g_minus.at(t2) + 0.25 * gpc(t2 + t1) +
           0.25 * gpc(t2 - t1);
}

double rate_gaussian_closed(const GaussianParams& p, DelayPair d) {
    check_params(p);
    const double t1 = d.tau1, t2 = d.tau2;
    return 1.0 - 0.5 * gp(p, t1) * gm(p, t2) - 0.5 * gp(p, t2) - 0.5 * gm(p, t2) + 0.25 * gp(p, t2 + t1) +
           0.25 * gp(p, t2 - t1);
}

double rate_asymptotic_tau1(const GaussianParams& p, DelayPair d) {
    check_params(p);
    const double t1 = d.tau1, t2 = d.tau2;
    return 1.0 - 0.5 * gp(p, t2) - 0.5 * gm(p, t2) + 0.25 * gp(p, t2 + t1) + 0.25 * gp(p, t2 - t1);
}

double rate_asymptotic_tau2(const GaussianParams& p, DelayPair d) {
    check_params(p);
    const double t1 = d.tau1, t2 = d.tau2;
    return 1.0 + 0.25 * gp(p, t1 + t2) + 0.25 * gp(p, t1 - t2);
}

std::string to_string(ScanAxis a) {
    switch (a) {
        case ScanAxis::Tau2AtFixedTau1: return "tau2";
        case ScanAxis::Tau1AtFixedTau2: return "tau1";
        case ScanAxis::Grid2D: return "grid";
    }
    return "tau2";
}

std::string to_string(Engine e) {
    switch (e) {
        case Engine::Quadrature: return "quadrature";
        case Engine::ClosedForm: return "closed_form";
        case Engine::TimeDomain: return "time_domain";
    }
    return "closed_form";
}

DelayPair Interferogram::pair_at(std::size_t i) const {
    switch (scan_axis) {
        case ScanAxis::Tau2AtFixedTau1: return {fixed_delay.value_or(0.0), delays[i]};
        case ScanAxis::Tau1AtFixedTau2: return {delays[i], fixed_delay.value_or(0.0)};
        case ScanAxis::Grid2D: {
            const std::size_t n2 = delays2->size;
            return {delays[i / n2], (*delays2)[i % n2]};
        }
    }
    return {};
}

namespace {

InterferogramMetadata gaussian_metadata(const GaussianParams& p, double spacing, const char* formula) {
    InterferogramMetadata m;
    m.model_kind = "gaussian";
    m.symmetry = "symmetric";
    m.sigma_plus = p.sigma_plus;
    m.sigma_minus = p.sigma_minus;
    m.pump_frequency = p.pump_frequency;
    m.delay_spacing = spacing;
    m.formula = formula;
    return m;
}

}  // namespace

Interferogram rate_asymptotic_fixed_tau1(const GaussianParams& p, double tau1, const UniformGrid& tau2_grid) {
    check_params(p);
    if (p.sigma_plus * std::abs(tau1) < 5.0) {
        std::ostringstream os;
        os << "sigma_plus*|tau1| = " << p.sigma_plus * std::abs(tau1) << " < 5";
        throw Error(ErrorCode::AsymptoticPreconditionViolated, os.str());
    }
    Interferogram ig;
    ig.scan_axis = ScanAxis::Tau2AtFixedTau1;
    ig.fixed_delay = tau1;
    ig.delays = tau2_grid;
    ig.engine = Engine::ClosedForm;
    ig.metadata = gaussian_metadata(p, tau2_grid.step, "asymptotic_tau1");
    ig.rates.resize(tau2_grid.size);
    for (std::size_t k = 0; k < tau2_grid.size; ++k) ig.rates[k] = rate_asymptotic_tau1(p, {tau1, tau2_grid[k]});
    return ig;
}

Interferogram rate_asymptotic_fixed_tau2(const GaussianParams& p, double tau2, const UniformGrid& tau1_grid) {
    check_params(p);
    const double a = std::min(p.sigma_plus, p.sigma_minus) * std::abs(tau2);
    if (a < 5.0) {
        std::ostringstream os;
        os << "min(sigma_plus, sigma_minus)*|tau2| = " << a << " < 5";
        throw Error(ErrorCode::AsymptoticPreconditionViolated, os.str());
    }
    Interferogram ig;
    ig.scan_axis = ScanAxis::Tau1AtFixedTau2;
    ig.fixed_delay = tau2;
    ig.delays = tau1_grid;
    ig.engine = Engine::ClosedForm;
    ig.metadata = gaussian_metadata(p, tau1_grid.step, "asymptotic_tau2");
    ig.rates.resize(tau1_grid.size);
    for (std::size_t k = 0; k < tau1_grid.size; ++k) ig.rates[k] = rate_asymptotic_tau2(p, {tau1_grid[k], tau2});
    return ig;
}

}  // namespace biphoton
