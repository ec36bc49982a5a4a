#include "biphoton/spectral_model.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "biphoton/error.hpp"
#include "biphoton/numerics.hpp"

namespace biphoton {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::NonPositiveParameter, name);
}

double sgn(double x) noexcept { return (x > 0.0) - (x < 0.0); }

bool same_axis(const UniformGrid& a, const UniformGrid& b) {
    const double tol = 1e-12 * std::max(1.0, std::abs(a.step));
    return a.size == b.size && std::abs(a.start - b.start) <= tol * 8.0 && std::abs(a.step - b.step) <= tol;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

}  // namespace

complex Symmetry::factor(double omega_minus) const noexcept {
    switch (kind) {
        case Kind::Symmetric: return 1.0;
        case Kind::Antisymmetric: return sgn(omega_minus);
        case Kind::Anyonic: return std::polar(1.0, 0.5 * phase * sgn(omega_minus));
    }
    return 1.0;
}

std::string to_string(const Symmetry& s) {
    switch (s.kind) {
        case Symmetry::Kind::Symmetric: return "symmetric";
        case Symmetry::Kind::Antisymmetric: return "antisymmetric";
        case Symmetry::Kind::Anyonic: return "anyonic";
    }
    return "symmetric";
}

Symmetry parse_symmetry(const std::string& name, double phase) {
    if (name == "symmetric") return Symmetry::symmetric();
    if (name == "antisymmetric") return Symmetry::antisymmetric();
    if (name == "anyonic") {
        if (!std::isfinite(phase)) throw Error(ErrorCode::InvalidConfig, "anyonic phase must be finite");
        return Symmetry::anyonic(phase);
    }
    throw Error(ErrorCode::InvalidConfig, "unknown symmetry '" + name + "'");
}

std::string to_string(Coordinate c) { return c == Coordinate::Sum ? "sum" : "difference"; }

// ---------------------------------------------------------------------------
// JointSpectralAmplitude

complex JointSpectralAmplitude::evaluate(double omega_s, double omega_i) const {
    const double half = 0.5 * pump_;
    return evaluate_detuning(omega_s - half, omega_i - half);
}

complex JointSpectralAmplitude::evaluate_detuning(double d_s, double d_i) const {
    if (kind_ == ModelKind::GaussianProduct) {
        const double p = d_s + d_i;
        const double m = d_s - d_i;
        const double base = std::exp(-p * p / (4.0 * sigma_plus_ * sigma_plus_) -
                                     m * m / (4.0 * sigma_minus_ * sigma_minus_));
        return base * symmetry_.factor(m);
    }
    return tabulated_base(d_s, d_i);
}

complex JointSpectralAmplitude::tabulated_base(double d_s, double d_i) const {
    const ComplexTable& t = table_->projected;
    if (!t.signal.contains(d_s) || !t.idler.contains(d_i)) {
        std::ostringstream os;
        os << "(" << d_s << ", " << d_i << ") outside tabulated detunings [" << t.signal.front() << ", "
           << t.signal.back() << "]";
        throw Error(ErrorCode::OutOfGridBounds, os.str());
    }
    if (d_s == d_i && symmetry_.kind == Symmetry::Kind::Antisymmetric) return 0.0;
    // Interpolate in the lower triangle only; the upper one follows from the symmetry,
    // which keeps the exchange relation exact rather than exact-up-to-rounding.
    const bool swapped = d_s < d_i;
    const double a = swapped ? d_i : d_s;
    const double b = swapped ? d_s : d_i;
    const std::size_t n = t.signal.size;
    auto locate = [&](double x, std::size_t& k, double& frac) {
        const double pos = std::clamp((x - t.signal.start) / t.signal.step, 0.0, static_cast<double>(n - 1));
        k = std::min(static_cast<std::size_t>(pos), n - 2);
        frac = pos - static_cast<double>(k);
    };
    std::size_t i, j;
    double fx, fy;
    locate(a, i, fx);
    locate(b, j, fy);
    const auto at = [&](std::size_t r, std::size_t c) { return t.values[r * n + c]; };
    const complex v = (1.0 - fx) * ((1.0 - fy) * at(i, j) + fy * at(i, j + 1)) +
                      fx * ((1.0 - fy) * at(i + 1, j) + fy * at(i + 1, j + 1));
    if (!swapped) return v;
    return v * symmetry_.factor(-1.0) / symmetry_.factor(1.0);
}

const ComplexTable& JointSpectralAmplitude::table() const {
    if (!table_) throw Error(ErrorCode::UnsupportedModel, "model has no table");
    return table_->projected;
}

complex JointSpectralAmplitude::node(std::size_t i, std::size_t j) const {
    const ComplexTable& t = table();
    return t.values[i * t.idler.size + j];
}

JointSpectralAmplitude JointSpectralAmplitude::with_symmetry(const Symmetry& s) const {
    if (kind_ == ModelKind::GaussianProduct) return make_gaussian_jsa(sigma_plus_, sigma_minus_, pump_, s);
    return make_tabulated_jsa(table_->source, pump_, s);
}

JointSpectralAmplitude make_gaussian_jsa(double sigma_plus, double sigma_minus, double pump_frequency,
                                         const Symmetry& symmetry) {
    require_positive(sigma_plus, "sigma_plus");
    require_positive(sigma_minus, "sigma_minus");
    require_positive(pump_frequency, "pump_frequency");
    if (pump_frequency < 10.0 * std::max(sigma_plus, sigma_minus)) {
        std::ostringstream os;
        os << "pump_frequency " << pump_frequency << " < 10 * max(sigma_plus, sigma_minus)";
        throw Error(ErrorCode::PumpTooSmall, os.str());
    }
    if (symmetry.kind == Symmetry::Kind::Anyonic && !std::isfinite(symmetry.phase)) {
        throw Error(ErrorCode::InvalidConfig, "anyonic phase must be finite");
    }
    JointSpectralAmplitude j;
    j.kind_ = ModelKind::GaussianProduct;
    j.sigma_plus_ = sigma_plus;
    j.sigma_minus_ = sigma_minus;
    j.pump_ = pump_frequency;
    j.symmetry_ = symmetry;
    return j;
}

JointSpectralAmplitude make_tabulated_jsa(const ComplexTable& table, double pump_frequency,
                                          const Symmetry& symmetry) {
    require_positive(pump_frequency, "pump_frequency");
    const std::size_t n = table.signal.size;
    if (!same_axis(table.signal, table.idler)) {
        throw Error(ErrorCode::InvalidConfig, "tabulated JSA needs identical signal and idler axes");
    }
    if (table.values.size() != n * n) throw Error(ErrorCode::InvalidConfig, "table size does not match its axes");

    auto data = std::make_shared<JointSpectralAmplitude::TableData>();
    data->source = table;
    ComplexTable p{table.signal, table.signal, std::vector<complex>(n * n)};
    const auto src = [&](std::size_t i, std::size_t k) { return table.values[i * n + k]; };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            complex v;
            switch (symmetry.kind) {
                case Symmetry::Kind::Antisymmetric: v = 0.5 * (src(i, k) - src(k, i)); break;
                default: v = 0.5 * (src(i, k) + src(k, i)); break;
            }
            if (symmetry.kind == Symmetry::Kind::Anyonic) {
                v *= symmetry.factor(static_cast<double>(i) - static_cast<double>(k));
            }
            p.values[i * n + k] = v;
        }
    }
    std::vector<double> mag(n * n);
    for (std::size_t k = 0; k < n * n; ++k) mag[k] = std::norm(p.values[k]);
    const double h = table.signal.step;
    const double norm = numerics::pairwise_sum(mag) * h * h;
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw Error(ErrorCode::InvalidConfig, "tabulated JSA vanishes under the requested symmetry");
    }
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& v : p.values) v *= scale;

    // rms widths of the collective-coordinate marginals
    std::vector<double> wp(n * n), wpp(n * n), wm(n * n), wmm(n * n), w(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const double a = std::norm(p.values[i * n + k]);
            const double op = table.signal[i] + table.signal[k];
            const double om = table.signal[i] - table.signal[k];
            const std::size_t idx = i * n + k;
            w[idx] = a;
            wp[idx] = a * op;
            wpp[idx] = a * op * op;
            wm[idx] = a * om;
            wmm[idx] = a * om * om;
        }
    }
    const double s0 = numerics::pairwise_sum(w);
    const double mp = numerics::pairwise_sum(wp) / s0;
    const double mm = numerics::pairwise_sum(wm) / s0;
    const double vp = numerics::pairwise_sum(wpp) / s0 - mp * mp;
    const double vm = numerics::pairwise_sum(wmm) / s0 - mm * mm;

    JointSpectralAmplitude j;
    j.kind_ = ModelKind::TabulatedGrid;
    j.sigma_plus_ = std::sqrt(std::max(vp, 0.0));
    j.sigma_minus_ = std::sqrt(std::max(vm, 0.0));
    j.pump_ = pump_frequency;
    j.symmetry_ = symmetry;
    require_positive(j.sigma_plus_, "sigma_plus");
    require_positive(j.sigma_minus_, "sigma_minus");
    if (pump_frequency < 10.0 * std::max(j.sigma_plus_, j.sigma_minus_)) {
        throw Error(ErrorCode::PumpTooSmall, "pump_frequency < 10 * max rms linewidth of the table");
    }
    if (pump_frequency / 2.0 + table.signal.front() <= 0.0) {
        throw Error(ErrorCode::InvalidConfig, "tabulated frequencies must be positive");
    }
    data->projected = std::move(p);
    j.table_ = std::move(data);
    return j;
}

ComplexTable load_tabulated_csv(const std::string& path, double pump_frequency) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "omega_s,omega_i,re,im") {
        throw Error(ErrorCode::ParseError, path + ": expected header omega_s,omega_i,re,im");
    }
    struct Row { double ws, wi, re, im; };
    std::vector<Row> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) continue;
        std::istringstream ls(line);
        Row r{};
        char c1 = 0, c2 = 0, c3 = 0;
        if (!(ls >> r.ws >> c1 >> r.wi >> c2 >> r.re >> c3 >> r.im) || c1 != ',' || c2 != ',' || c3 != ',') {
            throw Error(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": malformed row");
        }
        std::string rest;
        if (ls >> rest) throw Error(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": trailing data");
        rows.push_back(r);
    }
    if (rows.size() < 4) throw Error(ErrorCode::ParseError, path + ": table too small");
    std::size_t ni = 1;
    while (ni < rows.size() && rows[ni].ws == rows[0].ws) ++ni;
    if (rows.size() % ni != 0) throw Error(ErrorCode::ParseError, path + ": table is not rectangular");
    const std::size_t ns = rows.size() / ni;
    if (ns < 2 || ni < 2) throw Error(ErrorCode::ParseError, path + ": table needs at least 2x2 points");
    const double hs = rows[ni].ws - rows[0].ws;
    const double hi = rows[1].wi - rows[0].wi;
    if (!(hs > 0.0) || !(hi > 0.0)) throw Error(ErrorCode::ParseError, path + ": axes must be increasing");
    for (std::size_t a = 0; a < ns; ++a) {
        for (std::size_t b = 0; b < ni; ++b) {
            const Row& r = rows[a * ni + b];
            const double es = rows[0].ws + hs * static_cast<double>(a);
            const double ei = rows[0].wi + hi * static_cast<double>(b);
            if (std::abs(r.ws - es) > 1e-9 * hs || std::abs(r.wi - ei) > 1e-9 * hi) {
                throw Error(ErrorCode::ParseError, path + ": grid is not uniform/rectangular at row " +
                                                       std::to_string(a * ni + b + 2));
            }
        }
    }
    ComplexTable t;
    t.signal = UniformGrid(rows[0].ws - 0.5 * pump_frequency, hs, ns);
    t.idler = UniformGrid(rows[0].wi - 0.5 * pump_frequency, hi, ni);
    t.values.reserve(rows.size());
    for (const Row& r : rows) t.values.emplace_back(r.re, r.im);
    return t;
}

// ---------------------------------------------------------------------------
// Collective-coordinate densities

namespace {

// |f|² on one checkerboard sublattice of the square table, indexed by
// (p, q) with Ω+ = 2·start + (2p + parity)·h and Ω− = (2q + parity − (n−1) rounded)·h.
Eigen::MatrixXd sublattice(const JointSpectralAmplitude& jsa, int parity) {
    const ComplexTable& t = jsa.table();
    const long n = static_cast<long>(t.signal.size);
    // d = i − j ranges over [−(n−1), n−1] with d ≡ parity (mod 2).
    long dmin = -(n - 1);
    if (((dmin % 2) + 2) % 2 != parity) ++dmin;
    const long rows = n;
    const long cols = (n - 1 - dmin) / 2 + 1;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
    for (long p = 0; p < rows; ++p) {
        const long s = 2 * p + parity;
        for (long q = 0; q < cols; ++q) {
            const long d = dmin + 2 * q;
            const long i = (s + d) / 2;
            const long j = (s - d) / 2;
            if (i < 0 || j < 0 || i >= n || j >= n) continue;
            m(p, q) = std::norm(t.values[static_cast<std::size_t>(i * n + j)]);
        }
    }
    return m;
}

double rank1_residual(const Eigen::MatrixXd& m) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    double total = 0.0, tail = 0.0;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        total += s[k] * s[k];
        if (k > 0) tail += s[k] * s[k];
    }
    if (total == 0.0) return 0.0;
    return std::sqrt(tail / total);
}

double interpolate(const UniformGrid& g, const std::vector<double>& v, double x) {
    const double pos = (x - g.start) / g.step;
    if (pos < -1e-9 || pos > static_cast<double>(g.size - 1) + 1e-9) {
        throw Error(ErrorCode::OutOfGridBounds, "requested detuning outside the tabulated lattice");
    }
    const double c = std::clamp(pos, 0.0, static_cast<double>(g.size - 1));
    const std::size_t k = std::min(static_cast<std::size_t>(c), g.size - 2);
    const double f = c - static_cast<double>(k);
    return (1.0 - f) * v[k] + f * v[k + 1];
}

}  // namespace

double factorization_residual(const JointSpectralAmplitude& jsa) {
    if (jsa.kind() == ModelKind::GaussianProduct) return 0.0;
    return std::max(rank1_residual(sublattice(jsa, 0)), rank1_residual(sublattice(jsa, 1)));
}

SpectralDensity spectral_density(const JointSpectralAmplitude& jsa, Coordinate coordinate,
                                 const std::optional<UniformGrid>& grid) {
    SpectralDensity out;
    out.coordinate = coordinate;
    if (jsa.kind() == ModelKind::GaussianProduct) {
        const double sigma = coordinate == Coordinate::Sum ? jsa.sigma_plus() : jsa.sigma_minus();
        out.detunings = grid ? *grid : UniformGrid::symmetric(8.0 * sigma, 4096);
        out.values.resize(out.detunings.size);
        for (std::size_t k = 0; k < out.detunings.size; ++k) {
            const double w = out.detunings[k];
            out.values[k] = std::exp(-w * w / (2.0 * sigma * sigma));
        }
        return out;
    }

    const double residual = factorization_residual(jsa);
    if (residual > kFactorizationTolerance) {
        std::ostringstream os;
        os << "rank-1 residual " << residual << " exceeds " << kFactorizationTolerance;
        throw Error(ErrorCode::NotFactorizable, os.str());
    }
    const ComplexTable& t = jsa.table();
    const std::size_t n = t.signal.size;
    const double h = t.signal.step;
    std::vector<std::vector<double>> bins(2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double a = std::norm(t.values[i * n + j]);
            const std::size_t k = coordinate == Coordinate::Sum ? i + j : i + (n - 1) - j;
            bins[k].push_back(a);
        }
    }
    std::vector<double> marginal(2 * n - 1);
    for (std::size_t k = 0; k < marginal.size(); ++k) marginal[k] = numerics::pairwise_sum(bins[k]);
    const double peak = *std::max_element(marginal.begin(), marginal.end());
    for (double& v : marginal) v /= peak;
    const UniformGrid native = coordinate == Coordinate::Sum
                                   ? UniformGrid(2.0 * t.signal.start, h, 2 * n - 1)
                                   : UniformGrid(-static_cast<double>(n - 1) * h, h, 2 * n - 1);
    if (!grid) {
        out.detunings = native;
        out.values = std::move(marginal);
        return out;
    }
    out.detunings = *grid;
    out.values.resize(grid->size);
    for (std::size_t k = 0; k < grid->size; ++k) out.values[k] = interpolate(native, marginal, (*grid)[k]);
    return out;
}

// ---------------------------------------------------------------------------
// Correlation functions

CorrelationFunction::CorrelationFunction(SpectralDensity density, UniformGrid delays)
    : density_(std::move(density)), delays_(delays) {
    const auto& v = density_.values;
    if (v.size() != density_.detunings.size || v.size() < 2) {
        throw Error(ErrorCode::InvalidConfig, "density values do not match their grid");
    }
    for (double x : v) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw Error(ErrorCode::InvalidConfig, "density must be nonnegative");
    }
    const double peak = *std::max_element(v.begin(), v.end());
    if (!(peak > 0.0)) throw Error(ErrorCode::InvalidConfig, "density is identically zero");
    const double edge = std::max(v.front(), v.back());
    if (edge > 1e-12 * peak) {
        std::ostringstream os;
        os << "density boundary value " << edge / peak << " of peak exceeds 1e-12";
        throw Error(ErrorCode::GridTooNarrow, os.str());
    }
    g0_ = raw(0.0).real();
    g_.resize(delays_.size);
    for (std::size_t k = 0; k < delays_.size; ++k) {
        g_[k] = delays_[k] == 0.0 ? 1.0 : (raw(delays_[k]) / g0_).real();
    }
}

complex CorrelationFunction::raw(double tau) const {
    const auto& g = density_.detunings;
    const auto& v = density_.values;
    const std::size_t n = v.size();
    std::vector<double> re(n), im(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
        const double phase = g[k] * tau;
        re[k] = w * v[k] * std::cos(phase);
        im[k] = w * v[k] * std::sin(phase);
    }
    const double scale = g.step / kSqrt2Pi;
    return {numerics::pairwise_sum(re) * scale, numerics::pairwise_sum(im) * scale};
}

void CorrelationFunction::check_range(double tau) const {
    if (!delays_.contains(tau)) {
        std::ostringstream os;
        os << "tau = " << tau << " outside [" << delays_.front() << ", " << delays_.back() << "]";
        throw Error(ErrorCode::DelayOutsideTabulatedRange, os.str());
    }
}

double CorrelationFunction::at(double tau) const {
    check_range(tau);
    if (tau == 0.0) return 1.0;
    return (raw(tau) / g0_).real();
}

double CorrelationFunction::with_carrier(double tau, double pump_frequency) const {
    check_range(tau);
    if (tau == 0.0) return 1.0;
    return (std::polar(1.0, pump_frequency * tau) * raw(tau) / g0_).real();
}

CorrelationFunction correlation_function(const SpectralDensity& density, const UniformGrid& delay_grid) {
    return CorrelationFunction(density, delay_grid);
}

}  // namespace biphoton
