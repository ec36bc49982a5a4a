#include "biphoton/time_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "biphoton/error.hpp"
#include "biphoton/numerics.hpp"

namespace biphoton {

namespace {

constexpr double kPi = std::numbers::pi;

void require_symmetric(const JointSpectralAmplitude& jsa) {
    if (!jsa.is_symmetric()) {
        throw Error(ErrorCode::UnsupportedModel,
                    "time-domain amplitude sum holds for exchange-symmetric JSAs only (got " +
                        to_string(jsa.symmetry()) + ")");
    }
}

struct Span {
    double lo{0.0}, hi{0.0};
};

// Packet centres in (u, v) of the eight shifted amplitudes.
std::pair<Span, Span> centre_span(DelayPair d) {
    const auto amps = temporal_amplitudes(d);
    Span su{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest()};
    Span sv = su;
    for (const auto& a : amps) {
        const double cu = -(a.shift_s + a.shift_i);
        const double cv = -(a.shift_s - a.shift_i);
        su.lo = std::min(su.lo, cu);
        su.hi = std::max(su.hi, cu);
        sv.lo = std::min(sv.lo, cv);
        sv.hi = std::max(sv.hi, cv);
    }
    return {su, sv};
}

constexpr std::array<std::pair<int, int>, 16> kNamedPairs{{
    {3, 6}, {6, 3}, {4, 5}, {5, 4},  // second
    {1, 8}, {8, 1}, {2, 7}, {7, 2},  // third
    {3, 4}, {4, 3}, {5, 6}, {6, 5},  // fourth
    {1, 7}, {7, 1}, {2, 8}, {8, 2},  // last two
}};
constexpr std::array<const char*, 4> kGroupNames{"second", "third", "fourth", "last_two"};

std::string term_label(int k, int l, int sign) {
    // Integrand A_k^* A_l; printed with the conjugate on whichever index carries it.
    std::ostringstream os;
    os << (sign < 0 ? "-" : "+");
    const int a = std::min(k, l), b = std::max(k, l);
    if (k == a) os << "A" << a << "*A" << b;
    else os << "A" << a << "A" << b << "*";
    return os.str();
}

double trapezoid_weight(std::size_t i, std::size_t n, double h) { return (i == 0 || i + 1 == n) ? 0.5 * h : h; }

}  // namespace

std::array<TemporalAmplitude, 8> temporal_amplitudes(DelayPair d) {
    const double t1 = d.tau1, t2 = d.tau2;
    return {{
        {1, 0.0, 0.0, +1},
        {2, t1, t1, -1},
        {3, 0.0, t2, +1},
        {4, t2, 0.0, -1},
        {5, t1, t1 + t2, +1},
        {6, t1 + t2, t1, -1},
        {7, t1 + t2, t1 + t2, +1},
        {8, t2, t2, -1},
    }};
}

TimeGrid auto_time_grid(const JointSpectralAmplitude& jsa, DelayPair d) {
    const auto [su, sv] = centre_span(d);
    const double mu = 8.0 / jsa.sigma_plus();
    const double mv = 8.0 / jsa.sigma_minus();
    const double du = kPi / (2.0 * jsa.pump_frequency());
    const double dv = 0.5 / jsa.sigma_minus();
    const double ulo = su.lo - mu, uhi = su.hi + mu;
    const double vlo = sv.lo - mv, vhi = sv.hi + mv;
    const auto nu = static_cast<std::size_t>(std::ceil((uhi - ulo) / du)) + 1;
    const auto nv = static_cast<std::size_t>(std::ceil((vhi - vlo) / dv)) + 1;
    return {UniformGrid::from_range(ulo, uhi, nu), UniformGrid::from_range(vlo, vhi, nv)};
}

void validate_time_grid(const JointSpectralAmplitude& jsa, DelayPair d, const TimeGrid& g) {
    const double du = kPi / (2.0 * jsa.pump_frequency());
    const double dv = 0.5 / jsa.sigma_minus();
    if (g.u.step > du * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "u spacing " << g.u.step << " > pi/(2 wp) = " << du;
        throw Error(ErrorCode::TimeGridTooCoarse, os.str());
    }
    if (g.v.step > dv * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "v spacing " << g.v.step << " > 0.5/sigma_minus = " << dv;
        throw Error(ErrorCode::TimeGridTooCoarse, os.str());
    }
    const auto [su, sv] = centre_span(d);
    const double mu = 8.0 / jsa.sigma_plus();
    const double mv = 8.0 / jsa.sigma_minus();
    const double slack = 1e-9;
    if (g.u.front() > su.lo - mu + slack || g.u.back() < su.hi + mu - slack) {
        throw Error(ErrorCode::TimeGridTooNarrow, "u grid does not cover packet centres +/- 8/sigma_plus");
    }
    if (g.v.front() > sv.lo - mv + slack || g.v.back() < sv.hi + mv - slack) {
        throw Error(ErrorCode::TimeGridTooNarrow, "v grid does not cover packet centres +/- 8/sigma_minus");
    }
}

// ---------------------------------------------------------------------------

TemporalModel::TemporalModel(const JointSpectralAmplitude& jsa) : jsa_(jsa) {
    require_symmetric(jsa_);
    if (jsa_.kind() != ModelKind::TabulatedGrid) return;
    const ComplexTable& t = jsa_.table();
    const std::size_t n = t.signal.size;
    Fft f;
    f.n = std::max<std::size_t>(64, numerics::next_pow2(4 * n));
    f.step = t.signal.step;
    f.start = t.signal.start;
    f.dt = 2.0 * kPi / (static_cast<double>(f.n) * f.step);
    const std::size_t jc = n / 2;
    const double centre = f.start + static_cast<double>(jc) * f.step;
    numerics::cvec buf(f.n * f.n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t r = (j + f.n - jc) % f.n;
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t c = (k + f.n - jc) % f.n;
            buf[r * f.n + c] = t.values[j * n + k];
        }
    }
    const auto spec = numerics::fft2(buf, f.n, f.n);
    const double scale = f.step * f.step / (2.0 * kPi);
    f.baseband.resize(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) f.baseband[k] = scale * spec[k];
    f.start = centre;  // detuning of the array origin, restored as e^{-i centre (ts+ti)}
    fft_ = std::move(f);
}

complex TemporalModel::amplitude(double ts, double ti) const {
    const double wp = jsa_.pump_frequency();
    const complex carrier = std::polar(1.0, -0.5 * wp * (ts + ti));
    if (!fft_) {
        const double sp = jsa_.sigma_plus(), sm = jsa_.sigma_minus();
        const double u = ts + ti, v = ts - ti;
        return sp * sm * carrier * std::exp(-0.25 * sp * sp * u * u - 0.25 * sm * sm * v * v);
    }
    const Fft& f = *fft_;
    const double period = static_cast<double>(f.n) * f.dt;
    if (std::abs(ts) > 0.5 * period || std::abs(ti) > 0.5 * period) return 0.0;
    auto locate = [&](double t, std::size_t& k, double& frac) {
        double pos = t / f.dt;
        pos -= std::floor(pos / static_cast<double>(f.n)) * static_cast<double>(f.n);
        k = static_cast<std::size_t>(pos) % f.n;
        frac = pos - std::floor(pos);
    };
    std::size_t m, q;
    double fm, fq;
    locate(ts, m, fm);
    locate(ti, q, fq);
    const std::size_t m1 = (m + 1) % f.n, q1 = (q + 1) % f.n;
    const auto at = [&](std::size_t a, std::size_t b) { return f.baseband[a * f.n + b]; };
    const complex v = (1.0 - fm) * ((1.0 - fq) * at(m, q) + fq * at(m, q1)) +
                      fm * ((1.0 - fq) * at(m1, q) + fq * at(m1, q1));
    return carrier * std::polar(1.0, -f.start * (ts + ti)) * v;
}

complex TemporalModel::wavefunction(double ts, double ti, DelayPair d) const {
    complex psi = 0.0;
    for (const auto& a : temporal_amplitudes(d)) {
        psi += static_cast<double>(a.sign) * amplitude(ts + a.shift_s, ti + a.shift_i);
    }
    return psi;
}

double TemporalModel::single_norm() const {
    if (!fft_) return kPi * jsa_.sigma_plus() * jsa_.sigma_minus();
    return 1.0;  // tables are normalized to unit ∫∫|f|²
}

std::array<complex, 64> TemporalModel::overlaps(DelayPair d, const std::optional<TimeGrid>& grid) const {
    if (!std::isfinite(d.tau1) || !std::isfinite(d.tau2)) throw Error(ErrorCode::InvalidConfig, "delays must be finite");
    if (fft_) return overlaps_table(d);
    const TimeGrid g = grid ? *grid : auto_time_grid(jsa_, d);
    validate_time_grid(jsa_, d, g);
    return overlaps_gaussian(d, g);
}

std::array<complex, 64> TemporalModel::overlaps_gaussian(DelayPair d, const TimeGrid& g) const {
    const auto amps = temporal_amplitudes(d);
    const double sp = jsa_.sigma_plus(), sm = jsa_.sigma_minus(), wp = jsa_.pump_frequency();
    const std::size_t nu = g.u.size, nv = g.v.size;
    std::array<std::vector<complex>, 8> U, V;
    for (std::size_t k = 0; k < 8; ++k) {
        const double su = amps[k].shift_s + amps[k].shift_i;
        const double sv = amps[k].shift_s - amps[k].shift_i;
        U[k].resize(nu);
        V[k].resize(nv);
        for (std::size_t i = 0; i < nu; ++i) {
            const double u = g.u[i] + su;
            U[k][i] = std::polar(std::exp(-0.25 * sp * sp * u * u), -0.5 * wp * u);
        }
        for (std::size_t j = 0; j < nv; ++j) {
            const double v = g.v[j] + sv;
            V[k][j] = sp * sm * std::exp(-0.25 * sm * sm * v * v);
        }
    }
    auto inner = [](const std::vector<complex>& a, const std::vector<complex>& b, const UniformGrid& grid) {
        const std::size_t n = a.size();
        std::vector<double> re(n), im(n);
        for (std::size_t i = 0; i < n; ++i) {
            const complex p = std::conj(a[i]) * b[i] * trapezoid_weight(i, n, grid.step);
            re[i] = p.real();
            im[i] = p.imag();
        }
        return complex(numerics::pairwise_sum(re), numerics::pairwise_sum(im));
    };
    std::array<complex, 64> G{};
    for (std::size_t k = 0; k < 8; ++k) {
        for (std::size_t l = k; l < 8; ++l) {
            // dts dti = ½ du dv on the tensor grid; the 2-D sum factorizes exactly.
            const complex v = 0.5 * inner(U[k], U[l], g.u) * inner(V[k], V[l], g.v);
            G[k * 8 + l] = v;
            G[l * 8 + k] = std::conj(v);
        }
    }
    return G;
}

std::array<complex, 64> TemporalModel::overlaps_table(DelayPair d) const {
    const ComplexTable& t = jsa_.table();
    const std::size_t n = t.signal.size;
    const double h = t.signal.step;
    const auto amps = temporal_amplitudes(d);
    double reach = 0.0;
    for (const auto& a : amps) reach = std::max({reach, std::abs(a.shift_s), std::abs(a.shift_i)});
    reach += 8.0 / std::min(jsa_.sigma_plus(), jsa_.sigma_minus());
    if (reach > kPi / h) {
        std::ostringstream os;
        os << "delays + 8/sigma = " << reach << " exceed the table's time window pi/h = " << kPi / h;
        throw Error(ErrorCode::TimeGridTooNarrow, os.str());
    }
    const std::size_t N = std::max<std::size_t>(64, numerics::next_pow2(2 * n));
    const double dt = 2.0 * kPi / (static_cast<double>(N) * h);
    const std::size_t jc = n / 2;
    const double scale = h * h / (2.0 * kPi);
    std::array<numerics::cvec, 8> b;
    for (std::size_t k = 0; k < 8; ++k) {
        numerics::cvec buf(N * N, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const complex ps = std::polar(1.0, -t.signal[j] * amps[k].shift_s);
            const std::size_t r = (j + N - jc) % N;
            for (std::size_t l = 0; l < n; ++l) {
                const complex pi_ = std::polar(1.0, -t.idler[l] * amps[k].shift_i);
                buf[r * N + (l + N - jc) % N] = t.values[j * n + l] * ps * pi_;
            }
        }
        b[k] = numerics::fft2(buf, N, N);
    }
    const double wp = jsa_.pump_frequency();
    std::array<complex, 64> G{};
    std::vector<double> re(N * N), im(N * N);
    for (std::size_t k = 0; k < 8; ++k) {
        for (std::size_t l = k; l < 8; ++l) {
            for (std::size_t i = 0; i < N * N; ++i) {
                const complex p = std::conj(b[k][i]) * b[l][i];
                re[i] = p.real();
                im[i] = p.imag();
            }
            const double duk = amps[k].shift_s + amps[k].shift_i;
            const double dul = amps[l].shift_s + amps[l].shift_i;
            const complex carrier = std::polar(1.0, -0.5 * wp * (dul - duk));
            const complex v = carrier * scale * scale * dt * dt *
                              complex(numerics::pairwise_sum(re), numerics::pairwise_sum(im));
            G[k * 8 + l] = v;
            G[l * 8 + k] = std::conj(v);
        }
    }
    return G;
}

complex base_amplitude(const JointSpectralAmplitude& jsa, double ts, double ti) {
    return TemporalModel(jsa).amplitude(ts, ti);
}

complex effective_wavefunction(const JointSpectralAmplitude& jsa, double ts, double ti, DelayPair d) {
    return TemporalModel(jsa).wavefunction(ts, ti, d);
}

namespace {

double signed_total(const std::array<complex, 64>& G, const std::array<TemporalAmplitude, 8>& amps) {
    std::array<double, 64> terms{};
    for (std::size_t k = 0; k < 8; ++k) {
        for (std::size_t l = 0; l < 8; ++l) {
            terms[k * 8 + l] = static_cast<double>(amps[k].sign * amps[l].sign) * G[k * 8 + l].real();
        }
    }
    return numerics::pairwise_sum(terms);
}

double normalization_of(const TemporalModel& m, const std::array<complex, 64>& G) {
    if (m.jsa().kind() == ModelKind::GaussianProduct) return 8.0 * m.single_norm();
    double s = 0.0;
    for (std::size_t k = 0; k < 8; ++k) s += G[k * 9].real();
    return s;
}

}  // namespace

double rate_from_time_domain(const TemporalModel& model, DelayPair d, const std::optional<TimeGrid>& grid) {
    const auto G = model.overlaps(d, grid);
    const double total = signed_total(G, temporal_amplitudes(d));
    if (total < -1e-12 * normalization_of(model, G)) {
        throw Error(ErrorCode::AuditFailed, "integrated joint temporal intensity is negative");
    }
    return total / normalization_of(model, G);
}

double rate_from_time_domain(const JointSpectralAmplitude& jsa, DelayPair d, const std::optional<TimeGrid>& grid) {
    return rate_from_time_domain(TemporalModel(jsa), d, grid);
}

JointTemporalIntensity joint_temporal_intensity(const JointSpectralAmplitude& jsa, DelayPair d, const UniformGrid& ts,
                                                const UniformGrid& ti) {
    const TemporalModel m(jsa);
    JointTemporalIntensity out{ts, ti, std::vector<double>(ts.size * ti.size)};
    for (std::size_t a = 0; a < ts.size; ++a) {
        for (std::size_t b = 0; b < ti.size; ++b) out.values[a * ti.size + b] = std::norm(m.wavefunction(ts[a], ti[b], d));
    }
    return out;
}

void write_jti_csv(const JointTemporalIntensity& jti, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
    std::fprintf(f, "ts,ti,intensity\n");
    for (std::size_t a = 0; a < jti.ts.size; ++a) {
        for (std::size_t b = 0; b < jti.ti.size; ++b) {
            std::fprintf(f, "%.17g,%.17g,%.17g\n", jti.ts[a], jti.ti[b], jti.values[a * jti.ti.size + b]);
        }
    }
    if (std::fclose(f) != 0) throw Error(ErrorCode::IoError, "failed writing " + path);
}

CrossTermAudit audit_cross_terms(const JointSpectralAmplitude& jsa, DelayPair d, const std::optional<TimeGrid>& grid) {
    const TemporalModel model(jsa);
    const auto G = model.overlaps(d, grid);
    const auto amps = temporal_amplitudes(d);
    CrossTermAudit out;
    out.delays = d;
    out.normalization = normalization_of(model, G);
    double diag = 0.0;
    for (std::size_t k = 0; k < 8; ++k) diag += G[k * 9].real();
    out.baseline_group = diag / out.normalization;
    out.normalization_discrepancy = std::abs(out.baseline_group - 1.0);

    std::array<bool, 64> named{};
    for (std::size_t g = 0; g < 4; ++g) {
        AuditGroup& grp = out.groups[g];
        grp.name = kGroupNames[g];
        double s = 0.0;
        for (std::size_t t = 0; t < 4; ++t) {
            const auto [k1, l1] = kNamedPairs[g * 4 + t];
            const std::size_t k = static_cast<std::size_t>(k1 - 1), l = static_cast<std::size_t>(l1 - 1);
            const int sign = amps[k].sign * amps[l].sign;
            const complex v = static_cast<double>(sign) * G[k * 8 + l] / out.normalization;
            grp.terms.push_back({term_label(k1, l1, sign), v});
            s += v.real();
            named[k * 8 + l] = true;
        }
        grp.sum = s;
    }
    std::vector<double> rest;
    for (std::size_t k = 0; k < 8; ++k) {
        for (std::size_t l = 0; l < 8; ++l) {
            if (k == l || named[k * 8 + l]) continue;
            rest.push_back(static_cast<double>(amps[k].sign * amps[l].sign) * G[k * 8 + l].real());
        }
    }
    out.residual = numerics::pairwise_sum(rest) / out.normalization;
    out.total = signed_total(G, amps) / out.normalization;

    const double t1 = d.tau1, t2 = d.tau2;
    if (jsa.kind() == ModelKind::GaussianProduct) {
        const GaussianParams p{jsa.sigma_plus(), jsa.sigma_minus(), jsa.pump_frequency()};
        const auto gp = [&](double t) {
            return std::cos(p.pump_frequency * t) * std::exp(-0.5 * p.sigma_plus * p.sigma_plus * t * t);
        };
        const auto gm = [&](double t) { return std::exp(-0.5 * p.sigma_minus * p.sigma_minus * t * t); };
        out.groups[0].expected = -0.5 * gp(t1) * gm(t2);
        out.groups[1].expected = -0.5 * gp(t2);
        out.groups[2].expected = -0.5 * gm(t2);
        out.groups[3].expected = 0.25 * gp(t2 + t1) + 0.25 * gp(t2 - t1);
    } else {
        const auto dp = spectral_density(jsa, Coordinate::Sum);
        const auto dm = spectral_density(jsa, Coordinate::Difference);
        const double reach = std::abs(t1) + std::abs(t2) + 1.0;
        const CorrelationFunction cp(dp, UniformGrid::symmetric(reach, 3));
        const CorrelationFunction cm(dm, UniformGrid::symmetric(reach, 3));
        const double wp = jsa.pump_frequency();
        out.groups[0].expected = -0.5 * cp.with_carrier(t1, wp) * cm.at(t2);
        out.groups[1].expected = -0.5 * cp.with_carrier(t2, wp);
        out.groups[2].expected = -0.5 * cm.at(t2);
        out.groups[3].expected = 0.25 * cp.with_carrier(t2 + t1, wp) + 0.25 * cp.with_carrier(t2 - t1, wp);
    }
    return out;
}

}  // namespace biphoton
