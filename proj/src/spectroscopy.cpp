#include "biphoton/spectroscopy.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "biphoton/error.hpp"
#include "biphoton/numerics.hpp"

namespace biphoton {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kMaxPad = std::size_t{1} << 22;
constexpr int kCleaningPasses = 6;

using numerics::cvec;

double lerp_at(const UniformGrid& g, const std::vector<double>& v, double x) {
    const double pos = std::clamp((x - g.start) / g.step, 0.0, static_cast<double>(g.size - 1));
    const std::size_t k = std::min(static_cast<std::size_t>(pos), g.size - 2);
    const double f = pos - static_cast<double>(k);
    return (1.0 - f) * v[k] + f * v[k + 1];
}

std::size_t nearest_index(const UniformGrid& g, double x) {
    const double pos = std::round((x - g.start) / g.step);
    return static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(g.size - 1)));
}

// x(t) → x(t − a), band-limited shift via a zero-padded FFT.
cvec shift(const cvec& x, double a, double dt) {
    const std::size_t n = x.size();
    const std::size_t m = numerics::next_pow2(2 * n);
    cvec X = numerics::fft(x, m);
    for (std::size_t k = 0; k < m; ++k) X[k] *= std::polar(1.0, -numerics::bin_frequency(k, m, dt) * a);
    cvec y = numerics::ifft(X);
    y.resize(n);
    return y;
}

struct Spectrum {
    UniformGrid omega;
    std::vector<double> magnitude;
};

// |Σ x_k e^{-iω t_k}|·dt on an ascending frequency grid (phase of t_0 irrelevant for |·|).
Spectrum magnitude_spectrum(const cvec& x, double dt, std::size_t pad) {
    const cvec X = numerics::fft(x, pad);
    Spectrum s;
    s.omega = UniformGrid(-kPi / dt, 2.0 * kPi / (static_cast<double>(pad) * dt), pad);
    s.magnitude.resize(pad);
    for (std::size_t k = 0; k < pad; ++k) s.magnitude[k] = std::abs(X[(k + pad / 2) % pad]) * dt;
    return s;
}

struct SpectrumFit {
    Spectrum spectrum;
    GaussianFit fit;
};

// Pads until at least ~64 bins fall within ±σ of the fitted peak.
SpectrumFit fit_spectrum(const cvec& x, double dt) {
    std::size_t pad = std::max<std::size_t>(1024, numerics::next_pow2(4 * x.size()));
    for (int pass = 0; pass < 3; ++pass) {
        Spectrum s = magnitude_spectrum(x, dt, pad);
        GaussianFit f = fit_gaussian_log_parabola(s.omega.values(), s.magnitude);
        const double want = 2.0 * kPi / (dt * f.sigma / 64.0);
        const std::size_t next = std::min(kMaxPad, numerics::next_pow2(static_cast<std::size_t>(std::ceil(want))));
        if (next <= pad) return {std::move(s), f};
        pad = next;
    }
    Spectrum s = magnitude_spectrum(x, dt, pad);
    GaussianFit f = fit_gaussian_log_parabola(s.omega.values(), s.magnitude);
    return {std::move(s), f};
}

SpectralDensity resample_density(const Spectrum& s, Coordinate c, double sigma) {
    const double peak = *std::max_element(s.magnitude.begin(), s.magnitude.end());
    SpectralDensity d;
    d.coordinate = c;
    d.detunings = UniformGrid::symmetric(6.0 * sigma, 257);
    d.values.resize(d.detunings.size);
    for (std::size_t k = 0; k < d.detunings.size; ++k) {
        d.values[k] = std::max(0.0, lerp_at(s.omega, s.magnitude, d.detunings[k]) / peak);
    }
    return d;
}

struct Analysis {
    Demodulation dm;
    std::vector<double> envelope;  // |baseband|
    double tau1_hat{0.0};
};

// Side packet beyond the central one: walk away from τ2 = 0 until the envelope has fallen
// below a tenth of its central value and passed a local minimum, then take the maximum.
std::optional<double> side_peak(const UniformGrid& g, const std::vector<double>& E, std::size_t i0, int dir) {
    const double e0 = E[i0];
    const auto in_range = [&](long i) { return i >= 0 && i < static_cast<long>(E.size()); };
    long i = static_cast<long>(i0);
    while (in_range(i + dir) && E[static_cast<std::size_t>(i)] > 0.1 * e0) i += dir;
    while (in_range(i + dir) && E[static_cast<std::size_t>(i + dir)] < E[static_cast<std::size_t>(i)]) i += dir;
    if (!in_range(i + dir)) return std::nullopt;
    long best = i;
    for (long k = i; in_range(k); k += dir) {
        if (E[static_cast<std::size_t>(k)] > E[static_cast<std::size_t>(best)]) best = k;
    }
    if (best == i || E[static_cast<std::size_t>(best)] < kEnvelopeNoiseFloor) return std::nullopt;
    if (!in_range(best - 1) || !in_range(best + 1)) return std::nullopt;
    // Log-parabola over the top of the packet; a three-point vertex is too noise sensitive.
    std::vector<double> x, y;
    for (long k = i; in_range(k); k += dir) {
        x.push_back(g[static_cast<std::size_t>(k)]);
        y.push_back(E[static_cast<std::size_t>(k)]);
    }
    if (dir < 0) {
        std::reverse(x.begin(), x.end());
        std::reverse(y.begin(), y.end());
    }
    try {
        return fit_gaussian_log_parabola(x, y).centre;
    } catch (const Error&) {
        return g[static_cast<std::size_t>(best)];
    }
}

Analysis analyse(const Interferogram& ig) {
    Analysis a;
    a.dm = demodulate(ig);
    const auto& g = a.dm.delays;
    a.envelope.resize(g.size);
    for (std::size_t k = 0; k < g.size; ++k) a.envelope[k] = std::abs(a.dm.baseband[k]);
    if (!g.contains(0.0)) throw Error(ErrorCode::PacketsOverlap, "scan does not contain tau2 = 0");
    if (lerp_at(g, a.dm.lowpass, 0.0) > 1.0 + 1e-3) {
        throw Error(ErrorCode::AntisymmetricInput,
                    "central structure is a peak above the baseline; only exchange-symmetric inputs are inverted");
    }
    const std::size_t i0 = nearest_index(g, 0.0);
    const auto right = side_peak(g, a.envelope, i0, +1);
    const auto left = side_peak(g, a.envelope, i0, -1);
    if (!right && !left) throw Error(ErrorCode::PacketsOverlap, "no side packet separated from the central packet");
    if (right && left) a.tau1_hat = 0.5 * (*right - *left);
    else a.tau1_hat = right ? *right : -*left;
    return a;
}

// Isolate the +τ1 side packet in the baseband: the central packet and the −τ1 packet are
// shifted, rescaled copies of it, so they are subtracted iteratively.
cvec clean_side_packet(const Analysis& a) {
    const auto& g = a.dm.delays;
    const auto& z = a.dm.baseband;
    const double L = a.tau1_hat;
    const std::size_t n = g.size;
    const complex z0 = a.dm.baseband[nearest_index(g, 0.0)];
    const complex zl = a.dm.baseband[nearest_index(g, L)];
    if (std::abs(z0) < kEnvelopeNoiseFloor || std::abs(zl) < kEnvelopeNoiseFloor) {
        throw Error(ErrorCode::PacketsOverlap, "packet amplitude below the noise floor");
    }
    complex eth = -2.0 * zl / z0;
    eth /= std::abs(eth);
    cvec s(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(g[k] - L) <= 0.5 * L) s[k] = z[k];
    }
    for (int pass = 0; pass < kCleaningPasses; ++pass) {
        const cvec c = shift(s, -L, g.step);
        const cvec m = shift(s, -2.0 * L, g.step);
        for (std::size_t k = 0; k < n; ++k) {
            if (g[k] > 0.25 * L) s[k] = z[k] + (2.0 / eth) * c[k] - m[k] / (eth * eth);
            else s[k] = 0.0;
        }
    }
    return s;
}

cvec positive_half(const UniformGrid& g, const cvec& s) {
    cvec out;
    for (std::size_t k = 0; k < g.size; ++k) {
        if (g[k] > 0.0) out.push_back(s[k]);
    }
    return out;
}

cvec dip_component(const Demodulation& dm) {
    cvec d(dm.lowpass.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = 1.0 - dm.lowpass[k];
    return d;
}

}  // namespace

std::string to_string(CorrelationVerdict v) {
    switch (v) {
        case CorrelationVerdict::AntiCorrelated: return "AntiCorrelated";
        case CorrelationVerdict::Correlated: return "Correlated";
        case CorrelationVerdict::Uncorrelated: return "Uncorrelated";
    }
    return "Uncorrelated";
}

Demodulation demodulate(const Interferogram& ig) {
    if (ig.scan_axis != ScanAxis::Tau2AtFixedTau1) {
        throw Error(ErrorCode::InvalidConfig, "spectroscopy needs a tau2 scan at fixed tau1");
    }
    const std::size_t n = ig.rates.size();
    if (n < 16 || n != ig.delays.size) throw Error(ErrorCode::InvalidConfig, "interferogram too short");
    const double wp = ig.metadata.pump_frequency;
    const double dt = ig.delays.step;
    if (!(wp > 0.0)) throw Error(ErrorCode::NonPositiveParameter, "pump_frequency");
    if (kPi / dt < 1.5 * wp) {
        std::ostringstream os;
        os << "Nyquist frequency " << kPi / dt << " below 1.5*wp = " << 1.5 * wp;
        throw Error(ErrorCode::CarrierNotResolved, os.str());
    }
    cvec x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = ig.rates[k];
    const cvec X = numerics::fft(x);
    double peak = 0.0, peak_w = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = numerics::bin_frequency(k, n, dt);
        if (w > 0.5 * wp && w < 1.5 * wp && std::abs(X[k]) > peak) {
            peak = std::abs(X[k]);
            peak_w = w;
        }
    }
    if (peak < 1e-5 * static_cast<double>(n) || std::abs(peak_w - wp) > 0.25 * wp) {
        std::ostringstream os;
        os << "no spectral peak near the carrier wp = " << wp;
        throw Error(ErrorCode::CarrierNotResolved, os.str());
    }
    cvec low(n, 0.0), band(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = numerics::bin_frequency(k, n, dt);
        if (std::abs(w) < 0.25 * wp) low[k] = X[k];
        if (w > 0.5 * wp && w < 1.5 * wp) band[k] = 2.0 * X[k];
    }
    const cvec lo = numerics::ifft(low);
    const cvec an = numerics::ifft(band);
    Demodulation dm;
    dm.delays = ig.delays;
    dm.pump_frequency = wp;
    dm.lowpass.resize(n);
    dm.baseband.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        dm.lowpass[k] = lo[k].real();
        dm.baseband[k] = an[k] * std::polar(1.0, -wp * ig.delays[k]);
    }
    return dm;
}

EnvelopePair extract_envelopes(const Interferogram& ig) {
    const Demodulation dm = demodulate(ig);
    EnvelopePair e;
    e.delays = dm.delays;
    e.upper.resize(dm.lowpass.size());
    e.lower.resize(dm.lowpass.size());
    for (std::size_t k = 0; k < dm.lowpass.size(); ++k) {
        double amp = std::abs(dm.baseband[k]);
        if (amp < kEnvelopeNoiseFloor) amp = 0.0;
        e.upper[k] = dm.lowpass[k] + amp;
        e.lower[k] = dm.lowpass[k] - amp;
    }
    return e;
}

GaussianFit fit_gaussian_log_parabola(const std::vector<double>& x, const std::vector<double>& y, double fraction) {
    if (x.size() != y.size() || x.size() < 3) throw Error(ErrorCode::InvalidConfig, "fit needs matching samples");
    const std::size_t ip = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    const double ymax = y[ip];
    if (!(ymax > 0.0)) throw Error(ErrorCode::PacketsOverlap, "nothing to fit: non-positive peak");
    std::size_t lo = ip, hi = ip;
    while (lo > 0 && y[lo - 1] >= fraction * ymax) --lo;
    while (hi + 1 < y.size() && y[hi + 1] >= fraction * ymax) ++hi;
    const std::size_t m = hi - lo + 1;
    if (m < 3) throw Error(ErrorCode::PacketsOverlap, "peak too narrow for a log-parabola fit");
    Eigen::MatrixXd A(static_cast<Eigen::Index>(m), 3);
    Eigen::VectorXd b(static_cast<Eigen::Index>(m));
    const double x0 = x[ip];
    for (std::size_t k = 0; k < m; ++k) {
        const double d = x[lo + k] - x0;
        A(static_cast<Eigen::Index>(k), 0) = 1.0;
        A(static_cast<Eigen::Index>(k), 1) = d;
        A(static_cast<Eigen::Index>(k), 2) = d * d;
        b(static_cast<Eigen::Index>(k)) = std::log(y[lo + k] / ymax);
    }
    const Eigen::Vector3d c = A.colPivHouseholderQr().solve(b);
    if (!(c(2) < 0.0)) throw Error(ErrorCode::PacketsOverlap, "log-parabola fit is not concave");
    GaussianFit f;
    f.sigma = std::sqrt(-1.0 / (2.0 * c(2)));
    f.centre = x0 - c(1) / (2.0 * c(2));
    f.points = m;
    return f;
}

std::pair<SpectralDensity, SpectralDensity> recover_spectra(const Interferogram& ig) {
    const ReconstructionResult r = reconstruct(ig);
    return {r.f_plus, r.f_minus};
}

ReconstructionResult reconstruct(const Interferogram& ig) {
    const Analysis a = analyse(ig);
    const auto& g = a.dm.delays;

    const cvec side = clean_side_packet(a);
    const SpectrumFit plus = fit_spectrum(positive_half(g, side), g.step);
    const SpectrumFit minus = fit_spectrum(dip_component(a.dm), g.step);

    ReconstructionResult r;
    r.sigma_plus_hat = plus.fit.sigma;
    r.sigma_minus_hat = minus.fit.sigma;
    r.tau1_hat = a.tau1_hat;
    if (r.sigma_plus_hat * r.tau1_hat < kMinEstimatedSeparation) {
        std::ostringstream os;
        os << "sigma_plus_hat*tau1_hat = " << r.sigma_plus_hat * r.tau1_hat << " < " << kMinEstimatedSeparation;
        throw Error(ErrorCode::PacketsOverlap, os.str());
    }
    r.f_plus = resample_density(plus.spectrum, Coordinate::Sum, r.sigma_plus_hat);
    r.f_minus = resample_density(minus.spectrum, Coordinate::Difference, r.sigma_minus_hat);
    r.jsi = reconstruct_jsi(r.f_plus, r.f_minus);
    r.time_scales = {1.0 / r.sigma_plus_hat, 1.0 / r.sigma_minus_hat, r.tau1_hat};
    r.central_visibility = lerp_at(g, a.envelope, 0.0);
    r.side_visibility = lerp_at(g, a.envelope, r.tau1_hat);

    const double tau1 = ig.fixed_delay.value_or(r.tau1_hat);
    const GaussianParams p{r.sigma_plus_hat, r.sigma_minus_hat, a.dm.pump_frequency};
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size; ++k) {
        worst = std::max(worst, std::abs(ig.rates[k] - rate_gaussian_closed(p, {tau1, g[k]})));
    }
    r.resynthesis_residual = worst;
    return r;
}

JointSpectralIntensity reconstruct_jsi(const SpectralDensity& f_plus, const SpectralDensity& f_minus) {
    const auto ok = [](const SpectralDensity& d) {
        if (d.values.size() != d.detunings.size || d.values.size() < 2) return false;
        return std::all_of(d.values.begin(), d.values.end(), [](double v) { return std::isfinite(v) && v >= 0.0; });
    };
    if (f_plus.coordinate != Coordinate::Sum || f_minus.coordinate != Coordinate::Difference) {
        throw Error(ErrorCode::IncompatibleGrids, "expected (sum, difference) densities");
    }
    if (!ok(f_plus) || !ok(f_minus)) throw Error(ErrorCode::IncompatibleGrids, "density values do not match their grid");
    JointSpectralIntensity j{f_plus.detunings, f_minus.detunings, {}};
    j.values.resize(j.plus.size * j.minus.size);
    for (std::size_t p = 0; p < j.plus.size; ++p) {
        for (std::size_t m = 0; m < j.minus.size; ++m) j.values[p * j.minus.size + m] = f_plus.values[p] * f_minus.values[m];
    }
    return j;
}

JointSpectralIntensity jsi_signal_idler(const SpectralDensity& f_plus, const SpectralDensity& f_minus,
                                        const UniformGrid& axis) {
    reconstruct_jsi(f_plus, f_minus);  // validation
    const auto sample = [](const SpectralDensity& d, double w) {
        if (w < d.detunings.front() || w > d.detunings.back()) return 0.0;
        return lerp_at(d.detunings, d.values, w);
    };
    JointSpectralIntensity j{axis, axis, std::vector<double>(axis.size * axis.size)};
    for (std::size_t a = 0; a < axis.size; ++a) {
        for (std::size_t b = 0; b < axis.size; ++b) {
            j.values[a * axis.size + b] = sample(f_plus, axis[a] + axis[b]) * sample(f_minus, axis[a] - axis[b]);
        }
    }
    return j;
}

CorrelationClass classify_ratio(double ratio_hat) {
    CorrelationClass c;
    c.ratio_hat = ratio_hat;
    if (ratio_hat < 0.5) c.verdict = CorrelationVerdict::AntiCorrelated;
    else if (ratio_hat > 2.0) c.verdict = CorrelationVerdict::Correlated;
    else c.verdict = CorrelationVerdict::Uncorrelated;
    return c;
}

CorrelationClass classify_correlation(const ReconstructionResult& r) {
    return classify_ratio(r.sigma_plus_hat / r.sigma_minus_hat);
}

TimeScales estimate_time_scales(const Interferogram& ig) {
    const Analysis a = analyse(ig);
    const auto& g = a.dm.delays;
    const cvec side = clean_side_packet(a);
    std::vector<double> mag(side.size());
    for (std::size_t k = 0; k < side.size(); ++k) mag[k] = std::abs(side[k]);
    const GaussianFit env = fit_gaussian_log_parabola(g.values(), mag);
    std::vector<double> dip(g.size);
    for (std::size_t k = 0; k < g.size; ++k) dip[k] = 1.0 - a.dm.lowpass[k];
    const GaussianFit d = fit_gaussian_log_parabola(g.values(), dip);
    if (a.tau1_hat / env.sigma < kMinEstimatedSeparation) throw Error(ErrorCode::PacketsOverlap, "side packet overlaps the centre");
    return {env.sigma, d.sigma, a.tau1_hat};
}

PacketVisibility packet_visibility(const Interferogram& ig) {
    const Analysis a = analyse(ig);
    const auto& g = a.dm.delays;
    return {lerp_at(g, a.envelope, 0.0), lerp_at(g, a.envelope, a.tau1_hat), a.tau1_hat};
}

}  // namespace biphoton
