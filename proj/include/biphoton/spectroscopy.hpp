// spectroscopy.hpp — inverse problem: envelopes, collective-coordinate spectra, JSI and
// correlation class recovered from a single τ2-scan interferogram

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "biphoton/freq_engine.hpp"
#include "biphoton/spectral_model.hpp"

namespace biphoton {

// Carrier demodulation of a τ2 scan: low-pass (|ω| < ωp/4) part and complex baseband of the
// band ωp/2 < ω < 3ωp/2 (analytic signal shifted down by e^{-iωpτ}).
struct Demodulation {
    UniformGrid delays;
    std::vector<double> lowpass;
    std::vector<complex> baseband;
    double pump_frequency{0.0};
};

Demodulation demodulate(const Interferogram& ig);

struct EnvelopePair {
    UniformGrid delays;
    std::vector<double> upper;
    std::vector<double> lower;
};

constexpr double kEnvelopeNoiseFloor = 1e-5;

// Packets count as separated when σ+τ1 ≥ 5; the check runs on estimates, so it gets 10% slack.
constexpr double kMinEstimatedSeparation = 4.5;

EnvelopePair extract_envelopes(const Interferogram& ig);

struct GaussianFit {
    double sigma{0.0};   // y ∝ exp(−(x − centre)²/2σ²)
    double centre{0.0};
    std::size_t points{0};
};

// Least-squares parabola through log y on the contiguous region around the maximum where
// y ≥ fraction·max.
GaussianFit fit_gaussian_log_parabola(const std::vector<double>& x, const std::vector<double>& y,
                                      double fraction = 0.6);

struct TimeScales {
    double envelope_width{0.0};   // side-packet envelope, standard-deviation width
    double dip_width{0.0};        // central dip, standard-deviation width
    double half_separation{0.0};  // τ1
    double separation() const noexcept { return 2.0 * half_separation; }
};

struct JointSpectralIntensity {
    UniformGrid plus;   // rows, Ω+
    UniformGrid minus;  // columns, Ω−
    std::vector<double> values;
};

struct ReconstructionResult {
    SpectralDensity f_plus;
    SpectralDensity f_minus;
    JointSpectralIntensity jsi;
    double sigma_plus_hat{0.0};
    double sigma_minus_hat{0.0};
    double tau1_hat{0.0};
    TimeScales time_scales;
    double central_visibility{0.0};
    double side_visibility{0.0};
    // max |R_N − closed form at the fitted parameters| over the scan
    double resynthesis_residual{0.0};
};

enum class CorrelationVerdict { AntiCorrelated, Correlated, Uncorrelated };
std::string to_string(CorrelationVerdict v);

struct CorrelationClass {
    CorrelationVerdict verdict{CorrelationVerdict::Uncorrelated};
    double ratio_hat{1.0};
};

std::pair<SpectralDensity, SpectralDensity> recover_spectra(const Interferogram& ig);
ReconstructionResult reconstruct(const Interferogram& ig);

// Outer product on rotated coordinates.
JointSpectralIntensity reconstruct_jsi(const SpectralDensity& f_plus, const SpectralDensity& f_minus);
// Same product resampled onto signal/idler detunings: JSI(Ωs, Ωi) = F+(Ωs+Ωi)·F−(Ωs−Ωi).
JointSpectralIntensity jsi_signal_idler(const SpectralDensity& f_plus, const SpectralDensity& f_minus,
                                        const UniformGrid& axis);

CorrelationClass classify_ratio(double ratio_hat);
CorrelationClass classify_correlation(const ReconstructionResult& result);

TimeScales estimate_time_scales(const Interferogram& ig);

struct PacketVisibility {
    double central{0.0};
    double side{0.0};
    double tau1_hat{0.0};
};

// Oscillation amplitude (upper − lower)/2 relative to the unit baseline, at τ2 = 0 and τ2 = τ1_hat.
PacketVisibility packet_visibility(const Interferogram& ig);

}  // namespace biphoton
