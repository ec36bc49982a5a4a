// time_engine.hpp — time-domain route to the coincidence rate: eight shifted two-photon
// amplitudes, the joint temporal intensity, and a term-by-term audit of its integral

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "biphoton/freq_engine.hpp"
#include "biphoton/grid.hpp"
#include "biphoton/spectral_model.hpp"

namespace biphoton {

struct TemporalAmplitude {
    int index{1};         // 1..8
    double shift_s{0.0};  // A_k is evaluated at (ts + shift_s, ti + shift_i)
    double shift_i{0.0};
    int sign{+1};
};

std::array<TemporalAmplitude, 8> temporal_amplitudes(DelayPair delays);

// Integration grid in rotated time coordinates u = ts + ti, v = ts − ti (dts dti = ½ du dv).
struct TimeGrid {
    UniformGrid u;
    UniformGrid v;
};

// Spans every packet centre ± 8/σ+ on u and ± 8/σ− on v, with Δu ≤ π/(2ωp), Δv ≤ 0.5/σ−.
TimeGrid auto_time_grid(const JointSpectralAmplitude& jsa, DelayPair delays);
// Throws TimeGridTooCoarse / TimeGridTooNarrow.
void validate_time_grid(const JointSpectralAmplitude& jsa, DelayPair delays, const TimeGrid& grid);

// Time-domain amplitude A(ts, ti), the Fourier transform of the JSA (analytic for the Gaussian
// model, zero-padded 2-D FFT for tables). Symmetric JSAs only: the eight-amplitude sum equals the
// frequency-domain amplitude only under exchange symmetry.
class TemporalModel {
public:
    explicit TemporalModel(const JointSpectralAmplitude& jsa);

    const JointSpectralAmplitude& jsa() const noexcept { return jsa_; }
    complex amplitude(double ts, double ti) const;
    complex wavefunction(double ts, double ti, DelayPair delays) const;

    // 8×8 overlap matrix G_kl = ∫∫ A_k* A_l dts dti (unsigned), row-major.
    std::array<complex, 64> overlaps(DelayPair delays, const std::optional<TimeGrid>& grid = std::nullopt) const;
    // ∫∫|A|² dts dti of a single amplitude: πσ+σ− for the Gaussian model.
    double single_norm() const;

private:
    struct Fft {
        std::size_t n{0};
        double dt{0.0};
        double step{0.0};
        double start{0.0};
        std::vector<complex> baseband;  // a(ts, ti) on the periodic (ts, ti) grid
    };
    std::array<complex, 64> overlaps_gaussian(DelayPair delays, const TimeGrid& grid) const;
    std::array<complex, 64> overlaps_table(DelayPair delays) const;

    JointSpectralAmplitude jsa_;
    std::optional<Fft> fft_;
};

complex base_amplitude(const JointSpectralAmplitude& jsa, double ts, double ti);
complex effective_wavefunction(const JointSpectralAmplitude& jsa, double ts, double ti, DelayPair delays);

// ∫∫|Ψ|² normalized by 8πσ+σ− (Gaussian) or by the eight modulus terms (tables).
double rate_from_time_domain(const JointSpectralAmplitude& jsa, DelayPair delays,
                             const std::optional<TimeGrid>& grid = std::nullopt);
double rate_from_time_domain(const TemporalModel& model, DelayPair delays,
                             const std::optional<TimeGrid>& grid = std::nullopt);

struct JointTemporalIntensity {
    UniformGrid ts;
    UniformGrid ti;
    std::vector<double> values;  // row-major, ts outer
};

JointTemporalIntensity joint_temporal_intensity(const JointSpectralAmplitude& jsa, DelayPair delays,
                                                const UniformGrid& ts, const UniformGrid& ti);
void write_jti_csv(const JointTemporalIntensity& jti, const std::string& path);

struct AuditTerm {
    std::string label;  // e.g. "-A3*A6"
    complex value;      // normalized integral
};

struct AuditGroup {
    std::string name;
    std::vector<AuditTerm> terms;
    double sum{0.0};       // normalized
    double expected{0.0};  // matching term of the correlation-function form
};

struct CrossTermAudit {
    DelayPair delays;
    double normalization{0.0};           // 8πσ+σ− (Gaussian) or measured
    double baseline_group{0.0};          // eight modulus terms / normalization
    double normalization_discrepancy{0.0};
    std::array<AuditGroup, 4> groups;    // second, third, fourth, last_two
    double residual{0.0};                // 40 remaining cross terms / normalization
    double total{0.0};                   // normalized rate
};

// Gaussian models: expected values come from the closed form; tables use their g± functions.
CrossTermAudit audit_cross_terms(const JointSpectralAmplitude& jsa, DelayPair delays,
                                 const std::optional<TimeGrid>& grid = std::nullopt);

}  // namespace biphoton
