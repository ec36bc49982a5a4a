// freq_engine.hpp — coincidence rates of the combined NOON+HOM interferometer and of the
// stand-alone HOM / NOON interferometers, by quadrature and by closed form

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "biphoton/grid.hpp"
#include "biphoton/spectral_model.hpp"

namespace biphoton {

struct DelayPair {
    double tau1{0.0};  // NOON arm
    double tau2{0.0};  // HOM arm
};

struct QuadratureSpec {
    std::size_t nodes_per_panel{16};
    double max_phase_per_panel{8.0};  // radians of the fastest phase across one panel
    double truncation_sigmas{8.0};
    std::size_t min_panels{16};
    // Force a panel count per rotated axis (Ω+, Ω−); checked against the resolution rule.
    std::optional<std::size_t> panels_plus;
    std::optional<std::size_t> panels_minus;
    // Repeat with half the panels (Gauss–Legendre) to report |Q_n − Q_n/2|.
    bool estimate_error{false};
};

struct QuadratureResult {
    double value{0.0};
    double error_estimate{0.0};
    std::size_t evaluations{0};
};

// Integrand r(ωs, ωi; τ1, τ2) of the coincidence rate (absolute frequencies).
double coincidence_density(const JointSpectralAmplitude& jsa, double omega_s, double omega_i, DelayPair delays);
// Large-delay average of the density: 16(|f(ωs,ωi)|² + |f(ωi,ωs)|²).
double baseline_density(const JointSpectralAmplitude& jsa, double omega_s, double omega_i);

// R = (1/64)∫∫ r dωs dωi, unnormalized.
QuadratureResult rate_quadrature(const JointSpectralAmplitude& jsa, DelayPair delays, const QuadratureSpec& quad = {});
// (1/64)∫∫ of the baseline density.
QuadratureResult baseline_rate(const JointSpectralAmplitude& jsa, const QuadratureSpec& quad = {});
double normalize(double raw_rate, double baseline);
// Rate and baseline integrated on the same nodes, then divided.
QuadratureResult normalized_rate_quadrature(const JointSpectralAmplitude& jsa, DelayPair delays,
                                            const QuadratureSpec& quad = {});

// Normalized rate written in g+ and g-; sum-coordinate terms carry the carrier e^{iωpτ}.
double rate_factorized(const CorrelationFunction& g_plus, const CorrelationFunction& g_minus,
                       double pump_frequency, DelayPair delays);

struct GaussianParams {
    double sigma_plus{1.0};
    double sigma_minus{1.0};
    double pump_frequency{200.0};
};

double rate_gaussian_closed(const GaussianParams& p, DelayPair delays);
// Large-τ1 form (central carrier packet, HOM dip, two side packets).
double rate_asymptotic_tau1(const GaussianParams& p, DelayPair delays);
// Large-τ2 form (two side packets only).
double rate_asymptotic_tau2(const GaussianParams& p, DelayPair delays);

// Stand-alone interferometers, normalized so that the large-delay baseline is 1.
QuadratureResult homi_rate(const JointSpectralAmplitude& jsa, double tau, const QuadratureSpec& quad = {});
QuadratureResult nooni_rate(const JointSpectralAmplitude& jsa, double tau, const QuadratureSpec& quad = {});
double homi_density(const JointSpectralAmplitude& jsa, double omega_s, double omega_i, double tau);
double nooni_density(const JointSpectralAmplitude& jsa, double omega_s, double omega_i, double tau);

enum class ScanAxis { Tau2AtFixedTau1, Tau1AtFixedTau2, Grid2D };
enum class Engine { Quadrature, ClosedForm, TimeDomain };
std::string to_string(ScanAxis a);
std::string to_string(Engine e);

struct InterferogramMetadata {
    std::string model_kind;
    std::string symmetry;
    double symmetry_phase{0.0};
    double sigma_plus{1.0};
    double sigma_minus{1.0};
    double pump_frequency{200.0};
    double delay_spacing{0.0};
    double frequency_scale{1.0};  // physical σ+ that maps to 1 in working units
    std::string formula;          // e.g. "closed", "asymptotic_tau1", "quadrature"
};

struct Interferogram {
    ScanAxis scan_axis{ScanAxis::Tau2AtFixedTau1};
    std::optional<double> fixed_delay;
    UniformGrid delays;                 // τ2 (Tau2AtFixedTau1), τ1 (Tau1AtFixedTau2), or τ1 rows (Grid2D)
    std::optional<UniformGrid> delays2;  // τ2 columns for Grid2D
    std::vector<double> rates;          // row-major for Grid2D
    Engine engine{Engine::ClosedForm};
    InterferogramMetadata metadata;

    DelayPair pair_at(std::size_t index) const;
    std::size_t size() const noexcept { return rates.size(); }
};

Interferogram rate_asymptotic_fixed_tau1(const GaussianParams& p, double tau1, const UniformGrid& tau2_grid);
Interferogram rate_asymptotic_fixed_tau2(const GaussianParams& p, double tau2, const UniformGrid& tau1_grid);

}  // namespace biphoton
