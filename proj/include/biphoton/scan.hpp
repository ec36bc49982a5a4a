// scan.hpp — experiment description and the delay-scan driver shared by every engine

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "biphoton/freq_engine.hpp"
#include "biphoton/spectral_model.hpp"

namespace biphoton {

struct ModelConfig {
    ModelKind kind{ModelKind::GaussianProduct};
    double sigma_plus{1.0};
    double sigma_minus{1.0};
    double pump_frequency{200.0};
    Symmetry symmetry{};
    std::string table_path;  // TabulatedGrid: CSV omega_s,omega_i,re,im
};

struct ScanSpec {
    ScanAxis axis{ScanAxis::Tau2AtFixedTau1};
    double fixed_delay{0.0};
    double min{-10.0};
    double max{10.0};
    std::size_t points{4096};
    // Grid2D only: second (τ2) axis
    double min2{-10.0};
    double max2{10.0};
    std::size_t points2{0};
};

enum class EngineChoice { Auto, Quadrature, ClosedForm, TimeDomain, All };
std::string to_string(EngineChoice e);
EngineChoice parse_engine(const std::string& name);

struct OutputConfig {
    std::string path;  // prefix; files are <path>.csv and <path>.json
    bool emit_plot_data{false};
};

// All quantities in the units the user supplied; conversion to working units (σ+ = 1)
// happens in resolve_model / scan.
struct ScanConfig {
    ModelConfig model;
    ScanSpec scan;
    EngineChoice engine{EngineChoice::Auto};
    QuadratureSpec quadrature;
    OutputConfig output;
    std::string preset;  // empty unless injected by a preset
};

struct ResolvedModel {
    JointSpectralAmplitude jsa;  // working units
    double frequency_scale{1.0};  // physical σ+ (rms width for tables)
};

ResolvedModel resolve_model(const ModelConfig& m);

// Checks structural invariants and the delay-sampling Nyquist bound
// spacing ≤ π/(ωp + 8σ+)/2; throws InvalidConfig / NyquistViolated / parameter errors.
void validate(const ScanConfig& c);

// Engines the configuration asks for (Auto and All resolved against the model).
std::vector<Engine> resolve_engines(const ScanConfig& c);

Interferogram scan(const ScanConfig& c, Engine engine);
Interferogram scan(const ScanConfig& c);  // first resolved engine

// Default τ2 scan around a fixed τ1: half-range max(2|τ1|, 10/σ+, 6/σ−) and the smallest
// power-of-two point count meeting the Nyquist bound.
ScanSpec default_tau2_scan(double sigma_plus, double sigma_minus, double pump_frequency, double tau1);

// Worker count: BIPHOTON_THREADS if set (≥ 1), else hardware concurrency.
std::size_t worker_count(std::size_t work_items);

}  // namespace biphoton
