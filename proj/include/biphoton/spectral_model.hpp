// spectral_model.hpp — joint spectral amplitudes, exchange symmetry, collective-coordinate
// densities F(Ω±) and their normalized correlation functions g±(τ)

#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "biphoton/grid.hpp"

namespace biphoton {

using complex = std::complex<double>;

struct Symmetry {
    enum class Kind { Symmetric, Antisymmetric, Anyonic };
    Kind kind{Kind::Symmetric};
    double phase{0.0};  // radians, Anyonic only

    static Symmetry symmetric() { return {Kind::Symmetric, 0.0}; }
    static Symmetry antisymmetric() { return {Kind::Antisymmetric, 0.0}; }
    static Symmetry anyonic(double phi) { return {Kind::Anyonic, phi}; }

    // Multiplier applied to an exchange-symmetric base amplitude; depends only on sgn(Ωs − Ωi).
    // Anyonic(φ) uses e^{i(φ/2)sgn}, so f(a,b) = e^{iφ} f(b,a) whenever a > b.
    complex factor(double omega_minus) const noexcept;
};

std::string to_string(const Symmetry& s);
Symmetry parse_symmetry(const std::string& name, double phase = 0.0);

enum class ModelKind { GaussianProduct, TabulatedGrid };

// Complex table over signal/idler detunings, row-major: values[i * idler.size + j]
// holds f at (signal[i], idler[j]).
struct ComplexTable {
    UniformGrid signal;
    UniformGrid idler;
    std::vector<complex> values;
};

class JointSpectralAmplitude {
public:
    ModelKind kind() const noexcept { return kind_; }
    // For tabulated models these are the rms widths of the marginal densities.
    double sigma_plus() const noexcept { return sigma_plus_; }
    double sigma_minus() const noexcept { return sigma_minus_; }
    double pump_frequency() const noexcept { return pump_; }
    const Symmetry& symmetry() const noexcept { return symmetry_; }
    bool is_symmetric() const noexcept { return symmetry_.kind == Symmetry::Kind::Symmetric; }

    // Absolute angular frequencies.
    complex evaluate(double omega_s, double omega_i) const;
    // Detunings from ωp/2.
    complex evaluate_detuning(double d_s, double d_i) const;

    // Tabulated models only: the projected, normalized table (square, shared axis).
    const ComplexTable& table() const;
    complex node(std::size_t i, std::size_t j) const;

    // Copy with a different exchange symmetry (tabulated tables are re-projected from the source).
    JointSpectralAmplitude with_symmetry(const Symmetry& s) const;

private:
    friend JointSpectralAmplitude make_gaussian_jsa(double, double, double, const Symmetry&);
    friend JointSpectralAmplitude make_tabulated_jsa(const ComplexTable&, double, const Symmetry&);

    struct TableData {
        ComplexTable source;     // as supplied
        ComplexTable projected;  // symmetrized + normalized
    };

    complex tabulated_base(double d_s, double d_i) const;

    ModelKind kind_{ModelKind::GaussianProduct};
    double sigma_plus_{1.0};
    double sigma_minus_{1.0};
    double pump_{200.0};
    Symmetry symmetry_{};
    std::shared_ptr<const TableData> table_;
};

// f(Ω+, Ω−) = exp(−Ω+²/4σ+²)·exp(−Ω−²/4σ−²), times the symmetry factor.
JointSpectralAmplitude make_gaussian_jsa(double sigma_plus, double sigma_minus, double pump_frequency,
                                         const Symmetry& symmetry = Symmetry::symmetric());

// The table must be square with identical signal and idler axes (so the exchange
// projection is exact on the nodes). It is projected onto the requested symmetry
// and rescaled so that ΣΣ|f|²·ΔΩs·ΔΩi = 1.
JointSpectralAmplitude make_tabulated_jsa(const ComplexTable& table, double pump_frequency,
                                          const Symmetry& symmetry = Symmetry::symmetric());

// CSV with header omega_s,omega_i,re,im; omega columns are absolute frequencies,
// stored row-major (omega_s outer). Returned axes are detunings from ωp/2.
ComplexTable load_tabulated_csv(const std::string& path, double pump_frequency);

enum class Coordinate { Sum, Difference };
std::string to_string(Coordinate c);

struct SpectralDensity {
    Coordinate coordinate{Coordinate::Sum};
    UniformGrid detunings;
    std::vector<double> values;
};

// Default grid: ±8σ with 4096 points (Gaussian) or the native rotated lattice (tabulated).
SpectralDensity spectral_density(const JointSpectralAmplitude& jsa, Coordinate coordinate,
                                 const std::optional<UniformGrid>& grid = std::nullopt);

// Rank-1 residual ‖M − s₁u₁v₁ᵀ‖_F / ‖M‖_F of |f|² on the rotated sublattices (max of the two).
double factorization_residual(const JointSpectralAmplitude& jsa);
constexpr double kFactorizationTolerance = 1e-6;

class CorrelationFunction {
public:
    CorrelationFunction(SpectralDensity density, UniformGrid delays);

    Coordinate coordinate() const noexcept { return density_.coordinate; }
    const UniformGrid& delays() const noexcept { return delays_; }
    const std::vector<double>& g_values() const noexcept { return g_; }
    const SpectralDensity& density() const noexcept { return density_; }

    // G(τ) = (1/√2π)∫F(Ω)e^{iΩτ}dΩ by trapezoid on the density grid.
    complex raw(double tau) const;
    double g0() const noexcept { return g0_; }
    // g(τ) = Re[G(τ)/G(0)], evaluated directly (no interpolation) for τ within the delay grid.
    double at(double tau) const;
    // Re[e^{iωpτ}G(τ)/G(0)]: the sum-coordinate term with its optical carrier restored.
    double with_carrier(double tau, double pump_frequency) const;

private:
    void check_range(double tau) const;

    SpectralDensity density_;
    UniformGrid delays_;
    std::vector<double> g_;
    double g0_{1.0};
};

CorrelationFunction correlation_function(const SpectralDensity& density, const UniformGrid& delay_grid);

}  // namespace biphoton
