// oracles.hpp — reference values computed without touching the library

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using cd = std::complex<double>;

inline double gp(double sp, double wp, double t) { return std::cos(wp * t) * std::exp(-0.5 * sp * sp * t * t); }
inline double gm(double sm, double t) { return std::exp(-0.5 * sm * sm * t * t); }

// Normalized coincidence rate of the two-delay interferometer for the symmetric
// Gaussian product JSA, written out term by term.
inline double closed_rate(double sp, double sm, double wp, double t1, double t2) {
    return 1.0 - 0.5 * gp(sp, wp, t1) * gm(sm, t2) - 0.5 * gp(sp, wp, t2) - 0.5 * gm(sm, t2) +
           0.25 * gp(sp, wp, t2 + t1) + 0.25 * gp(sp, wp, t2 - t1);
}

// Large-τ1 limit (side packets separated from the central one).
inline double asym_tau1(double sp, double sm, double wp, double t1, double t2) {
    return 1.0 - 0.5 * gp(sp, wp, t2) - 0.5 * gm(sm, t2) + 0.25 * gp(sp, wp, t2 + t1) + 0.25 * gp(sp, wp, t2 - t1);
}

// Large-τ2 limit.
inline double asym_tau2(double sp, double wp, double t1, double t2) {
    return 1.0 + 0.25 * gp(sp, wp, t1 + t2) + 0.25 * gp(sp, wp, t1 - t2);
}

// Symmetric-JSA density in rotated coordinates, divided by 32|f|².
inline double rotated_brace(double wp, double P, double M, double t1, double t2) {
    const double W = wp + P;
    return 1.0 - 0.5 * std::cos(W * t1) * std::cos(M * t2) - 0.5 * std::cos(W * t2) - 0.5 * std::cos(M * t2) +
           0.25 * std::cos(W * (t2 + t1)) + 0.25 * std::cos(W * (t2 - t1));
}

inline double hom_dip(double sm, double t) { return 1.0 - gm(sm, t); }

// Amplitude of the JSA at signal/idler detunings (ω − ωp/2).
using Jsa = std::function<cd(double, double)>;

inline Jsa gaussian(double sp, double sm, int exchange = +1) {
    return [=](double ds, double di) {
        const double p = ds + di, m = ds - di;
        const double base = std::exp(-p * p / (4 * sp * sp)) * std::exp(-m * m / (4 * sm * sm));
        if (exchange > 0) return cd(base, 0.0);
        return cd(m > 0 ? base : (m < 0 ? -base : 0.0), 0.0);
    };
}

struct Box {
    double half;  // detuning half-range on each axis
    double step;
};

// Plain Riemann sum over (ωs, ωi) of the coincidence density and its baseline; both use
// absolute frequencies ω = ωp/2 + detuning in the phase factors.
inline double brute_rate(const Jsa& f, double wp, double t1, double t2, Box box) {
    const int n = static_cast<int>(std::ceil(box.half / box.step));
    double num = 0.0, den = 0.0;
    for (int i = -n; i <= n; ++i) {
        const double di = i * box.step, wi = 0.5 * wp + di;
        const cd xi = std::polar(1.0, -wi * t1), yi = std::polar(1.0, -wi * t2);
        const cd b = xi * yi - xi - yi - 1.0;
        const cd c = xi * yi + yi - xi + 1.0;
        for (int s = -n; s <= n; ++s) {
            const double ds = s * box.step, ws = 0.5 * wp + ds;
            const cd fsi = f(ds, di), fis = f(di, ds);
            if (std::norm(fsi) + std::norm(fis) < 1e-300) continue;
            const cd xs = std::polar(1.0, -ws * t1), ys = std::polar(1.0, -ws * t2);
            const cd a = xs * ys + xs + ys - 1.0;
            const cd d = xs * ys - ys + xs + 1.0;
            num += std::norm(fsi * a * b + fis * c * d);
            den += 16.0 * (std::norm(fsi) + std::norm(fis));
        }
    }
    return num / den;
}

// Antisymmetric Gaussian JSA, closed form: the symmetric rate mirrored about 2 plus the
// leftover correlation terms that do not flip.
inline double anti_closed_rate(double sp, double sm, double wp, double t1, double t2) {
    const auto P = [&](double t) { return gp(sp, wp, t); };
    const auto M = [&](double t) { return gm(sm, t); };
    return 2.0 - closed_rate(sp, sm, wp, t1, t2) +
           0.25 * (P(t1 - t2) + M(t1 - t2) + P(t1 + t2) + M(t1 + t2) - 2.0 * P(t1) * M(t2) - 2.0 * P(t2) * M(t1));
}

// Same density as brute_rate, summed in rotated coordinates. Ω− nodes sit at half-integer
// multiples of h so none lands on the exchange discontinuity; a Richardson step on h, h/2
// cancels the O(h²) jump error of the midpoint rule.
inline double rotated_rate(const Jsa& f, double wp, double t1, double t2, double sp, double sm, double h) {
    const double spread = std::abs(t1) + std::abs(t2) + std::abs(t1 + t2);
    const double hp = std::min(sp / 6.0, std::numbers::pi / (2.0 * std::max(1.0, spread)));
    const int np = static_cast<int>(std::ceil(8.0 * sp / hp));
    const auto sums = [&](double step) {
        const int nm = static_cast<int>(std::ceil(8.0 * sm / step));
        double num = 0.0, den = 0.0;
        for (int j = -np; j <= np; ++j) {
            const double P = j * hp;
            for (int k = -nm; k < nm; ++k) {
                const double Mv = (k + 0.5) * step;
                const double ds = 0.5 * (P + Mv), di = 0.5 * (P - Mv);
                const double ws = 0.5 * wp + ds, wi = 0.5 * wp + di;
                const cd fsi = f(ds, di), fis = f(di, ds);
                const cd xs = std::polar(1.0, -ws * t1), ys = std::polar(1.0, -ws * t2);
                const cd xi = std::polar(1.0, -wi * t1), yi = std::polar(1.0, -wi * t2);
                const cd a = xs * ys + xs + ys - 1.0, b = xi * yi - xi - yi - 1.0;
                const cd c = xi * yi + yi - xi + 1.0, d = xs * ys - ys + xs + 1.0;
                num += std::norm(fsi * a * b + fis * c * d) * step;
                den += 16.0 * (std::norm(fsi) + std::norm(fis)) * step;
            }
        }
        return std::pair{num, den};
    };
    const auto [n1, d1] = sums(h);
    const auto [n2, d2] = sums(0.5 * h);
    return ((4.0 * n2 - n1) / 3.0) / ((4.0 * d2 - d1) / 3.0);
}

// HOM (minus) and NOON (plus) single-delay interferometers.
inline double brute_homi(const Jsa& f, double wp, double tau, Box box) {
    const int n = static_cast<int>(std::ceil(box.half / box.step));
    double num = 0.0, den = 0.0;
    for (int i = -n; i <= n; ++i)
        for (int s = -n; s <= n; ++s) {
            const double ds = s * box.step, di = i * box.step;
            const cd fsi = f(ds, di), fis = f(di, ds);
            const cd xs = std::polar(1.0, -(0.5 * wp + ds) * tau), xi = std::polar(1.0, -(0.5 * wp + di) * tau);
            num += std::norm(fis * xs - fsi * xi);
            den += std::norm(fsi) + std::norm(fis);
        }
    return num / den;
}

inline double brute_nooni(const Jsa& f, double wp, double tau, Box box) {
    const int n = static_cast<int>(std::ceil(box.half / box.step));
    double num = 0.0, den = 0.0;
    for (int i = -n; i <= n; ++i)
        for (int s = -n; s <= n; ++s) {
            const double ds = s * box.step, di = i * box.step;
            const cd fsi = f(ds, di), fis = f(di, ds);
            const cd xs = std::polar(1.0, -(0.5 * wp + ds) * tau), xi = std::polar(1.0, -(0.5 * wp + di) * tau);
            num += std::norm(fis * (xi + 1.0) * (xs + 1.0) + fsi * (xs - 1.0) * (xi - 1.0));
            den += 4.0 * (std::norm(fsi) + std::norm(fis));
        }
    return num / den;
}

// Box wide and fine enough for a Gaussian pair (σ+, σ−) at delays up to max_delay.
inline Box box_for(double sp, double sm, double max_delay) {
    const double half = 8.0 * std::max(sp, sm);
    const double width = std::min(sp, sm) / 6.0;
    const double phase = std::numbers::pi / (4.0 * std::max(1.0, 2.0 * max_delay));
    return {half, std::min(width, phase)};
}

}  // namespace oracle
