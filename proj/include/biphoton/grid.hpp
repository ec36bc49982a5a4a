// grid.hpp — uniformly spaced real grids used for detunings, delays and time axes

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "biphoton/error.hpp"

namespace biphoton {

struct UniformGrid {
    double start{0.0};
    double step{1.0};
    std::size_t size{0};

    UniformGrid() = default;
    UniformGrid(double start_, double step_, std::size_t size_) : start(start_), step(step_), size(size_) {
        if (size < 2) throw Error(ErrorCode::InvalidConfig, "grid needs at least 2 points");
        if (!(step > 0.0) || !std::isfinite(step) || !std::isfinite(start)) {
            throw Error(ErrorCode::InvalidConfig, "grid step must be positive and finite");
        }
    }

    // Inclusive [min, max] with `points` samples.
    static UniformGrid from_range(double min, double max, std::size_t points) {
        if (!(max > min)) throw Error(ErrorCode::InvalidConfig, "grid requires min < max");
        if (points < 2) throw Error(ErrorCode::InvalidConfig, "grid needs at least 2 points");
        return UniformGrid(min, (max - min) / static_cast<double>(points - 1), points);
    }

    static UniformGrid symmetric(double half_width, std::size_t points) {
        return from_range(-half_width, half_width, points);
    }

    double operator[](std::size_t i) const noexcept { return start + step * static_cast<double>(i); }
    double front() const noexcept { return start; }
    double back() const noexcept { return (*this)[size - 1]; }
    bool contains(double x) const noexcept {
        const double slack = 1e-12 * step;
        return x >= front() - slack && x <= back() + slack;
    }

    std::vector<double> values() const {
        std::vector<double> v(size);
        for (std::size_t i = 0; i < size; ++i) v[i] = (*this)[i];
        return v;
    }
};

}  // namespace biphoton
