#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace gibbsflow {

using cplx = std::complex<double>;

// Uniform 1D spatial grid. Non-periodic grids include both endpoints;
// periodic grids cover [x_min, x_max) with spacing (x_max-x_min)/n_points.
struct Grid1D {
    double x_min = 0.0;
    double x_max = 0.0;
    int n_points = 0;
    bool periodic = false;

    double spacing() const {
        return periodic ? (x_max - x_min) / n_points
                        : (x_max - x_min) / (n_points - 1);
    }
    double length() const { return x_max - x_min; }
    double point(int i) const { return x_min + i * spacing(); }

    void validate() const {
        if (n_points < 2) throw std::invalid_argument("Grid1D: n_points must be >= 2");
        if (!std::isfinite(x_min) || !std::isfinite(x_max))
            throw std::invalid_argument("Grid1D: bounds must be finite");
        if (spacing() <= 0.0) throw std::invalid_argument("Grid1D: spacing must be positive");
    }

    bool operator==(const Grid1D&) const = default;
};

struct LatticeField {
    Grid1D grid;
    std::vector<cplx> values;

    LatticeField() = default;
    explicit LatticeField(const Grid1D& g) : grid(g), values(g.n_points) {}

    int size() const { return static_cast<int>(values.size()); }

    bool finite() const {
        for (const auto& v : values)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }
};

using Ensemble = std::vector<LatticeField>;

}  // namespace gibbsflow
