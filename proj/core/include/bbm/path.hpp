#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace bbm {

/// A single trajectory sampled on a strictly increasing time grid. Values are
/// scalars (dim == 1) or d-vectors stored row-major, one row per time point.
struct PathGrid {
    std::vector<double> times;
    std::vector<double> values;
    int dim = 1;

    std::size_t size() const { return times.size(); }

    std::span<const double> at(std::size_t i) const {
        return {values.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    double scalar(std::size_t i) const { return values[i * static_cast<std::size_t>(dim)]; }
    double front_scalar() const { return scalar(0); }
    double back_scalar() const { return scalar(size() - 1); }

    void validate() const {
        if (times.empty()) throw std::invalid_argument("PathGrid: empty grid");
        if (values.size() != times.size() * static_cast<std::size_t>(dim))
            throw std::invalid_argument("PathGrid: times/values size mismatch");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1]))
                throw std::invalid_argument("PathGrid: times must be strictly increasing");
    }
};

/// Uniform grid 0, h, 2h, ..., T (the last step may be shorter so T is hit
/// exactly). h <= 0 yields the two-point grid {0, T}.
std::vector<double> uniform_grid(double T, double h);

}  // namespace bbm
