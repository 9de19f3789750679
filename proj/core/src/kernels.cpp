#include "bbm/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "bbm/special.hpp"

namespace bbm {

std::vector<double> uniform_grid(double T, double h) {
    if (T < 0.0) throw std::invalid_argument("uniform_grid: T must be >= 0");
    std::vector<double> g{0.0};
    if (T == 0.0) return g;
    if (h > 0.0) {
        const auto steps = static_cast<std::size_t>(T / h);
        g.reserve(steps + 2);
        for (std::size_t k = 1; k <= steps; ++k) g.push_back(k * h);
    }
    if (g.back() < T) g.push_back(T);
    return g;
}

namespace {

void check_grid(std::span<const double> grid_times) {
    if (grid_times.empty()) throw std::invalid_argument("sample: empty grid");
    if (grid_times.front() != 0.0) throw std::invalid_argument("sample: grid must start at 0");
    for (std::size_t i = 1; i < grid_times.size(); ++i)
        if (!(grid_times[i] > grid_times[i - 1]))
            throw std::invalid_argument("sample: grid must be strictly increasing");
}

}  // namespace

PathGrid sample_bm_path(std::span<const double> x0, std::span<const double> grid_times,
                        RngStream& rng) {
    check_grid(grid_times);
    const int d = static_cast<int>(x0.size());
    if (d < 1) throw std::invalid_argument("sample_bm_path: empty start point");
    PathGrid path;
    path.dim = d;
    path.times.assign(grid_times.begin(), grid_times.end());
    path.values.resize(grid_times.size() * static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) path.values[j] = x0[j];
    for (std::size_t i = 1; i < grid_times.size(); ++i) {
        const double sd = std::sqrt(grid_times[i] - grid_times[i - 1]);
        for (int j = 0; j < d; ++j)
            path.values[i * d + j] = path.values[(i - 1) * d + j] + sd * rng.next_gaussian();
    }
    return path;
}

PathGrid sample_bm_path(double x0, std::span<const double> grid_times, RngStream& rng) {
    return sample_bm_path(std::span<const double>(&x0, 1), grid_times, rng);
}

PathGrid sample_bridge(double x, double y, double T, std::span<const double> grid_times,
                       RngStream& rng) {
    check_grid(grid_times);
    if (!(T > 0.0)) throw std::invalid_argument("sample_bridge: T must be > 0");
    if (grid_times.back() != T) throw std::invalid_argument("sample_bridge: grid must end at T");
    PathGrid path;
    path.dim = 1;
    path.times.assign(grid_times.begin(), grid_times.end());
    path.values.resize(grid_times.size());
    path.values.front() = x;
    path.values.back() = y;
    // March the conditional law forward: given W(t_i) = w the next point is
    // Gaussian with mean pulled toward y and variance dt*(T-t_{i+1})/(T-t_i).
    for (std::size_t i = 0; i + 2 < grid_times.size(); ++i) {
        const double t0 = grid_times[i], t1 = grid_times[i + 1];
        const double remain = T - t0;
        const double dt = t1 - t0;
        const double w = path.values[i];
        const double mean = w + (y - w) * dt / remain;
        const double var = dt * (T - t1) / remain;
        path.values[i + 1] = mean + std::sqrt(var) * rng.next_gaussian();
    }
    return path;
}

PathGrid sample_bessel_path(int d, double x0, std::span<const double> grid_times, RngStream& rng) {
    if (d < 1) throw std::invalid_argument("sample_bessel_path: d must be >= 1");
    if (x0 < 0.0) throw std::invalid_argument("sample_bessel_path: x0 must be >= 0");
    check_grid(grid_times);
    PathGrid path;
    path.dim = 1;
    path.times.assign(grid_times.begin(), grid_times.end());
    path.values.resize(grid_times.size());
    std::vector<double> pos(static_cast<std::size_t>(d), 0.0);
    pos[0] = x0;
    auto norm = [&] {
        double s = 0.0;
        for (double c : pos) s += c * c;
        return std::sqrt(s);
    };
    path.values[0] = norm();
    for (std::size_t i = 1; i < grid_times.size(); ++i) {
        const double sd = std::sqrt(grid_times[i] - grid_times[i - 1]);
        for (auto& c : pos) c += sd * rng.next_gaussian();
        path.values[i] = norm();
    }
    return path;
}

double bessel_density_from_origin(int d, double L, double r) {
    if (!(L > 0.0)) throw std::domain_error("bessel_density_from_origin: L must be > 0");
    if (r < 0.0) throw std::domain_error("bessel_density_from_origin: r must be >= 0");
    const double sL = std::sqrt(L);
    return chi_pdf(d, r / sL) / sL;
}

double gaussian_log_density(double s, double x, double y) {
    if (!(s > 0.0)) throw std::domain_error("gaussian_density: s must be > 0");
    const double dx = y - x;
    return -0.5 * std::log(2.0 * 3.14159265358979323846 * s) - dx * dx / (2.0 * s);
}

double gaussian_density(double s, double x, double y) {
    return std::exp(gaussian_log_density(s, x, y));
}

double sample_branch_time(RngStream& rng, double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("sample_branch_time: rate must be > 0");
    return rng.next_exponential(rate);
}

}  // namespace bbm
