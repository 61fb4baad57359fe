#include "chemokin/field.hpp"

#include <cmath>

#include "chemokin/summation.hpp"

namespace chemokin {

BarDensityField integrate_m(const DensityField& p, const PhaseGrid& grid) {
    BarDensityField out(grid, p.t);
    const auto nm = static_cast<std::size_t>(grid.m_nodes());
    const std::size_t pencils = grid.x_cells() * grid.v_count();
    for (std::size_t k = 0; k < pencils; ++k) {
        const double* row = p.values.data() + k * nm;
        out.values[k] = grid.dm() * pairwise_sum(std::span<const double>(row, nm));
    }
    return out;
}

std::vector<double> spatial_density(const BarDensityField& pbar, const PhaseGrid& grid) {
    std::vector<double> n(grid.x_cells(), 0.0);
    const std::size_t nv = grid.v_count();
    for (std::size_t c = 0; c < grid.x_cells(); ++c) {
        double s = 0.0;
        for (std::size_t v = 0; v < nv; ++v) s += grid.weight(v) * pbar.values[c * nv + v];
        n[c] = s;
    }
    return n;
}

std::vector<double> spatial_density(const DensityField& p, const PhaseGrid& grid) {
    return spatial_density(integrate_m(p, grid), grid);
}

double total_mass(const DensityField& p, const PhaseGrid& grid) {
    const auto nm = static_cast<std::size_t>(grid.m_nodes());
    const std::size_t nv = grid.v_count();
    const double s = pairwise_sum_of(p.values.size(), [&](std::size_t i) {
        return grid.weight((i / nm) % nv) * p.values[i];
    });
    return s * grid.cell_volume() * grid.dm();
}

double total_mass(const BarDensityField& pbar, const PhaseGrid& grid) {
    const std::size_t nv = grid.v_count();
    const double s = pairwise_sum_of(pbar.values.size(), [&](std::size_t i) {
        return grid.weight(i % nv) * pbar.values[i];
    });
    return s * grid.cell_volume();
}

double l1_distance(const DensityField& a, const DensityField& b, const PhaseGrid& grid) {
    const auto nm = static_cast<std::size_t>(grid.m_nodes());
    const std::size_t nv = grid.v_count();
    const double s = pairwise_sum_of(a.values.size(), [&](std::size_t i) {
        return grid.weight((i / nm) % nv) * std::abs(a.values[i] - b.values[i]);
    });
    return s * grid.cell_volume() * grid.dm();
}

double l1_distance(const BarDensityField& a, const BarDensityField& b, const PhaseGrid& grid) {
    const std::size_t nv = grid.v_count();
    const double s = pairwise_sum_of(a.values.size(), [&](std::size_t i) {
        return grid.weight(i % nv) * std::abs(a.values[i] - b.values[i]);
    });
    return s * grid.cell_volume();
}

double max_abs(std::span<const double> values) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace chemokin
