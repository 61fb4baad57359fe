#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chemokin/grid.hpp"

namespace chemokin {

/// Cell averages of p over (x, v, m), x outermost and m innermost.
struct DensityField {
    std::vector<double> values;
    double t = 0.0;

    DensityField() = default;
    explicit DensityField(const PhaseGrid& grid, double time = 0.0)
        : values(grid.size(), 0.0), t(time) {}

    double& at(const PhaseGrid& g, std::size_t x, std::size_t v, std::size_t m) { return values[g.index(x, v, m)]; }
    double at(const PhaseGrid& g, std::size_t x, std::size_t v, std::size_t m) const { return values[g.index(x, v, m)]; }
};

/// p-bar over (x, v): the m-integral of a DensityField, or the unknown of
/// the limit velocity-jump equation.
struct BarDensityField {
    std::vector<double> values;
    double t = 0.0;

    BarDensityField() = default;
    explicit BarDensityField(const PhaseGrid& grid, double time = 0.0)
        : values(grid.x_cells() * grid.v_count(), 0.0), t(time) {}

    double& at(const PhaseGrid& g, std::size_t x, std::size_t v) { return values[x * g.v_count() + v]; }
    double at(const PhaseGrid& g, std::size_t x, std::size_t v) const { return values[x * g.v_count() + v]; }
};

/// p-bar(x, v) = sum_m p dm.
BarDensityField integrate_m(const DensityField& p, const PhaseGrid& grid);
/// n(x) = sum_v w_v p-bar(x, v).
std::vector<double> spatial_density(const BarDensityField& pbar, const PhaseGrid& grid);
std::vector<double> spatial_density(const DensityField& p, const PhaseGrid& grid);

/// Total mass sum p dx^d w_v dm.
double total_mass(const DensityField& p, const PhaseGrid& grid);
double total_mass(const BarDensityField& pbar, const PhaseGrid& grid);

/// L1 distance with the phase-space cell measure.
double l1_distance(const DensityField& a, const DensityField& b, const PhaseGrid& grid);
double l1_distance(const BarDensityField& a, const BarDensityField& b, const PhaseGrid& grid);

double max_abs(std::span<const double> values);

}  // namespace chemokin
