#include "chemokin/initial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "chemokin/error.hpp"
#include "chemokin/summation.hpp"

namespace chemokin {
namespace {

double spatial_shape(const InitialRecipe& r, const std::array<double, 2>& x, int dim) {
    auto gauss = [&](double cx) {
        double r2 = (x[0] - cx) * (x[0] - cx);
        if (dim == 2) r2 += (x[1] - cx) * (x[1] - cx);
        return std::exp(-r2 / (2.0 * r.width * r.width));
    };
    switch (r.profile) {
    case SpatialProfile::Gaussian: return gauss(r.center);
    case SpatialProfile::TwoBumps: return gauss(r.center - 2.0 * r.width) + gauss(r.center + 2.0 * r.width);
    case SpatialProfile::Uniform: return 1.0;
    }
    return 0.0;
}

double state_shape(const InitialRecipe& r, double m) {
    if (r.state == StateProfile::Gaussian) {
        const double d = (m - r.m_center) / r.m_width;
        return std::exp(-0.5 * d * d);
    }
    if (m <= r.m_lo || m >= r.m_hi) return 0.0;
    return 1.0 - std::cos(2.0 * std::numbers::pi * (m - r.m_lo) / (r.m_hi - r.m_lo));
}

}  // namespace

double japanese_bracket(const std::array<double, 2>& x) {
    return std::sqrt(1.0 + x[0] * x[0] + x[1] * x[1]);
}

InitialMetadata measure_initial(const DensityField& p0, const PhaseGrid& grid) {
    InitialMetadata meta;
    const auto nm = static_cast<std::size_t>(grid.m_nodes());
    const std::size_t nv = grid.v_count();
    const double cell = grid.cell_volume() * grid.dm();
    meta.mass = total_mass(p0, grid);
    meta.x_moment = cell * pairwise_sum_of(p0.values.size(), [&](std::size_t i) {
        const std::size_t c = i / (nm * nv);
        return japanese_bracket(grid.x_position(c)) * grid.weight((i / nm) % nv) * p0.values[i];
    });
    meta.m_moment = cell * pairwise_sum_of(p0.values.size(), [&](std::size_t i) {
        return grid.m_center(static_cast<int>(i % nm)) * grid.weight((i / nm) % nv) * p0.values[i];
    });
    meta.p_sup = max_abs(p0.values);
    meta.pbar_sup = max_abs(integrate_m(p0, grid).values);
    return meta;
}

InitialData adopt_initial_data(DensityField p0, const PhaseGrid& grid) {
    if (p0.values.size() != grid.size())
        throw Error(ErrorKind::BadConfig, "initial density does not match the phase grid");
    for (std::size_t i = 0; i < p0.values.size(); ++i) {
        const double v = p0.values[i];
        if (!std::isfinite(v))
            throw Error(ErrorKind::AssumptionViolation, "initial density not finite at index " + std::to_string(i));
        if (v < 0.0)
            throw Error(ErrorKind::AssumptionViolation, "initial density negative at index " + std::to_string(i));
    }
    InitialData out;
    out.meta = measure_initial(p0, grid);
    out.p0 = std::move(p0);
    return out;
}

InitialData make_initial_data(const std::function<double(const std::array<double, 2>&, std::size_t, double)>& f,
                              const PhaseGrid& grid) {
    DensityField p(grid, 0.0);
    const auto nm = static_cast<std::size_t>(grid.m_nodes());
    for (std::size_t c = 0; c < grid.x_cells(); ++c) {
        const auto x = grid.x_position(c);
        for (std::size_t v = 0; v < grid.v_count(); ++v)
            for (std::size_t j = 0; j < nm; ++j) p.at(grid, c, v, j) = f(x, v, grid.m_center(static_cast<int>(j)));
    }
    return adopt_initial_data(std::move(p), grid);
}

InitialData make_initial_data(const InitialRecipe& recipe, const PhaseGrid& grid) {
    if (!(recipe.mass > 0.0) || !std::isfinite(recipe.mass))
        throw Error(ErrorKind::BadConfig, "initial mass must be positive");
    if (!(recipe.width > 0.0) || !std::isfinite(recipe.width))
        throw Error(ErrorKind::BadConfig, "initial width must be positive");
    if (!std::isfinite(recipe.center)) throw Error(ErrorKind::BadConfig, "initial center must be finite");
    if (recipe.state == StateProfile::RaisedCosine && !(recipe.m_hi > recipe.m_lo))
        throw Error(ErrorKind::BadConfig, "internal-state profile support is empty");
    if (recipe.state == StateProfile::Gaussian && !(recipe.m_width > 0.0))
        throw Error(ErrorKind::BadConfig, "internal-state profile width must be positive");

    const int dim = grid.dim();
    auto shape = [&](const std::array<double, 2>& x, std::size_t, double m) {
        return spatial_shape(recipe, x, dim) * state_shape(recipe, m);
    };
    DensityField p = make_initial_data(shape, grid).p0;
    const double raw = total_mass(p, grid);
    if (!(raw > 0.0))
        throw Error(ErrorKind::BadConfig, "initial profile has no mass on the grid");
    const double scale = recipe.mass / raw;
    for (double& v : p.values) v *= scale;
    return adopt_initial_data(std::move(p), grid);
}

}  // namespace chemokin
