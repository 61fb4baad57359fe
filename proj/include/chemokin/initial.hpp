#pragma once

#include <functional>

#include "chemokin/field.hpp"
#include "chemokin/grid.hpp"

namespace chemokin {

enum class SpatialProfile { Gaussian, TwoBumps, Uniform };

/// Shape of the initial internal-state distribution.
enum class StateProfile {
    /// 1 - cos over [m_lo, m_hi], zero outside.
    RaisedCosine,
    /// exp(-(m - m_center)^2 / (2 m_width^2)).
    Gaussian,
};

/// Recipe for a v-uniform, separable initial density p0(x, v, m) = mass * rho(x) * phi(m) / V_d.
struct InitialRecipe {
    SpatialProfile profile = SpatialProfile::Gaussian;
    double center = 0.0;
    double width = 1.0;
    double mass = 1.0;
    StateProfile state = StateProfile::RaisedCosine;
    double m_lo = 0.5;
    double m_hi = 1.5;
    double m_center = 1.0;
    double m_width = 0.2;
};

/// Scalars of p0 the bound monitors refer back to.
struct InitialMetadata {
    double mass = 0.0;
    double x_moment = 0.0;     ///< sum <x> p0, <x> = sqrt(1 + |x|^2)
    double m_moment = 0.0;     ///< sum m p0
    double p_sup = 0.0;        ///< max p0
    double pbar_sup = 0.0;     ///< max of the m-integral of p0
};

struct InitialData {
    DensityField p0;
    InitialMetadata meta;
};

/// <x> = sqrt(1 + |x|^2).
double japanese_bracket(const std::array<double, 2>& x);

InitialMetadata measure_initial(const DensityField& p0, const PhaseGrid& grid);

/// Samples the recipe at cell centers and rescales to the requested mass.
InitialData make_initial_data(const InitialRecipe& recipe, const PhaseGrid& grid);

/// Samples an arbitrary profile f(x, v_index, m) at cell centers; no rescaling.
InitialData make_initial_data(const std::function<double(const std::array<double, 2>&, std::size_t, double)>& f,
                              const PhaseGrid& grid);

/// Validates p0 >= 0 and finiteness and records the metadata.
InitialData adopt_initial_data(DensityField p0, const PhaseGrid& grid);

}  // namespace chemokin
