#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "chemokin/grid.hpp"
#include "chemokin/initial.hpp"
#include "chemokin/model.hpp"

namespace chemokin {

struct GridConfig {
    int dim = 1;
    int x_nodes = 128;
    double x_extent = 16.0;
    Topology topology = Topology::Periodic;
    int v_count = 2;
    int m_nodes = 64;
    /// Unset means m_max = m_plus + 0.5 * (m_plus - m_minus).
    std::optional<double> m_max;
};

/// Everything needed to build a validated scenario.
struct ScenarioConfig {
    GridConfig grid;
    ModelParams model;
    InitialRecipe initial;
};

struct Scenario {
    PhaseGrid grid;
    ModelSpec spec;
    InitialData initial;
    std::uint64_t hash = 0;
};

double default_m_max(const AdaptationParams& a);

/// Stable textual form of a config; its FNV-1a digest is the scenario hash.
std::string canonical_text(const ScenarioConfig& config);

/// Builds grid, model and initial data, verifying every structural
/// assumption. Throws Error{BadConfig | AssumptionViolation | SpecViolation}.
Scenario build_scenario(const ScenarioConfig& config);

}  // namespace chemokin
