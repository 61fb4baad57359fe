#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "chemokin/grid.hpp"
#include "chemokin/model.hpp"
#include "chemokin/scenario.hpp"

namespace chemokin::test {

inline ModelParams linear_params(double eps = 1.0) {
    ModelParams p;
    p.adaptation = {AdaptationFamily::Linear, 1.0, 1.0, 0.5, 1.5};
    p.turning = {TurningFamily::SeparableUniform, 1.0, 0.5, 1.0, 0.25, 0.5};
    p.epsilon = eps;
    return p;
}

inline PhaseGrid line_grid(int x_nodes = 32, double extent = 8.0, int v_count = 2, int m_nodes = 16,
                           double m_max = 2.0, Topology topo = Topology::Periodic) {
    return PhaseGrid(1, x_nodes, extent, topo, PhaseGrid::standard_velocities(1, v_count), m_nodes, m_max);
}

inline ScenarioConfig small_config() {
    ScenarioConfig c;
    c.grid.dim = 1;
    c.grid.x_nodes = 32;
    c.grid.x_extent = 8.0;
    c.grid.v_count = 2;
    c.grid.m_nodes = 16;
    c.model = linear_params(0.5);
    c.initial.profile = SpatialProfile::Gaussian;
    c.initial.center = 0.0;
    c.initial.width = 1.0;
    c.initial.mass = 1.0;
    c.initial.m_lo = 0.5;
    c.initial.m_hi = 1.5;
    return c;
}

inline std::vector<double> random_values(std::size_t n, unsigned seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

}  // namespace chemokin::test
