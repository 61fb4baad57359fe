#include "chemokin/scenario.hpp"

#include <sstream>

#include "chemokin/summation.hpp"

namespace chemokin {

double default_m_max(const AdaptationParams& a) { return a.m_plus + 0.5 * (a.m_plus - a.m_minus); }

std::string canonical_text(const ScenarioConfig& c) {
    std::ostringstream os;
    os << std::hexfloat;
    const auto& g = c.grid;
    const auto& a = c.model.adaptation;
    const auto& t = c.model.turning;
    const auto& i = c.initial;
    os << "grid " << g.dim << ' ' << g.x_nodes << ' ' << g.x_extent << ' ' << static_cast<int>(g.topology) << ' '
       << g.v_count << ' ' << g.m_nodes << ' ' << g.m_max.value_or(default_m_max(a)) << '\n';
    os << "adaptation " << static_cast<int>(a.family) << ' ' << a.kappa << ' ' << a.s_ref << ' ' << a.m_minus << ' '
       << a.m_plus << '\n';
    os << "turning " << static_cast<int>(t.family) << ' ' << t.lambda0 << ' ' << t.beta << ' ' << t.m_c << ' '
       << t.delta << ' ' << t.angular_bias << '\n';
    os << "eps " << c.model.epsilon << '\n';
    os << "initial " << static_cast<int>(i.profile) << ' ' << i.center << ' ' << i.width << ' ' << i.mass << ' '
       << static_cast<int>(i.state) << ' ' << i.m_lo << ' ' << i.m_hi << ' ' << i.m_center << ' ' << i.m_width
       << '\n';
    return os.str();
}

Scenario build_scenario(const ScenarioConfig& config) {
    const auto& g = config.grid;
    const double m_max = g.m_max.value_or(default_m_max(config.model.adaptation));
    PhaseGrid grid(g.dim, g.x_nodes, g.x_extent, g.topology, PhaseGrid::standard_velocities(g.dim, g.v_count),
                   g.m_nodes, m_max);
    ModelSpec spec(config.model, grid);
    InitialData initial = make_initial_data(config.initial, grid);
    return Scenario{std::move(grid), std::move(spec), std::move(initial), fnv1a(canonical_text(config))};
}

}  // namespace chemokin
