#include "chemokin/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "chemokin/error.hpp"

namespace chemokin {

PhaseGrid::PhaseGrid(int dim, int x_nodes, double x_extent, Topology topology,
                     std::vector<Velocity> velocities, int m_nodes, double m_max)
    : dim_(dim),
      x_nodes_(x_nodes),
      x_extent_(x_extent),
      topology_(topology),
      velocities_(std::move(velocities)),
      m_nodes_(m_nodes),
      m_max_(m_max) {
    if (dim_ != 1 && dim_ != 2) throw Error(ErrorKind::BadConfig, "dim must be 1 or 2");
    if (x_nodes_ < 1) throw Error(ErrorKind::BadConfig, "x_nodes must be positive");
    if (!(x_extent_ > 0.0) || !std::isfinite(x_extent_))
        throw Error(ErrorKind::BadConfig, "x_extent must be positive");
    if (m_nodes_ < 1) throw Error(ErrorKind::BadConfig, "m_nodes must be positive");
    if (!(m_max_ > 0.0) || !std::isfinite(m_max_))
        throw Error(ErrorKind::BadConfig, "m_max must be positive");
    if (velocities_.empty()) throw Error(ErrorKind::BadConfig, "velocity set is empty");

    dx_ = x_extent_ / x_nodes_;
    dm_ = m_max_ / m_nodes_;
    cell_volume_ = dim_ == 1 ? dx_ : dx_ * dx_;
    x_cells_ = dim_ == 1 ? static_cast<std::size_t>(x_nodes_)
                         : static_cast<std::size_t>(x_nodes_) * static_cast<std::size_t>(x_nodes_);
    for (std::size_t k = 0; k < velocities_.size(); ++k) {
        const auto& vel = velocities_[k];
        if (!(vel.weight > 0.0))
            throw Error(ErrorKind::BadConfig,
                        "velocity weight must be positive (node " + std::to_string(k) + ")");
        if (dim_ == 1 && vel.v[1] != 0.0)
            throw Error(ErrorKind::BadConfig, "1-d velocity node with nonzero second component");
        v_measure_ += vel.weight;
        max_speed_ = std::max(max_speed_, std::hypot(vel.v[0], vel.v[1]));
    }
}

std::vector<Velocity> PhaseGrid::standard_velocities(int dim, int count) {
    if (count < 1) throw Error(ErrorKind::BadConfig, "v_count must be positive");
    std::vector<Velocity> out;
    out.reserve(static_cast<std::size_t>(count));
    if (dim == 1) {
        const double w = 2.0 / count;
        for (int k = 0; k < count; ++k) out.push_back({{-1.0 + (k + 0.5) * w, 0.0}, w});
    } else if (dim == 2) {
        const double w = 2.0 * std::numbers::pi / count;
        for (int k = 0; k < count; ++k) {
            const double theta = (k + 0.5) * w;
            out.push_back({{std::cos(theta), std::sin(theta)}, w});
        }
    } else {
        throw Error(ErrorKind::BadConfig, "dim must be 1 or 2");
    }
    return out;
}

std::array<double, 2> PhaseGrid::x_position(std::size_t c) const {
    if (dim_ == 1) return {x_center(static_cast<int>(c)), 0.0};
    const auto n = static_cast<std::size_t>(x_nodes_);
    return {x_center(static_cast<int>(c / n)), x_center(static_cast<int>(c % n))};
}

}  // namespace chemokin
