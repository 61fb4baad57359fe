#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace chemokin {

enum class Topology { Periodic, TruncatedFreeSpace };

/// A discrete velocity node: the vector and its quadrature weight.
struct Velocity {
    std::array<double, 2> v{0.0, 0.0};
    double weight = 0.0;
};

/// Discretization of (x, v, m).
///
/// Space is a uniform grid of `x_nodes` cells per dimension on
/// [-L/2, L/2]^d (d = 1 or 2), cell-centered. The internal state m lives on
/// [0, m_max] split into `m_nodes` uniform cells. Velocities carry
/// positive weights whose sum is the discrete measure V_d of the velocity space.
class PhaseGrid {
public:
    PhaseGrid(int dim, int x_nodes, double x_extent, Topology topology,
              std::vector<Velocity> velocities, int m_nodes, double m_max);

    /// Symmetric midpoint nodes on [-1, 1] (d = 1) or equispaced unit
    /// directions on the circle (d = 2).
    static std::vector<Velocity> standard_velocities(int dim, int count);

    int dim() const { return dim_; }
    int x_nodes() const { return x_nodes_; }
    double x_extent() const { return x_extent_; }
    Topology topology() const { return topology_; }
    int m_nodes() const { return m_nodes_; }
    double m_max() const { return m_max_; }

    double dx() const { return dx_; }
    double dm() const { return dm_; }
    /// Measure of one spatial cell, dx^d.
    double cell_volume() const { return cell_volume_; }

    std::size_t x_cells() const { return x_cells_; }
    std::size_t v_count() const { return velocities_.size(); }
    std::size_t size() const { return x_cells_ * v_count() * static_cast<std::size_t>(m_nodes_); }

    const std::vector<Velocity>& velocities() const { return velocities_; }
    double weight(std::size_t k) const { return velocities_[k].weight; }
    double velocity_measure() const { return v_measure_; }
    double max_speed() const { return max_speed_; }

    /// Cell center along one axis.
    double x_center(int i) const { return -0.5 * x_extent_ + (i + 0.5) * dx_; }
    /// Cell center of flattened spatial cell `c` (row-major over dimensions).
    std::array<double, 2> x_position(std::size_t c) const;
    double m_center(int j) const { return (j + 0.5) * dm_; }
    double m_face(int j) const { return j * dm_; }

    std::size_t index(std::size_t x_cell, std::size_t v, std::size_t m) const {
        return (x_cell * v_count() + v) * static_cast<std::size_t>(m_nodes_) + m;
    }

private:
    int dim_;
    int x_nodes_;
    double x_extent_;
    Topology topology_;
    std::vector<Velocity> velocities_;
    int m_nodes_;
    double m_max_;
    double dx_ = 0.0;
    double dm_ = 0.0;
    double cell_volume_ = 0.0;
    std::size_t x_cells_ = 0;
    double v_measure_ = 0.0;
    double max_speed_ = 0.0;
};

}  // namespace chemokin
