#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "chemokin/field.hpp"
#include "chemokin/grid.hpp"
#include "chemokin/model.hpp"
#include "chemokin/signal_history.hpp"

namespace chemokin {

/// Backward characteristic of the transport-adaptation part through (x, v, m)
/// at time t, sampled at s_l = l t / samples. X is affine; M solves
/// dM/ds = F(M, S(X(s), s)) / eps.
struct CharacteristicPath {
    std::vector<double> s;
    std::vector<double> X;  ///< unwrapped, x - v (t - s)
    std::vector<double> M;  ///< NaN at samples before entry_time
    std::array<double, 2> v{0.0, 0.0};
    /// Time at which the path entered through m = 0 or m = m_max; 0 if it
    /// stays inside on all of [0, t].
    double entry_time = 0.0;
};

enum class BoundaryMode {
    Throw,     ///< left-domain error when M leaves [0, m_max]
    Truncate,  ///< stop there and record the entry time
};

/// RK4 in s with the step count doubled until M(0) (or the entry time)
/// changes by at most 1e-10.
CharacteristicPath backtrace(const std::array<double, 2>& x, std::size_t v, double m, double t,
                             const SignalHistory& history, const ModelSpec& spec, const PhaseGrid& grid,
                             int samples = 1, BoundaryMode mode = BoundaryMode::Throw);

using InitialProfile = std::function<double(double x, std::size_t v, double m)>;

struct DuhamelOptions {
    int x_nodes = 64;
    int m_nodes = 64;
    int time_steps = 32;
    int max_iterations = 200;
    double tolerance = 1e-10;
    int threads = 1;
};

/// Converged space-time node values of the Duhamel fixed point.
///
/// Nodes: x_i = -L/2 + i hx (periodic, i < x_nodes), m_j = j hm on
/// [0, m_max] including both ends, tau_l = l t / time_steps.
class DuhamelSolution {
public:
    double t() const { return t_; }
    int iterations() const { return iterations_; }
    bool converged() const { return converged_; }
    /// Max-norm of successive iterate differences, one per iteration.
    const std::vector<double>& increments() const { return increments_; }
    /// L1 norm (sup over tau) of successive differences, one per iteration.
    const std::vector<double>& l1_increments() const { return l1_increments_; }

    int x_nodes() const { return nx_; }
    int m_nodes() const { return nm_ + 1; }
    int time_steps() const { return nt_; }
    double x_node(int i) const { return x0_ + i * hx_; }
    double m_node(int j) const { return j * hm_; }
    double tau(int l) const { return l * t_ / nt_; }
    /// Node value at (x_i, v, m_j, tau_l).
    double node(int l, int i, std::size_t v, int j) const;

    /// p(x, v, m, t) by one more application of the integral formula to the
    /// converged iterate.
    double evaluate(double x, std::size_t v, double m) const;
    /// Cell averages at time t on `grid` by 2x2 Gauss points per (x, m) cell.
    DensityField cell_averages(const PhaseGrid& grid) const;

private:
    friend DuhamelSolution duhamel_solve(const InitialProfile&, const SignalHistory&, const ModelSpec&,
                                         const PhaseGrid&, double, const DuhamelOptions&);
    struct Context;

    double integrate_path(const Context& ctx, const std::vector<std::vector<double>>& values, double x,
                          std::size_t v, const double* msamples, int k, double pull) const;
    double interpolate(const std::vector<double>& frame, double x, std::size_t v, double m) const;

    std::shared_ptr<const Context> ctx_;
    std::vector<std::vector<double>> values_;  // per tau, (i, v, j) row-major
    double t_ = 0.0;
    int nx_ = 0, nm_ = 0, nt_ = 0, nv_ = 0, threads_ = 1;
    double x0_ = 0.0, hx_ = 0.0, hm_ = 0.0, extent_ = 0.0;
    int iterations_ = 0;
    bool converged_ = false;
    std::vector<double> increments_;
    std::vector<double> l1_increments_;
};

/// Picard iteration of the Duhamel representation
///   p(x, v, m, t) = p0(X(0), v, M(0))
///                   + int_0^t [ -(dF/dm / eps + L(v, M)) p + sum_v' w_v' T(v, v', M) p(v') ] ds
/// along backward characteristics, L(v, m) = sum_v' w_v' T(v', v, m). The
/// signal is frozen to `history`; paths entering through an m-boundary
/// carry no initial data. One dimension, periodic in x.
/// Throws no-contraction unless t (Pi_cap / eps + 2 V_d C_T) < 1.
DuhamelSolution duhamel_solve(const InitialProfile& p0, const SignalHistory& history, const ModelSpec& spec,
                              const PhaseGrid& grid, double t, const DuhamelOptions& options = {});

/// Cell averages of f over the (x, m) cells of a one-dimensional grid, 3x3 Gauss points.
DensityField cell_average(const InitialProfile& f, const PhaseGrid& grid);

}  // namespace chemokin
