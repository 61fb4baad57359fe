#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include "chemokin/diagnostics.hpp"
#include "chemokin/elliptic.hpp"
#include "chemokin/field.hpp"
#include "chemokin/grid.hpp"
#include "chemokin/model.hpp"
#include "chemokin/signal_history.hpp"

namespace chemokin {

// ---------------------------------------------------------------------------
// Split operators. Each takes the field by value and returns the update, and
// each is positivity preserving and conservative under its stated CFL bound.

/// Explicit Euler step of the velocity-jump operator
///   Q[p](v) = sum_v' w_v' (T(v, v', m) p(v') - T(v', v, m) p(v))
/// at every (x, m) site. Requires dt <= 1 / (V_d C_T).
DensityField turning_apply(DensityField p, const ModelSpec& spec, const PhaseGrid& grid, double dt, int threads = 1);

/// First-order upwind step of v . grad_x p. Requires dt * sum_i |v_i| <= dx for
/// every velocity. On a truncated domain the inflow is zero and the mass that
/// leaves is added to `outflow` when given.
DensityField transport_apply(DensityField p, const PhaseGrid& grid, double dt, double* outflow = nullptr,
                             int threads = 1);

/// Number of explicit substeps of the m-advection needed so each substep
/// moves at most one cell: ceil(dt * max|F| / (eps dm)).
int adaptation_substeps(std::span<const double> signal, const ModelSpec& spec, const PhaseGrid& grid, double dt);

/// Conservative upwind step of d_m(F(m, S) p / eps) with zero ghost cells at
/// m = 0 and m = m_max, split into `adaptation_substeps` explicit substeps
/// (or at least `min_substeps`). Both boundary fluxes vanish because F
/// points inward at the ends of the interval.
DensityField adaptation_apply(DensityField p, std::span<const double> signal, const ModelSpec& spec,
                              const PhaseGrid& grid, double dt, int threads = 1, int min_substeps = 1);

// ---------------------------------------------------------------------------

struct StepperState {
    DensityField p;
    SignalField signal;
    std::int64_t steps = 0;
    /// Mass that has left through the spatial boundary (truncated domains).
    double outflow = 0.0;
};

struct KineticOptions {
    int threads = 1;
    /// When set, S follows this history instead of the elliptic solve.
    std::optional<SignalHistory> frozen_signal;
    /// Cap on the macro step, on top of the CFL limits.
    double max_dt = 0.0;
};

using Observer = std::function<void(const StepperState&)>;

struct RunResult {
    StepperState state;
    DiagnosticsReport report;
};

/// Strang-split solver for the coupled kinetic system:
/// half adaptation, half turning, full transport, half turning, half
/// adaptation, then S is refreshed from the new n (or read from the frozen
/// history). S is held fixed inside a macro step.
class KineticSolver {
public:
    KineticSolver(const PhaseGrid& grid, const ModelSpec& spec, KineticOptions options = {});

    const PhaseGrid& grid() const { return grid_; }
    const ModelSpec& spec() const { return spec_; }
    const KineticOptions& options() const { return options_; }

    /// State at p.t with the matching signal.
    StepperState make_state(DensityField p, std::int64_t steps = 0, double outflow = 0.0) const;

    /// Largest macro step meeting the transport and turning CFL bounds.
    double stable_dt() const;

    StepperState macro_step(StepperState state, double dt) const;

    /// Advances to t_end, stopping exactly at every multiple of
    /// `output_every` (when positive) and at t_end. At each stop the observer
    /// fires and a diagnostics row is recorded against `initial`.
    RunResult run(StepperState state, double t_end, double output_every, const InitialMetadata& initial,
                  const Observer& observer = {}) const;

    SignalField signal_for(const DensityField& p) const;

private:
    PhaseGrid grid_;
    ModelSpec spec_;
    KineticOptions options_;
    EllipticSolver elliptic_;
};

}  // namespace chemokin
