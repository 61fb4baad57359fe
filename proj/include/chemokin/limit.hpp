#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "chemokin/diagnostics.hpp"
#include "chemokin/elliptic.hpp"
#include "chemokin/field.hpp"
#include "chemokin/grid.hpp"
#include "chemokin/model.hpp"
#include "chemokin/scenario.hpp"

namespace chemokin {

/// Root of F(., S) in (m_minus, m_plus) by bisection down to an interval of 1e-12.
/// Throws no-sign-change if F does not change sign across the interval.
double m_zero(const ModelSpec& spec, double s);

/// Turning operator of the limit velocity-jump model at one site:
/// explicit Euler with T(v, v', m0(S)). Requires dt <= 1 / (V_d C_T).
BarDensityField oda_turning_apply(BarDensityField pbar, std::span<const double> signal, const ModelSpec& spec,
                                  const PhaseGrid& grid, double dt, int threads = 1);

struct OdaState {
    BarDensityField pbar;
    SignalField signal;
    std::int64_t steps = 0;
    double outflow = 0.0;
};

/// Splitting solver for the limit model
///   d_t p + v . grad p = sum_v' w_v' (T(v, v', m0(S)) p(v') - T(v', v, m0(S)) p(v)),
///   -Lap S + S = sum_v w_v p.
/// Uses the kinetic module's step size rule and Strang order (half turning,
/// transport, half turning), then refreshes S.
class OdaSolver {
public:
    OdaSolver(const PhaseGrid& grid, const ModelSpec& spec, int threads = 1, double max_dt = 0.0);

    OdaState make_state(BarDensityField pbar, std::int64_t steps = 0) const;
    double stable_dt() const;
    OdaState step(OdaState state, double dt) const;
    /// Advances to t_end stopping at multiples of `output_every` (when
    /// positive) and at t_end; the observer fires at each stop.
    OdaState run(OdaState state, double t_end, double output_every,
                 const std::function<void(const OdaState&)>& observer = {}) const;

    const PhaseGrid& grid() const { return grid_; }

private:
    PhaseGrid grid_;
    PhaseGrid collapsed_;
    ModelSpec spec_;
    int threads_;
    double max_dt_;
    EllipticSolver elliptic_;
};

/// One ODA macro step with a fresh elliptic solve for S.
BarDensityField oda_step(const BarDensityField& pbar, const ModelSpec& spec, const PhaseGrid& grid, double dt);

struct CellConcentration {
    std::size_t x_cell = 0;
    double mass = 0.0;       ///< n(x) dx^d
    double m0 = 0.0;
    double mean = 0.0;
    double mean_deviation = 0.0;  ///< |<m> - m0|
    double std_dev = 0.0;
    double w1 = 0.0;
};

/// Distance of the normalized m-marginal to the Dirac at m0(S(x)). Within an
/// m-cell the mass is taken as uniform, so W1 is the exact integral of
/// |CDF - H(m - m0)| for the piecewise-linear CDF.
struct ConcentrationMetrics {
    std::vector<CellConcentration> cells;
    std::vector<std::size_t> excluded;  ///< cells with mass at or below the floor
    double mass_floor = 0.0;
    double w1 = 0.0;              ///< mass-weighted averages over included cells
    double mean_deviation = 0.0;
    double std_dev = 0.0;
};

/// W1 between a histogram on [0, m_max] (cell masses, uniform cells) and a Dirac at m0.
double w1_to_dirac(std::span<const double> cell_mass, double dm, double m0);

ConcentrationMetrics concentration_metrics(const DensityField& p, const SignalField& s, const ModelSpec& spec,
                                           const PhaseGrid& grid);

struct EpsStudyOptions {
    std::vector<double> eps;  ///< strictly decreasing
    double t_end = 1.0;
    double output_every = 0.0;  ///< sample cadence; t_end alone when zero
    int threads = 1;            ///< worker jobs for the eps family
    /// Extra cap on the macro step; the study always caps it at min(eps) / 2.
    double max_dt = 0.0;
    std::ostream* log = nullptr;
};

struct EpsStudyRow {
    double eps = 0.0;
    double t = 0.0;
    double w1 = 0.0;
    double l1_gap = 0.0;
    double mass = 0.0;
    double env_pbar_margin = 0.0;
    double env_n_margin = 0.0;
    double tail_moment = 0.0;
    double xmoment_rate = 0.0;
};

struct EpsStudyReport {
    std::vector<double> eps;
    std::vector<EpsStudyRow> rows;
    std::vector<DiagnosticsReport> diagnostics;  ///< one per eps
    std::vector<int> substep_estimates;          ///< adaptation substeps per macro step at t = 0
    /// Values at t_end, in eps order.
    std::vector<double> final_w1;
    std::vector<double> final_gap;
    double oda_mass = 0.0;
    bool w1_decreasing = true;
    bool gap_decreasing = true;
    double min_gap_ratio = 0.0;  ///< smallest gap(eps) / gap(eps / 2) over halvings; 0 for one eps

    static const char* csv_header();
    void write_csv(std::ostream& os) const;
};

/// Runs the kinetic solver for each eps and the limit solver once from
/// p-bar_0 = int p0 dm, tabulating concentration and the L1 gap at each sample time.
EpsStudyReport eps_study(const Scenario& scenario, const EpsStudyOptions& options);

}  // namespace chemokin
