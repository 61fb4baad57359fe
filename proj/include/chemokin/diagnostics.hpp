#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "chemokin/elliptic.hpp"
#include "chemokin/field.hpp"
#include "chemokin/grid.hpp"
#include "chemokin/initial.hpp"
#include "chemokin/model.hpp"

namespace chemokin {

/// Slack for one-sided envelope checks, relative to the envelope value.
inline constexpr double kEnvelopeTolerance = 1e-8;
/// Slack for the <x>-moment growth rate, relative to the initial mass.
inline constexpr double kMomentTolerance = 1e-8;

/// Monitored norms and moments of one state.
struct NormRow {
    double t = 0.0;
    double mass = 0.0;
    double p_sup = 0.0;
    double pbar_sup = 0.0;
    double n_sup = 0.0;
    double s_l1 = 0.0;
    double s_sup = 0.0;
    double x_moment = 0.0;     ///< sum <x> n dx^d
    double m_moment = 0.0;     ///< sum m p
    double tail_moment = 0.0;  ///< sum over m > 2 m_plus of m p
};

/// envelope - observed for every a priori bound; negative means violated.
struct Margins {
    double p_sup = 0.0;
    double pbar_sup = 0.0;
    double n_sup = 0.0;
    double s_l1 = 0.0;
    double s_sup = 0.0;
    double tail = 0.0;
};

/// The envelopes themselves at time t.
struct Envelopes {
    double p_sup = 0.0;
    double pbar_sup = 0.0;
    double n_sup = 0.0;
    double s_l1 = 0.0;
    double s_sup = 0.0;
    double tail = 0.0;
};

/// 1 + 2 V_d C_T t exp(2 V_d C_T t).
double gronwall_factor(double velocity_measure, double c_t, double t);

/// Gronwall coefficient of the sup bound on p: Pi_cap / eps + 2 V_d C_T.
double sup_growth_rate(const ModelSpec& spec);

NormRow reduce_norms(const DensityField& p, const SignalField& s, const PhaseGrid& grid, double m_plus);

Envelopes envelopes_at(const InitialMetadata& initial, const ModelSpec& spec, double t);
Margins envelope_check(const NormRow& row, const InitialMetadata& initial, const ModelSpec& spec, double t);

struct DiagnosticsRow {
    NormRow norms;
    Margins margins;
    double x_moment_rate = 0.0;  ///< growth rate of sum <x> n since the previous row, or since t = 0
    bool ok = true;
};

/// Time series of monitored quantities. Rows must be appended in strictly
/// increasing time; a row whose margins fall below -tol * envelope (or whose
/// <x>-moment rate exceeds the mass by more than the tolerance) marks the
/// report as failed.
class DiagnosticsReport {
public:
    DiagnosticsReport() = default;
    DiagnosticsReport(InitialMetadata initial, const ModelSpec& spec);

    void record(const NormRow& row);

    const std::vector<DiagnosticsRow>& rows() const { return rows_; }
    bool failed() const { return failed_; }
    const std::string& failure() const { return failure_; }
    /// Smallest margin / envelope over all rows and bounds.
    double worst_relative_margin() const { return worst_relative_; }
    double worst_moment_rate_excess() const { return worst_rate_excess_; }

    static const char* csv_header();
    void write_csv(std::ostream& os, bool header = true) const;

private:
    InitialMetadata initial_{};
    double vd_ = 0.0, ct_ = 0.0, growth_ = 0.0;
    std::vector<DiagnosticsRow> rows_;
    bool failed_ = false;
    std::string failure_;
    double worst_relative_ = 0.0;
    double worst_rate_excess_ = -1.0;
};

}  // namespace chemokin
