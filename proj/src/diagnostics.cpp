#include "chemokin/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "chemokin/error.hpp"
#include "chemokin/summation.hpp"

namespace chemokin {
namespace {

Envelopes envelopes_from(const InitialMetadata& initial, double vd, double ct, double growth, double t);

}  // namespace

double gronwall_factor(double velocity_measure, double c_t, double t) {
    const double a = 2.0 * velocity_measure * c_t * t;
    return 1.0 + a * std::exp(a);
}

double sup_growth_rate(const ModelSpec& spec) {
    return spec.pi_cap() / spec.epsilon() + 2.0 * spec.velocity_measure() * spec.c_t();
}

NormRow reduce_norms(const DensityField& p, const SignalField& s, const PhaseGrid& grid, double m_plus) {
    NormRow row;
    row.t = p.t;
    const auto nm = static_cast<std::size_t>(grid.m_nodes());
    const std::size_t nv = grid.v_count();
    const double cell = grid.cell_volume() * grid.dm();

    row.mass = total_mass(p, grid);
    row.p_sup = max_abs(p.values);
    const BarDensityField pbar = integrate_m(p, grid);
    row.pbar_sup = max_abs(pbar.values);
    const std::vector<double> n = spatial_density(pbar, grid);
    row.n_sup = max_abs(n);
    row.s_l1 = grid.cell_volume() * pairwise_sum_of(s.values.size(), [&](std::size_t i) { return std::abs(s.values[i]); });
    row.s_sup = max_abs(s.values);
    row.x_moment = grid.cell_volume() * pairwise_sum_of(n.size(), [&](std::size_t c) {
        return japanese_bracket(grid.x_position(c)) * n[c];
    });
    row.m_moment = cell * pairwise_sum_of(p.values.size(), [&](std::size_t i) {
        return grid.m_center(static_cast<int>(i % nm)) * grid.weight((i / nm) % nv) * p.values[i];
    });
    const double cut = 2.0 * m_plus;
    row.tail_moment = cell * pairwise_sum_of(p.values.size(), [&](std::size_t i) {
        const double m = grid.m_center(static_cast<int>(i % nm));
        return m > cut ? m * grid.weight((i / nm) % nv) * p.values[i] : 0.0;
    });
    return row;
}

Envelopes envelopes_at(const InitialMetadata& initial, const ModelSpec& spec, double t) {
    return envelopes_from(initial, spec.velocity_measure(), spec.c_t(), sup_growth_rate(spec), t);
}

namespace {

Envelopes envelopes_from(const InitialMetadata& initial, double vd, double ct, double growth, double t) {
    Envelopes e;
    e.pbar_sup = initial.pbar_sup * gronwall_factor(vd, ct, t);
    e.n_sup = vd * e.pbar_sup;
    e.s_sup = vd * e.pbar_sup;
    e.s_l1 = initial.mass;
    e.p_sup = initial.p_sup * (1.0 + growth * t * std::exp(growth * t));
    e.tail = initial.m_moment;
    return e;
}

}  // namespace

Margins envelope_check(const NormRow& row, const InitialMetadata& initial, const ModelSpec& spec, double t) {
    const Envelopes e = envelopes_at(initial, spec, t);
    Margins m;
    m.p_sup = e.p_sup - row.p_sup;
    m.pbar_sup = e.pbar_sup - row.pbar_sup;
    m.n_sup = e.n_sup - row.n_sup;
    m.s_l1 = e.s_l1 - row.s_l1;
    m.s_sup = e.s_sup - row.s_sup;
    m.tail = e.tail - row.tail_moment;
    return m;
}

DiagnosticsReport::DiagnosticsReport(InitialMetadata initial, const ModelSpec& spec)
    : initial_(initial),
      vd_(spec.velocity_measure()),
      ct_(spec.c_t()),
      growth_(sup_growth_rate(spec)) {}

void DiagnosticsReport::record(const NormRow& norms) {
    if (!rows_.empty() && !(norms.t > rows_.back().norms.t))
        throw Error(ErrorKind::VerificationFailed, "diagnostics rows must be strictly increasing in time");
    DiagnosticsRow row;
    row.norms = norms;

    const double t = norms.t;
    const Envelopes e = envelopes_from(initial_, vd_, ct_, growth_, t);
    row.margins = {e.p_sup - norms.p_sup, e.pbar_sup - norms.pbar_sup, e.n_sup - norms.n_sup,
                   e.s_l1 - norms.s_l1,   e.s_sup - norms.s_sup,       e.tail - norms.tail_moment};

    const std::pair<const char*, std::pair<double, double>> checks[] = {
        {"p_sup", {row.margins.p_sup, e.p_sup}},    {"pbar_sup", {row.margins.pbar_sup, e.pbar_sup}},
        {"n_sup", {row.margins.n_sup, e.n_sup}},    {"s_l1", {row.margins.s_l1, e.s_l1}},
        {"s_sup", {row.margins.s_sup, e.s_sup}},    {"tail", {row.margins.tail, e.tail}},
    };
    for (const auto& [name, me] : checks) {
        const auto [margin, env] = me;
        const double scale = std::max(std::abs(env), std::numeric_limits<double>::min());
        worst_relative_ = std::min(worst_relative_, margin / scale);
        if (margin < -kEnvelopeTolerance * std::abs(env)) {
            row.ok = false;
            if (!failed_) {
                std::ostringstream os;
                os << "envelope " << name << " violated at t=" << t << " (margin " << margin << ")";
                failure_ = os.str();
            }
            failed_ = true;
        }
    }

    // The first row is measured against the initial data at t = 0.
    const bool have_prev = !rows_.empty() || norms.t > 0.0;
    if (have_prev) {
        const double x_prev = rows_.empty() ? initial_.x_moment : rows_.back().norms.x_moment;
        const double t_prev = rows_.empty() ? 0.0 : rows_.back().norms.t;
        row.x_moment_rate = (norms.x_moment - x_prev) / (norms.t - t_prev);
        const double excess = row.x_moment_rate - initial_.mass;
        worst_rate_excess_ = std::max(worst_rate_excess_, excess / initial_.mass);
        if (excess > kMomentTolerance * initial_.mass) {
            row.ok = false;
            if (!failed_) {
                std::ostringstream os;
                os << "<x>-moment growth rate " << row.x_moment_rate << " exceeds mass at t=" << t;
                failure_ = os.str();
            }
            failed_ = true;
        }
    }
    rows_.push_back(row);
}

const char* DiagnosticsReport::csv_header() {
    return "t,mass,p_sup,pbar_sup,n_sup,s_l1,s_sup,x_moment,m_moment,tail_moment,"
           "margin_p_sup,margin_pbar_sup,margin_n_sup,margin_s_l1,margin_s_sup,margin_tail,x_moment_rate,ok";
}

void DiagnosticsReport::write_csv(std::ostream& os, bool header) const {
    if (header) os << csv_header() << '\n';
    const auto old = os.precision(17);
    for (const auto& r : rows_) {
        const auto& n = r.norms;
        const auto& m = r.margins;
        os << n.t << ',' << n.mass << ',' << n.p_sup << ',' << n.pbar_sup << ',' << n.n_sup << ',' << n.s_l1 << ','
           << n.s_sup << ',' << n.x_moment << ',' << n.m_moment << ',' << n.tail_moment << ',' << m.p_sup << ','
           << m.pbar_sup << ',' << m.n_sup << ',' << m.s_l1 << ',' << m.s_sup << ',' << m.tail << ','
           << r.x_moment_rate << ',' << (r.ok ? 1 : 0) << '\n';
    }
    os.precision(old);
}

}  // namespace chemokin
