#include "chemokin/limit.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <sstream>

#include "chemokin/error.hpp"
#include "chemokin/kinetic.hpp"
#include "chemokin/summation.hpp"

namespace chemokin {
namespace {

std::string num(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

}  // namespace

double m_zero(const ModelSpec& spec, double s) {
    double lo = spec.m_minus(), hi = spec.m_plus();
    const double f_lo = spec.rate(lo, s), f_hi = spec.rate(hi, s);
    if (!(f_lo > 0.0 && f_hi < 0.0))
        throw Error(ErrorKind::NoSignChange, "F(., S) has no sign change on (m_minus, m_plus) at S=" + num(s));
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double f = spec.rate(mid, s);
        if (f > 0.0)
            lo = mid;
        else if (f < 0.0)
            hi = mid;
        else
            return mid;
    }
    return 0.5 * (lo + hi);
}

BarDensityField oda_turning_apply(BarDensityField pbar, std::span<const double> signal, const ModelSpec& spec,
                                  const PhaseGrid& grid, double dt, int threads) {
    if (pbar.values.size() != grid.x_cells() * grid.v_count() || signal.size() != grid.x_cells())
        throw Error(ErrorKind::BadConfig, "limit field does not match the grid");
    if (dt < 0.0) throw Error(ErrorKind::CflViolation, "negative time step");
    const double bound = 1.0 / (grid.velocity_measure() * spec.c_t());
    if (dt > bound * (1.0 + 1e-12))
        throw Error(ErrorKind::CflViolation, "turning step dt=" + num(dt) + " exceeds 1/(V_d C_T)=" + num(bound));
    const std::size_t nv = grid.v_count();
    const BarDensityField old = pbar;
    const auto cells = static_cast<std::ptrdiff_t>(grid.x_cells());
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::ptrdiff_t c = 0; c < cells; ++c) {
        const double lambda = spec.turning_frequency(m_zero(spec, signal[static_cast<std::size_t>(c)]));
        const double* row = old.values.data() + static_cast<std::size_t>(c) * nv;
        for (std::size_t a = 0; a < nv; ++a) {
            double gain = 0.0, loss = 0.0;
            for (std::size_t b = 0; b < nv; ++b) {
                gain += grid.weight(b) * lambda * spec.kernel(a, b) * row[b];
                loss += grid.weight(b) * lambda * spec.kernel(b, a);
            }
            pbar.values[static_cast<std::size_t>(c) * nv + a] = std::max(0.0, 1.0 - dt * loss) * row[a] + dt * gain;
        }
    }
    return pbar;
}

// ---------------------------------------------------------------------------

OdaSolver::OdaSolver(const PhaseGrid& grid, const ModelSpec& spec, int threads, double max_dt)
    : grid_(grid),
      collapsed_(grid.dim(), grid.x_nodes(), grid.x_extent(), grid.topology(), grid.velocities(), 1, 1.0),
      spec_(spec),
      threads_(threads),
      max_dt_(max_dt),
      elliptic_(grid_) {
    if (threads < 1) throw Error(ErrorKind::BadConfig, "threads must be at least 1");
}

OdaState OdaSolver::make_state(BarDensityField pbar, std::int64_t steps) const {
    if (pbar.values.size() != grid_.x_cells() * grid_.v_count())
        throw Error(ErrorKind::BadConfig, "limit field does not match the grid");
    OdaState st;
    st.signal = elliptic_.solve(spatial_density(pbar, grid_));
    st.pbar = std::move(pbar);
    st.steps = steps;
    return st;
}

double OdaSolver::stable_dt() const {
    double speed = 0.0;
    for (const auto& v : grid_.velocities()) speed = std::max(speed, std::abs(v.v[0]) + std::abs(v.v[1]));
    double dt = 1.0 / (grid_.velocity_measure() * spec_.c_t());
    if (speed > 0.0) dt = std::min(dt, grid_.dx() / speed);
    if (max_dt_ > 0.0) dt = std::min(dt, max_dt_);
    return dt;
}

OdaState OdaSolver::step(OdaState state, double dt) const {
    if (!(dt > 0.0)) throw Error(ErrorKind::CflViolation, "macro step must be positive");
    const double t0 = state.pbar.t;
    const auto& s = state.signal.values;
    BarDensityField p = oda_turning_apply(std::move(state.pbar), s, spec_, grid_, 0.5 * dt, threads_);

    // Transport of p-bar is the kinetic transport with a single m-cell of unit width.
    DensityField flat(collapsed_, t0);
    flat.values = std::move(p.values);
    flat = transport_apply(std::move(flat), collapsed_, dt, &state.outflow, threads_);
    p.values = std::move(flat.values);

    p = oda_turning_apply(std::move(p), s, spec_, grid_, 0.5 * dt, threads_);
    for (std::size_t i = 0; i < p.values.size(); ++i)
        if (!(p.values[i] >= 0.0))
            throw Error(ErrorKind::VerificationFailed, "negative or non-finite limit density at index " + std::to_string(i));
    p.t = t0 + dt;
    state.signal = elliptic_.solve(spatial_density(p, grid_));
    state.pbar = std::move(p);
    state.steps += 1;
    return state;
}

OdaState OdaSolver::run(OdaState state, double t_end, double output_every,
                        const std::function<void(const OdaState&)>& observer) const {
    const double dt_cfl = stable_dt();
    double t = state.pbar.t;
    if (t_end < t) throw Error(ErrorKind::BadConfig, "t_end precedes the current time");
    while (t < t_end) {
        double stop = t_end;
        if (output_every > 0.0) {
            const double k = std::floor(t / output_every + 1e-9) + 1.0;
            stop = std::min(t_end, k * output_every);
        }
        while (t < stop) {
            const double remaining = stop - t;
            if (remaining <= dt_cfl) {
                state = step(std::move(state), remaining);
                state.pbar.t = stop;
            } else {
                state = step(std::move(state), dt_cfl);
            }
            t = state.pbar.t;
        }
        if (observer) observer(state);
    }
    return state;
}

BarDensityField oda_step(const BarDensityField& pbar, const ModelSpec& spec, const PhaseGrid& grid, double dt) {
    OdaSolver solver(grid, spec);
    return solver.step(solver.make_state(pbar), dt).pbar;
}

// ---------------------------------------------------------------------------

double w1_to_dirac(std::span<const double> cell_mass, double dm, double m0) {
    const double total = pairwise_sum(cell_mass);
    if (!(total > 0.0)) throw Error(ErrorKind::EmptyField, "m-marginal has no mass");
    double w1 = 0.0, cdf = 0.0;
    for (std::size_t j = 0; j < cell_mass.size(); ++j) {
        const double a = static_cast<double>(j) * dm, b = a + dm;
        const double ca = cdf, cb = cdf + cell_mass[j] / total;
        if (b <= m0) {
            w1 += dm * 0.5 * (ca + cb);
        } else if (a >= m0) {
            w1 += dm * (1.0 - 0.5 * (ca + cb));
        } else {
            const double cm = ca + (cb - ca) * (m0 - a) / dm;
            w1 += (m0 - a) * 0.5 * (ca + cm) + (b - m0) * (1.0 - 0.5 * (cm + cb));
        }
        cdf = cb;
    }
    return w1;
}

ConcentrationMetrics concentration_metrics(const DensityField& p, const SignalField& s, const ModelSpec& spec,
                                           const PhaseGrid& grid) {
    if (p.values.size() != grid.size() || s.values.size() != grid.x_cells())
        throw Error(ErrorKind::BadConfig, "field does not match the grid");
    const double mass = total_mass(p, grid);
    if (!(mass > 0.0)) throw Error(ErrorKind::EmptyField, "density has no mass");

    ConcentrationMetrics out;
    out.mass_floor = 1e-12 * mass / grid.x_nodes();
    const auto nm = static_cast<std::size_t>(grid.m_nodes());
    const std::size_t nv = grid.v_count();
    const double dm = grid.dm();
    std::vector<double> marginal(nm);
    for (std::size_t c = 0; c < grid.x_cells(); ++c) {
        for (std::size_t j = 0; j < nm; ++j) {
            double q = 0.0;
            for (std::size_t v = 0; v < nv; ++v) q += grid.weight(v) * p.at(grid, c, v, j);
            marginal[j] = q * dm * grid.cell_volume();
        }
        CellConcentration cc;
        cc.x_cell = c;
        cc.mass = pairwise_sum(marginal);
        if (!(cc.mass > out.mass_floor)) {
            out.excluded.push_back(c);
            continue;
        }
        cc.m0 = m_zero(spec, s.values[c]);
        double mean = 0.0;
        for (std::size_t j = 0; j < nm; ++j) mean += grid.m_center(static_cast<int>(j)) * marginal[j];
        mean /= cc.mass;
        double var = 0.0;
        for (std::size_t j = 0; j < nm; ++j) {
            const double d = grid.m_center(static_cast<int>(j)) - mean;
            var += (d * d + dm * dm / 12.0) * marginal[j];
        }
        cc.mean = mean;
        cc.mean_deviation = std::abs(mean - cc.m0);
        cc.std_dev = std::sqrt(var / cc.mass);
        cc.w1 = w1_to_dirac(marginal, dm, cc.m0);
        out.cells.push_back(cc);
    }
    double weight = 0.0;
    for (const auto& cc : out.cells) {
        weight += cc.mass;
        out.w1 += cc.mass * cc.w1;
        out.mean_deviation += cc.mass * cc.mean_deviation;
        out.std_dev += cc.mass * cc.std_dev;
    }
    if (weight > 0.0) {
        out.w1 /= weight;
        out.mean_deviation /= weight;
        out.std_dev /= weight;
    }
    return out;
}

// ---------------------------------------------------------------------------

const char* EpsStudyReport::csv_header() {
    return "eps,t,w1,l1_gap,mass,env_pbar_margin,env_n_margin,tail_moment,xmoment_rate";
}

void EpsStudyReport::write_csv(std::ostream& os) const {
    os << csv_header() << '\n';
    const auto old = os.precision(17);
    for (const auto& r : rows)
        os << r.eps << ',' << r.t << ',' << r.w1 << ',' << r.l1_gap << ',' << r.mass << ',' << r.env_pbar_margin << ','
           << r.env_n_margin << ',' << r.tail_moment << ',' << r.xmoment_rate << '\n';
    os.precision(old);
}

namespace {

struct EpsJob {
    std::vector<EpsStudyRow> rows;
    DiagnosticsReport diagnostics;
};

}  // namespace

EpsStudyReport eps_study(const Scenario& scenario, const EpsStudyOptions& options) {
    const auto& eps = options.eps;
    if (eps.empty()) throw Error(ErrorKind::BadConfig, "eps list is empty");
    for (std::size_t k = 0; k < eps.size(); ++k) {
        if (!(eps[k] > 0.0)) throw Error(ErrorKind::BadConfig, "eps values must be positive");
        if (k > 0 && !(eps[k] < eps[k - 1])) throw Error(ErrorKind::BadConfig, "eps list must be strictly decreasing");
    }
    if (!(options.t_end > 0.0)) throw Error(ErrorKind::BadConfig, "study needs t_end > 0");
    if (options.threads < 1) throw Error(ErrorKind::BadConfig, "threads must be at least 1");

    const PhaseGrid& grid = scenario.grid;
    EpsStudyReport report;
    report.eps = eps;
    // One step size for every member and the limit solver, resolving the
    // fastest adaptation time scale.
    double max_dt = 0.5 * eps.back();
    if (options.max_dt > 0.0) max_dt = std::min(max_dt, options.max_dt);

    // Limit solution at every sample time.
    const OdaSolver oda(grid, scenario.spec, 1, max_dt);
    std::vector<BarDensityField> limit;
    const BarDensityField pbar0 = integrate_m(scenario.initial.p0, grid);
    report.oda_mass = total_mass(pbar0, grid);
    oda.run(oda.make_state(pbar0), options.t_end, options.output_every,
            [&](const OdaState& st) { limit.push_back(st.pbar); });

    for (double e : eps) {
        const ModelSpec spec = scenario.spec.with_epsilon(e);
        KineticOptions ko;
        ko.max_dt = max_dt;
        const KineticSolver solver(grid, spec, ko);
        const auto s0 = solver.signal_for(scenario.initial.p0);
        const int n = adaptation_substeps(s0.values, spec, grid, 0.5 * solver.stable_dt());
        report.substep_estimates.push_back(n);
        if (options.log)
            *options.log << "eps=" << e << ": dt=" << solver.stable_dt() << ", about " << n
                         << " adaptation substeps per half step\n";
    }

    const auto job = [&](std::size_t k) {
        EpsJob out;
        const ModelSpec spec = scenario.spec.with_epsilon(eps[k]);
        KineticOptions ko;
        ko.max_dt = max_dt;
        const KineticSolver solver(grid, spec, ko);
        std::size_t stop = 0;
        auto observer = [&](const StepperState& st) {
            if (stop >= limit.size() || std::abs(limit[stop].t - st.p.t) > 1e-9)
                throw Error(ErrorKind::VerificationFailed, "kinetic and limit sample times disagree");
            EpsStudyRow row;
            row.eps = eps[k];
            row.t = st.p.t;
            row.w1 = concentration_metrics(st.p, st.signal, spec, grid).w1;
            row.l1_gap = l1_distance(integrate_m(st.p, grid), limit[stop], grid);
            out.rows.push_back(row);
            ++stop;
        };
        auto res = solver.run(solver.make_state(scenario.initial.p0), options.t_end, options.output_every,
                              scenario.initial.meta, observer);
        const auto& diag = res.report.rows();
        for (std::size_t i = 0; i < out.rows.size(); ++i) {
            out.rows[i].mass = diag[i].norms.mass;
            out.rows[i].env_pbar_margin = diag[i].margins.pbar_sup;
            out.rows[i].env_n_margin = diag[i].margins.n_sup;
            out.rows[i].tail_moment = diag[i].norms.tail_moment;
            out.rows[i].xmoment_rate = diag[i].x_moment_rate;
        }
        out.diagnostics = std::move(res.report);
        return out;
    };

    std::vector<EpsJob> jobs(eps.size());
    const auto width = static_cast<std::size_t>(options.threads);
    for (std::size_t first = 0; first < eps.size(); first += width) {
        std::vector<std::future<EpsJob>> batch;
        for (std::size_t k = first; k < std::min(eps.size(), first + width); ++k)
            batch.push_back(std::async(width > 1 ? std::launch::async : std::launch::deferred, job, k));
        for (std::size_t i = 0; i < batch.size(); ++i) jobs[first + i] = batch[i].get();
    }

    for (auto& j : jobs) {
        report.rows.insert(report.rows.end(), j.rows.begin(), j.rows.end());
        report.final_w1.push_back(j.rows.back().w1);
        report.final_gap.push_back(j.rows.back().l1_gap);
        report.diagnostics.push_back(std::move(j.diagnostics));
    }
    for (std::size_t k = 1; k < eps.size(); ++k) {
        report.w1_decreasing = report.w1_decreasing && report.final_w1[k] < report.final_w1[k - 1];
        report.gap_decreasing = report.gap_decreasing && report.final_gap[k] < report.final_gap[k - 1];
        const double ratio = report.final_gap[k - 1] / report.final_gap[k];
        report.min_gap_ratio = k == 1 ? ratio : std::min(report.min_gap_ratio, ratio);
    }
    return report;
}

}  // namespace chemokin
