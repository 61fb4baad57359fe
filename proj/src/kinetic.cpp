#include "chemokin/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "chemokin/error.hpp"

namespace chemokin {
namespace {

// Round-off slack on CFL comparisons made at exactly the limit.
constexpr double kCflSlack = 1e-12;

std::string num(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

void require_layout(const DensityField& p, const PhaseGrid& grid) {
    if (p.values.size() != grid.size()) throw Error(ErrorKind::BadConfig, "density field does not match the grid");
}

}  // namespace

DensityField turning_apply(DensityField p, const ModelSpec& spec, const PhaseGrid& grid, double dt, int threads) {
    require_layout(p, grid);
    if (dt < 0.0) throw Error(ErrorKind::CflViolation, "negative time step");
    const double bound = 1.0 / (grid.velocity_measure() * spec.c_t());
    if (dt > bound * (1.0 + kCflSlack))
        throw Error(ErrorKind::CflViolation,
                    "turning step dt=" + num(dt) + " exceeds 1/(V_d C_T)=" + num(bound));

    const std::size_t nv = grid.v_count();
    const auto nm = static_cast<std::size_t>(grid.m_nodes());
    // Per m cell: weighted gain matrix w_v' T(v, v', m) and loss rate sum_v' w_v' T(v', v, m).
    std::vector<double> gain(nm * nv * nv), loss(nm * nv);
    for (std::size_t j = 0; j < nm; ++j) {
        const double m = grid.m_center(static_cast<int>(j));
        for (std::size_t a = 0; a < nv; ++a) {
            double l = 0.0;
            for (std::size_t b = 0; b < nv; ++b) {
                gain[(j * nv + a) * nv + b] = grid.weight(b) * spec.turning(a, b, m);
                l += grid.weight(b) * spec.turning(b, a, m);
            }
            loss[j * nv + a] = l;
        }
    }

    const DensityField old = p;
    const auto cells = static_cast<std::ptrdiff_t>(grid.x_cells());
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::ptrdiff_t c = 0; c < cells; ++c) {
        const std::size_t base = static_cast<std::size_t>(c) * nv * nm;
        for (std::size_t j = 0; j < nm; ++j) {
            for (std::size_t a = 0; a < nv; ++a) {
                double g = 0.0;
                for (std::size_t b = 0; b < nv; ++b) g += gain[(j * nv + a) * nv + b] * old.values[base + b * nm + j];
                const double keep = std::max(0.0, 1.0 - dt * loss[j * nv + a]);
                p.values[base + a * nm + j] = keep * old.values[base + a * nm + j] + dt * g;
            }
        }
    }
    return p;
}

DensityField transport_apply(DensityField p, const PhaseGrid& grid, double dt, double* outflow, int threads) {
    require_layout(p, grid);
    if (dt < 0.0) throw Error(ErrorKind::CflViolation, "negative time step");
    const std::size_t nv = grid.v_count();
    const auto nm = static_cast<std::size_t>(grid.m_nodes());
    const int N = grid.x_nodes();
    const bool periodic = grid.topology() == Topology::Periodic;

    // Courant numbers per velocity and axis.
    std::vector<std::array<double, 2>> courant(nv);
    for (std::size_t k = 0; k < nv; ++k) {
        const auto& v = grid.velocities()[k].v;
        const double cx = v[0] * dt / grid.dx();
        const double cy = grid.dim() == 2 ? v[1] * dt / grid.dx() : 0.0;
        const double total = std::abs(cx) + std::abs(cy);
        if (total > 1.0 + kCflSlack)
            throw Error(ErrorKind::CflViolation,
                        "transport Courant number " + num(total) + " > 1 for velocity node " + std::to_string(k));
        const double shrink = total > 1.0 ? 1.0 / total : 1.0;
        courant[k] = {cx * shrink, cy * shrink};
    }

    const DensityField old = p;
    const std::size_t stride = nv * nm;
    auto cell_of = [&](int a, int b) -> std::ptrdiff_t {
        if (periodic) {
            a = (a % N + N) % N;
            b = (b % N + N) % N;
        } else if (a < 0 || a >= N || b < 0 || b >= N) {
            return -1;
        }
        return grid.dim() == 1 ? a : static_cast<std::ptrdiff_t>(a) * N + b;
    };

    const auto cells = static_cast<std::ptrdiff_t>(grid.x_cells());
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::ptrdiff_t c = 0; c < cells; ++c) {
        const int a = grid.dim() == 1 ? static_cast<int>(c) : static_cast<int>(c / N);
        const int b = grid.dim() == 1 ? 0 : static_cast<int>(c % N);
        for (std::size_t k = 0; k < nv; ++k) {
            const auto [cx, cy] = courant[k];
            const double keep = std::max(0.0, 1.0 - std::abs(cx) - std::abs(cy));
            const std::ptrdiff_t up_x = cx > 0.0 ? cell_of(a - 1, b) : cell_of(a + 1, b);
            const std::ptrdiff_t up_y = grid.dim() == 2 ? (cy > 0.0 ? cell_of(a, b - 1) : cell_of(a, b + 1)) : -1;
            const std::size_t self = static_cast<std::size_t>(c) * stride + k * nm;
            for (std::size_t j = 0; j < nm; ++j) {
                double v = keep * old.values[self + j];
                if (up_x >= 0) v += std::abs(cx) * old.values[static_cast<std::size_t>(up_x) * stride + k * nm + j];
                if (up_y >= 0) v += std::abs(cy) * old.values[static_cast<std::size_t>(up_y) * stride + k * nm + j];
                p.values[self + j] = v;
            }
        }
    }

    if (!periodic && outflow != nullptr) {
        // Mass carried across the outer faces during the step.
        double lost = 0.0;
        for (std::size_t c = 0; c < grid.x_cells(); ++c) {
            const int a = grid.dim() == 1 ? static_cast<int>(c) : static_cast<int>(c / static_cast<std::size_t>(N));
            const int b = grid.dim() == 1 ? 0 : static_cast<int>(c % static_cast<std::size_t>(N));
            for (std::size_t k = 0; k < nv; ++k) {
                const auto [cx, cy] = courant[k];
                double frac = 0.0;
                if ((cx > 0.0 && a == N - 1) || (cx < 0.0 && a == 0)) frac += std::abs(cx);
                if (grid.dim() == 2 && ((cy > 0.0 && b == N - 1) || (cy < 0.0 && b == 0))) frac += std::abs(cy);
                if (frac == 0.0) continue;
                double s = 0.0;
                for (std::size_t j = 0; j < nm; ++j) s += old.values[c * stride + k * nm + j];
                lost += frac * grid.weight(k) * s;
            }
        }
        *outflow += lost * grid.cell_volume() * grid.dm();
    }
    return p;
}

namespace {

// Signed face Courant coefficients dt_sub * F(face) / (eps dm) for the
// interior faces 1..nm-1 of one spatial cell.
void face_speeds(double s, const ModelSpec& spec, const PhaseGrid& grid, double scale, std::vector<double>& out) {
    const int nm = grid.m_nodes();
    out.assign(static_cast<std::size_t>(nm + 1), 0.0);
    for (int f = 1; f < nm; ++f) out[static_cast<std::size_t>(f)] = scale * spec.rate(grid.m_face(f), s);
}

void check_inward(double s, const ModelSpec& spec, const PhaseGrid& grid) {
    if (!(spec.rate(grid.m_max(), s) < 0.0))
        throw Error(ErrorKind::SpecViolation, "F(m_max, S) >= 0 at S=" + num(s) + "; m_max is too small");
    if (!(spec.rate(0.0, s) > 0.0)) throw Error(ErrorKind::SpecViolation, "F(0, S) <= 0 at S=" + num(s));
}

}  // namespace

int adaptation_substeps(std::span<const double> signal, const ModelSpec& spec, const PhaseGrid& grid, double dt) {
    if (signal.size() != grid.x_cells()) throw Error(ErrorKind::BadConfig, "signal does not match the grid");
    if (dt <= 0.0) return 1;
    // Largest outgoing Courant rate of any cell per unit time.
    double worst = 0.0;
    std::vector<double> a;
    for (double s : signal) {
        face_speeds(s, spec, grid, 1.0 / (spec.epsilon() * grid.dm()), a);
        for (int j = 0; j < grid.m_nodes(); ++j) {
            const double out = std::max(a[static_cast<std::size_t>(j) + 1], 0.0) + std::max(-a[static_cast<std::size_t>(j)], 0.0);
            worst = std::max(worst, out);
        }
    }
    const double n = std::ceil(dt * worst * (1.0 - kCflSlack));
    return std::max(1, static_cast<int>(n));
}

DensityField adaptation_apply(DensityField p, std::span<const double> signal, const ModelSpec& spec,
                              const PhaseGrid& grid, double dt, int threads, int min_substeps) {
    require_layout(p, grid);
    if (dt < 0.0) throw Error(ErrorKind::CflViolation, "negative time step");
    if (signal.size() != grid.x_cells()) throw Error(ErrorKind::BadConfig, "signal does not match the grid");
    if (dt == 0.0) return p;
    for (double s : signal) {
        if (!std::isfinite(s)) throw Error(ErrorKind::NonFiniteInput, "signal is not finite");
        check_inward(s, spec, grid);
    }

    const int substeps = std::max(min_substeps, adaptation_substeps(signal, spec, grid, dt));
    const double h = dt / substeps;
    const std::size_t nv = grid.v_count();
    const auto nm = static_cast<std::size_t>(grid.m_nodes());
    const auto cells = static_cast<std::ptrdiff_t>(grid.x_cells());
    const double scale = h / (spec.epsilon() * grid.dm());

#pragma omp parallel num_threads(threads)
    {
        std::vector<double> c, flux(nm + 1, 0.0);
#pragma omp for schedule(static)
        for (std::ptrdiff_t x = 0; x < cells; ++x) {
            face_speeds(signal[static_cast<std::size_t>(x)], spec, grid, scale, c);
            for (std::size_t k = 0; k < nv; ++k) {
                double* row = p.values.data() + (static_cast<std::size_t>(x) * nv + k) * nm;
                for (int step = 0; step < substeps; ++step) {
                    for (std::size_t f = 1; f < nm; ++f)
                        flux[f] = c[f] > 0.0 ? c[f] * row[f - 1] : c[f] * row[f];
                    for (std::size_t j = 0; j < nm; ++j) {
                        // Outgoing part first so the result stays non-negative.
                        const double out = std::max(flux[j + 1], 0.0) - std::min(flux[j], 0.0);
                        const double in = std::max(flux[j], 0.0) - std::min(flux[j + 1], 0.0);
                        row[j] = (row[j] - out) + in;
                    }
                }
            }
        }
    }
    return p;
}

// ---------------------------------------------------------------------------

KineticSolver::KineticSolver(const PhaseGrid& grid, const ModelSpec& spec, KineticOptions options)
    : grid_(grid), spec_(spec), options_(std::move(options)), elliptic_(grid_) {
    if (options_.threads < 1) throw Error(ErrorKind::BadConfig, "threads must be at least 1");
}

SignalField KineticSolver::signal_for(const DensityField& p) const {
    if (options_.frozen_signal) {
        SignalField s;
        s.values = options_.frozen_signal->frame_at(p.t);
        s.solver = elliptic_.kind();
        return s;
    }
    return elliptic_.solve(spatial_density(p, grid_));
}

StepperState KineticSolver::make_state(DensityField p, std::int64_t steps, double outflow) const {
    require_layout(p, grid_);
    StepperState s;
    s.signal = signal_for(p);
    s.p = std::move(p);
    s.steps = steps;
    s.outflow = outflow;
    return s;
}

double KineticSolver::stable_dt() const {
    double speed = 0.0;
    for (const auto& v : grid_.velocities()) speed = std::max(speed, std::abs(v.v[0]) + std::abs(v.v[1]));
    double dt = 1.0 / (grid_.velocity_measure() * spec_.c_t());
    if (speed > 0.0) dt = std::min(dt, grid_.dx() / speed);
    if (options_.max_dt > 0.0) dt = std::min(dt, options_.max_dt);
    return dt;
}

StepperState KineticSolver::macro_step(StepperState state, double dt) const {
    if (!(dt > 0.0)) throw Error(ErrorKind::CflViolation, "macro step must be positive");
    const int threads = options_.threads;
    const double t0 = state.p.t;

    std::vector<double> s_step;
    if (options_.frozen_signal)
        s_step = options_.frozen_signal->frame_at(t0 + 0.5 * dt);
    else
        s_step = state.signal.values;

    DensityField p = std::move(state.p);
    p = adaptation_apply(std::move(p), s_step, spec_, grid_, 0.5 * dt, threads);
    p = turning_apply(std::move(p), spec_, grid_, 0.5 * dt, threads);
    p = transport_apply(std::move(p), grid_, dt, &state.outflow, threads);
    p = turning_apply(std::move(p), spec_, grid_, 0.5 * dt, threads);
    p = adaptation_apply(std::move(p), s_step, spec_, grid_, 0.5 * dt, threads);

    for (std::size_t i = 0; i < p.values.size(); ++i) {
        if (!(p.values[i] >= 0.0))
            throw Error(ErrorKind::VerificationFailed,
                        "negative or non-finite density " + num(p.values[i]) + " at index " + std::to_string(i));
    }
    p.t = t0 + dt;
    state.p = std::move(p);
    state.signal = signal_for(state.p);
    state.steps += 1;
    return state;
}

RunResult KineticSolver::run(StepperState state, double t_end, double output_every, const InitialMetadata& initial,
                             const Observer& observer) const {
    RunResult result{StepperState{}, DiagnosticsReport(initial, spec_)};
    const double dt_cfl = stable_dt();
    double t = state.p.t;
    if (t_end < t) throw Error(ErrorKind::BadConfig, "t_end precedes the current time");

    while (t < t_end) {
        double stop = t_end;
        if (output_every > 0.0) {
            // Stops are absolute multiples of the cadence so restarts line up.
            const double k = std::floor(t / output_every + 1e-9) + 1.0;
            stop = std::min(t_end, k * output_every);
        }
        while (t < stop) {
            const double remaining = stop - t;
            if (remaining <= dt_cfl) {
                state = macro_step(std::move(state), remaining);
                state.p.t = stop;
            } else {
                state = macro_step(std::move(state), dt_cfl);
            }
            t = state.p.t;
        }
        result.report.record(reduce_norms(state.p, state.signal, grid_, spec_.m_plus()));
        if (observer) observer(state);
    }
    result.state = std::move(state);
    return result;
}

}  // namespace chemokin
