#include "chemokin/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chemokin/error.hpp"
#include "quadrature.hpp"

namespace chemokin {

struct DuhamelSolution::Context {
    ModelSpec spec;
    SignalHistory history;
    PhaseGrid grid;
    InitialProfile p0;
    // Per m-sample turning data is recomputed on the fly; only these are cached.
    std::vector<double> weights;
    std::vector<double> vx;
};

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPathTolerance = 1e-10;

struct PathRun {
    std::vector<double> M;
    double entry = 0.0;
    bool exited = false;
};

PathRun integrate_backward(double x, double vx, double m, double t, int samples, int substeps,
                           const SignalHistory& history, const ModelSpec& spec, double m_max) {
    PathRun out;
    out.M.assign(static_cast<std::size_t>(samples) + 1, kNaN);
    out.M.back() = m;
    if (t == 0.0) return out;
    const double eps = spec.epsilon();
    const auto rhs = [&](double s, double mm) { return spec.rate(mm, history(x - vx * (t - s), s)) / eps; };
    const int n = samples * substeps;
    const double h = t / n;
    const auto rk4 = [&](double s0, double cur, double hh) {
        const double k1 = rhs(s0, cur);
        const double k2 = rhs(s0 - 0.5 * hh, cur - 0.5 * hh * k1);
        const double k3 = rhs(s0 - 0.5 * hh, cur - 0.5 * hh * k2);
        const double k4 = rhs(s0 - hh, cur - hh * k3);
        return cur - hh * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    };
    const auto step = [&](double s0, double cur, double theta) { return rk4(s0, cur, theta * h); };
    // The partial step up to the boundary is split into `substeps` pieces so
    // that it is refined along with the rest of the path.
    const auto partial = [&](double s0, double cur, double theta) {
        const double hh = theta * h / substeps;
        for (int r = 0; r < substeps; ++r) cur = rk4(s0 - r * hh, cur, hh);
        return cur;
    };

    double cur = m;
    for (int k = 0; k < n; ++k) {
        const double s0 = t - k * h;
        const double next = step(s0, cur, 1.0);
        if (next < 0.0 || next > m_max) {
            const double bound = next < 0.0 ? 0.0 : m_max;
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 64; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double val = partial(s0, cur, mid);
                const bool outside = bound == 0.0 ? val < 0.0 : val > m_max;
                (outside ? hi : lo) = mid;
            }
            out.entry = s0 - lo * h;
            out.exited = true;
            return out;
        }
        cur = next;
        if ((k + 1) % substeps == 0) out.M[static_cast<std::size_t>(samples - (k + 1) / substeps)] = cur;
    }
    return out;
}

std::string describe(double x, std::size_t v, double m, double t) {
    std::ostringstream os;
    os << "x=" << x << ", v=" << v << ", m=" << m << ", t=" << t;
    return os.str();
}

// Lagrange weights on nodes 0..3 at u in [1, 2].
void cubic_weights(double u, double w[4]) {
    w[0] = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
    w[1] = u * (u - 2.0) * (u - 3.0) / 2.0;
    w[2] = -u * (u - 1.0) * (u - 3.0) / 2.0;
    w[3] = u * (u - 1.0) * (u - 2.0) / 6.0;
}

}  // namespace

CharacteristicPath backtrace(const std::array<double, 2>& x, std::size_t v, double m, double t,
                             const SignalHistory& history, const ModelSpec& spec, const PhaseGrid& grid, int samples,
                             BoundaryMode mode) {
    if (grid.dim() != 1) throw Error(ErrorKind::BadConfig, "characteristic oracle supports d = 1 only");
    if (v >= grid.v_count()) throw Error(ErrorKind::BadConfig, "velocity index out of range");
    if (samples < 1 || !(t >= 0.0)) throw Error(ErrorKind::BadConfig, "backtrace needs t >= 0 and samples >= 1");
    if (!(m >= 0.0 && m <= grid.m_max()))
        throw Error(ErrorKind::LeftDomain, "start point outside [0, m_max]: " + describe(x[0], v, m, t));
    const double vx = grid.velocities()[v].v[0];

    int q = 1;
    PathRun prev = integrate_backward(x[0], vx, m, t, samples, q, history, spec, grid.m_max());
    for (;;) {
        PathRun next = integrate_backward(x[0], vx, m, t, samples, 2 * q, history, spec, grid.m_max());
        double diff = 0.0;
        if (prev.exited != next.exited) {
            diff = std::numeric_limits<double>::infinity();
        } else if (next.exited) {
            diff = std::abs(prev.entry - next.entry);
        } else {
            diff = std::abs(prev.M.front() - next.M.front());
        }
        q *= 2;
        prev = std::move(next);
        if (diff <= kPathTolerance) break;
        if (q > (1 << 20))
            throw Error(ErrorKind::VerificationFailed, "characteristic did not converge: " + describe(x[0], v, m, t));
    }

    if (prev.exited && mode == BoundaryMode::Throw)
        throw Error(ErrorKind::LeftDomain, "characteristic leaves [0, m_max] at s=" + std::to_string(prev.entry) +
                                               " from " + describe(x[0], v, m, t));

    CharacteristicPath path;
    path.v = grid.velocities()[v].v;
    path.entry_time = prev.exited ? prev.entry : 0.0;
    path.M = std::move(prev.M);
    path.s.resize(path.M.size());
    path.X.resize(path.M.size());
    for (int l = 0; l <= samples; ++l) {
        const double s = t * l / samples;
        path.s[static_cast<std::size_t>(l)] = s;
        path.X[static_cast<std::size_t>(l)] = x[0] - vx * (t - s);
    }
    path.s.back() = t;
    path.X.back() = x[0];
    return path;
}

// ---------------------------------------------------------------------------

double DuhamelSolution::node(int l, int i, std::size_t v, int j) const {
    return values_[static_cast<std::size_t>(l)][(static_cast<std::size_t>(i) * static_cast<std::size_t>(nv_) + v) *
                                                    static_cast<std::size_t>(nm_ + 1) +
                                                static_cast<std::size_t>(j)];
}

double DuhamelSolution::interpolate(const std::vector<double>& frame, double x, std::size_t v, double m) const {
    const double ux = (x - x0_) / hx_;
    const int bx = static_cast<int>(std::floor(ux)) - 1;
    const double um = m / hm_;
    const int bm = std::min(static_cast<int>(std::floor(um)), nm_) - 1;
    double wx[4], wm[4];
    cubic_weights(ux - bx, wx);
    cubic_weights(um - bm, wm);
    const auto stride = static_cast<std::size_t>(nm_ + 1);
    double s = 0.0;
    for (int a = 0; a < 4; ++a) {
        const int i = ((bx + a) % nx_ + nx_) % nx_;
        const double* row = frame.data() + (static_cast<std::size_t>(i) * static_cast<std::size_t>(nv_) + v) * stride;
        double r = 0.0;
        for (int b = 0; b < 4; ++b) {
            const int j = bm + b;
            if (j >= 0 && j <= nm_) r += wm[b] * row[j];
        }
        s += wx[a] * r;
    }
    return s;
}

double DuhamelSolution::integrate_path(const Context& ctx, const std::vector<std::vector<double>>& values, double x,
                                       std::size_t v, const double* msamples, int k, double pull) const {
    if (k == 0) return pull;
    const double dtau = t_ / nt_;
    const double tk = k * dtau;
    const double eps = ctx.spec.epsilon();
    double integral = 0.0;
    for (int l = 0; l <= k; ++l) {
        const double m = msamples[l];
        if (std::isnan(m)) continue;
        const double tl = l * dtau;
        const double X = x - ctx.vx[v] * (tk - tl);
        const double S = ctx.history(X, tl);
        double loss = ctx.spec.rate_dm(m, S) / eps;
        double gain = 0.0;
        const double freq = ctx.spec.turning_frequency(m);
        for (std::size_t b = 0; b < static_cast<std::size_t>(nv_); ++b) {
            loss += ctx.weights[b] * freq * ctx.spec.kernel(b, v);
            gain += ctx.weights[b] * freq * ctx.spec.kernel(v, b) * interpolate(values[static_cast<std::size_t>(l)], X, b, m);
        }
        const double g = gain - loss * interpolate(values[static_cast<std::size_t>(l)], X, v, m);
        integral += (l == 0 || l == k ? 0.5 : 1.0) * g;
    }
    return pull + dtau * integral;
}

double DuhamelSolution::evaluate(double x, std::size_t v, double m) const {
    const auto& ctx = *ctx_;
    const auto path = backtrace({x, 0.0}, v, m, t_, ctx.history, ctx.spec, ctx.grid, nt_, BoundaryMode::Truncate);
    const double pull = std::isnan(path.M.front()) ? 0.0 : ctx.p0(path.X.front(), v, path.M.front());
    return integrate_path(ctx, values_, x, v, path.M.data(), nt_, pull);
}

DensityField DuhamelSolution::cell_averages(const PhaseGrid& grid) const {
    if (grid.dim() != 1 || grid.v_count() != static_cast<std::size_t>(nv_))
        throw Error(ErrorKind::BadConfig, "target grid does not match the oracle");
    DensityField out(grid, t_);
    const double g = 0.5 / std::sqrt(3.0);
    const auto cells = static_cast<std::ptrdiff_t>(grid.x_cells());
    const int nm = grid.m_nodes();
#pragma omp parallel for schedule(static) num_threads(threads_)
    for (std::ptrdiff_t c = 0; c < cells; ++c) {
        const double xc = grid.x_center(static_cast<int>(c));
        for (std::size_t v = 0; v < grid.v_count(); ++v)
            for (int j = 0; j < nm; ++j) {
                const double mc = grid.m_center(j);
                double s = 0.0;
                for (double ox : {-g, g})
                    for (double om : {-g, g}) s += evaluate(xc + ox * grid.dx(), v, mc + om * grid.dm());
                out.at(grid, static_cast<std::size_t>(c), v, static_cast<std::size_t>(j)) = 0.25 * s;
            }
    }
    return out;
}

DuhamelSolution duhamel_solve(const InitialProfile& p0, const SignalHistory& history, const ModelSpec& spec,
                              const PhaseGrid& grid, double t, const DuhamelOptions& options) {
    if (grid.dim() != 1 || grid.topology() != Topology::Periodic)
        throw Error(ErrorKind::BadConfig, "Duhamel oracle supports d = 1 on a periodic domain");
    if (options.x_nodes < 4 || options.m_nodes < 3 || options.time_steps < 1 || options.max_iterations < 0 ||
        options.threads < 1)
        throw Error(ErrorKind::BadConfig, "invalid Duhamel oracle resolution");
    if (!(t > 0.0)) throw Error(ErrorKind::BadConfig, "Duhamel oracle needs t > 0");
    const double rho = t * (spec.pi_cap() / spec.epsilon() + 2.0 * spec.velocity_measure() * spec.c_t());
    if (!(rho < 1.0)) {
        std::ostringstream os;
        os << "Picard iteration does not contract: t (Pi_cap/eps + 2 V_d C_T) = " << rho << " >= 1";
        throw Error(ErrorKind::NoContraction, os.str());
    }

    DuhamelSolution sol;
    auto ctx = std::make_shared<DuhamelSolution::Context>(
        DuhamelSolution::Context{spec, history, grid, p0, {}, {}});
    for (std::size_t v = 0; v < grid.v_count(); ++v) {
        ctx->weights.push_back(grid.weight(v));
        ctx->vx.push_back(grid.velocities()[v].v[0]);
    }
    sol.ctx_ = ctx;
    sol.t_ = t;
    sol.nx_ = options.x_nodes;
    sol.nm_ = options.m_nodes;
    sol.nt_ = options.time_steps;
    sol.nv_ = static_cast<int>(grid.v_count());
    sol.threads_ = options.threads;
    sol.extent_ = grid.x_extent();
    sol.x0_ = -0.5 * grid.x_extent();
    sol.hx_ = grid.x_extent() / sol.nx_;
    sol.hm_ = grid.m_max() / sol.nm_;

    const int K = sol.nt_;
    const auto nmj = static_cast<std::size_t>(sol.nm_ + 1);
    const auto nv = static_cast<std::size_t>(sol.nv_);
    const std::size_t nodes = static_cast<std::size_t>(sol.nx_) * nv * nmj;
    const double dtau = t / K;

    // M samples for the path ending at (node, tau_k), sample l at offset l.
    // A time-independent signal makes the backward flow autonomous, so one
    // path of length t per node serves every end time.
    const bool autonomous = history.is_constant();
    std::vector<double> msamples;
    std::vector<std::size_t> offset;  // per (k, node)
    const auto node_coords = [&](std::size_t n, double& x, std::size_t& v, double& m) {
        const std::size_t j = n % nmj;
        v = (n / nmj) % nv;
        const std::size_t i = n / (nmj * nv);
        x = sol.x0_ + static_cast<double>(i) * sol.hx_;
        m = static_cast<double>(j) * sol.hm_;
    };
    if (autonomous) {
        msamples.assign(nodes * static_cast<std::size_t>(K + 1), kNaN);
#pragma omp parallel for schedule(static) num_threads(options.threads)
        for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(nodes); ++n) {
            double x, m;
            std::size_t v;
            node_coords(static_cast<std::size_t>(n), x, v, m);
            const auto path = backtrace({x, 0.0}, v, m, t, history, spec, grid, K, BoundaryMode::Truncate);
            std::copy(path.M.begin(), path.M.end(), msamples.begin() + n * (K + 1));
        }
        offset.resize(static_cast<std::size_t>(K + 1) * nodes);
        for (int k = 0; k <= K; ++k)
            for (std::size_t n = 0; n < nodes; ++n)
                offset[static_cast<std::size_t>(k) * nodes + n] = n * static_cast<std::size_t>(K + 1) +
                                                                  static_cast<std::size_t>(K - k);
    } else {
        offset.resize(static_cast<std::size_t>(K + 1) * nodes);
        std::size_t total = 0;
        for (int k = 0; k <= K; ++k)
            for (std::size_t n = 0; n < nodes; ++n) {
                offset[static_cast<std::size_t>(k) * nodes + n] = total;
                total += static_cast<std::size_t>(k + 1);
            }
        msamples.assign(total, kNaN);
        for (int k = 1; k <= K; ++k) {
#pragma omp parallel for schedule(static) num_threads(options.threads)
            for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(nodes); ++n) {
                double x, m;
                std::size_t v;
                node_coords(static_cast<std::size_t>(n), x, v, m);
                const auto path =
                    backtrace({x, 0.0}, v, m, k * dtau, history, spec, grid, k, BoundaryMode::Truncate);
                std::copy(path.M.begin(), path.M.end(),
                          msamples.begin() + static_cast<std::ptrdiff_t>(offset[static_cast<std::size_t>(k) * nodes +
                                                                                 static_cast<std::size_t>(n)]));
            }
        }
        for (std::size_t n = 0; n < nodes; ++n) {
            double x, m;
            std::size_t v;
            node_coords(n, x, v, m);
            msamples[offset[n]] = m;
        }
    }

    // Pull-back of the initial data along every path.
    std::vector<std::vector<double>> pull(static_cast<std::size_t>(K + 1), std::vector<double>(nodes, 0.0));
    for (int k = 0; k <= K; ++k) {
        auto& row = pull[static_cast<std::size_t>(k)];
#pragma omp parallel for schedule(static) num_threads(options.threads)
        for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(nodes); ++n) {
            double x, m;
            std::size_t v;
            node_coords(static_cast<std::size_t>(n), x, v, m);
            const double m0 = msamples[offset[static_cast<std::size_t>(k) * nodes + static_cast<std::size_t>(n)]];
            row[static_cast<std::size_t>(n)] = std::isnan(m0) ? 0.0 : p0(x - ctx->vx[v] * k * dtau, v, m0);
        }
    }

    sol.values_ = pull;
    const double cell = sol.hx_ * sol.hm_;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        std::vector<std::vector<double>> next = pull;
        for (int k = 1; k <= K; ++k) {
            auto& row = next[static_cast<std::size_t>(k)];
#pragma omp parallel for schedule(static) num_threads(options.threads)
            for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(nodes); ++n) {
                double x, m;
                std::size_t v;
                node_coords(static_cast<std::size_t>(n), x, v, m);
                const double* ms =
                    msamples.data() + offset[static_cast<std::size_t>(k) * nodes + static_cast<std::size_t>(n)];
                row[static_cast<std::size_t>(n)] =
                    sol.integrate_path(*ctx, sol.values_, x, v, ms, k, pull[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)]);
            }
        }
        double inc = 0.0, scale = 0.0, l1 = 0.0;
        for (int k = 0; k <= K; ++k) {
            double l1k = 0.0;
            const auto& a = next[static_cast<std::size_t>(k)];
            const auto& b = sol.values_[static_cast<std::size_t>(k)];
            for (std::size_t n = 0; n < nodes; ++n) {
                const double d = std::abs(a[n] - b[n]);
                inc = std::max(inc, d);
                scale = std::max(scale, std::abs(a[n]));
                l1k += d * ctx->weights[(n / nmj) % nv];
            }
            l1 = std::max(l1, l1k * cell);
        }
        sol.values_ = std::move(next);
        sol.increments_.push_back(inc);
        sol.l1_increments_.push_back(l1);
        sol.iterations_ = iter + 1;
        if (inc <= options.tolerance * std::max(scale, std::numeric_limits<double>::min())) {
            sol.converged_ = true;
            break;
        }
    }
    if (options.max_iterations == 0) sol.converged_ = false;
    return sol;
}

DensityField cell_average(const InitialProfile& f, const PhaseGrid& grid) {
    if (grid.dim() != 1) throw Error(ErrorKind::BadConfig, "cell_average supports d = 1 only");
    const auto [gx, gw] = detail::gauss_legendre(3);
    DensityField out(grid);
    for (std::size_t c = 0; c < grid.x_cells(); ++c) {
        const double xc = grid.x_center(static_cast<int>(c));
        for (std::size_t v = 0; v < grid.v_count(); ++v)
            for (int j = 0; j < grid.m_nodes(); ++j) {
                const double mc = grid.m_center(j);
                double s = 0.0;
                for (std::size_t a = 0; a < 3; ++a)
                    for (std::size_t b = 0; b < 3; ++b)
                        s += gw[a] * gw[b] * f(xc + 0.5 * gx[a] * grid.dx(), v, mc + 0.5 * gx[b] * grid.dm());
                out.at(grid, c, v, static_cast<std::size_t>(j)) = 0.25 * s;
            }
    }
    return out;
}

}  // namespace chemokin
