#include "chemokin/elliptic.hpp"

#include <fftw3.h>

#include <complex>
#include <sstream>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>

#include "chemokin/error.hpp"
#include "chemokin/summation.hpp"
#include "quadrature.hpp"

namespace chemokin {
namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwDeleter {
    void operator()(void* p) const { fftw_free(p); }
};

template <class T>
std::unique_ptr<T[], FftwDeleter> fftw_buffer(std::size_t n) {
    return std::unique_ptr<T[], FftwDeleter>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

// Integral of G = K0(r)/(2 pi) over the disc of radius r: (1 - r K1(r)) / (2 pi).
double disc_mass(double r) {
    if (r <= 0.0) return 0.0;
    if (r > 700.0) return 1.0 / (2.0 * std::numbers::pi);
    return (1.0 - r * std::cyl_bessel_k(1.0, r)) / (2.0 * std::numbers::pi);
}

// Integral of G over [0, a] x [0, b] for a, b >= 0, in polar form so the
// logarithmic singularity at the origin is absorbed analytically.
double quadrant_mass(double a, double b) {
    if (a <= 0.0 || b <= 0.0) return 0.0;
    const double split = std::atan2(b, a);
    const double lower =
        detail::integrate([&](double th) { return disc_mass(a / std::cos(th)); }, 0.0, split, 20, 4);
    const double upper = detail::integrate([&](double th) { return disc_mass(b / std::sin(th)); }, split,
                                           0.5 * std::numbers::pi, 20, 4);
    return lower + upper;
}

double signed_quadrant_mass(double a, double b) {
    const double s = (a < 0.0 ? -1.0 : 1.0) * (b < 0.0 ? -1.0 : 1.0);
    return s * quadrant_mass(std::abs(a), std::abs(b));
}

double bessel_2d(double r) { return std::cyl_bessel_k(0.0, r) / (2.0 * std::numbers::pi); }

}  // namespace

// ---------------------------------------------------------------------------
// GreenKernel

GreenKernel::GreenKernel(int dim, double dx, int radius) : dim_(dim), dx_(dx), radius_(radius) {
    if (dim != 1 && dim != 2) throw Error(ErrorKind::BadConfig, "kernel dimension must be 1 or 2");
    if (!(dx > 0.0) || radius < 0) throw Error(ErrorKind::BadConfig, "bad kernel tabulation parameters");
    const auto w = static_cast<std::size_t>(width());
    if (dim == 1) {
        values_.resize(w);
        for (int k = -radius; k <= radius; ++k) {
            const int a = std::abs(k);
            double g;
            if (a == 0)
                g = -std::expm1(-0.5 * dx) / dx;
            else
                g = -0.5 * std::exp(-(a - 0.5) * dx) * std::expm1(-dx) / dx;
            values_[static_cast<std::size_t>(k + radius)] = g;
        }
        return;
    }

    values_.assign(w * w, 0.0);
    auto [gx, gw] = detail::gauss_legendre(8);
    auto [fx, fw] = detail::gauss_legendre(6);
    const double area = dx * dx;
    // Only one octant is computed; G is symmetric under reflections and swaps.
    for (int i = 0; i <= radius; ++i) {
        for (int j = 0; j <= i; ++j) {
            double avg;
            if (i <= 1 && j <= 1) {
                const double x0 = (i - 0.5) * dx, x1 = (i + 0.5) * dx;
                const double y0 = (j - 0.5) * dx, y1 = (j + 0.5) * dx;
                const double mass = signed_quadrant_mass(x1, y1) - signed_quadrant_mass(x0, y1) -
                                    signed_quadrant_mass(x1, y0) + signed_quadrant_mass(x0, y0);
                avg = mass / area;
            } else {
                const bool near = i <= 4;
                const auto& qx = near ? gx : fx;
                const auto& qw = near ? gw : fw;
                double s = 0.0;
                for (std::size_t a = 0; a < qx.size(); ++a) {
                    const double x = (i + 0.5 * qx[a]) * dx;
                    for (std::size_t b = 0; b < qx.size(); ++b) {
                        const double y = (j + 0.5 * qx[b]) * dx;
                        s += qw[a] * qw[b] * bessel_2d(std::hypot(x, y));
                    }
                }
                avg = 0.25 * s;
            }
            for (int si : {-1, 1})
                for (int sj : {-1, 1}) {
                    const auto put = [&](int a, int b) {
                        values_[static_cast<std::size_t>(a + radius) * w + static_cast<std::size_t>(b + radius)] = avg;
                    };
                    put(si * i, sj * j);
                    put(si * j, sj * i);
                }
        }
    }
}

double GreenKernel::integral() const {
    const double measure = dim_ == 1 ? dx_ : dx_ * dx_;
    return measure * pairwise_sum(values_);
}

// ---------------------------------------------------------------------------
// EllipticSolver

struct EllipticSolver::FftPlans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    std::size_t real_size = 0;
    std::size_t complex_size = 0;
    int padded = 0;
    std::vector<std::complex<double>> kernel_hat;

    ~FftPlans() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

EllipticSolver::EllipticSolver(const PhaseGrid& grid)
    : dim_(grid.dim()),
      nodes_(grid.x_nodes()),
      dx_(grid.dx()),
      kind_(grid.topology() == Topology::Periodic ? SignalSolverKind::Spectral : SignalSolverKind::Convolution) {
    const int n = nodes_;
    if (kind_ == SignalSolverKind::Convolution) {
        kernel_ = std::make_unique<GreenKernel>(dim_, dx_, n - 1);
        if (dim_ == 1) return;
    }

    plans_ = std::make_unique<FftPlans>();
    const int len = kind_ == SignalSolverKind::Spectral ? n : 2 * n;
    plans_->padded = len;
    if (dim_ == 1) {
        plans_->real_size = static_cast<std::size_t>(len);
        plans_->complex_size = static_cast<std::size_t>(len / 2 + 1);
    } else {
        plans_->real_size = static_cast<std::size_t>(len) * static_cast<std::size_t>(len);
        plans_->complex_size = static_cast<std::size_t>(len) * static_cast<std::size_t>(len / 2 + 1);
    }
    {
        auto in = fftw_buffer<double>(plans_->real_size);
        auto out = fftw_buffer<fftw_complex>(plans_->complex_size);
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (dim_ == 1) {
            plans_->forward = fftw_plan_dft_r2c_1d(len, in.get(), out.get(), FFTW_ESTIMATE);
            plans_->backward = fftw_plan_dft_c2r_1d(len, out.get(), in.get(), FFTW_ESTIMATE);
        } else {
            plans_->forward = fftw_plan_dft_r2c_2d(len, len, in.get(), out.get(), FFTW_ESTIMATE);
            plans_->backward = fftw_plan_dft_c2r_2d(len, len, out.get(), in.get(), FFTW_ESTIMATE);
        }
    }

    const int half = len / 2 + 1;
    if (kind_ == SignalSolverKind::Spectral) {
        const double c = 4.0 / (dx_ * dx_);
        auto sin2 = [&](int k) {
            const double s = std::sin(std::numbers::pi * k / len);
            return s * s;
        };
        symbol_.resize(plans_->complex_size);
        if (dim_ == 1) {
            for (int k = 0; k < half; ++k) symbol_[static_cast<std::size_t>(k)] = 1.0 + c * sin2(k);
        } else {
            for (int a = 0; a < len; ++a)
                for (int b = 0; b < half; ++b)
                    symbol_[static_cast<std::size_t>(a) * static_cast<std::size_t>(half) + static_cast<std::size_t>(b)] =
                        1.0 + c * (sin2(a) + sin2(b));
        }
        return;
    }

    // 2-d free space: transform of the circularly wrapped kernel on the padded box.
    auto in = fftw_buffer<double>(plans_->real_size);
    auto out = fftw_buffer<fftw_complex>(plans_->complex_size);
    std::fill(in.get(), in.get() + plans_->real_size, 0.0);
    const int r = kernel_->radius();
    for (int i = -r; i <= r; ++i)
        for (int j = -r; j <= r; ++j) {
            const int a = (i + len) % len, b = (j + len) % len;
            in[static_cast<std::size_t>(a) * static_cast<std::size_t>(len) + static_cast<std::size_t>(b)] =
                kernel_->at(i, j);
        }
    fftw_execute_dft_r2c(plans_->forward, in.get(), out.get());
    plans_->kernel_hat.resize(plans_->complex_size);
    for (std::size_t k = 0; k < plans_->complex_size; ++k) plans_->kernel_hat[k] = {out[k][0], out[k][1]};
}

EllipticSolver::~EllipticSolver() = default;

SignalField EllipticSolver::solve(std::span<const double> n) const {
    const std::size_t cells = dim_ == 1 ? static_cast<std::size_t>(nodes_)
                                        : static_cast<std::size_t>(nodes_) * static_cast<std::size_t>(nodes_);
    if (n.size() != cells) throw Error(ErrorKind::BadConfig, "density size does not match the spatial grid");
    for (double v : n)
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "density passed to the signal solver is not finite");
    SignalField out = kind_ == SignalSolverKind::Spectral ? solve_spectral(n) : solve_convolution(n);
    out.source_hash = fnv1a(n);
    out.solver = kind_;
    return out;
}

SignalField EllipticSolver::solve_spectral(std::span<const double> n) const {
    auto in = fftw_buffer<double>(plans_->real_size);
    auto out = fftw_buffer<fftw_complex>(plans_->complex_size);
    std::copy(n.begin(), n.end(), in.get());
    fftw_execute_dft_r2c(plans_->forward, in.get(), out.get());
    const double norm = static_cast<double>(plans_->real_size);
    for (std::size_t k = 0; k < plans_->complex_size; ++k) {
        const double f = 1.0 / (symbol_[k] * norm);
        out[k][0] *= f;
        out[k][1] *= f;
    }
    fftw_execute_dft_c2r(plans_->backward, out.get(), in.get());
    SignalField s;
    s.values.assign(in.get(), in.get() + plans_->real_size);
    return s;
}

SignalField EllipticSolver::solve_convolution(std::span<const double> n) const {
    SignalField s;
    const int N = nodes_;
    if (dim_ == 1) {
        s.values.assign(static_cast<std::size_t>(N), 0.0);
        const GreenKernel& g = *kernel_;
#pragma omp parallel for schedule(static)
        for (int i = 0; i < N; ++i) {
            const double acc = pairwise_sum_of(static_cast<std::size_t>(N), [&](std::size_t j) {
                return g.at(i - static_cast<int>(j)) * n[j];
            });
            s.values[static_cast<std::size_t>(i)] = acc * dx_;
        }
        return s;
    }

    const int len = plans_->padded;
    const int half = len / 2 + 1;
    auto in = fftw_buffer<double>(plans_->real_size);
    auto out = fftw_buffer<fftw_complex>(plans_->complex_size);
    std::fill(in.get(), in.get() + plans_->real_size, 0.0);
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
            in[static_cast<std::size_t>(a) * static_cast<std::size_t>(len) + static_cast<std::size_t>(b)] =
                n[static_cast<std::size_t>(a) * static_cast<std::size_t>(N) + static_cast<std::size_t>(b)];
    fftw_execute_dft_r2c(plans_->forward, in.get(), out.get());
    const double scale = dx_ * dx_ / static_cast<double>(plans_->real_size);
    for (std::size_t k = 0; k < plans_->complex_size; ++k) {
        const std::complex<double> z{out[k][0], out[k][1]};
        const auto prod = z * plans_->kernel_hat[k] * scale;
        out[k][0] = prod.real();
        out[k][1] = prod.imag();
    }
    (void)half;
    fftw_execute_dft_c2r(plans_->backward, out.get(), in.get());
    s.values.resize(static_cast<std::size_t>(N) * static_cast<std::size_t>(N));
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
            s.values[static_cast<std::size_t>(a) * static_cast<std::size_t>(N) + static_cast<std::size_t>(b)] =
                in[static_cast<std::size_t>(a) * static_cast<std::size_t>(len) + static_cast<std::size_t>(b)];
    return s;
}

double EllipticSolver::residual(std::span<const double> s, std::span<const double> n) const {
    const int N = nodes_;
    const double c = 1.0 / (dx_ * dx_);
    double worst = 0.0;
    auto wrap = [N](int i) { return (i % N + N) % N; };
    if (dim_ == 1) {
        for (int i = 0; i < N; ++i) {
            const double lap = (s[static_cast<std::size_t>(wrap(i - 1))] - 2.0 * s[static_cast<std::size_t>(i)] +
                                s[static_cast<std::size_t>(wrap(i + 1))]) * c;
            worst = std::max(worst, std::abs(-lap + s[static_cast<std::size_t>(i)] - n[static_cast<std::size_t>(i)]));
        }
        return worst;
    }
    auto at = [&](int a, int b) {
        return s[static_cast<std::size_t>(wrap(a)) * static_cast<std::size_t>(N) + static_cast<std::size_t>(wrap(b))];
    };
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            const double lap = (at(a - 1, b) + at(a + 1, b) + at(a, b - 1) + at(a, b + 1) - 4.0 * at(a, b)) * c;
            const std::size_t k = static_cast<std::size_t>(a) * static_cast<std::size_t>(N) + static_cast<std::size_t>(b);
            worst = std::max(worst, std::abs(-lap + s[k] - n[k]));
        }
    return worst;
}

SignalField solve_signal(std::span<const double> n, const PhaseGrid& grid) {
    return EllipticSolver(grid).solve(n);
}

// ---------------------------------------------------------------------------
// kernel_check

namespace {

// 2^(1-beta) * int_1^inf x^alpha e^(-beta x) dx for integer alpha >= 0.
double tail_1d(int alpha, double beta) {
    double term = 1.0, series = 1.0;
    for (int k = 1; k <= alpha; ++k) {
        term *= beta / k;
        series += term;
    }
    double factorial = 1.0;
    for (int k = 2; k <= alpha; ++k) factorial *= k;
    const double upper_gamma = factorial * std::exp(-beta) * series;
    return 2.0 * std::pow(0.5, beta) * upper_gamma / std::pow(beta, alpha + 1);
}

// int_{r>1} r^alpha G(r)^beta 2 pi r dr with G = K0 / (2 pi).
double tail_2d(int alpha, double beta) {
    const auto f = [&](double r) {
        return std::pow(r, alpha + 1) * std::pow(bessel_2d(r), beta) * 2.0 * std::numbers::pi;
    };
    return detail::integrate(f, 1.0, 80.0, 16, 64);
}

}  // namespace

bool KernelReport::all_pass() const {
    bool ok = unit_mass_ok && nonnegative_ok && lq_ok && gradient_ok;
    for (const auto& t : tails) ok = ok && t.pass;
    return ok;
}

KernelReport kernel_check(const PhaseGrid& grid) {
    KernelReport rep;
    rep.dim = grid.dim();
    rep.dx = grid.dx();
    constexpr double kPaddedLength = 20.0;
    rep.radius = std::max(grid.x_nodes() - 1, static_cast<int>(std::ceil(kPaddedLength / grid.dx())));
    if (rep.dim == 2) rep.radius = std::min(rep.radius, 512);
    const GreenKernel g(rep.dim, rep.dx, rep.radius);
    const double measure = rep.dim == 1 ? rep.dx : rep.dx * rep.dx;

    rep.integral = g.integral();
    rep.min_value = *std::min_element(g.values().begin(), g.values().end());
    rep.l2_norm_sq = measure * pairwise_sum_of(g.values().size(), [&](std::size_t i) {
        return g.values()[i] * g.values()[i];
    });

    const int r = rep.radius;
    if (rep.dim == 1) {
        // Total variation of the tabulated kernel; the continuum value is 2 G(0) = 1.
        rep.gradient_l1 = pairwise_sum_of(static_cast<std::size_t>(2 * r), [&](std::size_t k) {
            const int i = static_cast<int>(k) - r;
            return std::abs(g.at(i + 1) - g.at(i));
        });
        rep.gradient_expected = 1.0;
        rep.gradient_ok = std::abs(rep.gradient_l1 - 1.0) <= rep.dx;
    } else {
        double tv = 0.0;
        for (int i = -r; i < r; ++i)
            for (int j = -r; j < r; ++j)
                tv += (std::abs(g.at(i + 1, j) - g.at(i, j)) + std::abs(g.at(i, j + 1) - g.at(i, j))) * rep.dx;
        // |d_x G| + |d_y G| integrates to (4 / pi) * int |grad G| = (4 / pi) * (pi / 2).
        rep.gradient_l1 = tv;
        rep.gradient_expected = 2.0;
        rep.gradient_ok = std::abs(tv - 2.0) <= 2.0 * rep.dx;
    }

    rep.unit_mass_ok = rep.integral >= 1.0 - 1e-6 && rep.integral <= 1.0 + 1e-12;
    rep.nonnegative_ok = rep.min_value >= 0.0;
    rep.lq_ok = std::isfinite(rep.l2_norm_sq) && rep.l2_norm_sq > 0.0;

    // Weighted tails int_{|x|>1} |x|^alpha G^beta.
    const std::pair<int, double> pairs[] = {{0, 1.0}, {1, 1.0}, {2, 1.0}, {1, 2.0}, {1, 0.5}};
    for (auto [alpha, beta] : pairs) {
        TailIntegral t;
        t.alpha = alpha;
        t.beta = beta;
        if (rep.dim == 1) {
            t.value = rep.dx * pairwise_sum_of(static_cast<std::size_t>(2 * r + 1), [&](std::size_t k) {
                const int i = static_cast<int>(k) - r;
                const double x = std::abs(i * rep.dx);
                return x > 1.0 ? std::pow(x, alpha) * std::pow(g.at(i), beta) : 0.0;
            });
            t.expected = tail_1d(alpha, beta);
            t.pass = std::isfinite(t.value) && std::abs(t.value - t.expected) <= 5.0 * rep.dx * t.expected;
        } else {
            double s = 0.0;
            for (int i = -r; i <= r; ++i)
                for (int j = -r; j <= r; ++j) {
                    const double x = std::hypot(i * rep.dx, j * rep.dx);
                    if (x > 1.0) s += std::pow(x, alpha) * std::pow(g.at(i, j), beta);
                }
            t.value = s * measure;
            t.expected = tail_2d(alpha, beta);
            t.pass = std::isfinite(t.value) && std::abs(t.value - t.expected) <= 5.0 * rep.dx * t.expected;
        }
        rep.tails.push_back(t);
    }
    return rep;
}

void write_kernel_report_csv(const KernelReport& rep, std::ostream& os) {
    os << "quantity,value,expected,pass\n";
    os.precision(17);
    auto row = [&](const std::string& name, double v, double e, bool pass) {
        os << name << ',' << v << ',' << e << ',' << (pass ? 1 : 0) << '\n';
    };
    row("integral", rep.integral, 1.0, rep.unit_mass_ok);
    row("min", rep.min_value, 0.0, rep.nonnegative_ok);
    row("l2_norm_sq", rep.l2_norm_sq, std::numeric_limits<double>::quiet_NaN(), rep.lq_ok);
    row("gradient_l1", rep.gradient_l1, rep.gradient_expected, rep.gradient_ok);
    for (const auto& t : rep.tails) {
        std::ostringstream name;
        name << "tail_alpha" << t.alpha << "_beta" << t.beta;
        row(name.str(), t.value, t.expected, t.pass);
    }
}

}  // namespace chemokin
