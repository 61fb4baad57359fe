#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chemokin/grid.hpp"

namespace chemokin {

enum class SignalSolverKind { Spectral, Convolution };

/// S over the spatial cells, the solution of -Lap S + S = n.
struct SignalField {
    std::vector<double> values;
    std::uint64_t source_hash = 0;  ///< FNV-1a of the n it was solved from
    SignalSolverKind solver = SignalSolverKind::Spectral;
};

/// Cell averages of the free-space Bessel potential G (Green function of
/// -Lap + I) on offsets |i|, |j| <= radius, spacing dx. d = 1 uses the closed
/// form G = exp(-|x|)/2; d = 2 integrates K0(|x|)/(2 pi), with the cells
/// around the logarithmic singularity integrated in polar form.
class GreenKernel {
public:
    GreenKernel(int dim, double dx, int radius);

    int dim() const { return dim_; }
    double dx() const { return dx_; }
    int radius() const { return radius_; }
    int width() const { return 2 * radius_ + 1; }
    double at(int i) const { return values_[static_cast<std::size_t>(i + radius_)]; }
    double at(int i, int j) const {
        return values_[static_cast<std::size_t>(i + radius_) * static_cast<std::size_t>(width()) +
                       static_cast<std::size_t>(j + radius_)];
    }
    const std::vector<double>& values() const { return values_; }
    /// sum G dx^d.
    double integral() const;

private:
    int dim_;
    double dx_;
    int radius_;
    std::vector<double> values_;
};

/// Solver for -Lap S + S = n on the spatial part of a PhaseGrid.
///
/// Periodic topology inverts the symbol of the standard (2d+1)-point
/// Laplacian by FFT, so the discrete residual vanishes to round-off.
/// Truncated free space convolves n with the cell-averaged Bessel kernel;
/// density outside the box is taken as zero.
class EllipticSolver {
public:
    explicit EllipticSolver(const PhaseGrid& grid);
    ~EllipticSolver();
    EllipticSolver(const EllipticSolver&) = delete;
    EllipticSolver& operator=(const EllipticSolver&) = delete;

    SignalField solve(std::span<const double> n) const;

    /// max |-Lap_h S + S - n| with the periodic stencil.
    double residual(std::span<const double> s, std::span<const double> n) const;

    SignalSolverKind kind() const { return kind_; }
    const GreenKernel* kernel() const { return kernel_.get(); }

private:
    struct FftPlans;

    SignalField solve_spectral(std::span<const double> n) const;
    SignalField solve_convolution(std::span<const double> n) const;

    int dim_;
    int nodes_;
    double dx_;
    SignalSolverKind kind_;
    std::unique_ptr<GreenKernel> kernel_;
    std::unique_ptr<FftPlans> plans_;
    std::vector<double> symbol_;
};

/// Convenience wrapper constructing a solver for one call.
SignalField solve_signal(std::span<const double> n, const PhaseGrid& grid);

struct TailIntegral {
    double alpha = 0.0;
    double beta = 0.0;
    double value = 0.0;
    double expected = 0.0;  ///< analytic value for d = 1, NaN otherwise
    bool pass = false;
};

/// Discrete facts about the Bessel kernel on a grid: unit mass, non-negativity,
/// integrability of powers, of weighted tails and of the gradient.
struct KernelReport {
    int dim = 1;
    double dx = 0.0;
    int radius = 0;
    double integral = 0.0;
    double min_value = 0.0;
    double l2_norm_sq = 0.0;     ///< sum G^2 dx^d
    double gradient_l1 = 0.0;    ///< sum |grad_h G| dx^d
    double gradient_expected = 0.0;
    std::vector<TailIntegral> tails;
    bool unit_mass_ok = false;
    bool nonnegative_ok = false;
    bool lq_ok = false;
    bool gradient_ok = false;

    bool all_pass() const;
};

/// Tabulates the kernel on the grid spacing with enough padding that the
/// truncated mass is within 1e-6 of one, then evaluates the facts above.
KernelReport kernel_check(const PhaseGrid& grid);
void write_kernel_report_csv(const KernelReport& report, std::ostream& os);

}  // namespace chemokin
