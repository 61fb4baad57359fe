#pragma once

#include <cstddef>
#include <vector>

#include "chemokin/grid.hpp"

namespace chemokin {

enum class AdaptationFamily { Linear, Cubic };
enum class TurningFamily { Constant, SeparableUniform, SeparableAngle };

/// F(m, S) = kappa * (f(S) - m)^k with k = 1 (linear) or 3 (cubic), where
/// f(S) = m_minus + (m_plus - m_minus) * S / (S_ref + S) is clamped into the
/// open interval (m_minus, m_plus).
struct AdaptationParams {
    AdaptationFamily family = AdaptationFamily::Linear;
    double kappa = 1.0;
    double s_ref = 1.0;
    double m_minus = 0.5;
    double m_plus = 1.5;
};

/// T(v, v', m) = lambda(m) K(v, v') with
/// lambda(m) = lambda0 * (1 + beta * tanh((m_c - m) / delta)).
/// The constant family ignores m and uses T = lambda0 / V_d.
struct TurningParams {
    TurningFamily family = TurningFamily::Constant;
    double lambda0 = 1.0;
    double beta = 0.0;
    double m_c = 1.0;
    double delta = 0.25;
    /// Persistence a in K ~ (1 + a cos(theta)) for the angle-dependent kernel.
    double angular_bias = 0.5;
};

struct ModelParams {
    AdaptationParams adaptation;
    TurningParams turning;
    double epsilon = 1.0;
};

/// Validated coefficient functions of the kinetic model.
///
/// Construction sweeps the phase grid and rejects parameter sets that break
/// the structural assumptions the estimates rely on: 0 < T <= C_T,
/// F > 0 below the adapted state and F < 0 above it with the adapted state
/// strictly inside (m_minus, m_plus), |dF/dm| <= Pi_cap, and F(m_max, S) < 0.
/// The certificates C_T and Pi_cap are derived from the parameters.
class ModelSpec {
public:
    ModelSpec(const ModelParams& params, const PhaseGrid& grid);

    const ModelParams& params() const { return params_; }
    double epsilon() const { return params_.epsilon; }
    double m_minus() const { return params_.adaptation.m_minus; }
    double m_plus() const { return params_.adaptation.m_plus; }
    /// Uniform bound on T.
    double c_t() const { return c_t_; }
    /// Bound on |dF/dm| over the reachable (m, S) range.
    double pi_cap() const { return pi_cap_; }
    double velocity_measure() const { return v_measure_; }

    /// Adapted state f(S); the unique zero of F(., S).
    double adapted_state(double s) const;
    /// Adaptation rate without the 1/epsilon factor.
    double rate(double m, double s) const;
    double rate_dm(double m, double s) const;

    double turning_frequency(double m) const;
    double kernel(std::size_t v, std::size_t v_prime) const { return kernel_[v * n_v_ + v_prime]; }
    /// Rate density of jumps v' -> v at internal state m.
    double turning(std::size_t v, std::size_t v_prime, double m) const {
        return turning_frequency(m) * kernel(v, v_prime);
    }
    bool turning_depends_on_m() const;

    /// Same model with a different adaptation time scale.
    ModelSpec with_epsilon(double epsilon) const;

private:
    void validate_parameters() const;
    void validate_on_grid(const PhaseGrid& grid) const;

    ModelParams params_;
    std::size_t n_v_ = 0;
    std::vector<double> kernel_;
    double v_measure_ = 0.0;
    double m_max_ = 0.0;
    double c_t_ = 0.0;
    double pi_cap_ = 0.0;
};

inline double eval_F(const ModelSpec& spec, double m, double s) { return spec.rate(m, s); }
inline double eval_T(const ModelSpec& spec, std::size_t v, std::size_t v_prime, double m) {
    return spec.turning(v, v_prime, m);
}

}  // namespace chemokin
