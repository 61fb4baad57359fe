#include "chemokin/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chemokin/error.hpp"

namespace chemokin {
namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

// S samples for the structural sweeps: zero, a geometric ladder around S_ref,
// and a saturating value.
std::vector<double> signal_samples(double s_ref) {
    std::vector<double> out{0.0};
    for (int k = -12; k <= 12; ++k) out.push_back(s_ref * std::pow(10.0, k / 3.0));
    out.push_back(1e6 * s_ref);
    return out;
}

}  // namespace

ModelSpec::ModelSpec(const ModelParams& params, const PhaseGrid& grid)
    : params_(params), n_v_(grid.v_count()), v_measure_(grid.velocity_measure()), m_max_(grid.m_max()) {
    validate_parameters();

    const auto& tp = params_.turning;
    const auto& vel = grid.velocities();
    kernel_.assign(n_v_ * n_v_, 0.0);
    for (std::size_t a = 0; a < n_v_; ++a) {
        for (std::size_t b = 0; b < n_v_; ++b) {
            double k = 1.0 / v_measure_;
            if (tp.family == TurningFamily::SeparableAngle) {
                const double na = std::hypot(vel[a].v[0], vel[a].v[1]);
                const double nb = std::hypot(vel[b].v[0], vel[b].v[1]);
                double cos_theta = 0.0;
                if (na > 0.0 && nb > 0.0)
                    cos_theta = (vel[a].v[0] * vel[b].v[0] + vel[a].v[1] * vel[b].v[1]) / (na * nb);
                k = (1.0 + tp.angular_bias * cos_theta) / v_measure_;
            }
            kernel_[a * n_v_ + b] = k;
        }
    }

    const double k_max = *std::max_element(kernel_.begin(), kernel_.end());
    if (tp.family == TurningFamily::Constant)
        c_t_ = tp.lambda0 / v_measure_;
    else
        c_t_ = tp.lambda0 * (1.0 + std::abs(tp.beta)) * k_max;

    const auto& ap = params_.adaptation;
    if (ap.family == AdaptationFamily::Linear) {
        pi_cap_ = ap.kappa;
    } else {
        const double reach = std::max(ap.m_plus, m_max_ - ap.m_minus);
        pi_cap_ = 3.0 * ap.kappa * reach * reach;
    }

    validate_on_grid(grid);
}

void ModelSpec::validate_parameters() const {
    const auto& ap = params_.adaptation;
    const auto& tp = params_.turning;
    if (!positive_finite(ap.kappa)) throw Error(ErrorKind::BadConfig, "kappa must be positive");
    if (!positive_finite(ap.s_ref)) throw Error(ErrorKind::BadConfig, "S_ref must be positive");
    if (!positive_finite(ap.m_minus)) throw Error(ErrorKind::BadConfig, "m_minus must be positive");
    if (!positive_finite(ap.m_plus) || !(ap.m_plus > ap.m_minus))
        throw Error(ErrorKind::BadConfig, "m_plus must exceed m_minus");
    if (!positive_finite(tp.lambda0)) throw Error(ErrorKind::BadConfig, "lambda0 must be positive");
    if (!std::isfinite(tp.beta)) throw Error(ErrorKind::BadConfig, "beta must be finite");
    if (!std::isfinite(tp.m_c)) throw Error(ErrorKind::BadConfig, "m_c must be finite");
    if (!positive_finite(tp.delta)) throw Error(ErrorKind::BadConfig, "delta must be positive");
    if (!std::isfinite(tp.angular_bias) || std::abs(tp.angular_bias) >= 1.0)
        throw Error(ErrorKind::BadConfig, "angular bias must lie in (-1, 1)");
    if (!positive_finite(params_.epsilon)) throw Error(ErrorKind::BadConfig, "eps must be positive");
}

void ModelSpec::validate_on_grid(const PhaseGrid& grid) const {
    const auto& ap = params_.adaptation;
    if (!(grid.m_max() > ap.m_plus))
        throw Error(ErrorKind::AssumptionViolation,
                    "m-truncation must exceed m_plus: m_max=" + fmt(grid.m_max()) +
                        " <= m_plus=" + fmt(ap.m_plus));

    // Turning kernel: normalization, positivity and the uniform bound.
    if (params_.turning.family != TurningFamily::Constant) {
        for (std::size_t b = 0; b < n_v_; ++b) {
            double col = 0.0;
            for (std::size_t a = 0; a < n_v_; ++a) col += grid.weight(a) * kernel(a, b);
            if (std::abs(col - 1.0) > 1e-12)
                throw Error(ErrorKind::AssumptionViolation,
                            "turning kernel normalization sum_v w_v K(v, v') = 1 fails at v'=" +
                                std::to_string(b) + ": sum=" + fmt(col));
        }
    }
    for (int j = 0; j <= 2 * grid.m_nodes(); ++j) {
        const double m = 0.5 * j * grid.dm();
        for (std::size_t a = 0; a < n_v_; ++a) {
            for (std::size_t b = 0; b < n_v_; ++b) {
                const double t = turning(a, b, m);
                if (!(t > 0.0))
                    throw Error(ErrorKind::AssumptionViolation,
                                "turning-kernel positivity 0 < T violated at v=" + std::to_string(a) +
                                    ", v'=" + std::to_string(b) + ", m=" + fmt(m) + ": T=" + fmt(t));
                if (t > c_t_ * (1.0 + 1e-12))
                    throw Error(ErrorKind::AssumptionViolation,
                                "turning-kernel bound T <= C_T violated at v=" + std::to_string(a) +
                                    ", v'=" + std::to_string(b) + ", m=" + fmt(m) + ": T=" + fmt(t) +
                                    " > C_T=" + fmt(c_t_));
            }
        }
    }

    // Adaptation: sign structure around the adapted state, derivative cap,
    // and inward flux at both ends of the truncated m-interval.
    for (double s : signal_samples(ap.s_ref)) {
        const double m0 = adapted_state(s);
        if (!(m0 > ap.m_minus && m0 < ap.m_plus))
            throw Error(ErrorKind::AssumptionViolation,
                        "adapted state outside (m_minus, m_plus) at S=" + fmt(s) + ": m0=" + fmt(m0));
        for (int j = 0; j <= 2 * grid.m_nodes(); ++j) {
            const double m = 0.5 * j * grid.dm();
            const double f = rate(m, s);
            const bool ok = (m < m0 && f > 0.0) || (m > m0 && f < 0.0) || m == m0;
            if (!ok)
                throw Error(ErrorKind::AssumptionViolation,
                            "adaptation sign structure violated at m=" + fmt(m) + ", S=" + fmt(s) +
                                ": F=" + fmt(f) + " with m0=" + fmt(m0));
        }
        for (int j = 0; j < grid.m_nodes(); ++j) {
            const double slope = (rate(grid.m_face(j + 1), s) - rate(grid.m_face(j), s)) / grid.dm();
            if (std::abs(slope) > pi_cap_ * (1.0 + 1e-9))
                throw Error(ErrorKind::AssumptionViolation,
                            "|dF/dm| <= Pi_cap violated near m=" + fmt(grid.m_center(j)) + ", S=" + fmt(s));
        }
        if (!(rate(grid.m_max(), s) < 0.0))
            throw Error(ErrorKind::SpecViolation,
                        "F(m_max, S) must be negative (m_max too small) at S=" + fmt(s));
        if (!(rate(0.0, s) > 0.0))
            throw Error(ErrorKind::SpecViolation, "F(0, S) must be positive at S=" + fmt(s));
    }
}

double ModelSpec::adapted_state(double s) const {
    const auto& ap = params_.adaptation;
    const double span = ap.m_plus - ap.m_minus;
    const double guard = 1e-9 * span;
    const double sp = std::max(s, 0.0);
    const double raw = ap.m_minus + span * sp / (ap.s_ref + sp);
    return std::clamp(raw, ap.m_minus + guard, ap.m_plus - guard);
}

double ModelSpec::rate(double m, double s) const {
    const auto& ap = params_.adaptation;
    const double d = adapted_state(s) - m;
    return ap.family == AdaptationFamily::Linear ? ap.kappa * d : ap.kappa * d * d * d;
}

double ModelSpec::rate_dm(double m, double s) const {
    const auto& ap = params_.adaptation;
    const double d = adapted_state(s) - m;
    return ap.family == AdaptationFamily::Linear ? -ap.kappa : -3.0 * ap.kappa * d * d;
}

double ModelSpec::turning_frequency(double m) const {
    const auto& tp = params_.turning;
    if (tp.family == TurningFamily::Constant) return tp.lambda0;
    return tp.lambda0 * (1.0 + tp.beta * std::tanh((tp.m_c - m) / tp.delta));
}

bool ModelSpec::turning_depends_on_m() const {
    return params_.turning.family != TurningFamily::Constant && params_.turning.beta != 0.0;
}

ModelSpec ModelSpec::with_epsilon(double epsilon) const {
    if (!positive_finite(epsilon)) throw Error(ErrorKind::BadConfig, "eps must be positive");
    ModelSpec out = *this;
    out.params_.epsilon = epsilon;
    return out;
}

}  // namespace chemokin
