#include <cmath>
#include <string>

#include "doctest.h"
#include "test_support.hpp"

#include "chemokin/error.hpp"
#include "chemokin/model.hpp"

using namespace chemokin;
using chemokin::test::line_grid;
using chemokin::test::linear_params;

namespace {

ErrorKind kind_of(const ModelParams& p, const PhaseGrid& g) {
    try {
        ModelSpec spec(p, g);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected construction to throw");
    return ErrorKind::BadConfig;
}

std::string message_of(const ModelParams& p, const PhaseGrid& g) {
    try {
        ModelSpec spec(p, g);
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("constant turning is accepted with C_T = lambda0 / V_d") {
    auto g = line_grid();
    auto p = linear_params();
    p.turning.family = TurningFamily::Constant;
    p.turning.lambda0 = 3.0;
    ModelSpec spec(p, g);
    CHECK(spec.c_t() == doctest::Approx(1.5).epsilon(1e-15));
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) CHECK(eval_T(spec, a, b, 0.7) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK_FALSE(spec.turning_depends_on_m());
}

TEST_CASE("separable turning with a sign change in lambda is rejected as a positivity violation") {
    auto g = line_grid();
    auto p = linear_params();
    p.turning.beta = 1.5;
    p.turning.m_c = 1.0;
    p.turning.delta = 0.25;

    // Independent check that lambda really turns negative on [0, m_max].
    bool negative = false;
    for (int j = 0; j <= 400; ++j) {
        const double m = 2.0 * j / 400.0;
        if (1.0 + 1.5 * std::tanh((1.0 - m) / 0.25) < 0.0) negative = true;
    }
    REQUIRE(negative);

    CHECK(kind_of(p, g) == ErrorKind::AssumptionViolation);
    const auto msg = message_of(p, g);
    CHECK(msg.find("positivity") != std::string::npos);
    CHECK(msg.find("m=") != std::string::npos);
}

TEST_CASE("certificate C_T bounds T on the grid for the separable families") {
    auto g2 = PhaseGrid(2, 8, 4.0, Topology::Periodic, PhaseGrid::standard_velocities(2, 12), 16, 2.0);
    for (auto fam : {TurningFamily::SeparableUniform, TurningFamily::SeparableAngle}) {
        auto p = linear_params();
        p.turning.family = fam;
        p.turning.beta = -0.6;
        ModelSpec spec(p, g2);
        const double vd = 2.0 * M_PI;
        const double kmax = fam == TurningFamily::SeparableAngle ? 1.5 / vd : 1.0 / vd;
        CHECK(spec.c_t() == doctest::Approx(1.6 * kmax).epsilon(1e-14));
        double worst = 0.0;
        for (int j = 0; j <= 64; ++j)
            for (std::size_t a = 0; a < 12; ++a)
                for (std::size_t b = 0; b < 12; ++b) worst = std::max(worst, eval_T(spec, a, b, 2.0 * j / 64.0));
        CHECK(worst <= spec.c_t());
    }
}

TEST_CASE("angle kernel is normalized over the discrete velocity set") {
    auto g = PhaseGrid(2, 8, 4.0, Topology::Periodic, PhaseGrid::standard_velocities(2, 16), 8, 2.0);
    auto p = linear_params();
    p.turning.family = TurningFamily::SeparableAngle;
    ModelSpec spec(p, g);
    for (std::size_t b = 0; b < 16; ++b) {
        double s = 0.0;
        for (std::size_t a = 0; a < 16; ++a) s += g.weight(a) * spec.kernel(a, b);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
    }
    // 1 + a cos(theta) with a = 0.5: forward/backward ratio is 3.
    CHECK(spec.kernel(0, 0) / spec.kernel(8, 0) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("cubic adaptation has the right signs around the adapted state") {
    auto g = line_grid();
    auto p = linear_params();
    p.adaptation.family = AdaptationFamily::Cubic;
    p.adaptation.kappa = 2.0;
    ModelSpec spec(p, g);
    const double s = 1.0;
    const double m0 = 0.5 + 1.0 * s / (1.0 + s);
    CHECK(spec.adapted_state(s) == doctest::Approx(m0).epsilon(1e-15));
    const double h = 0.1;
    CHECK(eval_F(spec, m0 - h, s) == doctest::Approx(2.0 * h * h * h).epsilon(1e-12));
    CHECK(eval_F(spec, m0 + h, s) == doctest::Approx(-2.0 * h * h * h).epsilon(1e-12));
    // Pi_cap = 3 kappa max(m_plus, m_max - m_minus)^2
    CHECK(spec.pi_cap() == doctest::Approx(3.0 * 2.0 * 1.5 * 1.5).epsilon(1e-15));
}

TEST_CASE("adapted state is increasing in S and stays inside (m_minus, m_plus)") {
    auto g = line_grid();
    ModelSpec spec(linear_params(), g);
    double prev = spec.adapted_state(0.0);
    CHECK(prev > 0.5);
    for (int k = -30; k <= 30; ++k) {
        const double s = std::pow(10.0, k / 5.0);
        const double m0 = spec.adapted_state(s);
        CHECK(m0 >= prev);
        CHECK(m0 > 0.5);
        CHECK(m0 < 1.5);
        CHECK(eval_F(spec, m0, s) == doctest::Approx(0.0).epsilon(1e-15));
        prev = m0;
    }
}

TEST_CASE("derivative certificate bounds |dF/dm| on a fine sample") {
    auto g = line_grid();
    for (auto fam : {AdaptationFamily::Linear, AdaptationFamily::Cubic}) {
        auto p = linear_params();
        p.adaptation.family = fam;
        ModelSpec spec(p, g);
        for (double s : {0.0, 0.1, 1.0, 10.0, 1e5}) {
            for (int j = 0; j <= 200; ++j) {
                const double m = 2.0 * j / 200.0;
                CHECK(std::abs(spec.rate_dm(m, s)) <= spec.pi_cap() * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("m-truncation at or below m_plus is rejected") {
    auto g = line_grid(32, 8.0, 2, 16, 1.5);
    CHECK(kind_of(linear_params(), g) == ErrorKind::AssumptionViolation);
}

TEST_CASE("invalid parameters are rejected as bad config") {
    auto g = line_grid();
    auto p = linear_params();
    p.adaptation.kappa = -1.0;
    CHECK(kind_of(p, g) == ErrorKind::BadConfig);
    p = linear_params();
    p.epsilon = 0.0;
    CHECK(kind_of(p, g) == ErrorKind::BadConfig);
    p = linear_params();
    p.adaptation.m_plus = 0.4;
    CHECK(kind_of(p, g) == ErrorKind::BadConfig);
    p = linear_params();
    p.turning.delta = std::nan("");
    CHECK(kind_of(p, g) == ErrorKind::BadConfig);
}

TEST_CASE("with_epsilon changes only the time scale") {
    auto g = line_grid();
    ModelSpec spec(linear_params(1.0), g);
    auto half = spec.with_epsilon(0.5);
    CHECK(half.epsilon() == 0.5);
    CHECK(half.c_t() == spec.c_t());
    CHECK(half.rate(0.7, 0.3) == spec.rate(0.7, 0.3));
    CHECK_THROWS_AS(spec.with_epsilon(-1.0), Error);
}
