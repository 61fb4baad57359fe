#include <cmath>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

#include "chemokin/error.hpp"
#include "chemokin/kinetic.hpp"
#include "chemokin/limit.hpp"

using namespace chemokin;
using chemokin::test::line_grid;
using chemokin::test::linear_params;
using chemokin::test::small_config;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::BadConfig;
}

}  // namespace

TEST_CASE("m_zero recovers the adapted state for both families") {
    auto g = line_grid();
    for (auto fam : {AdaptationFamily::Linear, AdaptationFamily::Cubic}) {
        auto p = linear_params();
        p.adaptation.family = fam;
        ModelSpec spec(p, g);
        for (double s : {0.0, 1e-3, 0.3, 1.0, 7.0, 1e4}) {
            const double f = 0.5 + s / (1.0 + s);
            CHECK(std::abs(m_zero(spec, s) - std::clamp(f, 0.5 + 1e-9, 1.5 - 1e-9)) <= 1e-12);
            CHECK(m_zero(spec, s) > 0.5);
            CHECK(m_zero(spec, s) < 1.5);
        }
    }
}

TEST_CASE("two-velocity relaxation of uniform data decays at rate lambda0") {
    std::vector<Velocity> vel{{{-1.0, 0.0}, 1.0}, {{1.0, 0.0}, 1.0}};
    PhaseGrid g(1, 8, 4.0, Topology::Periodic, vel, 8, 2.0);
    auto params = linear_params();
    params.turning.beta = 0.0;
    params.turning.lambda0 = 1.3;
    ModelSpec spec(params, g);
    OdaSolver oda(g, spec, 1, 1e-3);
    BarDensityField p(g);
    for (std::size_t c = 0; c < 8; ++c) {
        p.at(g, c, 0) = 0.2;
        p.at(g, c, 1) = 1.0;
    }
    auto st = oda.run(oda.make_state(p), 1.0, 0.0);
    const double avg = 0.6, decay = std::exp(-1.3);
    for (std::size_t c = 0; c < 8; ++c) {
        CHECK(std::abs(st.pbar.at(g, c, 0) - (avg - 0.4 * decay)) <= 1e-3);
        CHECK(std::abs(st.pbar.at(g, c, 1) - (avg + 0.4 * decay)) <= 1e-3);
    }
}

TEST_CASE("limit solver conserves mass") {
    auto sc = build_scenario(small_config());
    OdaSolver oda(sc.grid, sc.spec);
    auto st = oda.make_state(integrate_m(sc.initial.p0, sc.grid));
    const double m0 = total_mass(st.pbar, sc.grid);
    for (int i = 0; i < 100; ++i) st = oda.step(std::move(st), oda.stable_dt());
    CHECK(std::abs(total_mass(st.pbar, sc.grid) - m0) <= 1e-12 * m0);
    CHECK(st.steps == 100);
}

TEST_CASE("with m-independent turning the kinetic p-bar solves the limit equation") {
    auto cfg = small_config();
    cfg.model.turning.beta = 0.0;
    auto sc = build_scenario(cfg);
    KineticSolver kin(sc.grid, sc.spec);
    OdaSolver oda(sc.grid, sc.spec);
    auto rk = kin.run(kin.make_state(sc.initial.p0), 2.0, 0.5, sc.initial.meta);
    auto ro = oda.run(oda.make_state(integrate_m(sc.initial.p0, sc.grid)), 2.0, 0.5);
    const auto pk = integrate_m(rk.state.p, sc.grid);
    CHECK(l1_distance(pk, ro.pbar, sc.grid) <= 1e-12 * sc.initial.meta.mass);
}

TEST_CASE("turning in the limit model refuses steps beyond its bound") {
    auto sc = build_scenario(small_config());
    BarDensityField p(sc.grid);
    std::vector<double> s(sc.grid.x_cells(), 0.5);
    const double bound = 1.0 / (sc.grid.velocity_measure() * sc.spec.c_t());
    CHECK(kind_of([&] { oda_turning_apply(p, s, sc.spec, sc.grid, 1.01 * bound); }) == ErrorKind::CflViolation);
}

TEST_CASE("W1 to a Dirac for simple histograms") {
    const double dm = 0.1;
    std::vector<double> h(20, 0.0);
    SUBCASE("all mass in the cell holding m0") {
        h[7] = 3.0;
        CHECK(w1_to_dirac(h, dm, 0.74) <= dm);
        CHECK(w1_to_dirac(h, dm, 0.75) == doctest::Approx(0.025).epsilon(1e-12));
    }
    SUBCASE("symmetric two-cell split") {
        // Cells centered at 0.55 and 0.95, m0 = 0.75: h = 0.2.
        h[5] = 1.0;
        h[9] = 1.0;
        CHECK(w1_to_dirac(h, dm, 0.75) == doctest::Approx(0.2).epsilon(1e-12));
    }
    SUBCASE("uniform marginal") {
        std::fill(h.begin(), h.end(), 1.0);
        const double M = 2.0, m0 = 0.63;
        CHECK(w1_to_dirac(h, dm, m0) == doctest::Approx(m0 * m0 / (2 * M) + (M - m0) * (M - m0) / (2 * M)).epsilon(1e-12));
    }
    SUBCASE("empty") { CHECK(kind_of([&] { w1_to_dirac(h, dm, 0.5); }) == ErrorKind::EmptyField); }
}

TEST_CASE("concentration metrics weight cells by mass and skip near-vacuum") {
    auto g = line_grid(4, 4.0, 2, 20, 2.0);
    ModelSpec spec(linear_params(), g);
    SignalField s;
    s.values = {1.0, 1.0, 1.0, 1.0};  // m0 = 1
    DensityField p(g);
    // Cell 0: all at m0 (center of cell 9 is 0.95; use the cell containing 1.0, index 10).
    p.at(g, 0, 0, 10) = 1.0;
    // Cell 1: split symmetric at distance 0.3 around m0.
    p.at(g, 1, 1, 7) = 1.0;
    p.at(g, 1, 1, 12) = 1.0;
    // Cell 3: below the floor.
    p.at(g, 3, 0, 5) = 1e-20;
    auto met = concentration_metrics(p, s, spec, g);
    REQUIRE(met.cells.size() == 2);
    REQUIRE(met.excluded.size() == 2);
    const double w0 = met.cells[0].w1, w1 = met.cells[1].w1;
    CHECK(w0 <= g.dm());
    CHECK(w1 == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(met.cells[1].mean_deviation == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    // Cell 1 carries twice the mass of cell 0.
    CHECK(met.w1 == doctest::Approx((w0 + 2.0 * w1) / 3.0).epsilon(1e-12));

    DensityField zero(g);
    CHECK(kind_of([&] { concentration_metrics(zero, s, spec, g); }) == ErrorKind::EmptyField);
}

TEST_CASE("eps study with one member is well formed") {
    auto sc = build_scenario(small_config());
    EpsStudyOptions o;
    o.eps = {0.5};
    o.t_end = 0.5;
    o.output_every = 0.25;
    auto rep = eps_study(sc, o);
    CHECK(rep.rows.size() == 2);
    CHECK(rep.final_w1.size() == 1);
    CHECK(rep.min_gap_ratio == 0.0);
    std::ostringstream os;
    rep.write_csv(os);
    CHECK(os.str().rfind("eps,t,w1,l1_gap,mass,env_pbar_margin,env_n_margin,tail_moment,xmoment_rate\n", 0) == 0);
}

TEST_CASE("eps study rejects a list that is not strictly decreasing") {
    auto sc = build_scenario(small_config());
    EpsStudyOptions o;
    o.eps = {0.2, 0.2};
    CHECK(kind_of([&] { eps_study(sc, o); }) == ErrorKind::BadConfig);
    o.eps = {0.1, 0.2};
    CHECK(kind_of([&] { eps_study(sc, o); }) == ErrorKind::BadConfig);
}

TEST_CASE("eps study keeps the moment controls for every member") {
    auto sc = build_scenario(small_config());
    EpsStudyOptions o;
    o.eps = {0.4, 0.2, 0.1};
    o.t_end = 1.0;
    o.output_every = 0.25;
    o.threads = 3;
    auto rep = eps_study(sc, o);
    CHECK(rep.rows.size() == 12);
    for (const auto& r : rep.rows) {
        CHECK(r.tail_moment <= sc.initial.meta.m_moment);
        CHECK(r.xmoment_rate <= sc.initial.meta.mass * (1.0 + kMomentTolerance));
        CHECK(r.env_pbar_margin >= 0.0);
    }
    for (const auto& d : rep.diagnostics) CHECK_FALSE(d.failed());
    CHECK(rep.w1_decreasing);

    // Concurrency does not change the numbers.
    o.threads = 1;
    auto serial = eps_study(sc, o);
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        CHECK(serial.rows[i].w1 == rep.rows[i].w1);
        CHECK(serial.rows[i].l1_gap == rep.rows[i].l1_gap);
    }
}
