#include <cmath>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

#include "chemokin/diagnostics.hpp"
#include "chemokin/error.hpp"
#include "chemokin/kinetic.hpp"
#include "chemokin/scenario.hpp"

using namespace chemokin;
using chemokin::test::line_grid;
using chemokin::test::linear_params;
using chemokin::test::random_values;
using chemokin::test::small_config;

TEST_CASE("zero density has zero norms") {
    auto g = line_grid();
    DensityField p(g);
    SignalField s;
    s.values.assign(g.x_cells(), 0.0);
    auto row = reduce_norms(p, s, g, 1.5);
    CHECK(row.mass == 0.0);
    CHECK(row.p_sup == 0.0);
    CHECK(row.pbar_sup == 0.0);
    CHECK(row.n_sup == 0.0);
    CHECK(row.s_l1 == 0.0);
    CHECK(row.x_moment == 0.0);
    CHECK(row.tail_moment == 0.0);
}

TEST_CASE("a single cell of unit mass") {
    auto g = line_grid(32, 8.0, 2, 16, 4.0);
    DensityField p(g);
    const double h = 1.0 / (g.dx() * g.weight(1) * g.dm());
    p.at(g, 20, 1, 15) = h;
    SignalField s;
    s.values.assign(g.x_cells(), 0.0);
    auto row = reduce_norms(p, s, g, 1.5);
    CHECK(row.mass == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(row.p_sup == h);
    CHECK(row.pbar_sup == doctest::Approx(h * g.dm()).epsilon(1e-15));
    CHECK(row.n_sup == doctest::Approx(1.0 / g.dx()).epsilon(1e-15));
    const double m = g.m_center(15);
    REQUIRE(m > 3.0);
    CHECK(row.m_moment == doctest::Approx(m).epsilon(1e-15));
    CHECK(row.tail_moment == doctest::Approx(m).epsilon(1e-15));
    CHECK(row.x_moment == doctest::Approx(std::sqrt(1.0 + g.x_center(20) * g.x_center(20))).epsilon(1e-15));
}

TEST_CASE("pairwise mass agrees with an extended-precision sum") {
    auto g = PhaseGrid(2, 24, 6.0, Topology::Periodic, PhaseGrid::standard_velocities(2, 8), 20, 2.0);
    DensityField p(g);
    p.values = random_values(g.size(), 99, 0.0, 1e3);
    long double ref = 0.0L;
    for (std::size_t c = 0; c < g.x_cells(); ++c)
        for (std::size_t k = 0; k < 8; ++k)
            for (std::size_t j = 0; j < 20; ++j)
                ref += static_cast<long double>(p.at(g, c, k, j)) * g.weight(k);
    ref *= g.cell_volume() * g.dm();
    CHECK(std::abs(total_mass(p, g) - static_cast<double>(ref)) <= 1e-14 * static_cast<double>(ref));
}

TEST_CASE("Gronwall factor at V_d = 2, C_T = 1, t = 1") {
    CHECK(gronwall_factor(2.0, 1.0, 1.0) == doctest::Approx(1.0 + 4.0 * std::exp(4.0)).epsilon(1e-15));
    CHECK(gronwall_factor(2.0, 1.0, 0.0) == 1.0);
}

TEST_CASE("envelopes at t = 0 reproduce the initial scalars") {
    auto sc = build_scenario(small_config());
    auto e = envelopes_at(sc.initial.meta, sc.spec, 0.0);
    CHECK(e.pbar_sup == sc.initial.meta.pbar_sup);
    CHECK(e.p_sup == sc.initial.meta.p_sup);
    CHECK(e.n_sup == sc.spec.velocity_measure() * sc.initial.meta.pbar_sup);
    CHECK(e.s_l1 == sc.initial.meta.mass);
    CHECK(e.tail == sc.initial.meta.m_moment);
    KineticSolver solver(sc.grid, sc.spec);
    auto st = solver.make_state(sc.initial.p0);
    auto row = reduce_norms(st.p, st.signal, sc.grid, sc.spec.m_plus());
    auto m = envelope_check(row, sc.initial.meta, sc.spec, 0.0);
    CHECK(m.pbar_sup == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    CHECK(m.p_sup == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    CHECK(m.s_l1 >= -1e-14);
}

TEST_CASE("constant turning on uniform data keeps p-bar fixed") {
    auto cfg = small_config();
    cfg.initial.profile = SpatialProfile::Uniform;
    cfg.model.turning.family = TurningFamily::Constant;
    auto sc = build_scenario(cfg);
    KineticSolver solver(sc.grid, sc.spec);
    auto res = solver.run(solver.make_state(sc.initial.p0), 2.0, 0.5, sc.initial.meta);
    const double pbar0 = sc.initial.meta.pbar_sup;
    REQUIRE(res.report.rows().size() == 4);
    for (const auto& r : res.report.rows()) {
        CHECK(r.norms.pbar_sup == doctest::Approx(pbar0).epsilon(1e-12));
        const double g = gronwall_factor(sc.spec.velocity_measure(), sc.spec.c_t(), r.norms.t);
        CHECK(r.margins.pbar_sup == doctest::Approx(pbar0 * (g - 1.0)).epsilon(1e-10));
        CHECK(r.ok);
    }
    CHECK_FALSE(res.report.failed());
}

TEST_CASE("a coupled run stays inside every envelope") {
    auto sc = build_scenario(small_config());
    KineticSolver solver(sc.grid, sc.spec);
    auto res = solver.run(solver.make_state(sc.initial.p0), 3.0, 0.25, sc.initial.meta);
    CHECK_FALSE(res.report.failed());
    CHECK(res.report.worst_relative_margin() >= -kEnvelopeTolerance);
    CHECK(res.report.worst_moment_rate_excess() <= kMomentTolerance);
    for (const auto& r : res.report.rows()) CHECK(r.x_moment_rate <= r.norms.mass * (1.0 + kMomentTolerance));
}

TEST_CASE("report rejects rows out of time order") {
    auto sc = build_scenario(small_config());
    DiagnosticsReport rep(sc.initial.meta, sc.spec);
    NormRow r;
    r.t = 1.0;
    rep.record(r);
    r.t = 1.0;
    CHECK_THROWS_AS(rep.record(r), Error);
}

TEST_CASE("report flags a violated envelope and an excessive moment rate") {
    auto sc = build_scenario(small_config());
    const auto& meta = sc.initial.meta;

    DiagnosticsReport rep(meta, sc.spec);
    NormRow r;
    r.t = 0.5;
    r.mass = meta.mass;
    r.x_moment = meta.x_moment;
    r.pbar_sup = 10.0 * envelopes_at(meta, sc.spec, 0.5).pbar_sup;
    rep.record(r);
    CHECK(rep.failed());
    CHECK(rep.failure().find("pbar_sup") != std::string::npos);
    CHECK_FALSE(rep.rows().front().ok);

    DiagnosticsReport fast(meta, sc.spec);
    r.pbar_sup = 0.0;
    r.x_moment = meta.x_moment + 2.0 * meta.mass * 0.5;
    fast.record(r);
    CHECK(fast.failed());
    CHECK(fast.rows().front().x_moment_rate == doctest::Approx(2.0 * meta.mass));
}

TEST_CASE("CSV output has the documented header and one line per row") {
    auto sc = build_scenario(small_config());
    KineticSolver solver(sc.grid, sc.spec);
    auto res = solver.run(solver.make_state(sc.initial.p0), 1.0, 0.5, sc.initial.meta);
    std::ostringstream os;
    res.report.write_csv(os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == DiagnosticsReport::csv_header());
    int n = 0;
    while (std::getline(is, line)) ++n;
    CHECK(n == 2);
}
