#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

#include "chemokin/elliptic.hpp"
#include "chemokin/error.hpp"

using namespace chemokin;
using chemokin::test::random_values;

namespace {

PhaseGrid space_grid(int dim, int nodes, double extent, Topology topo) {
    return PhaseGrid(dim, nodes, extent, topo, PhaseGrid::standard_velocities(dim, dim == 1 ? 2 : 4), 4, 2.0);
}

// max |-Lap_h S + S - n| with the standard stencil, written out directly.
double stencil_residual(const std::vector<double>& s, const std::vector<double>& n, int dim, int N, double dx) {
    double worst = 0.0;
    auto wrap = [N](int i) { return (i % N + N) % N; };
    if (dim == 1) {
        for (int i = 0; i < N; ++i) {
            const double lap = (s[wrap(i - 1)] - 2.0 * s[i] + s[wrap(i + 1)]) / (dx * dx);
            worst = std::max(worst, std::abs(-lap + s[i] - n[i]));
        }
    } else {
        auto at = [&](int i, int j) { return s[wrap(i) * N + wrap(j)]; };
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                const double lap = (at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1) - 4.0 * at(i, j)) / (dx * dx);
                worst = std::max(worst, std::abs(-lap + at(i, j) - n[i * N + j]));
            }
    }
    return worst;
}

double naive_sum(const std::vector<double>& v) {
    long double s = 0.0L;
    for (double x : v) s += x;
    return static_cast<double>(s);
}

}  // namespace

TEST_CASE("constant density gives constant signal on a periodic box") {
    for (int dim : {1, 2}) {
        auto g = space_grid(dim, 32, 8.0, Topology::Periodic);
        std::vector<double> n(g.x_cells(), 0.75);
        auto s = solve_signal(n, g);
        for (double v : s.values) CHECK(v == doctest::Approx(0.75).epsilon(1e-13));
    }
}

TEST_CASE("periodic spectral solve satisfies the discrete equation to round-off") {
    for (int dim : {1, 2}) {
        const int N = dim == 1 ? 128 : 48;
        auto g = space_grid(dim, N, 10.0, Topology::Periodic);
        auto n = random_values(g.x_cells(), 11u + static_cast<unsigned>(dim));
        EllipticSolver solver(g);
        auto s = solver.solve(n);
        const double nmax = *std::max_element(n.begin(), n.end());
        CHECK(stencil_residual(s.values, n, dim, N, g.dx()) <= 1e-10 * nmax);
        CHECK(solver.residual(s.values, n) <= 1e-10 * nmax);
        // Integrating the equation over the torus conserves mass.
        CHECK(naive_sum(s.values) == doctest::Approx(naive_sum(n)).epsilon(1e-12));
        CHECK(*std::min_element(s.values.begin(), s.values.end()) >= 0.0);
    }
}

TEST_CASE("free-space delta response matches exp(-|x|)/2 in one dimension") {
    const int N = 401;
    auto g = space_grid(1, N, 40.0, Topology::TruncatedFreeSpace);
    const double dx = g.dx();
    std::vector<double> n(N, 0.0);
    const int c = N / 2;
    n[c] = 1.0 / dx;
    auto s = solve_signal(n, g);
    CHECK(std::abs(s.values[c] - 0.5) <= dx);
    for (int i = 0; i < N; ++i) {
        const double r = std::abs(g.x_center(i) - g.x_center(c));
        CHECK(std::abs(s.values[i] - 0.5 * std::exp(-r)) <= dx);
    }
}

TEST_CASE("free-space delta response follows K0/(2 pi) in two dimensions") {
    const int N = 81;
    auto g = space_grid(2, N, 16.0, Topology::TruncatedFreeSpace);
    const double dx = g.dx();
    std::vector<double> n(g.x_cells(), 0.0);
    const int c = N / 2;
    n[static_cast<std::size_t>(c) * N + c] = 1.0 / (dx * dx);
    auto s = solve_signal(n, g);
    for (int i = c + 3; i < N; ++i) {
        const double r = (i - c) * dx;
        const double exact = std::cyl_bessel_k(0.0, r) / (2.0 * std::numbers::pi);
        CHECK(std::abs(s.values[static_cast<std::size_t>(i) * N + c] - exact) <= 0.02 * exact + 1e-12);
    }
}

TEST_CASE("free-space solve is non-negative and does not create mass") {
    for (int dim : {1, 2}) {
        const int N = dim == 1 ? 96 : 40;
        auto g = space_grid(dim, N, 6.0, Topology::TruncatedFreeSpace);
        auto n = random_values(g.x_cells(), 7u + static_cast<unsigned>(dim));
        auto s = solve_signal(n, g);
        CHECK(*std::min_element(s.values.begin(), s.values.end()) >= 0.0);
        CHECK(naive_sum(s.values) <= naive_sum(n) * (1.0 + 1e-12));
        CHECK(s.solver == SignalSolverKind::Convolution);
    }
}

TEST_CASE("solve is linear and symmetric under reflection") {
    auto g = space_grid(1, 64, 8.0, Topology::TruncatedFreeSpace);
    auto a = random_values(64, 3), b = random_values(64, 4);
    std::vector<double> ab(64), ra(64);
    for (int i = 0; i < 64; ++i) {
        ab[i] = 2.0 * a[i] + 3.0 * b[i];
        ra[i] = a[63 - i];
    }
    EllipticSolver solver(g);
    auto sa = solver.solve(a), sb = solver.solve(b), sab = solver.solve(ab), sra = solver.solve(ra);
    for (int i = 0; i < 64; ++i) {
        CHECK(sab.values[i] == doctest::Approx(2.0 * sa.values[i] + 3.0 * sb.values[i]).epsilon(1e-12));
        CHECK(sra.values[i] == doctest::Approx(sa.values[63 - i]).epsilon(1e-12));
    }
}

TEST_CASE("non-finite density is rejected") {
    auto g = space_grid(1, 16, 4.0, Topology::Periodic);
    std::vector<double> n(16, 1.0);
    n[3] = std::nan("");
    try {
        solve_signal(n, g);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonFiniteInput);
    }
}

TEST_CASE("source hash identifies the density") {
    auto g = space_grid(1, 16, 4.0, Topology::Periodic);
    std::vector<double> n(16, 1.0);
    auto s1 = solve_signal(n, g);
    n[0] = 1.5;
    auto s2 = solve_signal(n, g);
    CHECK(s1.source_hash != s2.source_hash);
}

TEST_CASE("kernel facts hold on a one-dimensional grid") {
    auto g = space_grid(1, 128, 16.0, Topology::TruncatedFreeSpace);
    auto rep = kernel_check(g);
    CHECK(rep.integral >= 1.0 - 1e-6);
    CHECK(rep.integral <= 1.0 + 1e-12);
    CHECK(rep.min_value >= 0.0);
    // Trapezoid quadrature of |d/dx exp(-|x|)/2| on a fine mesh.
    double tv = 0.0;
    const int M = 200000;
    const double h = 40.0 / M;
    for (int k = 0; k < M; ++k) {
        const double x0 = -20.0 + k * h, x1 = x0 + h;
        const auto d = [](double x) { return 0.5 * std::exp(-std::abs(x)); };
        tv += 0.5 * h * (d(x0) + d(x1));
    }
    CHECK(std::abs(rep.gradient_l1 - tv) <= g.dx());
    // Closed form of the squared norm: int exp(-2|x|)/4 = 1/4.
    CHECK(std::abs(rep.l2_norm_sq - 0.25) <= g.dx());
    REQUIRE(rep.tails.size() == 5);
    for (const auto& t : rep.tails) CHECK(t.pass);
    CHECK(rep.all_pass());
}

TEST_CASE("kernel facts hold on a two-dimensional grid") {
    auto g = space_grid(2, 64, 16.0, Topology::TruncatedFreeSpace);
    auto rep = kernel_check(g);
    CHECK(rep.integral >= 1.0 - 1e-6);
    CHECK(rep.integral <= 1.0 + 1e-12);
    CHECK(rep.min_value >= 0.0);
    CHECK(std::abs(rep.gradient_l1 - 2.0) <= 2.0 * g.dx());
    for (const auto& t : rep.tails) CHECK(t.pass);
    CHECK(rep.all_pass());
    std::ostringstream os;
    write_kernel_report_csv(rep, os);
    CHECK(os.str().rfind("quantity,value,expected,pass\n", 0) == 0);
}
