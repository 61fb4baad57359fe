// Acceptance suite: one PASS/FAIL line per criterion. Exit status is
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "chemokin/commands.hpp"
#include "chemokin/config.hpp"
#include "chemokin/diagnostics.hpp"
#include "chemokin/elliptic.hpp"
#include "chemokin/kinetic.hpp"
#include "chemokin/limit.hpp"
#include "chemokin/oracle.hpp"
#include "chemokin/scenario.hpp"

using namespace chemokin;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Every diagnostics report produced along the way, for the envelope and
// moment criteria.
struct Monitored {
    std::string label;
    DiagnosticsReport report;
};
std::vector<Monitored> monitored;
std::vector<EpsStudyRow> study_rows;
std::vector<double> study_m_moment;

RunConfig default_config() { return load_config(CHEMOKIN_DEFAULT_SCENARIO); }

Outcome conservation() {
    const RunConfig rc = default_config();
    const Scenario sc = build_scenario(rc.scenario);
    KineticSolver solver(sc.grid, sc.spec);
    auto state = solver.make_state(sc.initial.p0);
    DiagnosticsReport report(sc.initial.meta, sc.spec);
    const double dt = solver.stable_dt(), m0 = sc.initial.meta.mass;
    double worst_drift = 0.0, min_p = 0.0;
    for (int k = 1; k <= 1000; ++k) {
        state = solver.macro_step(std::move(state), dt);
        worst_drift = std::max(worst_drift, std::abs(total_mass(state.p, sc.grid) - m0) / m0);
        min_p = std::min(min_p, *std::min_element(state.p.values.begin(), state.p.values.end()));
        if (k % 50 == 0) report.record(reduce_norms(state.p, state.signal, sc.grid, sc.spec.m_plus()));
    }
    monitored.push_back({"default scenario, 1000 steps", report});
    return {worst_drift <= 1e-12 && min_p >= 0.0,
            fmt("1000 steps to t=%.3f, max relative mass drift %.2e, min p %.2e", state.p.t, worst_drift, min_p)};
}

Outcome elliptic_fidelity() {
    const Scenario sc = build_scenario(default_config().scenario);
    EllipticSolver periodic(sc.grid);
    const auto n = spatial_density(sc.initial.p0, sc.grid);
    const double residual = periodic.residual(periodic.solve(n).values, n) / max_abs(n);

    const int nodes = 401;
    PhaseGrid line(1, nodes, 40.0, Topology::TruncatedFreeSpace, PhaseGrid::standard_velocities(1, 2), 8, 2.0);
    std::vector<double> delta(nodes, 0.0);
    delta[nodes / 2] = 1.0 / line.dx();
    const double s_center = EllipticSolver(line).solve(delta).values[nodes / 2];
    const double delta_err = std::abs(s_center - 0.5);

    const auto kr = kernel_check(line);
    const bool pass = residual <= 1e-10 && delta_err <= line.dx() && kr.integral >= 1.0 - 1e-6 && kr.integral <= 1.0;
    return {pass, fmt("periodic residual %.2e |n|_inf, delta S(x0) = %.5f (dx %.3f), kernel integral 1 - %.2e",
                      residual, s_center, line.dx(), 1.0 - kr.integral)};
}

Outcome oracle_equivalence() {
    const double L = 2.0, t = 0.2;
    ModelParams mp;
    mp.adaptation = {AdaptationFamily::Linear, 1.0, 1.0, 0.5, 1.5};
    mp.turning = {TurningFamily::SeparableUniform, 1.0, 0.5, 1.0, 0.25, 0.5};
    mp.epsilon = 2.0;
    auto S = [&](double x) { return 0.5 + 0.25 * std::cos(2.0 * M_PI * x / L); };
    InitialProfile p0 = [](double x, std::size_t v, double m) {
        return (1.0 + 0.5 * std::cos(M_PI * x + (v ? 0.7 : 0.0))) * std::exp(-(m - 1.0) * (m - 1.0) / 0.08);
    };

    const int fine_nodes = 4096;
    PhaseGrid fine(1, fine_nodes, L, Topology::Periodic, PhaseGrid::standard_velocities(1, 2), 4, 2.0);
    std::vector<double> sf(fine_nodes);
    for (int i = 0; i < fine_nodes; ++i) sf[static_cast<std::size_t>(i)] = S(fine.x_center(i));
    DuhamelOptions o;
    o.x_nodes = 64;
    o.m_nodes = 64;
    o.time_steps = 32;
    const auto ref = duhamel_solve(p0, SignalHistory::constant(fine, sf), ModelSpec(mp, fine), fine, t, o);

    std::vector<double> err;
    std::vector<int> sizes;
    for (int n = 8; n <= 256; n *= 2) {
        PhaseGrid g(1, n, L, Topology::Periodic, PhaseGrid::standard_velocities(1, 2), n, 2.0);
        ModelSpec spec(mp, g);
        std::vector<double> s(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = S(g.x_center(i));
        KineticOptions ko;
        ko.frozen_signal = SignalHistory::constant(g, s);
        KineticSolver solver(g, spec, ko);
        const auto init = adopt_initial_data(cell_average(p0, g), g);
        auto res = solver.run(solver.make_state(init.p0), t, 0.0, init.meta);
        monitored.push_back({fmt("oracle comparison N=%d", n), res.report});
        const auto exact = ref.cell_averages(g);
        err.push_back(l1_distance(res.state.p, exact, g) / total_mass(exact, g));
        sizes.push_back(n);
    }
    bool shrinking = true;
    double min_order = 1e9;
    std::string orders;
    for (std::size_t k = 1; k < err.size(); ++k) {
        shrinking = shrinking && err[k] < err[k - 1];
        const double order = std::log2(err[k - 1] / err[k]);
        orders += fmt("%s%.2f", k > 1 ? ", " : "", order);
        if (k + 3 >= err.size()) min_order = std::min(min_order, order);
    }
    const bool pass = ref.converged() && shrinking && min_order >= 0.9 && err.back() <= 5e-3;
    return {pass, fmt("relative L1 %.2e (N=8) .. %.2e (N=%d); orders per halving %s; finest three >= %.2f",
                      err.front(), err.back(), sizes.back(), orders.c_str(), min_order)};
}

EpsStudyReport study(double beta) {
    RunConfig rc = default_config();
    rc.scenario.model.turning.beta = beta;
    const Scenario sc = build_scenario(rc.scenario);
    EpsStudyOptions o;
    o.eps = {0.2, 0.1, 0.05, 0.025};
    o.t_end = 1.0;
    o.output_every = rc.run.output_every;
    o.threads = 4;
    auto rep = eps_study(sc, o);
    for (std::size_t k = 0; k < rep.eps.size(); ++k)
        monitored.push_back({fmt("eps study beta=%.2f eps=%.3f", beta, rep.eps[k]), rep.diagnostics[k]});
    for (const auto& r : rep.rows) {
        study_rows.push_back(r);
        study_m_moment.push_back(sc.initial.meta.m_moment);
    }
    return rep;
}

Outcome concentration(const EpsStudyReport& rep, double dm) {
    const double bar = std::max(3.0 * dm, 0.35 * rep.final_w1.front());
    std::string w;
    for (double x : rep.final_w1) w += fmt("%s%.3e", w.empty() ? "" : ", ", x);
    return {rep.w1_decreasing && rep.final_w1.back() <= bar,
            fmt("W1 at t=1 for eps 0.2..0.025: %s; finest bar %.3e", w.c_str(), bar)};
}

Outcome limit_convergence(const EpsStudyReport& rep) {
    std::string g;
    for (double x : rep.final_gap) g += fmt("%s%.3e", g.empty() ? "" : ", ", x / rep.oda_mass);
    return {rep.gap_decreasing && rep.min_gap_ratio >= 1.3,
            fmt("relative L1 gap at t=1: %s; smallest ratio per halving %.3f", g.c_str(), rep.min_gap_ratio)};
}

Outcome degeneracy(const EpsStudyReport& rep) {
    double worst = 0.0;
    for (const auto& r : rep.rows) worst = std::max(worst, r.l1_gap / rep.oda_mass);
    return {worst <= 2e-3, fmt("beta = 0: largest relative L1 gap over all eps and times %.2e", worst)};
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "chemokin_acceptance";
    fs::remove_all(root);
    RunConfig rc = default_config();
    rc.run.threads = 1;
    rc.run.t_end = 1.0;
    std::ostringstream out, err;
    auto run_into = [&](const std::string& name, const std::string& restart) {
        rc.run.out_dir = (root / name).string();
        return cmd_run(rc, restart, out, err);
    };
    ::unsetenv("CHEMOKIN_OUT");
    bool ok = run_into("a", "") == 0 && run_into("b", "") == 0;
    std::size_t compared = 0, identical = 0;
    for (const auto& entry : fs::directory_iterator(root / "a")) {
        ++compared;
        if (slurp(entry.path()) == slurp(root / "b" / entry.path().filename())) ++identical;
    }
    rc.run.t_end = 2.0;
    ok = ok && run_into("straight", "") == 0 && run_into("restart", (root / "a" / "final.chkin").string()) == 0;
    const bool restart_same = slurp(root / "straight" / "final.chkin") == slurp(root / "restart" / "final.chkin") &&
                              !slurp(root / "restart" / "final.chkin").empty();
    fs::remove_all(root);
    return {ok && compared > 0 && identical == compared && restart_same,
            fmt("%zu/%zu files bitwise identical across two runs; restart at t=1 to t=2 %s", identical, compared,
                restart_same ? "bitwise equal to straight run" : "DIFFERS")};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& f) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d %s: %s (%s, %.1f s)\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    };

    report(1, "conservation", conservation);
    report(2, "elliptic fidelity", elliptic_fidelity);
    report(3, "oracle equivalence", oracle_equivalence);

    EpsStudyReport main_study, flat_study;
    double dm = 0.0;
    std::string study_error;
    try {
        dm = build_scenario(default_config().scenario).grid.dm();
        main_study = study(0.5);
        flat_study = study(0.0);
    } catch (const std::exception& e) {
        study_error = e.what();
    }
    auto needs_study = [&](auto f) {
        return [&, f]() -> Outcome {
            if (!study_error.empty()) return {false, "eps study failed: " + study_error};
            return f();
        };
    };
    report(4, "a priori envelopes", [&] {
        double worst = 0.0;
        std::string where = "none";
        bool ok = true;
        for (const auto& m : monitored) {
            if (m.report.worst_relative_margin() < worst) {
                worst = m.report.worst_relative_margin();
                where = m.label;
            }
            ok = ok && m.report.worst_relative_margin() >= -kEnvelopeTolerance;
        }
        return Outcome{ok && !monitored.empty(), fmt("%zu monitored runs, smallest relative margin %.2e (%s)",
                                                     monitored.size(), worst, where.c_str())};
    });
    report(5, "moment controls", [&] {
        double worst_rate = -1.0;
        for (const auto& m : monitored) worst_rate = std::max(worst_rate, m.report.worst_moment_rate_excess());
        bool tail_ok = true;
        double worst_tail = 0.0;
        for (std::size_t i = 0; i < study_rows.size(); ++i) {
            tail_ok = tail_ok && study_rows[i].tail_moment <= study_m_moment[i];
            worst_tail = std::max(worst_tail, study_rows[i].tail_moment / study_m_moment[i]);
        }
        for (const auto& m : monitored)
            for (const auto& r : m.report.rows()) tail_ok = tail_ok && r.margins.tail >= 0.0;
        return Outcome{worst_rate <= kMomentTolerance && tail_ok && !study_rows.empty(),
                       fmt("largest (d/dt sum <x> n - mass) / mass %.3e; largest tail / initial m-moment %.2e",
                           worst_rate, worst_tail)};
    });
    report(6, "fast-adaptation concentration", needs_study([&] { return concentration(main_study, dm); }));
    report(7, "limit-equation convergence", needs_study([&] { return limit_convergence(main_study); }));
    report(8, "m-independent turning degeneracy", needs_study([&] { return degeneracy(flat_study); }));
    report(9, "determinism", determinism);

    std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
