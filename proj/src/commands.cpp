#include "chemokin/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "chemokin/dump.hpp"
#include "chemokin/elliptic.hpp"
#include "chemokin/kinetic.hpp"
#include "chemokin/limit.hpp"
#include "chemokin/oracle.hpp"
#include "chemokin/scenario.hpp"

namespace chemokin {

namespace fs = std::filesystem;

namespace {

std::string prepare_dir(const RunSettings& run) {
    const std::string dir = output_directory(run);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir + ": " + ec.message());
    return dir;
}

std::string dump_name(double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "dump_t%.6f.chkin", t);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
    return os;
}

void close_out(std::ofstream& os, const std::string& path) {
    os.close();
    if (!os) throw Error(ErrorKind::IoError, "failed writing " + path);
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        err << "chemokin: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        err << "chemokin: io-error: " << e.what() << '\n';
        return kExitIoError;
    } catch (const std::exception& e) {
        err << "chemokin: " << e.what() << '\n';
        return kExitFailure;
    }
}

void report_line(std::ostream& out, bool& all, const std::string& name, bool pass, const std::string& detail) {
    out << (pass ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    all = all && pass;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// Kinetic solution with the scenario's coefficients on a small periodic line
// against the Duhamel fixed point, for a frozen smooth signal. Returns the
// relative L1 errors for 8, 16 and 32 cells per direction.
std::vector<double> oracle_cross_check(const RunConfig& config, int threads) {
    const auto& gc = config.scenario.grid;
    const double L = 2.0;
    const double m_max = gc.m_max.value_or(default_m_max(config.scenario.model.adaptation));
    const int v_count = gc.dim == 1 ? gc.v_count : 2;
    auto S = [&](double x) { return 0.5 + 0.25 * std::cos(2.0 * M_PI * x / L); };
    const double mid = 0.5 * (config.scenario.model.adaptation.m_minus + config.scenario.model.adaptation.m_plus);
    const double spread = 0.1 * (config.scenario.model.adaptation.m_plus - config.scenario.model.adaptation.m_minus);
    InitialProfile p0 = [&](double x, std::size_t v, double m) {
        return (1.0 + 0.5 * std::cos(M_PI * x + 0.7 * static_cast<double>(v))) *
               std::exp(-(m - mid) * (m - mid) / (2.0 * spread * spread));
    };

    const int fine_nodes = 1024;
    PhaseGrid fine(1, fine_nodes, L, Topology::Periodic, PhaseGrid::standard_velocities(1, v_count), 4, m_max);
    ModelSpec fine_spec(config.scenario.model, fine);
    std::vector<double> sf(fine_nodes);
    for (int i = 0; i < fine_nodes; ++i) sf[static_cast<std::size_t>(i)] = S(fine.x_center(i));
    // Half the contraction horizon.
    const double t = std::min(0.2, 0.5 / sup_growth_rate(fine_spec));
    DuhamelOptions o;
    o.x_nodes = 32;
    o.m_nodes = 32;
    o.time_steps = 16;
    o.threads = threads;
    const auto ref = duhamel_solve(p0, SignalHistory::constant(fine, sf), fine_spec, fine, t, o);
    if (!ref.converged()) throw Error(ErrorKind::VerificationFailed, "Duhamel iteration did not converge");

    std::vector<double> errors;
    for (int n : {8, 16, 32}) {
        PhaseGrid g(1, n, L, Topology::Periodic, PhaseGrid::standard_velocities(1, v_count), n, m_max);
        ModelSpec spec(config.scenario.model, g);
        std::vector<double> s(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = S(g.x_center(i));
        KineticOptions ko;
        ko.frozen_signal = SignalHistory::constant(g, s);
        KineticSolver solver(g, spec, ko);
        auto init = adopt_initial_data(cell_average(p0, g), g);
        auto res = solver.run(solver.make_state(init.p0), t, 0.0, init.meta);
        const auto exact = ref.cell_averages(g);
        errors.push_back(l1_distance(res.state.p, exact, g) / total_mass(exact, g));
    }
    return errors;
}

}  // namespace

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::BadConfig:
    case ErrorKind::AssumptionViolation: return kExitBadConfig;
    case ErrorKind::IoError: return kExitIoError;
    default: return kExitVerificationFailed;
    }
}

int cmd_run(const RunConfig& config, const std::string& restart_dump, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Scenario sc = build_scenario(config.scenario);
        KineticOptions ko;
        ko.threads = config.run.threads;
        KineticSolver solver(sc.grid, sc.spec, ko);

        StepperState state;
        InitialMetadata meta = sc.initial.meta;
        if (!restart_dump.empty()) {
            FieldDump d = read_dump_file(restart_dump);
            if (d.scenario_hash != sc.hash)
                throw Error(ErrorKind::BadConfig, restart_dump + " was written for a different scenario");
            if (!d.same_layout(make_dump(sc.initial.p0, sc.grid, 0.0, 0, 0, 0.0, meta)))
                throw Error(ErrorKind::BadConfig, restart_dump + " does not match the scenario grid");
            if (!(d.field.t < config.run.t_end))
                throw Error(ErrorKind::BadConfig, "restart time is not before t_end");
            meta = d.initial;
            state = solver.make_state(std::move(d.field), d.steps, d.outflow);
        } else {
            state = solver.make_state(sc.initial.p0);
        }

        const std::string dir = prepare_dir(config.run);
        auto save = [&](const StepperState& s, const std::string& name) {
            write_dump_file((fs::path(dir) / name).string(),
                            make_dump(s.p, sc.grid, sc.spec.epsilon(), sc.hash, s.steps, s.outflow, meta));
        };
        if (restart_dump.empty()) save(state, dump_name(0.0));
        const double t0 = state.p.t;
        const auto res = solver.run(std::move(state), config.run.t_end, config.run.output_every, meta,
                                    [&](const StepperState& s) { save(s, dump_name(s.p.t)); });
        save(res.state, "final.chkin");

        const std::string csv = (fs::path(dir) / "diagnostics.csv").string();
        auto os = open_out(csv);
        res.report.write_csv(os);
        close_out(os, csv);

        const double mass = total_mass(res.state.p, sc.grid) + res.state.outflow;
        out << "run t=" << t0 << " -> " << res.state.p.t << " steps=" << res.state.steps
            << " mass_drift=" << std::abs(mass - meta.mass) / meta.mass << " out_dir=" << dir << '\n';
        if (res.report.failed()) {
            err << "chemokin: verification-failed: " << res.report.failure() << '\n';
            return static_cast<int>(kExitVerificationFailed);
        }
        return static_cast<int>(kExitOk);
    });
}

int cmd_study_eps(const RunConfig& config, const std::vector<double>& eps, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Scenario sc = build_scenario(config.scenario);
        EpsStudyOptions o;
        o.eps = eps;
        o.t_end = config.run.t_end;
        o.output_every = config.run.output_every;
        o.threads = config.run.threads;
        o.log = &out;
        const auto rep = eps_study(sc, o);

        const std::string dir = prepare_dir(config.run);
        const std::string csv = (fs::path(dir) / "study_eps.csv").string();
        auto os = open_out(csv);
        rep.write_csv(os);
        close_out(os, csv);

        for (std::size_t k = 0; k < rep.eps.size(); ++k) {
            out << "eps=" << rep.eps[k] << " w1=" << rep.final_w1[k]
                << " l1_gap_rel=" << rep.final_gap[k] / rep.oda_mass << '\n';
        }
        out << "w1_decreasing=" << rep.w1_decreasing << " gap_decreasing=" << rep.gap_decreasing
            << " min_gap_ratio=" << rep.min_gap_ratio << " csv=" << csv << '\n';
        for (std::size_t k = 0; k < rep.diagnostics.size(); ++k) {
            if (rep.diagnostics[k].failed()) {
                err << "chemokin: verification-failed: eps=" << rep.eps[k] << ": " << rep.diagnostics[k].failure()
                    << '\n';
                return static_cast<int>(kExitVerificationFailed);
            }
        }
        return static_cast<int>(kExitOk);
    });
}

int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Scenario sc = build_scenario(config.scenario);
        const std::string dir = prepare_dir(config.run);
        bool all = true;

        const auto kr = kernel_check(sc.grid);
        {
            const std::string csv = (fs::path(dir) / "kernel_check.csv").string();
            auto os = open_out(csv);
            write_kernel_report_csv(kr, os);
            close_out(os, csv);
        }
        report_line(out, all, "kernel", kr.all_pass(),
                    fmt("integral %.12f, min %.3e, gradient %.6f", kr.integral, kr.min_value, kr.gradient_l1));

        EllipticSolver elliptic(sc.grid);
        const auto n0 = spatial_density(sc.initial.p0, sc.grid);
        const auto s0 = elliptic.solve(n0);
        if (sc.grid.topology() == Topology::Periodic) {
            const double r = elliptic.residual(s0.values, n0), bound = 1e-10 * max_abs(n0);
            report_line(out, all, "elliptic residual", r <= bound, fmt("%.3e (bound %.3e)", r, bound));
        } else {
            bool ok = true;
            for (double v : s0.values) ok = ok && v >= 0.0;
            report_line(out, all, "elliptic positivity", ok, "S >= 0 on the truncated domain");
        }

        const auto errors = oracle_cross_check(config, config.run.threads);
        const bool shrinking = errors[1] < errors[0] && errors[2] < errors[1];
        report_line(out, all, "oracle", shrinking,
                    fmt("relative L1 errors %.3e, %.3e, %.3e at 8, 16, 32 cells", errors[0], errors[1], errors[2]));

        KineticOptions ko;
        ko.threads = config.run.threads;
        KineticSolver solver(sc.grid, sc.spec, ko);
        const double every = config.run.output_every > 0.0 ? config.run.output_every : config.run.t_end / 10.0;
        double min_p = 0.0;
        const auto res = solver.run(solver.make_state(sc.initial.p0), config.run.t_end, every, sc.initial.meta,
                                    [&](const StepperState& s) {
                                        for (double v : s.p.values) min_p = std::min(min_p, v);
                                    });
        {
            const std::string csv = (fs::path(dir) / "diagnostics.csv").string();
            auto os = open_out(csv);
            res.report.write_csv(os);
            close_out(os, csv);
        }
        const double mass = total_mass(res.state.p, sc.grid) + res.state.outflow;
        const double drift = std::abs(mass - sc.initial.meta.mass) / sc.initial.meta.mass;
        report_line(out, all, "mass", drift <= 1e-12, fmt("relative drift %.3e over %.0f steps", drift,
                                                            static_cast<double>(res.state.steps)));
        report_line(out, all, "positivity", min_p >= 0.0, fmt("min p %.3e", min_p));
        report_line(out, all, "envelopes", !res.report.failed(),
                    res.report.failed() ? res.report.failure()
                                        : fmt("worst relative margin %.3e, worst moment-rate excess %.3e",
                                              res.report.worst_relative_margin(),
                                              res.report.worst_moment_rate_excess()));
        out << (all ? "verify: all checks passed" : "verify: FAILED") << '\n';
        return static_cast<int>(all ? kExitOk : kExitVerificationFailed);
    });
}

int cmd_compare(const std::string& dump_a, const std::string& dump_b, double tolerance, std::ostream& out,
                std::ostream& err) {
    return guarded(err, [&] {
        const FieldDump a = read_dump_file(dump_a);
        const FieldDump b = read_dump_file(dump_b);
        if (!a.same_layout(b)) throw Error(ErrorKind::BadConfig, "dumps have different grids");
        const PhaseGrid g = a.grid();
        const double l1 = l1_distance(a.field, b.field, g);
        const double mass = total_mass(a.field, g);
        double sup = 0.0;
        for (std::size_t i = 0; i < a.field.values.size(); ++i)
            sup = std::max(sup, std::abs(a.field.values[i] - b.field.values[i]));
        const double rel = mass > 0.0 ? l1 / mass : l1;
        out << "t_a=" << a.field.t << " t_b=" << b.field.t << '\n';
        out << "l1 " << l1 << "\nl1_relative " << rel << "\nlinf " << sup << '\n';
        if (tolerance >= 0.0 && rel > tolerance) {
            err << "chemokin: verification-failed: relative L1 " << rel << " exceeds " << tolerance << '\n';
            return static_cast<int>(kExitVerificationFailed);
        }
        return static_cast<int>(kExitOk);
    });
}

}  // namespace chemokin
