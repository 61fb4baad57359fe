// Command-line front end: run, study-eps, verify, compare.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "chemokin/commands.hpp"

using namespace chemokin;

int main(int argc, char** argv) {
    CLI::App app{"Kinetic chemotaxis solver with internal state"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 ok, 1 internal error, 2 bad config, 3 io error, 4 verification failed.\n"
               "CHEMOKIN_OUT overrides the output directory of the config.");

    std::string config_path, restart, dump_a, dump_b;
    std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
    double tolerance = -1.0;
    int threads = 0;

    auto* run = app.add_subcommand("run", "Run the kinetic solver and write dumps and diagnostics");
    run->add_option("config", config_path, "Scenario file")->required();
    run->add_option("--restart", restart, "Continue from a dump of the same scenario");
    run->add_option("--threads", threads, "Override [run] threads")->check(CLI::PositiveNumber);

    auto* study = app.add_subcommand("study-eps", "Kinetic runs for an eps family against the limit model");
    study->add_option("config", config_path, "Scenario file")->required();
    study->add_option("--eps", eps, "Strictly decreasing eps values")->delimiter(',');
    study->add_option("--threads", threads, "Override [run] threads")->check(CLI::PositiveNumber);

    auto* verify = app.add_subcommand("verify", "Kernel, elliptic, oracle and bound-monitor checks");
    verify->add_option("config", config_path, "Scenario file")->required();
    verify->add_option("--threads", threads, "Override [run] threads")->check(CLI::PositiveNumber);

    auto* compare = app.add_subcommand("compare", "L1 and sup distance of two dumps");
    compare->add_option("a", dump_a, "First dump")->required();
    compare->add_option("b", dump_b, "Second dump")->required();
    compare->add_option("--tolerance", tolerance, "Fail when the relative L1 distance exceeds this");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitBadConfig;
    }

    if (compare->parsed()) return cmd_compare(dump_a, dump_b, tolerance, std::cout, std::cerr);

    RunConfig config;
    try {
        config = load_config(config_path);
    } catch (const Error& e) {
        std::cerr << "chemokin: " << e.what() << '\n';
        return exit_code(e.kind());
    }
    if (threads > 0) config.run.threads = threads;

    if (run->parsed()) return cmd_run(config, restart, std::cout, std::cerr);
    if (study->parsed()) return cmd_study_eps(config, eps, std::cout, std::cerr);
    return cmd_verify(config, std::cout, std::cerr);
}
