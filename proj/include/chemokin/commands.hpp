#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "chemokin/config.hpp"
#include "chemokin/error.hpp"

namespace chemokin {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,             ///< unexpected internal error
    kExitBadConfig = 2,           ///< bad or inconsistent input, including model assumption violations
    kExitIoError = 3,
    kExitVerificationFailed = 4,  ///< a check, bound monitor or solver invariant failed
};

int exit_code(ErrorKind kind);

/// Runs the kinetic solver to run.t_end. Writes dump_t<time>.chkin at t = 0
/// (unless restarting) and at every output stop, final.chkin, and
/// diagnostics.csv into the output directory. With `restart_dump` the run
/// continues from that dump, which must belong to the same scenario.
int cmd_run(const RunConfig& config, const std::string& restart_dump, std::ostream& out, std::ostream& err);

/// Writes study_eps.csv for the given eps family (strictly decreasing).
int cmd_study_eps(const RunConfig& config, const std::vector<double>& eps, std::ostream& out, std::ostream& err);

/// Kernel facts on the scenario grid, elliptic residual, a small kinetic
/// versus Duhamel cross-check with the scenario's coefficients, and a full
/// run under the bound monitors. Writes kernel_check.csv and diagnostics.csv.
int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Prints L1 (phase-space measure), relative L1 and sup distances of two
/// dumps. With tolerance >= 0 a relative L1 above it exits verification-failed.
int cmd_compare(const std::string& dump_a, const std::string& dump_b, double tolerance, std::ostream& out,
                std::ostream& err);

}  // namespace chemokin
