#pragma once

#include <iosfwd>
#include <string>

#include "chemokin/scenario.hpp"

namespace chemokin {

struct RunSettings {
    double t_end = 1.0;
    double output_every = 0.0;  ///< dump cadence; final state only when zero
    int threads = 1;
    std::string out_dir = "chemokin_out";
};

/// Parsed scenario file:
///
///   [grid]    dim, x_nodes, x_extent, x_topology (periodic | truncated),
///             v_count, m_nodes, m_max_auto (true | false) or m_max
///   [model]   F_family (linear | cubic), kappa, S_ref, m_minus, m_plus,
///             T_family (constant | separable_uniform | separable_angle),
///             lambda0, beta, m_c, delta, eps
///   [initial] profile (gaussian | two_bumps | uniform), center, width, mass
///   [run]     t_end, output_every, threads, out_dir
///
/// Lines starting with ';' or '#' are comments. Keys left out keep their
/// defaults. The initial m-profile is a raised cosine over [m_minus, m_plus].
struct RunConfig {
    ScenarioConfig scenario;
    RunSettings run;
};

/// Throws bad-config naming the offending section or key.
RunConfig parse_config(std::istream& is, const std::string& source = "<config>");
/// Throws io-error if the file cannot be read.
RunConfig load_config(const std::string& path);

/// out_dir, unless CHEMOKIN_OUT is set and non-empty.
std::string output_directory(const RunSettings& run);

}  // namespace chemokin
