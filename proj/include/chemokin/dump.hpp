#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "chemokin/field.hpp"
#include "chemokin/grid.hpp"
#include "chemokin/initial.hpp"

namespace chemokin {

/// Field dump: a text header opened by the magic line `CHKIN1`, one
/// `key value` pair per line (floats in hexfloat so they round-trip), closed
/// by `data <count>`, then <count> little-endian float64 values in
/// x-outer, v, m-inner order.
struct FieldDump {
    int dim = 1;
    int x_nodes = 0;
    double x_extent = 0.0;
    Topology topology = Topology::Periodic;
    std::vector<Velocity> velocities;
    int m_nodes = 0;
    double m_max = 0.0;
    double eps = 0.0;
    std::uint64_t scenario_hash = 0;
    std::int64_t steps = 0;
    double outflow = 0.0;
    InitialMetadata initial;  ///< t = 0 scalars, so a restart keeps monitoring the same envelopes
    DensityField field;

    PhaseGrid grid() const;
    /// Same dimensions, extent, topology, velocities and m-range.
    bool same_layout(const FieldDump& other) const;
};

FieldDump make_dump(const DensityField& p, const PhaseGrid& grid, double eps, std::uint64_t scenario_hash,
                    std::int64_t steps, double outflow, const InitialMetadata& initial);

void write_dump(std::ostream& os, const FieldDump& dump);
FieldDump read_dump(std::istream& is);

/// File variants; failures raise io-error.
void write_dump_file(const std::string& path, const FieldDump& dump);
FieldDump read_dump_file(const std::string& path);

}  // namespace chemokin
