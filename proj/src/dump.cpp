#include "chemokin/dump.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "chemokin/error.hpp"

namespace chemokin {

namespace {

constexpr const char* kMagic = "CHKIN1";

std::string hex(double x) {
    std::ostringstream os;
    os << std::hexfloat << x;
    return os.str();
}

[[noreturn]] void bad_dump(const std::string& what) { throw Error(ErrorKind::IoError, "malformed dump: " + what); }

double parse_double(const std::string& key, const std::string& text) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double x = std::strtod(begin, &end);
    if (end == begin || *end != '\0') bad_dump("bad number for " + key + ": '" + text + "'");
    return x;
}

std::int64_t parse_int(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    std::int64_t x = 0;
    try {
        x = std::stoll(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) bad_dump("bad integer for " + key + ": '" + text + "'");
    return x;
}

std::uint64_t to_le(std::uint64_t u) {
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r |= ((u >> (8 * i)) & 0xffu) << (8 * (7 - i));
        return r;
    }
    return u;
}

}  // namespace

PhaseGrid FieldDump::grid() const {
    return PhaseGrid(dim, x_nodes, x_extent, topology, velocities, m_nodes, m_max);
}

bool FieldDump::same_layout(const FieldDump& o) const {
    if (dim != o.dim || x_nodes != o.x_nodes || x_extent != o.x_extent || topology != o.topology ||
        m_nodes != o.m_nodes || m_max != o.m_max || velocities.size() != o.velocities.size())
        return false;
    for (std::size_t k = 0; k < velocities.size(); ++k) {
        if (velocities[k].v != o.velocities[k].v || velocities[k].weight != o.velocities[k].weight) return false;
    }
    return field.values.size() == o.field.values.size();
}

FieldDump make_dump(const DensityField& p, const PhaseGrid& grid, double eps, std::uint64_t scenario_hash,
                    std::int64_t steps, double outflow, const InitialMetadata& initial) {
    FieldDump d;
    d.dim = grid.dim();
    d.x_nodes = grid.x_nodes();
    d.x_extent = grid.x_extent();
    d.topology = grid.topology();
    d.velocities = grid.velocities();
    d.m_nodes = grid.m_nodes();
    d.m_max = grid.m_max();
    d.eps = eps;
    d.scenario_hash = scenario_hash;
    d.steps = steps;
    d.outflow = outflow;
    d.initial = initial;
    d.field = p;
    return d;
}

void write_dump(std::ostream& os, const FieldDump& d) {
    const PhaseGrid g = d.grid();
    if (d.field.values.size() != g.size()) throw Error(ErrorKind::IoError, "dump field size does not match its grid");
    os << kMagic << '\n';
    os << "dim " << d.dim << '\n';
    os << "x_nodes " << d.x_nodes << '\n';
    os << "x_extent " << hex(d.x_extent) << '\n';
    os << "topology " << (d.topology == Topology::Periodic ? "periodic" : "truncated") << '\n';
    os << "dx " << hex(g.dx()) << '\n';
    os << "v_count " << d.velocities.size() << '\n';
    for (const auto& v : d.velocities) os << "v " << hex(v.v[0]) << ' ' << hex(v.v[1]) << ' ' << hex(v.weight) << '\n';
    os << "m_nodes " << d.m_nodes << '\n';
    os << "m_max " << hex(d.m_max) << '\n';
    os << "dm " << hex(g.dm()) << '\n';
    os << "t " << hex(d.field.t) << '\n';
    os << "eps " << hex(d.eps) << '\n';
    os << "scenario_hash " << d.scenario_hash << '\n';
    os << "steps " << d.steps << '\n';
    os << "outflow " << hex(d.outflow) << '\n';
    os << "initial_mass " << hex(d.initial.mass) << '\n';
    os << "initial_x_moment " << hex(d.initial.x_moment) << '\n';
    os << "initial_m_moment " << hex(d.initial.m_moment) << '\n';
    os << "initial_p_sup " << hex(d.initial.p_sup) << '\n';
    os << "initial_pbar_sup " << hex(d.initial.pbar_sup) << '\n';
    os << "data " << d.field.values.size() << '\n';
    std::vector<std::uint64_t> raw(d.field.values.size());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = to_le(std::bit_cast<std::uint64_t>(d.field.values[i]));
    os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(double)));
    if (!os) throw Error(ErrorKind::IoError, "failed writing dump");
}

FieldDump read_dump(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kMagic) bad_dump("missing CHKIN1 magic");
    std::map<std::string, std::string> kv;
    std::vector<Velocity> vel;
    std::size_t count = 0;
    bool have_data = false;
    while (std::getline(is, line)) {
        const auto sp = line.find(' ');
        if (sp == std::string::npos) bad_dump("header line without value: '" + line + "'");
        const std::string key = line.substr(0, sp), value = line.substr(sp + 1);
        if (key == "v") {
            std::istringstream vs(value);
            std::string a, b, w;
            if (!(vs >> a >> b >> w)) bad_dump("bad velocity line");
            vel.push_back({{parse_double("v", a), parse_double("v", b)}, parse_double("v", w)});
        } else if (key == "data") {
            count = static_cast<std::size_t>(parse_int(key, value));
            have_data = true;
            break;
        } else {
            if (!kv.emplace(key, value).second) bad_dump("duplicate key " + key);
        }
    }
    if (!have_data) bad_dump("header has no data line");
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) bad_dump("missing key " + key);
        return it->second;
    };

    FieldDump d;
    d.dim = static_cast<int>(parse_int("dim", get("dim")));
    d.x_nodes = static_cast<int>(parse_int("x_nodes", get("x_nodes")));
    d.x_extent = parse_double("x_extent", get("x_extent"));
    const std::string& topo = get("topology");
    if (topo == "periodic") d.topology = Topology::Periodic;
    else if (topo == "truncated") d.topology = Topology::TruncatedFreeSpace;
    else bad_dump("unknown topology " + topo);
    if (static_cast<std::size_t>(parse_int("v_count", get("v_count"))) != vel.size())
        bad_dump("v_count does not match the velocity lines");
    d.velocities = std::move(vel);
    d.m_nodes = static_cast<int>(parse_int("m_nodes", get("m_nodes")));
    d.m_max = parse_double("m_max", get("m_max"));
    d.eps = parse_double("eps", get("eps"));
    try {
        d.scenario_hash = std::stoull(get("scenario_hash"));
    } catch (const std::logic_error&) {
        bad_dump("bad scenario_hash");
    }
    d.steps = parse_int("steps", get("steps"));
    d.outflow = parse_double("outflow", get("outflow"));
    d.initial.mass = parse_double("initial_mass", get("initial_mass"));
    d.initial.x_moment = parse_double("initial_x_moment", get("initial_x_moment"));
    d.initial.m_moment = parse_double("initial_m_moment", get("initial_m_moment"));
    d.initial.p_sup = parse_double("initial_p_sup", get("initial_p_sup"));
    d.initial.pbar_sup = parse_double("initial_pbar_sup", get("initial_pbar_sup"));

    PhaseGrid g = [&] {
        try {
            return d.grid();
        } catch (const Error& e) {
            bad_dump(std::string("inconsistent grid: ") + e.what());
        }
    }();
    if (count != g.size()) bad_dump("data count does not match the grid");
    if (std::abs(parse_double("dx", get("dx")) - g.dx()) > 1e-12 * g.dx() ||
        std::abs(parse_double("dm", get("dm")) - g.dm()) > 1e-12 * g.dm())
        bad_dump("dx or dm disagrees with the grid");

    d.field.t = parse_double("t", get("t"));
    std::vector<std::uint64_t> raw(count);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != count * sizeof(double)) bad_dump("truncated data block");
    d.field.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) d.field.values[i] = std::bit_cast<double>(to_le(raw[i]));
    return d;
}

void write_dump_file(const std::string& path, const FieldDump& dump) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
    write_dump(os, dump);
    os.close();
    if (!os) throw Error(ErrorKind::IoError, "failed writing " + path);
}

FieldDump read_dump_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorKind::IoError, "cannot open " + path);
    return read_dump(is);
}

}  // namespace chemokin
