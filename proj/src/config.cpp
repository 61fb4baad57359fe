#include "chemokin/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "chemokin/error.hpp"

namespace chemokin {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"grid", {"dim", "x_nodes", "x_extent", "x_topology", "v_count", "m_nodes", "m_max_auto", "m_max"}},
        {"model",
         {"F_family", "kappa", "S_ref", "m_minus", "m_plus", "T_family", "lambda0", "beta", "m_c", "delta", "eps"}},
        {"initial", {"profile", "center", "width", "mass"}},
        {"run", {"t_end", "output_every", "threads", "out_dir"}},
    };
    return s;
}

[[noreturn]] void bad(const std::string& source, const std::string& what) {
    throw Error(ErrorKind::BadConfig, source + ": " + what);
}

class Section {
public:
    Section(const pt::ptree* tree, std::string name, const std::string& source)
        : tree_(tree), name_(std::move(name)), source_(source) {}

    const std::string* raw(const std::string& key) const {
        if (!tree_) return nullptr;
        auto it = tree_->find(key);
        return it == tree_->not_found() ? nullptr : &it->second.data();
    }

    void number(const std::string& key, double& out) const {
        if (auto s = raw(key)) {
            double x = 0.0;
            auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), x);
            if (ec != std::errc() || ptr != s->data() + s->size() || !std::isfinite(x))
                fail(key, "expected a number, got '" + *s + "'");
            out = x;
        }
    }

    void integer(const std::string& key, int& out) const {
        if (auto s = raw(key)) {
            int x = 0;
            auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), x);
            if (ec != std::errc() || ptr != s->data() + s->size()) fail(key, "expected an integer, got '" + *s + "'");
            out = x;
        }
    }

    template <class E>
    void choice(const std::string& key, E& out, const std::map<std::string, E>& options) const {
        if (auto s = raw(key)) {
            auto it = options.find(*s);
            if (it == options.end()) {
                std::string names;
                for (const auto& [k, v] : options) names += (names.empty() ? "" : " | ") + k;
                fail(key, "'" + *s + "' is not one of " + names);
            }
            out = it->second;
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        bad(source_, "[" + name_ + "] " + key + ": " + what);
    }

private:
    const pt::ptree* tree_;
    std::string name_;
    const std::string& source_;
};

}  // namespace

RunConfig parse_config(std::istream& is, const std::string& source) {
    // The INI reader knows only ';' comments; '#' lines are dropped here.
    std::ostringstream filtered;
    for (std::string line; std::getline(is, line);) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first != std::string::npos && line[first] == '#') continue;
        filtered << line << '\n';
    }
    pt::ptree tree;
    try {
        std::istringstream in(filtered.str());
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        bad(source, "line " + std::to_string(e.line()) + ": " + e.message());
    }

    for (const auto& [name, section] : tree) {
        auto known = schema().find(name);
        if (known == schema().end()) {
            if (section.empty()) bad(source, "key '" + name + "' outside any section");
            bad(source, "unknown section [" + name + "]");
        }
        for (const auto& [key, value] : section) {
            if (!known->second.count(key)) bad(source, "unknown key '" + key + "' in [" + name + "]");
            if (!value.empty()) bad(source, "nested value under '" + key + "'");
        }
    }

    auto section = [&](const std::string& name) {
        auto it = tree.find(name);
        return Section(it == tree.not_found() ? nullptr : &it->second, name, source);
    };

    RunConfig rc;
    auto& g = rc.scenario.grid;
    auto& a = rc.scenario.model.adaptation;
    auto& t = rc.scenario.model.turning;
    auto& init = rc.scenario.initial;

    const Section grid = section("grid");
    grid.integer("dim", g.dim);
    grid.integer("x_nodes", g.x_nodes);
    grid.number("x_extent", g.x_extent);
    grid.choice("x_topology", g.topology,
                std::map<std::string, Topology>{{"periodic", Topology::Periodic},
                                                {"truncated", Topology::TruncatedFreeSpace}});
    grid.integer("v_count", g.v_count);
    grid.integer("m_nodes", g.m_nodes);
    bool m_auto = true;
    grid.choice("m_max_auto", m_auto, std::map<std::string, bool>{{"true", true}, {"false", false}});
    if (grid.raw("m_max")) {
        if (grid.raw("m_max_auto") && m_auto) grid.fail("m_max", "given together with m_max_auto = true");
        double m = 0.0;
        grid.number("m_max", m);
        g.m_max = m;
    } else if (!m_auto) {
        grid.fail("m_max_auto", "false requires m_max");
    }

    const Section model = section("model");
    model.choice("F_family", a.family,
                 std::map<std::string, AdaptationFamily>{{"linear", AdaptationFamily::Linear},
                                                         {"cubic", AdaptationFamily::Cubic}});
    model.number("kappa", a.kappa);
    model.number("S_ref", a.s_ref);
    model.number("m_minus", a.m_minus);
    model.number("m_plus", a.m_plus);
    model.choice("T_family", t.family,
                 std::map<std::string, TurningFamily>{{"constant", TurningFamily::Constant},
                                                      {"separable_uniform", TurningFamily::SeparableUniform},
                                                      {"separable_angle", TurningFamily::SeparableAngle}});
    model.number("lambda0", t.lambda0);
    model.number("beta", t.beta);
    model.number("m_c", t.m_c);
    model.number("delta", t.delta);
    model.number("eps", rc.scenario.model.epsilon);

    const Section initial = section("initial");
    initial.choice("profile", init.profile,
                   std::map<std::string, SpatialProfile>{{"gaussian", SpatialProfile::Gaussian},
                                                         {"two_bumps", SpatialProfile::TwoBumps},
                                                         {"uniform", SpatialProfile::Uniform}});
    initial.number("center", init.center);
    initial.number("width", init.width);
    initial.number("mass", init.mass);
    init.state = StateProfile::RaisedCosine;
    init.m_lo = a.m_minus;
    init.m_hi = a.m_plus;

    const Section run = section("run");
    run.number("t_end", rc.run.t_end);
    run.number("output_every", rc.run.output_every);
    run.integer("threads", rc.run.threads);
    if (auto s = run.raw("out_dir")) {
        if (s->empty()) run.fail("out_dir", "empty path");
        rc.run.out_dir = *s;
    }
    if (!(rc.run.t_end > 0.0)) run.fail("t_end", "must be positive");
    if (rc.run.output_every < 0.0) run.fail("output_every", "must be non-negative");
    if (rc.run.threads < 1) run.fail("threads", "must be at least 1");
    return rc;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::IoError, "cannot read config " + path);
    return parse_config(is, path);
}

std::string output_directory(const RunSettings& run) {
    const char* env = std::getenv("CHEMOKIN_OUT");
    return env && *env ? std::string(env) : run.out_dir;
}

}  // namespace chemokin
