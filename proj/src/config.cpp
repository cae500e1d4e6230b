#include "cutflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "cutflow/errors.hpp"

namespace cutflow {

namespace {

using Schema = std::map<std::string, std::string>; // key -> default, empty when required

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

Schema common() { return {{"experiment", ""}, {"out_dir", ""}, {"jobs", "1"}}; }

Schema manufactured_keys() {
    Schema s = common();
    s.insert({{"triplet", "P2/P1/P0"},
              {"quad_boost", "0"},
              {"alpha0", "0"},
              {"gamma0", "0"},
              {"nu_plus", "2"},
              {"nu_minus", "1"},
              {"xc", "0.5"},
              {"yc", "0.5"},
              {"radius", "0.23"},
              {"cp_plus", "3"},
              {"cp_minus", "1"}});
    return s;
}

Schema evolution_keys(bool nse) {
    Schema s = common();
    s.insert({{"triplet", "P3/P2/P1"},
              {"quad_boost", "0"},
              {"n", "40"},
              {"alpha0", "0.01"},
              {"gamma0", "0.01"},
              {"nu_plus", "0.1"},
              {"nu_minus", "0.05"},
              {"mu", "50"},
              {"a1", "0.3537"},
              {"a2", "0.2037"},
              {"xc", "0.5"},
              {"yc", "0.5"},
              {"T", "0.1"},
              {"dt", "0.00025"},
              {"incremental", "true"},
              {"snapshot_every", "0"}});
    if (nse)
        s.insert({{"rho_plus", "0.2"}, {"rho_minus", "0.1"}, {"newton_tol", "1e-10"}, {"newton_max", "20"}});
    return s;
}

const std::map<std::string, Schema>& schemas() {
    static const std::map<std::string, Schema> all = [] {
        std::map<std::string, Schema> m;
        Schema conv = manufactured_keys();
        conv["n"] = "10,20,40,80";
        m["converge"] = conv;

        Schema gam = manufactured_keys();
        gam.erase("gamma0");
        gam["n"] = "10";
        gam["gamma0_list"] = "0.001,0.002,0.005,0.01,0.02,0.05,0.1,0.2,0.5,1";
        m["sweep-gamma"] = gam;

        Schema cen = manufactured_keys();
        cen.erase("xc");
        cen["n"] = "10";
        cen["gamma0"] = "0.02";
        cen["xc_min"] = "0.3";
        cen["xc_max"] = "0.7";
        cen["xc_count"] = "30";
        m["sweep-center"] = cen;

        Schema bub = common();
        bub.insert({{"triplet", "P2/P1/P0"},
                    {"h", "0.1,0.05,0.025,0.0125"},
                    {"mu", "1"},
                    {"r", "0.25"},
                    {"nu_plus", "1"},
                    {"nu_minus", "1"},
                    {"alpha0", "0.01"},
                    {"gamma0", "0.01"}});
        m["static-bubble"] = bub;

        m["evolve-stokes"] = evolution_keys(false);
        m["evolve-nse"] = evolution_keys(true);
        return m;
    }();
    return all;
}

std::set<std::string> all_keys() {
    std::set<std::string> k;
    for (const auto& [name, s] : schemas())
        for (const auto& [key, def] : s)
            k.insert(key);
    return k;
}

double parse_real(const std::string& v, const std::string& what) {
    double x = 0.0;
    auto s = trim(v);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        throw ConfigError(what + ": '" + v + "' is not a number");
    return x;
}

int parse_int(const std::string& v, const std::string& what) {
    int x = 0;
    auto s = trim(v);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        throw ConfigError(what + ": '" + v + "' is not an integer");
    return x;
}

std::vector<std::string> split(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    for (std::string item; std::getline(ss, item, ',');)
        out.push_back(trim(item));
    return out;
}

} // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, s] : schemas())
            v.push_back(name);
        return v;
    }();
    return names;
}

RunConfig RunConfig::parse(std::istream& in) {
    RunConfig c;
    static const std::set<std::string> known = all_keys();
    int lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        line = trim(line);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        const std::string where = "line " + std::to_string(lineno);
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected key = value");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(where + ": empty key");
        if (!known.count(key))
            throw ConfigError(where + ": unknown key '" + key + "'");
        if (c.entries_.count(key))
            throw ConfigError(where + ": key '" + key + "' repeated (first at " + c.entries_[key].origin + ")");
        c.entries_[key] = {value, where};
    }
    return c;
}

RunConfig RunConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    return parse(in);
}

void RunConfig::apply_override(const std::string& assignment, int index) {
    static const std::set<std::string> known = all_keys();
    const std::string where = "override " + std::to_string(index);
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError(where + ": expected key=value, got '" + assignment + "'");
    std::string key = trim(assignment.substr(0, eq));
    if (!known.count(key))
        throw ConfigError(where + ": unknown key '" + key + "'");
    entries_[key] = {trim(assignment.substr(eq + 1)), where};
    resolved_ = false;
}

void RunConfig::resolve() {
    auto e = entries_.find("experiment");
    if (e == entries_.end())
        throw ConfigError("missing required keys: experiment");
    auto s = schemas().find(e->second.value);
    if (s == schemas().end()) {
        std::string names;
        for (const auto& n : experiment_names())
            names += " " + n;
        throw ConfigError(e->second.origin + ": unknown experiment '" + e->second.value + "' (one of:" + names +
                          ")");
    }
    const Schema& schema = s->second;
    for (const auto& [key, ent] : entries_)
        if (!schema.count(key))
            throw ConfigError(ent.origin + ": key '" + key + "' does not apply to experiment '" +
                              e->second.value + "'");
    std::vector<std::string> missing;
    for (const auto& [key, def] : schema) {
        if (entries_.count(key))
            continue;
        if (def.empty())
            missing.push_back(key);
        else
            entries_[key] = {def, "default"};
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& k : missing)
            list += (list.empty() ? "" : ", ") + k;
        throw ConfigError("missing required keys: " + list);
    }
    resolved_ = true;
}

const std::string& RunConfig::experiment() const { return entry("experiment").value; }

const ConfigEntry& RunConfig::entry(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end())
        throw ConfigError("key '" + key + "' is not set");
    return it->second;
}

std::string RunConfig::str(const std::string& key) const { return entry(key).value; }

double RunConfig::real(const std::string& key) const {
    const auto& e = entry(key);
    return parse_real(e.value, e.origin + ": " + key);
}

int RunConfig::integer(const std::string& key) const {
    const auto& e = entry(key);
    return parse_int(e.value, e.origin + ": " + key);
}

bool RunConfig::flag(const std::string& key) const {
    const auto& e = entry(key);
    std::string v = e.value;
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw ConfigError(e.origin + ": " + key + ": '" + e.value + "' is not a boolean");
}

std::vector<double> RunConfig::reals(const std::string& key) const {
    const auto& e = entry(key);
    std::vector<double> out;
    for (const auto& item : split(e.value))
        out.push_back(parse_real(item, e.origin + ": " + key));
    return out;
}

std::vector<int> RunConfig::integers(const std::string& key) const {
    const auto& e = entry(key);
    std::vector<int> out;
    for (const auto& item : split(e.value))
        out.push_back(parse_int(item, e.origin + ": " + key));
    return out;
}

void RunConfig::write_echo(std::ostream& out) const {
    for (const auto& [key, e] : entries_)
        out << key << " = " << e.value << '\n';
}

} // namespace cutflow
