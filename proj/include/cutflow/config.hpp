#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace cutflow {

// key = value lines, '#' starts a comment
struct ConfigEntry {
    std::string value;
    std::string origin; // "line 7" or "override 2"
};

class RunConfig {
  public:
    static RunConfig parse(std::istream& in);
    static RunConfig parse_file(const std::string& path);

    // "key=value"; later overrides win
    void apply_override(const std::string& assignment, int index);

    // checks keys against the experiment schema and fills in defaults; throws ConfigError
    void resolve();

    const std::string& experiment() const;
    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string str(const std::string& key) const;
    double real(const std::string& key) const;
    int integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<double> reals(const std::string& key) const;
    std::vector<int> integers(const std::string& key) const;

    // resolved key = value pairs, sorted
    void write_echo(std::ostream& out) const;

  private:
    std::map<std::string, ConfigEntry> entries_;
    bool resolved_ = false;

    const ConfigEntry& entry(const std::string& key) const;
};

const std::vector<std::string>& experiment_names();

} // namespace cutflow
