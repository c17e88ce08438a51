#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bfk/evolve.hpp"
#include "bfk/fronts.hpp"

namespace bfk {

// diagnostic of the form "<source>:<line>: message" (line 0 when not tied to a line)
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& source, int line, const std::string& msg);
    int line;
};

struct KeyValue {
    std::string value;
    int line = 0;
};

// "key = value" lines, '#' starts a comment, keys are dotted paths
class KeyValues {
public:
    static KeyValues parse(const std::string& text, const std::string& source = "<config>");
    static KeyValues load(const std::string& path);

    bool has(const std::string& key) const { return map_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { map_[key] = {value, 0}; }
    const std::string& source() const { return source_; }
    const std::map<std::string, KeyValue>& entries() const { return map_; }

    std::string str(const std::string& key, const std::string& def) const;
    std::string str(const std::string& key) const;
    double num(const std::string& key, double def) const;
    double num(const std::string& key) const;
    std::vector<std::string> list(const std::string& key) const;  // comma separated
    std::pair<double, double> range(const std::string& key) const;  // "a:b"
    [[noreturn]] void fail(const std::string& key, const std::string& msg) const;

private:
    std::map<std::string, KeyValue> map_;
    std::string source_;
};

struct Window {
    double t0 = 0.0, t1 = 0.0;
    bool set = false;
    bool operator==(const Window&) const = default;
};

struct ExperimentConfig {
    std::string name;
    SolverConfig solver;
    double snapshot_dt = 1.0;  // time between stored snapshots
    IcSpec ic;
    std::vector<std::string> analyses;
    std::string output_dir;
    bool seedless = true;

    double track_level = 0.5;
    ShiftModel fit_model = ShiftModel::pulled;
    Window fit_window;
    Window assert_a;  // hard assertion on the fitted log coefficient
    Window assert_c;  // and on the fitted speed
    std::vector<double> moment_m;
    double project_gamma = 0.25;
    double identity_r = 0.5;  // moment-transform identity
};

// analyses accepted by the runner; verify-<identity> uses identity_names()
const std::vector<std::string>& analysis_names();
const std::vector<std::string>& identity_names();

ExperimentConfig parse_experiment(const KeyValues& kv);
ExperimentConfig load_experiment(const std::string& path);
// canonical text; parse_experiment(KeyValues::parse(echo(c))) reproduces c
std::string echo(const ExperimentConfig& c);
bool same_config(const ExperimentConfig& a, const ExperimentConfig& b);

std::string format_double(double x);  // 17 significant digits

}  // namespace bfk
