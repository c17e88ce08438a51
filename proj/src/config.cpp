#include "bfk/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bfk {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
    if (k.empty() || k.front() == '.' || k.back() == '.') return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) return false;
    return k.find("..") == std::string::npos;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end && *end == '\0' && std::isfinite(out);
}

const char* scheme_name(Scheme s) { return s == Scheme::strang ? "strang" : "imex_bdf1"; }
const char* advection_name(AdvectionForm a) {
    return a == AdvectionForm::nonconservative ? "nonconservative" : "conservative";
}
const char* frame_name(FrameKind k) {
    switch (k) {
        case FrameKind::lab: return "lab";
        case FrameKind::linear: return "linear";
        case FrameKind::bramson: return "bramson";
    }
    return "?";
}
const char* ic_name(IcKind k) {
    switch (k) {
        case IcKind::heaviside: return "heaviside";
        case IcKind::steep_sigmoid: return "steep_sigmoid";
        case IcKind::front_like: return "front_like";
        case IcKind::profile: return "profile";
    }
    return "?";
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int ln, const std::string& msg)
    : std::runtime_error(source + ":" + std::to_string(ln) + ": " + msg), line(ln) {}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ---------------------------------------------------------------- KeyValues

KeyValues KeyValues::parse(const std::string& text, const std::string& source) {
    KeyValues kv;
    kv.source_ = source;
    std::istringstream is(text);
    std::string raw;
    int ln = 0;
    while (std::getline(is, raw)) {
        ++ln;
        std::string line = raw;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(source, ln, "expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (!valid_key(key)) throw ConfigError(source, ln, "invalid key '" + key + "'");
        if (val.empty()) throw ConfigError(source, ln, "empty value for '" + key + "'");
        if (kv.map_.count(key))
            throw ConfigError(source, ln,
                              "duplicate key '" + key + "' (first set on line " + std::to_string(kv.map_[key].line) + ")");
        kv.map_[key] = {val, ln};
    }
    return kv;
}

KeyValues KeyValues::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(path, 0, "cannot open file");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse(ss.str(), path);
}

void KeyValues::fail(const std::string& key, const std::string& msg) const {
    auto it = map_.find(key);
    throw ConfigError(source_, it == map_.end() ? 0 : it->second.line, key + ": " + msg);
}

std::string KeyValues::str(const std::string& key, const std::string& def) const {
    auto it = map_.find(key);
    return it == map_.end() ? def : it->second.value;
}

std::string KeyValues::str(const std::string& key) const {
    auto it = map_.find(key);
    if (it == map_.end()) throw ConfigError(source_, 0, "missing required key '" + key + "'");
    return it->second.value;
}

double KeyValues::num(const std::string& key, double def) const {
    return has(key) ? num(key) : def;
}

double KeyValues::num(const std::string& key) const {
    std::string s = str(key);
    double v;
    if (!parse_double(s, v)) fail(key, "expected a finite number, got '" + s + "'");
    return v;
}

std::vector<std::string> KeyValues::list(const std::string& key) const {
    std::vector<std::string> out;
    if (!has(key)) return out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) fail(key, "empty list item");
        out.push_back(item);
    }
    return out;
}

std::pair<double, double> KeyValues::range(const std::string& key) const {
    std::string s = str(key);
    auto c = s.find(':');
    double a = 0.0, b = 0.0;
    if (c == std::string::npos || !parse_double(trim(s.substr(0, c)), a) || !parse_double(trim(s.substr(c + 1)), b))
        fail(key, "expected 'lo:hi', got '" + s + "'");
    if (!(b > a)) fail(key, "empty range '" + s + "'");
    return {a, b};
}

// ---------------------------------------------------------------- experiments

const std::vector<std::string>& analysis_names() {
    static const std::vector<std::string> n{"track", "fit", "moments", "dissipation", "project", "order_probe"};
    return n;
}

const std::vector<std::string>& identity_names() {
    static const std::vector<std::string> n{"hopf_cole",   "g_functional", "mass",          "moment_growth",
                                            "p_decay",     "dissipation",  "nash",          "rearrangement",
                                            "moment_transform", "mu_bounds", "steepness"};
    return n;
}

namespace {

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> k{
        "name",           "output_dir",      "seedless",         "analyses",         "solver.beta",
        "solver.dt",      "solver.t_end",    "solver.grid.x_min", "solver.grid.x_max", "solver.grid.n",
        "solver.grid.h",  "solver.scheme",   "solver.advection", "solver.frame",     "solver.frame.c",
        "solver.frame.r", "solver.regrid_trigger", "solver.snapshot_dt", "solver.left_value",
        "solver.right_value", "ic.kind", "ic.gamma", "ic.a", "ic.L1", "ic.L2", "ic.beta", "track.level",
        "fit.model", "fit.window", "fit.assert_a", "fit.assert_c", "moments.m", "project.gamma", "identity.r"};
    return k;
}

Window window_of(const KeyValues& kv, const std::string& key) {
    Window w;
    if (!kv.has(key)) return w;
    auto [a, b] = kv.range(key);
    w.t0 = a;
    w.t1 = b;
    w.set = true;
    return w;
}

}  // namespace

ExperimentConfig parse_experiment(const KeyValues& kv) {
    for (const auto& [key, v] : kv.entries())
        if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end())
            throw ConfigError(kv.source(), v.line, "unknown key '" + key + "'");

    ExperimentConfig c;
    c.name = kv.str("name");
    c.output_dir = kv.str("output_dir", "out/" + c.name);
    if (kv.has("seedless") && kv.str("seedless") != "true") kv.fail("seedless", "runs are always seedless");

    SolverConfig& s = c.solver;
    s.beta = kv.num("solver.beta");
    if (s.beta < 0) kv.fail("solver.beta", "must be non-negative");
    s.t_end = kv.num("solver.t_end");
    if (!(s.t_end > 0)) kv.fail("solver.t_end", "must be positive");
    double x0 = kv.num("solver.grid.x_min", -50.0), x1 = kv.num("solver.grid.x_max", 200.0);
    try {
        if (kv.has("solver.grid.n") && kv.has("solver.grid.h"))
            kv.fail("solver.grid.h", "give either solver.grid.n or solver.grid.h");
        if (kv.has("solver.grid.h"))
            s.grid = Grid1D::with_spacing(x0, x1, kv.num("solver.grid.h"));
        else {
            double n = kv.num("solver.grid.n", 5001);
            if (n != std::floor(n) || n < 3) kv.fail("solver.grid.n", "must be an integer >= 3");
            s.grid = Grid1D(x0, x1, static_cast<int>(n));
        }
    } catch (const std::invalid_argument& e) {
        kv.fail(kv.has("solver.grid.h") ? "solver.grid.h" : "solver.grid.x_min", e.what());
    }
    s.dt = kv.num("solver.dt", 0.0);
    if (s.dt < 0) kv.fail("solver.dt", "must be non-negative (0 selects the default)");

    std::string sch = kv.str("solver.scheme", "imex_bdf1");
    if (sch == "imex_bdf1") s.scheme = Scheme::imex_bdf1;
    else if (sch == "strang") s.scheme = Scheme::strang;
    else kv.fail("solver.scheme", "expected imex_bdf1 or strang");

    std::string adv = kv.str("solver.advection", "conservative");
    if (adv == "conservative") s.advection_form = AdvectionForm::conservative;
    else if (adv == "nonconservative") s.advection_form = AdvectionForm::nonconservative;
    else kv.fail("solver.advection", "expected conservative or nonconservative");

    std::string fr = kv.str("solver.frame", "lab");
    if (fr == "lab") s.frame = FrameSpec::lab();
    else if (fr == "linear") s.frame = FrameSpec::linear(kv.num("solver.frame.c"));
    else if (fr == "bramson") s.frame = FrameSpec::bramson(kv.num("solver.frame.r", bramson_r(s.beta)));
    else kv.fail("solver.frame", "expected lab, linear or bramson");
    if (fr != "linear" && kv.has("solver.frame.c")) kv.fail("solver.frame.c", "only meaningful for the linear frame");
    if (fr != "bramson" && kv.has("solver.frame.r")) kv.fail("solver.frame.r", "only meaningful for the bramson frame");

    s.regrid_trigger = kv.num("solver.regrid_trigger", 0.05);
    s.left_value = kv.num("solver.left_value", 1.0);
    s.right_value = kv.num("solver.right_value", 0.0);
    c.snapshot_dt = kv.num("solver.snapshot_dt", 1.0);
    if (!(c.snapshot_dt > 0)) kv.fail("solver.snapshot_dt", "must be positive");
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        kv.fail(kv.has("solver.dt") ? "solver.dt" : "solver.beta", e.what());
    }
    s.observer_stride = std::max(1, static_cast<int>(std::lround(c.snapshot_dt / s.time_step())));

    std::string ick = kv.str("ic.kind", "heaviside");
    if (ick == "heaviside") c.ic = IcSpec::heaviside();
    else if (ick == "steep_sigmoid") {
        c.ic = IcSpec::steep_sigmoid(kv.num("ic.gamma", 1.5), kv.num("ic.a", 0.0));
        if (!(c.ic.gamma > 1.0)) kv.fail("ic.gamma", "must exceed 1");
    } else if (ick == "front_like") {
        c.ic = IcSpec::front_like(kv.num("ic.L1", -5.0), kv.num("ic.L2", 0.0));
        if (!(c.ic.L2 > c.ic.L1)) kv.fail("ic.L2", "must exceed ic.L1");
    } else if (ick == "profile") {
        c.ic = IcSpec::profile(kv.num("ic.beta", s.beta), kv.num("ic.a", 0.0));
        if (c.ic.beta < 2.0) kv.fail("ic.beta", "closed-form profile needs beta >= 2");
    } else
        kv.fail("ic.kind", "expected heaviside, steep_sigmoid, front_like or profile");

    c.analyses = kv.list("analyses");
    if (c.analyses.empty()) throw ConfigError(kv.source(), 0, "missing required key 'analyses'");
    for (const auto& a : c.analyses) {
        bool ok = std::find(analysis_names().begin(), analysis_names().end(), a) != analysis_names().end();
        if (a.rfind("verify-", 0) == 0) {
            std::string id = a.substr(7);
            ok = std::find(identity_names().begin(), identity_names().end(), id) != identity_names().end();
        }
        if (!ok) kv.fail("analyses", "unknown analysis '" + a + "'");
        if (std::count(c.analyses.begin(), c.analyses.end(), a) > 1) kv.fail("analyses", "'" + a + "' listed twice");
    }

    c.track_level = kv.num("track.level", 0.5);
    if (!(c.track_level > 0 && c.track_level < 1)) kv.fail("track.level", "must lie in (0,1)");
    try {
        c.fit_model = parse_shift_model(kv.str("fit.model", "pulled"));
    } catch (const std::invalid_argument& e) {
        kv.fail("fit.model", e.what());
    }
    c.fit_window = window_of(kv, "fit.window");
    if (c.fit_window.set && c.fit_window.t1 > s.t_end) kv.fail("fit.window", "extends past solver.t_end");
    c.assert_a = window_of(kv, "fit.assert_a");
    c.assert_c = window_of(kv, "fit.assert_c");
    for (const auto& m : kv.list("moments.m")) {
        double v;
        char* end = nullptr;
        v = std::strtod(m.c_str(), &end);
        if (!end || *end != '\0') kv.fail("moments.m", "expected numbers");
        c.moment_m.push_back(v);
    }
    c.project_gamma = kv.num("project.gamma", 0.25);
    c.identity_r = kv.num("identity.r", 0.5);
    if (!(c.identity_r > 0 && c.identity_r < 1)) kv.fail("identity.r", "must lie in (0,1)");
    return c;
}

ExperimentConfig load_experiment(const std::string& path) { return parse_experiment(KeyValues::load(path)); }

std::string echo(const ExperimentConfig& c) {
    std::ostringstream os;
    auto kv = [&](const std::string& k, const std::string& v) { os << k << " = " << v << "\n"; };
    auto win = [](const Window& w) { return format_double(w.t0) + ":" + format_double(w.t1); };
    const SolverConfig& s = c.solver;
    kv("name", c.name);
    kv("output_dir", c.output_dir);
    kv("seedless", "true");
    kv("solver.beta", format_double(s.beta));
    kv("solver.t_end", format_double(s.t_end));
    kv("solver.dt", format_double(s.dt));
    kv("solver.grid.x_min", format_double(s.grid.x_min));
    kv("solver.grid.x_max", format_double(s.grid.x_max));
    kv("solver.grid.n", std::to_string(s.grid.n));
    kv("solver.scheme", scheme_name(s.scheme));
    kv("solver.advection", advection_name(s.advection_form));
    kv("solver.frame", frame_name(s.frame.kind));
    if (s.frame.kind == FrameKind::linear) kv("solver.frame.c", format_double(s.frame.c));
    if (s.frame.kind == FrameKind::bramson) kv("solver.frame.r", format_double(s.frame.r));
    kv("solver.regrid_trigger", format_double(s.regrid_trigger));
    kv("solver.snapshot_dt", format_double(c.snapshot_dt));
    kv("solver.left_value", format_double(s.left_value));
    kv("solver.right_value", format_double(s.right_value));
    kv("ic.kind", ic_name(c.ic.kind));
    switch (c.ic.kind) {
        case IcKind::heaviside: break;
        case IcKind::steep_sigmoid:
            kv("ic.gamma", format_double(c.ic.gamma));
            kv("ic.a", format_double(c.ic.a));
            break;
        case IcKind::front_like:
            kv("ic.L1", format_double(c.ic.L1));
            kv("ic.L2", format_double(c.ic.L2));
            break;
        case IcKind::profile:
            kv("ic.beta", format_double(c.ic.beta));
            kv("ic.a", format_double(c.ic.a));
            break;
    }
    std::string al;
    for (std::size_t i = 0; i < c.analyses.size(); ++i) al += (i ? ", " : "") + c.analyses[i];
    kv("analyses", al);
    kv("track.level", format_double(c.track_level));
    kv("fit.model", c.fit_model == ShiftModel::pushmi_pullyu ? "pp" : to_string(c.fit_model));
    if (c.fit_window.set) kv("fit.window", win(c.fit_window));
    if (c.assert_a.set) kv("fit.assert_a", win(c.assert_a));
    if (c.assert_c.set) kv("fit.assert_c", win(c.assert_c));
    if (!c.moment_m.empty()) {
        std::string m;
        for (std::size_t i = 0; i < c.moment_m.size(); ++i) m += (i ? ", " : "") + format_double(c.moment_m[i]);
        kv("moments.m", m);
    }
    kv("project.gamma", format_double(c.project_gamma));
    kv("identity.r", format_double(c.identity_r));
    return os.str();
}

bool same_config(const ExperimentConfig& a, const ExperimentConfig& b) {
    const SolverConfig &s = a.solver, &t = b.solver;
    return a.name == b.name && a.output_dir == b.output_dir && a.seedless == b.seedless && s.beta == t.beta &&
           s.dt == t.dt && s.t_end == t.t_end && s.grid.congruent(t.grid) && s.grid.x_max == t.grid.x_max &&
           s.scheme == t.scheme && s.advection_form == t.advection_form && s.frame == t.frame &&
           s.regrid_trigger == t.regrid_trigger && s.observer_stride == t.observer_stride &&
           s.left_value == t.left_value && s.right_value == t.right_value && a.snapshot_dt == b.snapshot_dt &&
           a.ic.kind == b.ic.kind && a.ic.gamma == b.ic.gamma && a.ic.a == b.ic.a && a.ic.L1 == b.ic.L1 &&
           a.ic.L2 == b.ic.L2 && a.ic.beta == b.ic.beta && a.analyses == b.analyses &&
           a.track_level == b.track_level && a.fit_model == b.fit_model && a.fit_window == b.fit_window &&
           a.assert_a == b.assert_a && a.assert_c == b.assert_c && a.moment_m == b.moment_m &&
           a.project_gamma == b.project_gamma && a.identity_r == b.identity_r;
}

}  // namespace bfk
