#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "bfk/acceptance.hpp"
#include "bfk/config.hpp"
#include "bfk/experiment.hpp"
#include "bfk/fronts.hpp"
#include "bfk/waves.hpp"

using namespace bfk;

namespace {

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << text;
}

int cmd_simulate(const std::string& cfg_path) {
    ExperimentConfig cfg = load_experiment(cfg_path);
    RunReport rep = simulate(cfg, true);
    std::cout << rep.to_json().dump(2) << "\n";
    std::fprintf(stderr, "wall time %.2f s\n", rep.wall_time);
    return rep.exit_code();
}

int cmd_wave(double beta, double c, const std::string& csv_path, const std::string& json_path) {
    if (std::isnan(c)) c = c_star(beta);
    WaveProfile w = shoot_wave(beta, c);
    json j;
    j["schema"] = 1;
    j["beta"] = beta;
    j["c"] = c;
    json t;
    t["kind"] = w.tail.kind == TailKind::exponential ? "exponential" : "linear_exponential";
    if (w.tail.kind == TailKind::exponential)
        t["rate"] = w.tail.rate;
    else {
        t["A"] = w.tail.A;
        t["B"] = w.tail.B;
    }
    t["r2"] = w.tail.r2;
    t["rms"] = w.tail.rms;
    t["flagged"] = w.tail.flagged;
    j["tail"] = t;
    j["residual_sup"] = wave_residual_sup(w);
    if (!csv_path.empty()) write_csv(w.samples, csv_path);
    emit(j.dump(2) + "\n", json_path);
    return kExitOk;
}

int cmd_fit(const std::string& trace_path, const std::string& model, const std::string& window,
            const std::string& out) {
    KeyValues kv = KeyValues::parse("window = " + window, "--window");
    auto [t0, t1] = kv.range("window");
    FrontTrace tr = read_trace(trace_path);
    ShiftFit f = fit_shift(tr, parse_shift_model(model), t0, t1);
    emit(shift_fit_json(f).dump(2) + "\n", out);
    return kExitOk;
}

int cmd_verify(const std::string& identity, const std::string& cfg_path, const std::string& out) {
    ExperimentConfig cfg = load_experiment(cfg_path);
    if (std::find(identity_names().begin(), identity_names().end(), identity) == identity_names().end())
        throw ConfigError("verify", 0, "unknown identity '" + identity + "'");
    json j = verify(identity, cfg);
    emit(j.dump(2) + "\n", out);
    return j["pass"].get<bool>() ? kExitOk : kExitAssertion;
}

int cmd_sweep(const std::string& cfg_path, const std::string& param, const std::vector<std::string>& values,
              int jobs, const std::string& out) {
    KeyValues base = KeyValues::load(cfg_path);
    parse_experiment(base);  // the base itself must be valid
    std::vector<std::string> vals;
    for (const auto& v : values)
        if (!v.empty()) vals.push_back(v);
    auto rows = sweep(base, param, vals, jobs);
    emit(sweep_csv(rows, param), out);
    for (const auto& r : rows)
        if (!r.ok) std::fprintf(stderr, "%s=%s failed: %s\n", param.c_str(), r.value.c_str(), r.error.c_str());
    return kExitOk;
}

int cmd_accept(const AcceptOptions& opt, const std::string& json_path) {
    auto results = run_acceptance(opt, std::cout);
    if (!json_path.empty()) emit(acceptance_json(results) + "\n", json_path);
    int code = acceptance_exit_code(results);
    std::cout << (code == 0 ? "acceptance: PASS" : "acceptance: FAIL") << std::endl;
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Burgers-FKPP front laboratory"};
    app.require_subcommand(1);

    std::string cfg_path, out, csv, trace, model = "pulled", window, identity, param;
    double beta = 0.0, c = NAN;
    int jobs = 0;
    std::vector<std::string> values;
    AcceptOptions aopt;

    auto* sim = app.add_subcommand("simulate", "run one experiment from a config file");
    sim->add_option("config", cfg_path, "config file")->required();

    auto* wave = app.add_subcommand("wave", "shoot a traveling wave");
    wave->add_option("--beta", beta, "advection strength")->required();
    wave->add_option("--c", c, "speed (default: minimal speed)");
    wave->add_option("--csv", csv, "write the sampled profile here");
    wave->add_option("--out", out, "JSON output (default stdout)");

    auto* fit = app.add_subcommand("fit", "fit a front-location model to a trace");
    fit->add_option("trace", trace, "trace CSV")->required();
    fit->add_option("--model", model, "pulled | pp | pushed")->required();
    fit->add_option("--window", window, "T0:T1")->required();
    fit->add_option("--out", out, "JSON output (default stdout)");

    auto* ver = app.add_subcommand("verify", "check one identity on a configured run");
    ver->add_option("identity", identity, "identity name")->required();
    ver->add_option("config", cfg_path, "config file")->required();
    ver->add_option("--out", out, "JSON output (default stdout)");

    auto* sw = app.add_subcommand("sweep", "run a config over a list of parameter values");
    sw->add_option("config", cfg_path, "base config file")->required();
    sw->add_option("--param", param, "dotted key to vary")->required();
    sw->add_option("--values", values, "values")->expected(0, -1)->delimiter(',');
    sw->add_option("--jobs", jobs, "worker threads (default: hardware)");
    sw->add_option("--out", out, "CSV output (default stdout)");

    auto* acc = app.add_subcommand("accept", "run the acceptance suite");
    acc->add_flag("--quick", aopt.quick, "only the fast criteria");
    acc->add_option("--grid-h", aopt.h_override, "force the grid spacing of every PDE run");
    acc->add_option("--only", aopt.only, "criterion ids")->delimiter(',');
    acc->add_option("--json", out, "write a JSON summary here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*sim) return cmd_simulate(cfg_path);
        if (*wave) return cmd_wave(beta, c, csv, out);
        if (*fit) return cmd_fit(trace, model, window, out);
        if (*ver) return cmd_verify(identity, cfg_path, out);
        if (*sw) return cmd_sweep(cfg_path, param, values, jobs, out);
        if (*acc) return cmd_accept(aopt, out);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    }
    return kExitOk;
}
