#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "bfk/acceptance.hpp"
#include "bfk/config.hpp"
#include "bfk/experiment.hpp"

using namespace bfk;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

const char* kMinimal = R"(# minimal run
name = minimal
solver.beta = 2
solver.t_end = 1
solver.grid.x_min = -20
solver.grid.x_max = 40
solver.grid.h = 0.05
solver.frame = bramson
analyses = track
)";

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("bfk_cli_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("key-value parsing") {
    KeyValues kv = KeyValues::parse("a = 1\n# comment\n  b.c = x, y ,z  \nw = 2:30\n", "t");
    CHECK(kv.num("a") == 1.0);
    CHECK(kv.list("b.c") == std::vector<std::string>{"x", "y", "z"});
    CHECK(kv.range("w") == std::pair<double, double>{2.0, 30.0});
    CHECK(kv.num("missing", 7.0) == 7.0);
    CHECK_THROWS_AS(kv.num("missing"), ConfigError);
}

TEST_CASE("malformed configs are rejected with the offending line") {
    auto line_of = [](const std::string& text) {
        try {
            parse_experiment(KeyValues::parse(text, "bad.cfg"));
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).rfind("bad.cfg:", 0) == 0);
            return e.line;
        }
        return -1;
    };
    CHECK(line_of("name = x\nsolver.beta 2\n") == 2);
    CHECK(line_of("name = x\nsolver.beta = 2\nsolver.beta = 3\n") == 3);
    CHECK(line_of(std::string(kMinimal) + "solver.bogus = 1\n") == 10);
    CHECK(line_of("name = x\nsolver.beta = 2\nsolver.t_end = 1\nic.kind = steep_sigmoid\nic.gamma = 0.9\nanalyses = track\n") == 5);
    CHECK(line_of("name = x\nsolver.beta = 2\nsolver.t_end = 1\nanalyses = track, verify-nothing\n") == 4);
    CHECK(line_of("name = x\nsolver.beta = 2\nsolver.t_end = 1\nsolver.dt = 1\nanalyses = track\n") == 4);
    CHECK(line_of("name = x\nsolver.beta = 2\nsolver.t_end = 1\nanalyses =\n") == 4);
    CHECK(line_of("name = x\nsolver.beta = 2\nsolver.t_end = 1\n") == 0);  // analyses missing entirely
}

TEST_CASE("config echo re-parses to an equal config") {
    ExperimentConfig c = parse_experiment(KeyValues::parse(kMinimal, "m"));
    ExperimentConfig back = parse_experiment(KeyValues::parse(echo(c), "echo"));
    CHECK(same_config(c, back));
    CHECK(echo(back) == echo(c));
    for (const char* f : {"pulled_beta1.cfg", "pushed_beta4.cfg", "critical_moments.cfg", "sweep_beta.cfg"}) {
        ExperimentConfig p = load_experiment(std::string(BFK_SOURCE_DIR) + "/configs/" + f);
        CHECK(same_config(p, parse_experiment(KeyValues::parse(echo(p), "echo"))));
    }
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("minimal simulation writes a trace and exits 0") {
    ExperimentConfig c = parse_experiment(KeyValues::parse(kMinimal, "m"));
    c.output_dir = scratch("minimal").string();
    RunReport rep = simulate(c);
    CHECK(rep.exit_code() == kExitOk);
    CHECK(fs::exists(fs::path(c.output_dir) / "trace.csv"));
    CHECK(fs::exists(fs::path(c.output_dir) / "report.json"));
    json j = json::parse(slurp(fs::path(c.output_dir) / "report.json"));
    CHECK(j["schema"] == 1);
    CHECK(j["results"].contains("track"));
    fs::remove_all(c.output_dir);
}

TEST_CASE("outputs are byte-identical across runs") {
    std::string text = std::string(kMinimal) + "analyses = track, moments, dissipation\n";
    text.replace(text.find("analyses = track\n"), 17, "");
    text.replace(text.find("solver.frame = bramson"), 22, "solver.frame = linear\nsolver.frame.c = 2");
    ExperimentConfig c = parse_experiment(KeyValues::parse(text, "m"));
    fs::path a = scratch("det_a"), b = scratch("det_b");
    c.output_dir = a.string();
    simulate(c);
    c.output_dir = b.string();
    simulate(c);
    for (const char* f : {"trace.csv", "moments.csv", "dissipation.csv", "final.csv"})
        CHECK(slurp(a / f) == slurp(b / f));
    // the report embeds the output directory through the echo; compare with it masked
    std::string ra = slurp(a / "report.json"), rb = slurp(b / "report.json");
    auto mask = [](std::string s, const std::string& d) {
        for (auto p = s.find(d); p != std::string::npos; p = s.find(d)) s.replace(p, d.size(), "<out>");
        return s;
    };
    CHECK(mask(ra, a.string()) == mask(rb, b.string()));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("failed assertion gives exit 1") {
    std::string text = std::string(kMinimal);
    text.replace(text.find("solver.t_end = 1"), 16, "solver.t_end = 50");
    text.replace(text.find("analyses = track"), 16, "analyses = track, fit\nfit.model = pp\nfit.window = 5:50\nfit.assert_a = 10:11");
    ExperimentConfig c = parse_experiment(KeyValues::parse(text, "m"));
    c.output_dir = scratch("assert").string();
    RunReport rep = simulate(c);
    CHECK(rep.exit_code() == kExitAssertion);
    fs::remove_all(c.output_dir);
}

TEST_CASE("sweep: empty list, per-row failures, fitted speeds") {
    KeyValues base = KeyValues::parse(kMinimal, "m");
    CHECK(sweep(base, "solver.beta", {}).empty());
    CHECK(sweep_csv({}, "solver.beta") == "solver.beta,status,c_star,c_fit,a_fit,a_at_cstar,t0,t1,error\n");
    KeyValues kv = KeyValues::parse(R"(name = s
solver.beta = 1
solver.t_end = 100
solver.grid.x_min = -40
solver.grid.x_max = 80
solver.grid.h = 0.1
solver.frame = lab
solver.regrid_trigger = 0.2
analyses = track
)", "s");
    auto rows = sweep(kv, "solver.beta", {"1", "-1", "4"}, 2);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].ok);
    CHECK_FALSE(rows[1].ok);
    CHECK(rows[1].error.find("solver.beta") != std::string::npos);
    CHECK(rows[2].ok);
    CHECK(std::abs(rows[2].c_fit - 2.5) / 2.5 < 0.01);
    CHECK(rows[0].c_star == 2.0);
}

TEST_CASE("verify returns the documented record") {
    std::string text = std::string(kMinimal);
    text.replace(text.find("solver.t_end = 1"), 16, "solver.t_end = 20");
    text.replace(text.find("solver.frame = bramson"), 22, "solver.frame = linear\nsolver.frame.c = 2");
    ExperimentConfig c = parse_experiment(KeyValues::parse(text, "m"));
    json j = verify("mass", c);
    for (const char* k : {"schema", "name", "paper_ref", "lhs", "rhs", "tolerance", "pass"}) CHECK(j.contains(k));
    CHECK(j["pass"].get<bool>());
    CHECK_THROWS_AS(verify("nothing", c), std::invalid_argument);
}

TEST_CASE("acceptance summary format") {
    std::vector<CriterionResult> rs(2);
    rs[0].id = 1;
    rs[0].pass = true;
    rs[1].id = 11;
    rs[1].blocking = false;
    rs[1].pass = false;
    CHECK(acceptance_exit_code(rs) == 0);
    rs[0].pass = false;
    CHECK(acceptance_exit_code(rs) == 1);
    rs[0].skipped = true;
    CHECK(acceptance_exit_code(rs) == 0);
    json j = json::parse(acceptance_json(rs));
    CHECK(j["schema"] == 1);
    CHECK(j["criteria"].size() == 2);
}

}
