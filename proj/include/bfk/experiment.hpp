#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "bfk/config.hpp"
#include "bfk/evolve.hpp"
#include "bfk/fronts.hpp"

namespace bfk {

using json = nlohmann::ordered_json;

enum ExitCode { kExitOk = 0, kExitAssertion = 1, kExitConfig = 2, kExitNumerical = 3 };

struct RunReport {
    std::string config_echo;
    json results = json::object();  // one entry per analysis, in config order
    double wall_time = 0.0;         // kept out of the JSON files so outputs are reproducible
    bool assertions_passed = true;
    bool aborted = false;
    std::string abort_reason;

    int exit_code() const;
    json to_json() const;
};

json shift_fit_json(const ShiftFit& f);

// runs the solver and every analysis; writes CSV/JSON under output_dir when write_outputs
RunReport simulate(const ExperimentConfig& cfg, bool write_outputs = true);

// {schema, name, paper_ref, lhs, rhs, tolerance, pass}
json verify_identity(const std::string& identity, const ExperimentConfig& cfg, const Trajectory& traj);
// runs the configured solver and evaluates one identity
json verify(const std::string& identity, const ExperimentConfig& cfg);

struct SweepRow {
    std::string value;
    bool ok = false;
    std::string error;
    double c_star = 0.0;
    double c_fit = 0.0;      // free-speed fit
    double a_fit = 0.0;      // log coefficient of the free-speed fit
    double a_at_cstar = 0.0; // log coefficient with the speed held at c_*(beta)
    double t0 = 0.0, t1 = 0.0;
};

// one independent run per value on a bounded worker pool; failures are recorded per row
std::vector<SweepRow> sweep(const KeyValues& base, const std::string& param, const std::vector<std::string>& values,
                            int jobs = 0);
std::string sweep_csv(const std::vector<SweepRow>& rows, const std::string& param);

}  // namespace bfk
