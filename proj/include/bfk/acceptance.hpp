#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bfk {

struct AcceptOptions {
    bool quick = false;      // only the sub-minute criteria
    double h_override = 0.0; // forces the grid spacing of every PDE run when > 0
    std::vector<int> only;   // restrict to these criteria when non-empty
};

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    bool blocking = true;
    bool skipped = false;
    std::string measured;
    std::string target;
    double seconds = 0.0;
};

// runs the suite, printing one line per criterion as it finishes
std::vector<CriterionResult> run_acceptance(const AcceptOptions& opt, std::ostream& log);
// 0 when every blocking, attempted criterion passed
int acceptance_exit_code(const std::vector<CriterionResult>& results);
std::string acceptance_json(const std::vector<CriterionResult>& results);

}  // namespace bfk
