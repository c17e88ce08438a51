#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "bfk/acceptance.hpp"

// usage: acceptance [--quick] [--grid-h H] [--json PATH]
int main(int argc, char** argv) {
    bfk::AcceptOptions opt;
    std::string json_path;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--quick")
            opt.quick = true;
        else if (a == "--grid-h" && i + 1 < argc)
            opt.h_override = std::atof(argv[++i]);
        else if (a == "--json" && i + 1 < argc)
            json_path = argv[++i];
        else if (a == "--only" && i + 1 < argc)
            opt.only.push_back(std::atoi(argv[++i]));
        else {
            std::cerr << "usage: acceptance [--quick] [--grid-h H] [--only ID]... [--json PATH]\n";
            return 2;
        }
    }
    auto results = bfk::run_acceptance(opt, std::cout);
    if (!json_path.empty()) std::ofstream(json_path) << bfk::acceptance_json(results) << "\n";
    int code = bfk::acceptance_exit_code(results);
    std::cout << (code == 0 ? "acceptance: PASS" : "acceptance: FAIL") << std::endl;
    return code;
}
