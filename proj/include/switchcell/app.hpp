#pragma once

#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace switchcell {

struct CliRequest {
    std::string command;  // run | sweep | mission | extract
    std::string input;    // config, or curve CSV for extract
    std::string out_dir = ".";
    std::optional<double> dt;
    std::string kind;                        // extract only
    std::vector<double> breakpoints{25.0, 100.0};  // extract --kind capacitance, volts
    double t_ref = 298.15;                   // extract --kind thermal-coeff, kelvin
};

/// Writes the outputs and manifest.json into out_dir; progress goes to `log`.
/// Throws ValidationError / NumericError on failure.
void run_request(const CliRequest& req, std::ostream& log);

/// 0 success, 1 validation error, 2 numeric failure.
int exit_code_for(std::exception_ptr e);

const char* version();

}  // namespace switchcell
