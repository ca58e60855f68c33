// switchcell command-line front end.
#include <iostream>

#include "CLI11.hpp"
#include "switchcell/app.hpp"
#include "switchcell/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"SiC MOSFET / SBD switching-loss and electro-thermal simulator"};
    app.set_version_flag("--version", std::string(switchcell::version()));
    app.require_subcommand(1);

    switchcell::CliRequest req;
    std::string out = ".";
    double dt = 0.0;
    std::string breakpoints;
    double t_ref_c = 25.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", out, "Output directory")->capture_default_str();
        sub->add_option("--dt", dt, "Trace sample step in seconds (oracle mode: also the integration step)");
    };
    auto* run = app.add_subcommand("run", "Simulate the switching edges of a config (mode dpt-on|dpt-off|dpt-both|oracle)");
    run->add_option("config", req.input, "Config file")->required()->check(CLI::ExistingFile);
    add_common(run);
    auto* sweep = app.add_subcommand("sweep", "Sweep one parameter and compare against reference data");
    sweep->add_option("config", req.input, "Config file")->required()->check(CLI::ExistingFile);
    add_common(sweep);
    auto* mission = app.add_subcommand("mission", "Electro-thermal run over a duty schedule");
    mission->add_option("config", req.input, "Config file")->required()->check(CLI::ExistingFile);
    add_common(mission);
    auto* extract = app.add_subcommand("extract", "Fit model parameters from a digitized datasheet curve");
    extract->add_option("csv", req.input, "Curve CSV with a header row")->required()->check(CLI::ExistingFile);
    extract->add_option("--kind", req.kind, "transfer | capacitance | thermal-coeff")
        ->required()
        ->check(CLI::IsMember({"transfer", "capacitance", "thermal-coeff"}));
    extract->add_option("--breakpoints", breakpoints, "Capacitance breakpoints in volts, comma separated (default 25,100)");
    extract->add_option("--t-ref", t_ref_c, "Reference temperature in C for thermal-coeff")->capture_default_str();
    add_common(extract);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    for (auto* sub : app.get_subcommands()) req.command = sub->get_name();
    req.out_dir = out;
    if (dt != 0.0) req.dt = dt;
    req.t_ref = t_ref_c + 273.15;
    try {
        if (!breakpoints.empty()) {
            req.breakpoints.clear();
            for (const auto& b : CLI::detail::split(breakpoints, ','))
                req.breakpoints.push_back(switchcell::parse_quantity(b, switchcell::Dim::Voltage));
        }
        switchcell::run_request(req, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "switchcell: " << e.what() << "\n";
        const int rc = switchcell::exit_code_for(std::current_exception());
        return rc;
    }
    return 0;
}
