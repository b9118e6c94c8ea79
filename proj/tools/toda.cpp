#include "toda/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

int run(toda::Mode mode, const std::string& config, const std::string& out_dir, int trunc, double tol) {
    try {
        std::ifstream in(config);
        if (!in) throw toda::Error(toda::ErrorKind::ConfigError, "config: cannot open " + config);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw toda::Error(toda::ErrorKind::ConfigError, std::string("config: ") + e.what());
        }
        toda::PipelineConfig cfg = toda::parse_config(j, mode);
        if (trunc > 0) cfg.trunc = trunc;
        if (tol > 0.0) cfg.tol.validation = tol;
        const toda::PipelineResult r = toda::run_pipeline(cfg, out_dir);
        std::cout << (r.exit_code == 0 ? "pass" : "gate failure") << ": " << out_dir << "/" << cfg.output.summary << "\n";
        return r.exit_code;
    } catch (const toda::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& [i, j] : e.indices) std::cerr << "  at (" << i << ", " << j << ")\n";
        if (!e.history.empty()) {
            std::cerr << "  history:";
            for (double h : e.history) std::cerr << ' ' << h;
            std::cerr << "\n";
        }
        return e.kind() == toda::ErrorKind::ConfigError ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Toda surfaces: PDE solvers, frame integration, loop-group construction, real-form search"};
    app.require_subcommand(1);

    std::string config, out_dir = ".";
    int trunc = 0;
    double tol = 0.0;
    int code = 0;

    auto add = [&](const char* name, const char* help, toda::Mode mode) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config,-c", config, "JSON configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out,-o", out_dir, "output directory");
        sub->add_option("--trunc", trunc, "loop truncation degree (dpw)")->check(CLI::PositiveNumber);
        sub->add_option("--tol", tol, "validation tolerance")->check(CLI::PositiveNumber);
        sub->callback([&, mode] { code = run(mode, config, out_dir, trunc, tol); });
    };
    add("solve", "solve the Tzitzeica equation", toda::Mode::Solve);
    add("lax-check", "check involution and reality conditions of the Lax pair", toda::Mode::LaxCheck);
    add("integrate", "integrate the moving frame and extract the surface", toda::Mode::Integrate);
    add("dpw", "build the surface from a holomorphic potential", toda::Mode::Dpw);
    add("classify", "enumerate canonical involutions", toda::Mode::Classify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    return code;
}
