// Command-line front end; see README.md for the configuration format.
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "subdiff/config.hpp"
#include "subdiff/error.hpp"
#include "subdiff/runner.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::size_t> modes;
    std::optional<std::size_t> grid;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, Overrides& o) {
    sub->add_option("config", o.config, "JSON configuration file")->required();
    sub->add_option("--out", o.out, "Output directory (overrides output.dir)");
    sub->add_option("--modes", o.modes, "Number of Dirichlet modes")->check(CLI::PositiveNumber);
    sub->add_option("--grid", o.grid, "Verification grid intervals")->check(CLI::Range(2, 1 << 24));
    sub->add_option("--seed", o.seed, "Seed for randomized round-trip data");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-fractional subdiffusion with a non-local time condition"};
    app.require_subcommand(1);

    Overrides o;
    std::vector<CLI::App*> config_subs;
    const std::vector<std::pair<std::string, std::string>> descriptions = {
        {"forward", "Solve the forward non-local problem"},
        {"invert-source", "Recover a time-independent source from u(xi1) = V"},
        {"invert-phi", "Recover the non-local datum phi from u(xi2) = W"},
        {"verify", "Solve the configured problem and print a residual table"},
        {"roundtrip", "Forward solve on seeded random data, then run both inversions"},
        {"critical-scan", "Report the critical modes for alpha = j/1000, j = 1..999"},
    };
    for (const auto& [name, text] : descriptions) {
        CLI::App* sub = app.add_subcommand(name, text);
        add_common(sub, o);
        config_subs.push_back(sub);
    }

    double rho = 0.5;
    double mu = 1.0;
    std::vector<double> z;
    CLI::App* ml_sub = app.add_subcommand("ml-eval", "Evaluate E_{rho,mu}(z) for z <= 0");
    ml_sub->add_option("--rho", rho, "Order in (0, 1]")->required();
    ml_sub->add_option("--mu", mu, "Second parameter > 0")->required();
    ml_sub->add_option("--z", z, "Arguments (repeatable)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? subdiff::kExitOk : subdiff::kExitConfig;
    }

    try {
        if (ml_sub->parsed()) return subdiff::run_ml_eval(rho, mu, z, std::cout);
        for (CLI::App* sub : config_subs) {
            if (!sub->parsed()) continue;
            subdiff::RunConfig cfg = subdiff::load_config(o.config);
            if (o.out) cfg.out_dir = *o.out;
            if (o.modes) subdiff::override_modes(cfg, *o.modes);
            if (o.grid) cfg.verify_intervals = *o.grid;
            if (o.seed) cfg.seed = *o.seed;
            return subdiff::run(sub->get_name(), cfg, std::cout);
        }
    } catch (const subdiff::Error& e) {
        std::cerr << "subdiff: " << e.what() << '\n';
        return subdiff::exit_code(e.code());
    } catch (const subdiff::IoError& e) {
        std::cerr << "subdiff: " << e.what() << '\n';
        return subdiff::kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "subdiff: " << e.what() << '\n';
        return subdiff::kExitNumerical;
    }
    return subdiff::kExitConfig;
}
