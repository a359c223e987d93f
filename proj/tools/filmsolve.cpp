// filmsolve: command-line driver.
//
//   filmsolve run --config <path> [--variant legacy|corrected] [--out <dir>]
//   filmsolve compare --config <path> --out <dir>
//   filmsolve dispersion --config <path> --modes <max>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "filmsolve/filmsolve.hpp"

namespace {

filmsolve::RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw filmsolve::Error("file-not-found", path);
    std::stringstream buf;
    buf << in.rdbuf();
    return filmsolve::parse_config(buf.str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Soluble-surfactant falling-film simulator"};
    app.set_version_flag("--version", filmsolve::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string variant;
    std::string out_dir;
    int max_mode = 0;

    auto* run = app.add_subcommand("run", "Integrate one variant and write series/snapshots");
    run->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
    run->add_option("--variant", variant, "Override the configured variant")
        ->check(CLI::IsMember({"legacy", "corrected"}));
    run->add_option("--out", out_dir, "Output directory (default: output_dir from config)");

    auto* compare = app.add_subcommand("compare", "Run both variants and compare");
    compare->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
    compare->add_option("--out", out_dir, "Output directory")->required();

    auto* dispersion = app.add_subcommand("dispersion", "Print per-mode growth rates of both variants");
    dispersion->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
    dispersion->add_option("--modes", max_mode, "Highest mode index")->required()->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        filmsolve::RunConfig cfg = load_config(config_path);
        if (*run) {
            if (!variant.empty()) cfg.variant = filmsolve::parse_variant(variant);
            if (out_dir.empty()) out_dir = cfg.output_dir;
            const int code = filmsolve::run(cfg, out_dir);
            std::cerr << "run finished with exit code " << code << '\n';
            return code;
        }
        if (*compare) {
            const int code = filmsolve::compare_variants(cfg, out_dir);
            std::cerr << "compare finished with exit code " << code << '\n';
            return code;
        }
        filmsolve::write_growth(std::cout, filmsolve::growth_table(cfg.params, cfg.n, max_mode));
        return 0;
    } catch (const filmsolve::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
