#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "leafflow/config.hpp"
#include "leafflow/runner.hpp"

using namespace leafflow;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"leafflow: leaf-wise reduction of the mixed-curvature metric flow"};
    app.require_subcommand(1);

    std::string config_path, out_dir, axis, values_text;
    bool override_hyp = false, quiet = false;

    CLI::App* cmd_run = app.add_subcommand("run", "run one configuration");
    cmd_run->add_option("config", config_path, "JSON config file")->required();
    cmd_run->add_option("--out", out_dir, "output directory (overrides config)");
    cmd_run->add_flag("--override-hypotheses", override_hyp,
                      "evolve even when the initial-data condition fails");
    cmd_run->add_flag("--quiet", quiet, "suppress the text report");

    CLI::App* cmd_sweep = app.add_subcommand("sweep", "run a parameter sweep");
    cmd_sweep->add_option("config", config_path, "JSON config template")->required();
    cmd_sweep->add_option("--axis", axis, "dotted config path, e.g. scenario.Phi")->required();
    cmd_sweep->add_option("--values", values_text, "comma-separated axis values")->required();
    cmd_sweep->add_option("--out", out_dir, "output directory");
    cmd_sweep->add_flag("--quiet", quiet, "suppress the text report");

    CLI::App* cmd_presets = app.add_subcommand("presets", "list built-in presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_presets->parsed()) {
            for (const auto& name : preset_names()) {
                std::cout << "== " << name << "\n" << preset_config(name) << "\n";
            }
            return 0;
        }
        if (cmd_run->parsed()) {
            RunConfig cfg = parse_config_file(config_path);
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (override_hyp) cfg.override_hypotheses = true;
            if (quiet) cfg.quiet = true;
            RunReport rep = run(cfg);
            if (!cfg.quiet) std::cout << rep.to_text();
            return rep.all_pass() ? 0 : 1;
        }
        if (cmd_sweep->parsed()) {
            std::vector<double> values;
            std::stringstream ss(values_text);
            std::string item;
            while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
            if (out_dir.empty()) out_dir = "sweep_out";
            SweepResult result = sweep(slurp(config_path), axis, values, out_dir);
            if (!quiet) {
                for (size_t k = 0; k < values.size(); ++k) {
                    std::cout << "== value " << values[k] << ": ";
                    if (!result.failures[k].empty())
                        std::cout << "FAILED: " << result.failures[k] << "\n";
                    else
                        std::cout << (result.reports[k].all_pass() ? "pass" : "not passing")
                                  << "\n";
                }
                std::cout << "continuity metric: " << result.continuity_metric << "\n";
            }
            return result.all_pass() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
