#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "CLI11.hpp"

#include "asi/errors.hpp"
#include "asi/scenario.hpp"

namespace {

asi::ScenarioConfig load_scenario(const std::string& config_path, const std::string& preset_name) {
    if (!config_path.empty() && !preset_name.empty())
        throw asi::ConfigError("pass either --config or --preset, not both");
    if (!config_path.empty()) return asi::load_config(config_path);
    if (!preset_name.empty()) return asi::preset(preset_name);
    throw asi::ConfigError("need --config <file> or --preset <name>");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive spectral inversion for time-harmonic medium recovery"};
    app.require_subcommand(1);

    std::string config_path, preset_name, out_dir, resume_path;
    std::uint64_t seed = 0;
    int threads = 1;

    app.add_option("--config", config_path, "scenario config file (JSON)");
    app.add_option("--preset", preset_name,
                   "built-in scenario: decomposition, five_inclusion, constant");
    app.add_option("--out", out_dir, "output directory (defaults to the config's output_dir)");
    auto* seed_opt = app.add_option("--seed", seed, "override the config's noise seed");
    app.add_option("--threads", threads,
                   "linear-algebra thread cap (solvers are sequential; kept for compatibility)");

    auto* dec =
        app.add_subcommand("decompose", "eigenvalue study and mode dump of the configured medium");
    auto* inv = app.add_subcommand("invert", "run the adaptive inversion loop");
    inv->add_option("--resume", resume_path, "snapshot file to resume from");
    auto* obs = app.add_subcommand("observe", "synthesize observation data");
    auto* ver = app.add_subcommand("verify", "check the decomposition energy estimates");
    for (CLI::App* sub : {dec, inv, obs, ver}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        Eigen::setNbThreads(threads);
        asi::ScenarioConfig cfg = load_scenario(config_path, preset_name);
        if (*seed_opt) cfg.seed = seed;
        const std::filesystem::path out = out_dir.empty() ? cfg.output_dir : out_dir;
        if (dec->parsed())
            asi::run_decomposition_study(cfg, out);
        else if (inv->parsed())
            asi::run_inversion(cfg, out,
                               resume_path.empty()
                                   ? std::nullopt
                                   : std::optional<std::filesystem::path>(resume_path));
        else if (obs->parsed())
            asi::run_observe(cfg, out);
        else if (ver->parsed())
            asi::run_verify(cfg, out);
        std::printf("done: outputs in %s\n", out.string().c_str());
        return 0;
    } catch (const asi::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
