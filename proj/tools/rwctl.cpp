// rwctl: train, evaluate, compare and plot reaction-wheel attitude controllers
#include <algorithm>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "rwctl/error.hpp"
#include "rwctl/plot.hpp"
#include "rwctl/runner.hpp"

namespace fs = std::filesystem;
using namespace rwctl;

namespace {

struct Common {
    std::string config;
    std::string agent;
    bool no_her = false;
    bool no_dwc = false;
    double fault_time = -1.0;
    double duration = -1.0;
    std::uint64_t seed = 0;
    std::string out;
    std::string checkpoint;

    CLI::Option *fault_opt = nullptr;
    CLI::Option *duration_opt = nullptr;
    CLI::Option *seed_opt = nullptr;
};

void add_common(CLI::App *cmd, Common &c) {
    cmd->add_option("--config", c.config, "YAML run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--agent", c.agent, "pd, td3 or td3-hd")
        ->check(CLI::IsMember({"pd", "td3", "td3-hd"}));
    cmd->add_flag("--no-her", c.no_her, "disable hindsight relabeling");
    cmd->add_flag("--no-dwc", c.no_dwc, "disable dimension-wise gradient clipping");
    c.fault_opt = cmd->add_option("--fault-time", c.fault_time, "scenario fault time, s");
    c.duration_opt = cmd->add_option("--duration", c.duration, "scenario duration, s");
    c.seed_opt = cmd->add_option("--seed", c.seed, "run a single seed");
    cmd->add_option("--out", c.out, "output directory");
}

RunConfig resolve(const Common &c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
    Overrides o;
    if (!c.agent.empty()) o.agent = c.agent;
    o.no_her = c.no_her;
    o.no_dwc = c.no_dwc;
    if (c.fault_opt->count() > 0) o.fault_time = c.fault_time;
    if (c.duration_opt->count() > 0) o.duration = c.duration;
    if (c.seed_opt->count() > 0) o.seed = c.seed;
    if (!c.out.empty()) o.out = c.out;
    apply_overrides(cfg, o);
    return cfg;
}

std::string seed_dir(const RunConfig &cfg, const std::string &name, std::uint64_t seed) {
    return (fs::path(cfg.output_dir) / name / ("seed_" + std::to_string(seed))).string();
}

void print_metrics(const RunSummary &s) {
    std::cout << s.variant << " seed " << s.seed << ": " << s.rollout.records.size() << " rows";
    if (s.rollout.diverged) std::cout << ", " << s.rollout.diagnostic;
    if (s.metrics) {
        std::cout << ", mean error pre/post " << s.metrics->mean_err_pre << " / "
                  << s.metrics->mean_err_post << " deg, settle " << s.metrics->settle_time_s << " s";
    }
    std::cout << " -> " << s.directory << "\n";
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Reaction-wheel attitude control: TD3-HD agents, PD baseline and fault scenarios"};
    app.require_subcommand(1);

    Common train_opts, eval_opts, compare_opts;
    CLI::App *train = app.add_subcommand("train", "train a learned agent per seed");
    add_common(train, train_opts);

    CLI::App *eval = app.add_subcommand("eval", "roll PD or a checkpoint over the scenario");
    add_common(eval, eval_opts);
    eval->add_option("--checkpoint", eval_opts.checkpoint, "agent checkpoint (RWCTL1)")
        ->check(CLI::ExistingFile);

    CLI::App *compare = app.add_subcommand("compare", "pd, td3 and td3-hd on identical scenarios");
    add_common(compare, compare_opts);
    int jobs = 1;
    compare->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

    CLI::App *plot = app.add_subcommand("plot", "render telemetry CSVs as SVG charts");
    std::vector<std::string> csvs;
    std::string plot_out;
    plot->add_option("csv", csvs, "telemetry files")->required()->check(CLI::ExistingFile);
    plot->add_option("--out", plot_out, "output directory (default: next to each CSV)");

    CLI::App *config_cmd = app.add_subcommand("config", "print the resolved configuration");
    Common config_opts;
    add_common(config_cmd, config_opts);

    CLI11_PARSE(app, argc, argv);

    const auto log = [](const std::string &msg) { std::cerr << msg << "\n"; };
    try {
        if (*train) {
            const RunConfig cfg = resolve(train_opts);
            if (cfg.agent.kind == AgentKind::Pd) throw ConfigError("train needs --agent td3 or td3-hd");
            for (std::uint64_t seed : cfg.seeds) {
                print_metrics(train_run(cfg, seed, seed_dir(cfg, cfg.agent.variant(), seed), log));
            }
        } else if (*eval) {
            const RunConfig cfg = resolve(eval_opts);
            std::optional<std::string> ckpt;
            if (!eval_opts.checkpoint.empty()) ckpt = eval_opts.checkpoint;
            for (std::uint64_t seed : cfg.seeds) {
                print_metrics(eval_run(cfg, seed, seed_dir(cfg, cfg.agent.variant(), seed), ckpt));
            }
        } else if (*compare) {
            const RunConfig cfg = resolve(compare_opts);
            for (const RunSummary &s : compare_runs(cfg, jobs, log)) print_metrics(s);
            std::cout << "metrics: " << (fs::path(cfg.output_dir) / "metrics.csv").string() << "\n";
        } else if (*plot) {
            for (const std::string &csv : csvs) {
                const fs::path in(csv);
                const fs::path dir = plot_out.empty() ? in.parent_path() : fs::path(plot_out);
                if (!dir.empty()) fs::create_directories(dir);
                // "agent/seed_N" reads better than the bare file name.
                const fs::path parent = fs::absolute(in).parent_path();
                const std::string title =
                    (parent.parent_path().filename() / parent.filename()).generic_string();
                std::string name = in.stem().string();
                if (!plot_out.empty()) {
                    // Several runs share one directory; keep their charts apart.
                    name = title + "_" + name;
                    std::replace(name.begin(), name.end(), '/', '_');
                }
                const fs::path target = dir / (name + ".svg");
                write_svg(render_svg(telemetry_charts(read_telemetry(csv), title)), target.string());
                std::cout << target.string() << "\n";
            }
        } else if (*config_cmd) {
            std::cout << to_yaml(resolve(config_opts));
        }
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CheckpointError &e) {
        std::cerr << "checkpoint error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
