#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "meanet/commands.hpp"
#include "meanet/errors.hpp"

namespace {

// Every flag is captured as raw text and merged through RunConfig so that
// precedence and provenance live in one place.
struct CommandArgs {
    CLI::App* cmd = nullptr;
    std::string config_path;
    std::map<std::string, std::string> raw;
    std::vector<std::pair<std::string, CLI::Option*>> tracked;

    void add(const std::string& flag, const std::string& key, const std::string& desc) {
        CLI::Option* opt = cmd->add_option(flag, raw[key], desc);
        tracked.emplace_back(key, opt);
    }

    std::vector<std::pair<std::string, std::string>> overrides() const {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& [key, opt] : tracked) {
            if (opt->count() > 0) out.emplace_back(key, raw.at(key));
        }
        return out;
    }
};

void add_common(CommandArgs& c) {
    c.cmd->add_option("--config", c.config_path, "flat key = value config file");
    c.add("--seed", "seed", "random seed");
    c.add("--out", "out", "output directory");
    c.add("--threads", "threads", "worker threads (0 = hardware)");
}

void add_prior(CommandArgs& c) {
    c.add("--rho", "rho", "edge inclusion prior");
    c.add("--tau-ms", "tau_ms", "history decay time constant, ms");
    c.add("--window-bins", "window_bins", "history window length, bins");
    c.add("--mu-w", "mu_w", "weight prior mean");
    c.add("--s-w", "s_w", "weight prior variance");
    c.add("--mu-b", "mu_b", "bias prior mean");
    c.add("--s-b", "s_b", "bias prior variance");
}

void add_sampler(CommandArgs& c) {
    c.add("--iterations", "iterations", "Gibbs sweeps");
    c.add("--burn-in", "burn_in", "sweeps discarded before retention");
    c.add("--thin", "thin", "retention stride");
    c.add("--resample-hypers", "resample_hypers", "true/false: resample NIW hyperparameters");
    c.add("--allow-self-edges", "allow_self_edges", "true/false");
    c.add("--random-scan", "random_scan", "true/false: random edge scan order");
    c.add("--pg-method", "pg_method", "devroye or truncated");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spike-train network inference over multi-electrode array recordings"};
    app.set_version_flag("--version", "mea_netinfer 1.0.0");
    app.require_subcommand(1);

    CommandArgs generate{app.add_subcommand("generate", "simulate a train from a network")};
    add_common(generate);
    add_prior(generate);
    generate.add("--n", "n", "electrode count for prior-drawn truth");
    generate.add("--bins", "bins", "bins to simulate");
    generate.add("--bin-ms", "bin_ms", "bin width, ms");
    generate.add("--truth-dir", "truth_dir", "read the truth network here instead of drawing");

    CommandArgs infer{app.add_subcommand("infer", "posterior inference on one train")};
    add_common(infer);
    add_prior(infer);
    add_sampler(infer);
    infer.add("--train", "train", "input spike train file");
    infer.add("--init-dir", "init_dir", "optional initial network directory");

    CommandArgs split{app.add_subcommand("split-infer", "two-level regional inference")};
    add_common(split);
    add_prior(split);
    add_sampler(split);
    split.add("--train", "train", "input spike train file");
    split.add("--layout", "layout", "region layout JSON file");
    split.add("--grid-split", "grid_split", "row-bands x col-bands, e.g. 2x2");
    split.add("--overlap", "overlap", "shared electrodes per adjacent region pair (even)");
    split.add("--region-jobs", "region_jobs", "concurrent region runs");
    split.add("--aggregation", "aggregation", "any-spike or mean-threshold:<v>");

    CommandArgs metrics{app.add_subcommand("metrics", "graph metrics over a posterior chain")};
    add_common(metrics);
    metrics.add("--chain", "chain", "chain directory from infer");
    metrics.add("--theta-w", "theta_w", "weight magnitude threshold");
    metrics.add("--theta-a", "theta_a", "inclusion probability threshold");

    CommandArgs compare{app.add_subcommand("compare", "summary vs reference network")};
    add_common(compare);
    compare.add("--est", "est", "directory with summary CSVs");
    compare.add("--truth", "truth", "directory with reference network CSVs");
    compare.add("--theta-w", "theta_w", "weight magnitude threshold");
    compare.add("--theta-a", "theta_a", "inclusion probability threshold");

    CommandArgs bench{app.add_subcommand("bench", "sweep-time scaling benchmark")};
    add_common(bench);
    add_prior(bench);
    bench.add("--sizes", "bench_sizes", "comma-separated electrode counts");
    bench.add("--bench-bins", "bench_bins", "bins per benchmark train");
    bench.add("--bench-iterations", "bench_iterations", "sweeps per size");
    bench.add("--bench-warmup", "bench_warmup", "sweeps excluded from timing");
    bench.add("--split-check", "bench_split_check", "true/false: measure k-region speedup");
    bench.add("--split-regions", "bench_split_regions", "regions for the split check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::vector<std::pair<CommandArgs*, void (*)(const meanet::RunConfig&, std::ostream&)>>
        dispatch = {{&generate, meanet::cmd_generate}, {&infer, meanet::cmd_infer},
                    {&split, meanet::cmd_split_infer}, {&metrics, meanet::cmd_metrics},
                    {&compare, meanet::cmd_compare},   {&bench, meanet::cmd_bench}};
    try {
        for (const auto& [args, fn] : dispatch) {
            if (args->cmd->parsed()) {
                const meanet::RunConfig rc =
                    meanet::RunConfig::make(args->config_path, args->overrides());
                fn(rc, std::cout);
                return 0;
            }
        }
        std::cerr << "no command selected\n";
        return 2;
    } catch (const meanet::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const meanet::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const meanet::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
