#include "meanet/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "meanet/analysis.hpp"
#include "meanet/chain_io.hpp"
#include "meanet/errors.hpp"
#include "meanet/format.hpp"
#include "meanet/hierarchy.hpp"
#include "meanet/model.hpp"
#include "meanet/network.hpp"
#include "meanet/philox.hpp"
#include "meanet/sampler.hpp"
#include "meanet/spike_train.hpp"

namespace meanet {

using nlohmann::json;

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw data_error("cannot create directory " + dir + ": " + ec.message());
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw data_error("cannot open " + path + " for writing");
    f << j.dump(2) << '\n';
    if (!f.good()) throw data_error("failed writing " + path);
}

NetworkSample draw_prior_network(int N, const HyperParams& hp, std::uint64_t seed,
                                 std::uint64_t ctx) {
    NetworkSample net;
    net.adjacency.resize(N, N);
    net.weights.resize(N, N);
    net.bias.resize(N);
    RngStream rng(seed, StreamPurpose::generate, ctx);
    for (int n = 0; n < N; ++n) {
        for (int m = 0; m < N; ++m) {
            net.adjacency(m, n) = rng.uniform() < hp.rho ? 1.0 : 0.0;
            net.weights(m, n) = hp.mu_w + rng.normal() * std::sqrt(hp.s_w);
        }
    }
    for (int n = 0; n < N; ++n) net.bias(n) = hp.mu_b + rng.normal() * std::sqrt(hp.s_b);
    return net;
}

void write_summary_csvs(const std::string& dir, const ChainSummary& s) {
    write_matrix_csv(dir + "/edge_probability.csv", s.edge_probability);
    write_matrix_csv(dir + "/mean_weights.csv", s.mean_weights);
    write_matrix_csv(dir + "/weight_lo.csv", s.weight_lo);
    write_matrix_csv(dir + "/weight_hi.csv", s.weight_hi);
    write_matrix_csv(dir + "/bias_mean.csv", s.mean_bias);
}

SpikeTrain load_train(const RunConfig& rc) {
    if (!rc.has("train")) throw config_error("the 'train' input path is required");
    return read_spike_train_file(rc.get("train"));
}

// Full rows x cols grid with rows = largest divisor of N at most sqrt(N),
// so any electrode count yields a complete rectangle.
std::vector<ElectrodePosition> factor_grid(int N) {
    int rows = 1;
    for (int d = 1; static_cast<std::int64_t>(d) * d <= N; ++d)
        if (N % d == 0) rows = d;
    const int cols = N / rows;
    std::vector<ElectrodePosition> g;
    g.reserve(static_cast<std::size_t>(N));
    for (int e = 0; e < N; ++e) g.push_back({e / cols, e % cols});
    return g;
}

std::vector<int> parse_size_list(const std::string& text) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        if (item.empty()) throw config_error("bench_sizes: empty element in '" + text + "'");
        char* end = nullptr;
        const long v = std::strtol(item.c_str(), &end, 10);
        if (end != item.c_str() + item.size() || v < 2)
            throw config_error("bench_sizes: bad element '" + item + "'");
        out.push_back(static_cast<int>(v));
        pos = comma + 1;
    }
    if (out.empty()) throw config_error("bench_sizes is empty");
    return out;
}

int parse_band_count(const std::string& text, const std::string& what) {
    char* end = nullptr;
    const long v = std::strtol(text.c_str(), &end, 10);
    if (text.empty() || end != text.c_str() + text.size() || v < 1)
        throw config_error("grid_split: bad " + what + " '" + text + "'");
    return static_cast<int>(v);
}

json cosine_or_null(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.norm() == 0.0 || b.norm() == 0.0) return nullptr;
    return cosine_similarity(a, b);
}

double mean_of(const std::vector<double>& xs, std::size_t from) {
    double s = 0.0;
    for (std::size_t i = from; i < xs.size(); ++i) s += xs[i];
    return s / static_cast<double>(xs.size() - from);
}

} // namespace

void cmd_generate(const RunConfig& rc, std::ostream& log) {
    const std::string out = rc.get("out");
    ensure_dir(out);
    const HyperParams hp = rc.hyper_params();
    const std::uint64_t seed = rc.get_uint64("seed");
    const std::int64_t bins = rc.get_int64("bins");
    const double bin_ms = rc.get_double("bin_ms");

    NetworkSample truth;
    if (rc.has("truth_dir")) {
        truth = read_network(rc.get("truth_dir"));
    } else {
        const int N = rc.get_int("n");
        if (N < 1) throw config_error("n must be >= 1");
        truth = draw_prior_network(N, hp, seed, 0);
    }
    truth.validate();

    const SpikeTrain train = simulate_spike_train(truth, bins, hp, seed, bin_ms);
    write_network(out, truth);
    write_spike_train_file(out + "/train.mea", train);
    rc.write_manifest(out, "generate");

    log << "generated " << train.n_electrodes() << " electrodes x " << train.n_bins()
        << " bins, " << train.spike_count() << " spikes -> " << out << "\n";
}

void cmd_infer(const RunConfig& rc, std::ostream& log) {
    const std::string out = rc.get("out");
    ensure_dir(out);
    const SpikeTrain train = load_train(rc);
    const HyperParams hp = rc.hyper_params();
    const SamplerConfig cfg = rc.sampler_config();

    NetworkSample init;
    const NetworkSample* init_ptr = nullptr;
    if (rc.has("init_dir")) {
        init = read_network(rc.get("init_dir"));
        init_ptr = &init;
    }

    const PosteriorChain chain = run_gibbs(train, hp, cfg, init_ptr);
    write_chain(chain, out + "/chain");
    write_summary_csvs(out, summarize_chain(chain));
    rc.write_manifest(out, "infer");

    log << "inferred " << chain.samples.size() << " retained samples over "
        << cfg.n_iterations << " sweeps; log-likelihood " << fmt_double(chain.sweep_loglik.front())
        << " -> " << fmt_double(chain.sweep_loglik.back()) << "\n";
}

void cmd_split_infer(const RunConfig& rc, std::ostream& log) {
    const std::string out = rc.get("out");
    ensure_dir(out);
    const HyperParams hp = rc.hyper_params();
    const SamplerConfig cfg = rc.sampler_config();

    // Resolve the region plan before touching data so configuration mistakes
    // surface as configuration errors.
    if (rc.has("layout") && rc.has("grid_split"))
        throw config_error("give either a layout file or grid_split, not both");
    if (!rc.has("layout") && !rc.has("grid_split"))
        throw config_error("split-infer needs either a layout file or grid_split");

    int row_bands = 0, col_bands = 0;
    bool mean_threshold_mode = false;
    double mean_threshold = 0.5;
    if (rc.has("grid_split")) {
        const std::string& gs = rc.get("grid_split");
        const auto x = gs.find('x');
        if (x == std::string::npos || x == 0 || x + 1 >= gs.size())
            throw config_error("grid_split must look like 2x2, got '" + gs + "'");
        row_bands = parse_band_count(gs.substr(0, x), "row band count");
        col_bands = parse_band_count(gs.substr(x + 1), "column band count");
        const std::string& agg = rc.get("aggregation");
        if (agg != "any-spike") {
            const std::string prefix = "mean-threshold:";
            if (agg.rfind(prefix, 0) != 0)
                throw config_error("aggregation must be any-spike or mean-threshold:<value>");
            char* end = nullptr;
            mean_threshold = std::strtod(agg.c_str() + prefix.size(), &end);
            if (end == agg.c_str() + prefix.size() || *end != '\0')
                throw config_error("aggregation: bad mean-threshold value in '" + agg + "'");
            mean_threshold_mode = true;
        }
    }

    const SpikeTrain train = load_train(rc);
    RegionLayout layout;
    if (rc.has("layout")) {
        layout = read_layout(rc.get("layout"));
    } else {
        layout = plan_split_grid(train.geometry(), row_bands, col_bands, rc.get_int("overlap"));
        layout.mean_threshold_mode = mean_threshold_mode;
        layout.mean_threshold = mean_threshold;
    }
    layout.validate(train.n_electrodes());

    const int region_jobs = rc.get_int("region_jobs");
    if (region_jobs < 0) throw config_error("region_jobs must be >= 0");
    const HierarchicalResult res =
        infer_hierarchical(train, layout, hp, cfg, static_cast<unsigned>(region_jobs));

    write_layout(layout, out + "/layout.json");
    for (std::size_t r = 0; r < res.region_chains.size(); ++r) {
        const std::string rdir = out + "/region_" + std::to_string(r);
        ensure_dir(rdir);
        write_chain(res.region_chains[r], rdir);
        write_summary_csvs(rdir, summarize_chain(res.region_chains[r]));
    }
    ensure_dir(out + "/regional");
    write_chain(res.regional_chain, out + "/regional");
    write_summary_csvs(out + "/regional", summarize_chain(res.regional_chain));

    const MergedSummary merged =
        merge_region_posteriors(res.region_chains, layout, train.n_electrodes());
    ensure_dir(out + "/merged");
    write_matrix_csv(out + "/merged/edge_probability.csv", merged.edge_probability);
    write_matrix_csv(out + "/merged/mean_weights.csv", merged.mean_weights);
    write_matrix_csv(out + "/merged/estimated.csv", merged.estimated);
    rc.write_manifest(out, "split-infer");

    log << "split-inferred " << res.region_chains.size() << " regions";
    for (const auto& region : layout.regions) log << " " << region.size();
    log << " electrodes; regional level over " << res.regional_chain.n_electrodes
        << " super-electrodes\n";
}

void cmd_metrics(const RunConfig& rc, std::ostream& log) {
    const std::string out = rc.get("out");
    ensure_dir(out);
    if (!rc.has("chain")) throw config_error("the 'chain' input directory is required");
    const PosteriorChain chain = read_chain(rc.get("chain"));
    const double theta_w = rc.get_double("theta_w");
    const double theta_a = rc.get_double("theta_a");
    const int threads = rc.get_int("threads");

    const std::vector<GraphMetrics> dist = posterior_metric_distribution(
        chain, theta_w, theta_a, threads < 0 ? 0u : static_cast<unsigned>(threads));
    write_metrics_csv_file(out + "/metrics.csv", dist);

    const auto field_summary = [&](auto pick) {
        std::vector<double> xs(dist.size());
        for (std::size_t i = 0; i < dist.size(); ++i) xs[i] = pick(dist[i]);
        return json{{"mean", mean_of(xs, 0)},
                    {"q025", empirical_quantile(xs, 0.025)},
                    {"q975", empirical_quantile(xs, 0.975)}};
    };
    json j;
    j["theta_w"] = theta_w;
    j["theta_a"] = theta_a;
    j["n_samples"] = dist.size();
    j["n_connections"] =
        field_summary([](const GraphMetrics& g) { return static_cast<double>(g.n_connections); });
    j["avg_clustering"] = field_summary([](const GraphMetrics& g) { return g.avg_clustering; });
    j["avg_path_length"] = field_summary([](const GraphMetrics& g) { return g.avg_path_length; });
    j["reachable_fraction"] =
        field_summary([](const GraphMetrics& g) { return g.reachable_fraction; });
    write_json_file(out + "/metrics_summary.json", j);
    rc.write_manifest(out, "metrics");

    log << "metrics over " << dist.size() << " samples: mean connections "
        << fmt_double(j["n_connections"]["mean"].get<double>()) << ", mean clustering "
        << fmt_double(j["avg_clustering"]["mean"].get<double>()) << "\n";
}

void cmd_compare(const RunConfig& rc, std::ostream& log) {
    const std::string out = rc.get("out");
    ensure_dir(out);
    if (!rc.has("est")) throw config_error("the 'est' summary directory is required");
    if (!rc.has("truth")) throw config_error("the 'truth' network directory is required");

    const Eigen::MatrixXd edge_prob = read_matrix_csv(rc.get("est") + "/edge_probability.csv");
    const Eigen::MatrixXd mean_w = read_matrix_csv(rc.get("est") + "/mean_weights.csv");
    const NetworkSample truth = read_network(rc.get("truth"));
    if (edge_prob.rows() != truth.adjacency.rows())
        throw data_error("estimate and reference network sizes differ");

    const double theta_w = rc.get_double("theta_w");
    const double theta_a = rc.get_double("theta_a");

    json j;
    j["theta_w"] = theta_w;
    j["theta_a"] = theta_a;
    j["cosine_adjacency"] = cosine_or_null(edge_prob, truth.adjacency);
    j["cosine_weights"] = cosine_or_null(mean_w, truth.effective_weights());

    std::vector<std::pair<int, int>> reference;
    const int N = truth.n_electrodes();
    for (int n = 0; n < N; ++n)
        for (int m = 0; m < N; ++m)
            if (truth.adjacency(m, n) != 0.0) reference.emplace_back(m, n);

    if (reference.empty()) {
        j["detection"] = nullptr;
    } else {
        const Eigen::MatrixXd g = threshold_network(mean_w, edge_prob, theta_w, theta_a);
        const DetectionReport rep = compare_to_reference(g, reference);
        json missed = json::array();
        for (const auto& [m, n] : rep.missed_edges) missed.push_back(json::array({m, n}));
        j["detection"] = json{{"fraction_detected", rep.fraction_detected},
                              {"missed_edges", std::move(missed)},
                              {"extra_edges", rep.extra_edges},
                              {"n_reference", reference.size()}};
    }
    write_json_file(out + "/compare.json", j);
    rc.write_manifest(out, "compare");

    log << "compare: cosine(A)="
        << (j["cosine_adjacency"].is_null() ? std::string("n/a")
                                            : fmt_double(j["cosine_adjacency"].get<double>()))
        << " cosine(W)="
        << (j["cosine_weights"].is_null() ? std::string("n/a")
                                          : fmt_double(j["cosine_weights"].get<double>()))
        << "\n";
}

void cmd_bench(const RunConfig& rc, std::ostream& log) {
    const std::string out = rc.get("out");
    ensure_dir(out);
    const HyperParams hp = rc.hyper_params();
    const std::uint64_t seed = rc.get_uint64("seed");
    const std::vector<int> sizes = parse_size_list(rc.get("bench_sizes"));
    const std::int64_t bins = rc.get_int64("bench_bins");
    const int iters = rc.get_int("bench_iterations");
    const int warmup = rc.get_int("bench_warmup");
    if (warmup < 0 || warmup >= iters)
        throw config_error("bench_warmup must lie in [0, bench_iterations)");

    SamplerConfig cfg = rc.sampler_config();
    cfg.n_iterations = iters;
    cfg.burn_in = iters - 1;
    cfg.thin = 1;

    // Fixed workload: density-rho truth, +-1/sqrt(N) weights, bias -1.
    const auto bench_truth = [&](int N) {
        NetworkSample truth = draw_prior_network(N, hp, seed, static_cast<std::uint64_t>(N));
        const double scale = 1.0 / std::sqrt(static_cast<double>(N));
        RngStream rng(seed, StreamPurpose::generic, static_cast<std::uint64_t>(N));
        for (int n = 0; n < N; ++n)
            for (int m = 0; m < N; ++m)
                truth.weights(m, n) = rng.uniform() < 0.5 ? scale : -scale;
        truth.bias.setConstant(-1.0);
        return truth;
    };

    std::vector<double> mean_sweep;
    SpikeTrain largest_train;
    log << "n,bins,iterations,warmup,mean_sweep_seconds\n";
    std::ofstream csv(out + "/bench.csv", std::ios::binary);
    if (!csv) throw data_error("cannot open " + out + "/bench.csv for writing");
    csv << "n,bins,iterations,warmup,mean_sweep_seconds\n";
    for (int N : sizes) {
        const SpikeTrain train =
            simulate_spike_train(bench_truth(N), bins, hp, seed, 1.0, factor_grid(N));
        const PosteriorChain chain = run_gibbs(train, hp, cfg);
        mean_sweep.push_back(mean_of(chain.sweep_seconds, static_cast<std::size_t>(warmup)));
        const std::string row = std::to_string(N) + "," + std::to_string(bins) + "," +
                                std::to_string(iters) + "," + std::to_string(warmup) + "," +
                                fmt_double(mean_sweep.back());
        csv << row << '\n';
        log << row << "\n";
        if (N == *std::max_element(sizes.begin(), sizes.end())) largest_train = train;
    }
    if (!csv.good()) throw data_error("failed writing " + out + "/bench.csv");

    // least-squares slope of log t against log N
    double slope = 0.0;
    {
        const std::size_t S = sizes.size();
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < S; ++i) {
            mx += std::log(static_cast<double>(sizes[i]));
            my += std::log(mean_sweep[i]);
        }
        mx /= static_cast<double>(S);
        my /= static_cast<double>(S);
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < S; ++i) {
            const double dx = std::log(static_cast<double>(sizes[i])) - mx;
            sxy += dx * (std::log(mean_sweep[i]) - my);
            sxx += dx * dx;
        }
        if (sxx > 0) slope = sxy / sxx;
    }

    json j;
    j["sizes"] = sizes;
    j["bins"] = bins;
    j["iterations"] = iters;
    j["warmup"] = warmup;
    j["mean_sweep_seconds"] = mean_sweep;
    j["slope"] = slope;

    if (rc.get_bool("bench_split_check")) {
        const int M = *std::max_element(sizes.begin(), sizes.end());
        const int k = rc.get_int("bench_split_regions");
        const RegionLayout layout = plan_split(largest_train.geometry(), k, 0);
        std::vector<double> region_means;
        for (const auto& region : layout.regions) {
            const PosteriorChain chain =
                run_gibbs(largest_train.select_electrodes(region), hp, cfg);
            region_means.push_back(
                mean_of(chain.sweep_seconds, static_cast<std::size_t>(warmup)));
        }
        const double region_mean = mean_of(region_means, 0);
        const double full = mean_sweep.back();
        const double ratio = region_mean / (full / (static_cast<double>(k) * k));
        j["split_check"] = json{{"regions", k},
                                {"full_n", M},
                                {"region_mean_sweep_seconds", region_mean},
                                {"full_mean_sweep_seconds", full},
                                {"ratio_vs_inverse_k_squared", ratio}};
        log << "split check: k=" << k << " region sweep " << fmt_double(region_mean)
            << "s vs full/" << k * k << " = " << fmt_double(full / (k * k)) << "s (ratio "
            << fmt_double(ratio) << ")\n";
    } else {
        j["split_check"] = nullptr;
    }

    write_json_file(out + "/bench_report.json", j);
    rc.write_manifest(out, "bench");
    log << "fitted log-log slope: " << fmt_double(slope) << "\n";
}

} // namespace meanet
