#include "meanet/chain_io.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "meanet/errors.hpp"

namespace meanet {

using nlohmann::json;

namespace {

std::string pg_method_name(PgMethod m) {
    return m == PgMethod::devroye ? "devroye" : "truncated";
}

PgMethod pg_method_from(const std::string& s) {
    if (s == "devroye") return PgMethod::devroye;
    if (s == "truncated") return PgMethod::truncated;
    throw data_error("unknown pg_method '" + s + "' in chain metadata");
}

json hyper_to_json(const HyperParams& hp) {
    return json{{"rho", hp.rho},
                {"tau_ms", hp.tau_ms},
                {"window_bins", hp.window_bins},
                {"niw_mean", hp.niw_mean},
                {"niw_kappa", hp.niw_kappa},
                {"niw_scale", hp.niw_scale},
                {"niw_dof", hp.niw_dof},
                {"mu_w", hp.mu_w},
                {"s_w", hp.s_w},
                {"mu_b", hp.mu_b},
                {"s_b", hp.s_b}};
}

HyperParams hyper_from_json(const json& j) {
    HyperParams hp;
    hp.rho = j.at("rho").get<double>();
    hp.tau_ms = j.at("tau_ms").get<double>();
    hp.window_bins = j.at("window_bins").get<int>();
    hp.niw_mean = j.at("niw_mean").get<double>();
    hp.niw_kappa = j.at("niw_kappa").get<double>();
    hp.niw_scale = j.at("niw_scale").get<double>();
    hp.niw_dof = j.at("niw_dof").get<double>();
    hp.mu_w = j.at("mu_w").get<double>();
    hp.s_w = j.at("s_w").get<double>();
    hp.mu_b = j.at("mu_b").get<double>();
    hp.s_b = j.at("s_b").get<double>();
    return hp;
}

json sampler_to_json(const SamplerConfig& cfg) {
    return json{{"n_iterations", cfg.n_iterations},
                {"burn_in", cfg.burn_in},
                {"thin", cfg.thin},
                {"seed", cfg.seed},
                {"resample_hypers", cfg.resample_hypers},
                {"allow_self_edges", cfg.allow_self_edges},
                {"random_scan", cfg.random_scan},
                {"parallel_width", cfg.parallel_width},
                {"pg_method", pg_method_name(cfg.pg_method)}};
}

SamplerConfig sampler_from_json(const json& j) {
    SamplerConfig cfg;
    cfg.n_iterations = j.at("n_iterations").get<int>();
    cfg.burn_in = j.at("burn_in").get<int>();
    cfg.thin = j.at("thin").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.resample_hypers = j.at("resample_hypers").get<bool>();
    cfg.allow_self_edges = j.at("allow_self_edges").get<bool>();
    cfg.random_scan = j.at("random_scan").get<bool>();
    cfg.parallel_width = j.at("parallel_width").get<unsigned>();
    cfg.pg_method = pg_method_from(j.at("pg_method").get<std::string>());
    return cfg;
}

} // namespace

void write_chain(const PosteriorChain& chain, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw data_error("cannot create directory " + dir + ": " + ec.message());

    {
        std::ofstream f(dir + "/chain.jsonl", std::ios::binary);
        if (!f) throw data_error("cannot open " + dir + "/chain.jsonl for writing");
        const int N = chain.n_electrodes;
        for (std::size_t i = 0; i < chain.samples.size(); ++i) {
            const NetworkSample& s = chain.samples[i];
            json a = json::array();
            json w = json::array();
            for (int n = 0; n < N; ++n) {
                for (int m = 0; m < N; ++m) {
                    if (s.adjacency(m, n) == 1.0) {
                        a.push_back(json::array({m, n}));
                        w.push_back(json::array({m, n, s.weights(m, n)}));
                    }
                }
            }
            json b = json::array();
            for (int n = 0; n < N; ++n) b.push_back(s.bias(n));
            json line;
            line["iter"] = chain.sample_iterations[i];
            line["loglik"] = chain.loglik_trace[i];
            line["A"] = std::move(a);
            line["W"] = std::move(w);
            line["b"] = std::move(b);
            f << line.dump() << '\n';
        }
        if (!f.good()) throw data_error("failed writing " + dir + "/chain.jsonl");
    }

    json meta;
    meta["format_version"] = 1;
    meta["n_electrodes"] = chain.n_electrodes;
    meta["electrode_indices"] = chain.electrode_indices;
    meta["electrode_ids"] = chain.electrode_ids;
    meta["bin_ms"] = chain.bin_ms;
    meta["hyper"] = hyper_to_json(chain.hyper);
    meta["sampler"] = sampler_to_json(chain.config);
    meta["sweep_loglik"] = chain.sweep_loglik;
    std::ofstream f(dir + "/chain_meta.json", std::ios::binary);
    if (!f) throw data_error("cannot open " + dir + "/chain_meta.json for writing");
    f << meta.dump(2) << '\n';
    if (!f.good()) throw data_error("failed writing " + dir + "/chain_meta.json");
}

PosteriorChain read_chain(const std::string& dir) {
    PosteriorChain chain;
    {
        std::ifstream f(dir + "/chain_meta.json", std::ios::binary);
        if (!f) throw data_error("cannot open " + dir + "/chain_meta.json");
        json meta;
        try {
            f >> meta;
            chain.n_electrodes = meta.at("n_electrodes").get<int>();
            chain.electrode_indices = meta.at("electrode_indices").get<std::vector<int>>();
            chain.electrode_ids = meta.at("electrode_ids").get<std::vector<std::string>>();
            chain.bin_ms = meta.at("bin_ms").get<double>();
            chain.hyper = hyper_from_json(meta.at("hyper"));
            chain.config = sampler_from_json(meta.at("sampler"));
            chain.sweep_loglik = meta.at("sweep_loglik").get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw data_error(dir + "/chain_meta.json: " + e.what());
        }
    }

    std::ifstream f(dir + "/chain.jsonl", std::ios::binary);
    if (!f) throw data_error("cannot open " + dir + "/chain.jsonl");
    const int N = chain.n_electrodes;
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            NetworkSample s;
            s.adjacency = Eigen::MatrixXd::Zero(N, N);
            s.weights = Eigen::MatrixXd::Zero(N, N);
            s.bias = Eigen::VectorXd::Zero(N);
            for (const auto& e : j.at("A")) {
                const int m = e.at(0).get<int>();
                const int n = e.at(1).get<int>();
                if (m < 0 || m >= N || n < 0 || n >= N)
                    throw data_error("edge index out of range");
                s.adjacency(m, n) = 1.0;
            }
            for (const auto& e : j.at("W")) {
                const int m = e.at(0).get<int>();
                const int n = e.at(1).get<int>();
                if (m < 0 || m >= N || n < 0 || n >= N)
                    throw data_error("edge index out of range");
                s.weights(m, n) = e.at(2).get<double>();
            }
            const auto& b = j.at("b");
            if (static_cast<int>(b.size()) != N) throw data_error("bias length mismatch");
            for (int n = 0; n < N; ++n) s.bias(n) = b.at(n).get<double>();
            chain.sample_iterations.push_back(j.at("iter").get<int>());
            chain.loglik_trace.push_back(j.at("loglik").get<double>());
            chain.samples.push_back(std::move(s));
        } catch (const json::exception& e) {
            throw data_error(dir + "/chain.jsonl line " + std::to_string(lineno) + ": " +
                             e.what());
        } catch (const data_error& e) {
            throw data_error(dir + "/chain.jsonl line " + std::to_string(lineno) + ": " +
                             e.what());
        }
    }
    return chain;
}

} // namespace meanet
