#include "meanet/config.hpp"

#include <cerrno>
#include <climits>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "meanet/errors.hpp"

namespace meanet {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open config file " + path);
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error(path + ":" + std::to_string(lineno) +
                               ": expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw config_error(path + ":" + std::to_string(lineno) + ": empty key");
        if (out.count(key))
            throw config_error(path + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                               "'");
        out[key] = value;
    }
    return out;
}

const std::map<std::string, std::string>& RunConfig::defaults() {
    static const std::map<std::string, std::string> d = {
        // common
        {"seed", "0"},
        {"out", "out"},
        {"threads", "0"},
        // data shape
        {"n", "10"},
        {"bins", "60000"},
        {"bin_ms", "1"},
        // model prior
        {"rho", "0.5"},
        {"tau_ms", "15"},
        {"window_bins", "100"},
        {"mu_w", "1"},
        {"s_w", "1"},
        {"mu_b", "0"},
        {"s_b", "1"},
        {"niw_mean", "0"},
        {"niw_kappa", "1"},
        {"niw_scale", "1"},
        {"niw_dof", "3"},
        // sampler
        {"iterations", "1000"},
        {"burn_in", "500"},
        {"thin", "1"},
        {"resample_hypers", "false"},
        {"allow_self_edges", "true"},
        {"random_scan", "false"},
        {"pg_method", "devroye"},
        // generate
        {"truth_dir", ""},
        // infer
        {"train", ""},
        {"init_dir", ""},
        // split-infer
        {"layout", ""},
        {"grid_split", ""},
        {"overlap", "0"},
        {"region_jobs", "1"},
        {"aggregation", "any-spike"},
        // metrics / compare
        {"chain", ""},
        {"theta_w", "0.05"},
        {"theta_a", "0.5"},
        {"est", ""},
        {"truth", ""},
        // bench
        {"bench_sizes", "16,32,64,128"},
        {"bench_bins", "15000"},
        {"bench_iterations", "12"},
        {"bench_warmup", "2"},
        {"bench_split_check", "true"},
        {"bench_split_regions", "4"},
    };
    return d;
}

RunConfig RunConfig::make(const std::string& config_path,
                          const std::vector<std::pair<std::string, std::string>>& flag_overrides) {
    RunConfig rc;
    rc.values_ = defaults();
    for (const auto& [k, v] : rc.values_) {
        (void)v;
        rc.provenance_[k] = "default";
    }
    if (!config_path.empty()) {
        for (const auto& [k, v] : parse_config_file(config_path)) {
            if (!rc.values_.count(k))
                throw config_error("unknown config key '" + k + "' in " + config_path);
            rc.values_[k] = v;
            rc.provenance_[k] = "file";
        }
    }
    for (const auto& [k, v] : flag_overrides) {
        if (!rc.values_.count(k)) throw config_error("unknown config key '" + k + "'");
        rc.values_[k] = v;
        rc.provenance_[k] = "flag";
    }
    return rc;
}

const std::string& RunConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw config_error("unknown config key '" + key + "'");
    return it->second;
}

bool RunConfig::has(const std::string& key) const { return !get(key).empty(); }

double RunConfig::get_double(const std::string& key) const {
    const std::string& v = get(key);
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
        throw config_error("key '" + key + "': '" + v + "' is not a number");
    return x;
}

std::int64_t RunConfig::get_int64(const std::string& key) const {
    const std::string& v = get(key);
    errno = 0;
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
        throw config_error("key '" + key + "': '" + v + "' is not an integer");
    return x;
}

int RunConfig::get_int(const std::string& key) const {
    const std::int64_t x = get_int64(key);
    if (x < INT_MIN || x > INT_MAX)
        throw config_error("key '" + key + "': value out of range");
    return static_cast<int>(x);
}

std::uint64_t RunConfig::get_uint64(const std::string& key) const {
    const std::string& v = get(key);
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (v.empty() || v[0] == '-' || end != v.c_str() + v.size() || errno == ERANGE)
        throw config_error("key '" + key + "': '" + v + "' is not a non-negative integer");
    return x;
}

bool RunConfig::get_bool(const std::string& key) const {
    const std::string& v = get(key);
    if (v == "true") return true;
    if (v == "false") return false;
    throw config_error("key '" + key + "': expected true or false, got '" + v + "'");
}

HyperParams RunConfig::hyper_params() const {
    HyperParams hp;
    hp.rho = get_double("rho");
    hp.tau_ms = get_double("tau_ms");
    hp.window_bins = get_int("window_bins");
    hp.mu_w = get_double("mu_w");
    hp.s_w = get_double("s_w");
    hp.mu_b = get_double("mu_b");
    hp.s_b = get_double("s_b");
    hp.niw_mean = get_double("niw_mean");
    hp.niw_kappa = get_double("niw_kappa");
    hp.niw_scale = get_double("niw_scale");
    hp.niw_dof = get_double("niw_dof");
    hp.validate();
    return hp;
}

SamplerConfig RunConfig::sampler_config() const {
    SamplerConfig cfg;
    cfg.n_iterations = get_int("iterations");
    cfg.burn_in = get_int("burn_in");
    cfg.thin = get_int("thin");
    cfg.seed = get_uint64("seed");
    cfg.resample_hypers = get_bool("resample_hypers");
    cfg.allow_self_edges = get_bool("allow_self_edges");
    cfg.random_scan = get_bool("random_scan");
    const int threads = get_int("threads");
    if (threads < 0) throw config_error("threads must be >= 0");
    cfg.parallel_width = static_cast<unsigned>(threads);
    const std::string& m = get("pg_method");
    if (m == "devroye") {
        cfg.pg_method = PgMethod::devroye;
    } else if (m == "truncated") {
        cfg.pg_method = PgMethod::truncated;
    } else {
        throw config_error("pg_method must be devroye or truncated, got '" + m + "'");
    }
    cfg.validate();
    return cfg;
}

void RunConfig::write_manifest(const std::string& dir, const std::string& command) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw data_error("cannot create directory " + dir + ": " + ec.message());

    nlohmann::json j;
    j["command"] = command;
    j["config"] = values_;
    j["provenance"] = provenance_;
    {
        std::ofstream f(dir + "/manifest.json", std::ios::binary);
        if (!f) throw data_error("cannot open " + dir + "/manifest.json for writing");
        f << j.dump(2) << '\n';
        if (!f.good()) throw data_error("failed writing " + dir + "/manifest.json");
    }
    {
        std::ofstream f(dir + "/replay.cfg", std::ios::binary);
        if (!f) throw data_error("cannot open " + dir + "/replay.cfg for writing");
        f << "# replay with: mea_netinfer " << command << " --config replay.cfg\n";
        for (const auto& [k, v] : values_) f << k << " = " << v << '\n';
        if (!f.good()) throw data_error("failed writing " + dir + "/replay.cfg");
    }
}

} // namespace meanet
