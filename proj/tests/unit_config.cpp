#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "meanet/chain_io.hpp"
#include "meanet/commands.hpp"
#include "meanet/config.hpp"
#include "meanet/errors.hpp"
#include "meanet/network.hpp"
#include "meanet/spike_train.hpp"

#ifndef MEA_CLI_PATH
#define MEA_CLI_PATH "mea_netinfer"
#endif

using namespace meanet;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / "meanet_unit_cfg" / name;
    std::error_code ec;
    fs::remove_all(d, ec);
    fs::create_directories(d);
    return d.string();
}

std::string write_file(const std::string& dir, const std::string& name,
                       const std::string& text) {
    const std::string path = dir + "/" + name;
    std::ofstream f(path);
    f << text;
    return path;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(MEA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("defaults, file values, and flags merge with the right precedence") {
    const std::string dir = temp_dir("prec");
    const std::string cfg = write_file(dir, "run.cfg",
                                       "# comment\n"
                                       "seed = 5\n"
                                       "rho = 0.7\n"
                                       "\n"
                                       "iterations = 50\n");
    const RunConfig rc = RunConfig::make(cfg, {{"rho", "0.9"}, {"out", dir}});
    CHECK(rc.get_uint64("seed") == 5);             // from file
    CHECK(rc.get_double("rho") == 0.9);            // flag beats file
    CHECK(rc.get_int("iterations") == 50);         // from file
    CHECK(rc.get_int("burn_in") == 500);           // default survives
    CHECK(rc.provenance().at("seed") == "file");
    CHECK(rc.provenance().at("rho") == "flag");
    CHECK(rc.provenance().at("burn_in") == "default");
}

TEST_CASE("unknown keys are rejected from both sources") {
    const std::string dir = temp_dir("unknown");
    const std::string cfg = write_file(dir, "bad.cfg", "sigma = 3\n");
    CHECK_THROWS_AS(RunConfig::make(cfg, {}), config_error);
    CHECK_THROWS_AS(RunConfig::make("", {{"sigma", "3"}}), config_error);
    CHECK_THROWS_AS(RunConfig::make(dir + "/absent.cfg", {}), config_error);
}

TEST_CASE("config files reject duplicate keys and garbage lines") {
    const std::string dir = temp_dir("parse");
    CHECK_THROWS_AS(parse_config_file(write_file(dir, "a.cfg", "seed = 1\nseed = 2\n")),
                    config_error);
    CHECK_THROWS_AS(parse_config_file(write_file(dir, "b.cfg", "seed\n")), config_error);
    const auto kv = parse_config_file(
        write_file(dir, "c.cfg", "  # note \n\n seed =  9 \n train = x.mea\n"));
    CHECK(kv.at("seed") == "9");
    CHECK(kv.at("train") == "x.mea");
}

TEST_CASE("typed getters validate their input") {
    const RunConfig rc = RunConfig::make("", {{"seed", "12"}, {"rho", "0.25"}});
    CHECK(rc.get_uint64("seed") == 12);
    CHECK(rc.get_double("rho") == 0.25);
    CHECK(rc.get_bool("resample_hypers") == false);
    CHECK_THROWS_AS(RunConfig::make("", {{"iterations", "abc"}}).get_int("iterations"),
                    config_error);
    CHECK_THROWS_AS(RunConfig::make("", {{"iterations", "12.5"}}).get_int("iterations"),
                    config_error);
    CHECK_THROWS_AS(RunConfig::make("", {{"resample_hypers", "yes"}}).get_bool("resample_hypers"),
                    config_error);
    CHECK_THROWS_AS(RunConfig::make("", {{"rho", "1e999"}}).get_double("rho"), config_error);
}

TEST_CASE("hyper and sampler views reflect the merged values") {
    const RunConfig rc = RunConfig::make(
        "", {{"rho", "0.3"}, {"tau_ms", "20"}, {"mu_w", "0.5"}, {"iterations", "70"},
             {"burn_in", "disable"}});
    // bad burn_in string surfaces when the view is built
    CHECK_THROWS_AS(rc.sampler_config(), config_error);
    const RunConfig ok = RunConfig::make(
        "", {{"rho", "0.3"}, {"tau_ms", "20"}, {"mu_w", "0.5"}, {"iterations", "70"},
             {"burn_in", "30"}, {"threads", "3"}, {"pg_method", "truncated"}});
    const HyperParams hp = ok.hyper_params();
    CHECK(hp.rho == 0.3);
    CHECK(hp.tau_ms == 20.0);
    CHECK(hp.mu_w == 0.5);
    const SamplerConfig sc = ok.sampler_config();
    CHECK(sc.n_iterations == 70);
    CHECK(sc.parallel_width == 3);
    CHECK(sc.pg_method == PgMethod::truncated);
    CHECK_THROWS_AS(RunConfig::make("", {{"pg_method", "magic"}}).sampler_config(),
                    config_error);
}

TEST_CASE("manifest and replay files reproduce the configuration") {
    const std::string dir = temp_dir("manifest");
    const RunConfig rc = RunConfig::make("", {{"seed", "21"}, {"out", dir}, {"n", "6"}});
    rc.write_manifest(dir, "generate");

    std::ifstream mf(dir + "/manifest.json");
    REQUIRE(mf.good());
    nlohmann::json manifest;
    mf >> manifest;
    CHECK(manifest.at("command") == "generate");
    CHECK(manifest.at("config").at("seed") == "21");
    CHECK(manifest.at("provenance").at("seed") == "flag");
    CHECK(manifest.at("provenance").at("bins") == "default");

    const auto replay = parse_config_file(dir + "/replay.cfg");
    const RunConfig back = RunConfig::make(dir + "/replay.cfg", {});
    CHECK(back.values() == rc.values());
    CHECK(replay.at("n") == "6");
}

TEST_CASE("generate writes a readable truth, train, and manifest") {
    const std::string dir = temp_dir("gen");
    const RunConfig rc = RunConfig::make(
        "", {{"n", "5"}, {"bins", "600"}, {"seed", "3"}, {"mu_w", "0"}, {"mu_b", "-1"},
             {"out", dir}});
    std::ostringstream log;
    cmd_generate(rc, log);
    const NetworkSample net = read_network(dir);
    CHECK(net.n_electrodes() == 5);
    CHECK_NOTHROW(net.validate());
    const SpikeTrain train = read_spike_train_file(dir + "/train.mea");
    CHECK(train.n_electrodes() == 5);
    CHECK(train.n_bins() == 600);
    CHECK(fs::exists(dir + "/manifest.json"));
    CHECK(fs::exists(dir + "/replay.cfg"));

    // a provided truth short-circuits the prior draw
    const std::string dir2 = temp_dir("gen2");
    const RunConfig rc2 = RunConfig::make(
        "", {{"n", "5"}, {"bins", "600"}, {"seed", "4"}, {"truth_dir", dir}, {"out", dir2}});
    std::ostringstream log2;
    cmd_generate(rc2, log2);
    const NetworkSample again = read_network(dir2);
    CHECK(again.adjacency == net.adjacency);
    CHECK(again.weights == net.weights);
    CHECK(again.bias == net.bias);
}

TEST_CASE("infer and metrics produce coherent outputs end to end") {
    const std::string gen = temp_dir("flow_gen");
    std::ostringstream log;
    cmd_generate(RunConfig::make("", {{"n", "4"}, {"bins", "2500"}, {"seed", "6"},
                                      {"mu_w", "0"}, {"mu_b", "-1.5"}, {"out", gen}}),
                 log);
    const std::string inf = temp_dir("flow_inf");
    cmd_infer(RunConfig::make("", {{"train", gen + "/train.mea"}, {"iterations", "60"},
                                   {"burn_in", "20"}, {"thin", "4"}, {"seed", "8"},
                                   {"out", inf}}),
              log);
    const PosteriorChain chain = read_chain(inf + "/chain");
    CHECK(chain.samples.size() == 10);  // sweeps 20,24,...,56
    CHECK(chain.n_electrodes == 4);
    const Eigen::MatrixXd prob = read_matrix_csv(inf + "/edge_probability.csv");
    CHECK(prob.rows() == 4);
    CHECK(prob.minCoeff() >= 0.0);
    CHECK(prob.maxCoeff() <= 1.0);

    const std::string met = temp_dir("flow_met");
    cmd_metrics(RunConfig::make("", {{"chain", inf + "/chain"}, {"out", met}}), log);
    std::ifstream mcsv(met + "/metrics.csv");
    std::string header;
    REQUIRE(std::getline(mcsv, header));
    CHECK(header == "sample,n_connections,avg_clustering,avg_path_length,reachable_fraction");
    int rows = 0;
    for (std::string line; std::getline(mcsv, line);) ++rows;
    CHECK(rows == 10);
    std::ifstream msum(met + "/metrics_summary.json");
    nlohmann::json summary;
    msum >> summary;
    CHECK(summary.at("n_samples") == 10);
    CHECK(summary.at("theta_w") == 0.05);
    CHECK(summary.at("n_connections").contains("mean"));

    const std::string cmp = temp_dir("flow_cmp");
    cmd_compare(RunConfig::make("", {{"est", inf}, {"truth", gen}, {"out", cmp}}), log);
    std::ifstream cj(cmp + "/compare.json");
    nlohmann::json comparison;
    cj >> comparison;
    CHECK(comparison.contains("cosine_adjacency"));
    CHECK(comparison.contains("cosine_weights"));
    CHECK(comparison.contains("detection"));
}

TEST_CASE("command errors carry the documented types") {
    std::ostringstream log;
    // missing train file -> data error
    CHECK_THROWS_AS(cmd_infer(RunConfig::make("", {{"train", "/nonexistent.mea"},
                                                   {"out", temp_dir("err1")}}),
                              log),
                    data_error);
    // infer without a train path -> config error
    CHECK_THROWS_AS(cmd_infer(RunConfig::make("", {{"out", temp_dir("err2")}}), log),
                    config_error);
    // split-infer with both layout and grid_split -> config error
    CHECK_THROWS_AS(cmd_split_infer(RunConfig::make("", {{"train", "x"}, {"layout", "a"},
                                                         {"grid_split", "2x2"},
                                                         {"out", temp_dir("err3")}}),
                                    log),
                    config_error);
    // malformed grid split string
    CHECK_THROWS_AS(cmd_split_infer(RunConfig::make("", {{"train", "x"},
                                                         {"grid_split", "two"},
                                                         {"out", temp_dir("err4")}}),
                                    log),
                    config_error);
}

TEST_CASE("the executable maps outcomes to exit codes") {
    const std::string dir = temp_dir("cli");
    CHECK(cli("--version") == 0);
    CHECK(cli("--help") == 0);
    CHECK(cli("generate --help") == 0);
    CHECK(cli("") == 2);            // missing subcommand
    CHECK(cli("explode") == 2);     // unknown subcommand
    CHECK(cli("infer --train " + dir + "/absent.mea --out " + dir + "/o1") == 3);
    CHECK(cli("infer --out " + dir + "/o2") == 2);  // train not set
    CHECK(cli("generate --n 3 --bins 50 --rho 1.5 --out " + dir + "/o3") == 2);

    const std::string cfg = write_file(dir, "bad.cfg", "unknown_key = 1\n");
    CHECK(cli("generate --config " + cfg + " --out " + dir + "/o4") == 2);

    CHECK(cli("generate --n 3 --bins 200 --seed 2 --mu-w 0 --out " + dir + "/ok") == 0);
    CHECK(fs::exists(dir + "/ok/train.mea"));
    CHECK(cli("infer --train " + dir + "/ok/train.mea --iterations 0 --out " + dir + "/o5") ==
          2);  // bad sweep count
    CHECK(cli("metrics --chain " + dir + "/ok --out " + dir + "/o6") == 3);  // not a chain dir
}
