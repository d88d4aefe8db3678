#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "meanet/analysis.hpp"
#include "meanet/errors.hpp"
#include "meanet/sampler.hpp"

using namespace meanet;

namespace {

NetworkSample empty_net(int N, double bias) {
    NetworkSample net;
    net.adjacency = Eigen::MatrixXd::Zero(N, N);
    net.weights = Eigen::MatrixXd::Zero(N, N);
    net.bias = Eigen::VectorXd::Constant(N, bias);
    return net;
}

bool same_samples(const PosteriorChain& a, const PosteriorChain& b) {
    if (a.samples.size() != b.samples.size()) return false;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        if (a.samples[i].adjacency != b.samples[i].adjacency) return false;
        if (a.samples[i].weights != b.samples[i].weights) return false;
        if (a.samples[i].bias != b.samples[i].bias) return false;
    }
    return a.loglik_trace == b.loglik_trace && a.sweep_loglik == b.sweep_loglik;
}

} // namespace

TEST_CASE("sampler config validation") {
    SamplerConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.n_iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = SamplerConfig{};
    cfg.burn_in = cfg.n_iterations;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = SamplerConfig{};
    cfg.thin = 0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = SamplerConfig{};
    cfg.burn_in = -1;
    CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("with no data the inclusion odds reduce to the prior odds") {
    CHECK(edge_log_evidence_ratio(0.0, 0.0, 1.0, 1.0) == 0.0);
    CHECK(edge_log_evidence_ratio(0.0, 0.0, -2.5, 0.3) == 0.0);
    CHECK(edge_inclusion_log_odds(0.0, 0.0, 1.0, 1.0, 1.0 / 3.0) ==
          doctest::Approx(-0.69315).epsilon(1e-4));
    CHECK(edge_inclusion_log_odds(0.0, 0.0, 1.0, 1.0, 0.5) == 0.0);
}

TEST_CASE("inclusion odds demand rho strictly inside (0,1)") {
    CHECK_THROWS_AS(edge_inclusion_log_odds(0.0, 0.0, 1.0, 1.0, 0.0), config_error);
    CHECK_THROWS_AS(edge_inclusion_log_odds(0.0, 0.0, 1.0, 1.0, 1.0), config_error);
}

TEST_CASE("evidence ratio matches the closed form") {
    const double lin = 2.3, quad = 1.7, mu_w = 0.4, s_w = 0.8;
    const double lam = 1.0 / s_w + quad;
    const double h = mu_w / s_w + lin;
    const double expect = -0.5 * std::log(s_w * lam) + h * h / (2.0 * lam) -
                          mu_w * mu_w / (2.0 * s_w);
    CHECK(edge_log_evidence_ratio(lin, quad, mu_w, s_w) ==
          doctest::Approx(expect).epsilon(1e-12));
    // strong positive evidence dominates the prior odds
    CHECK(edge_inclusion_log_odds(50.0, 10.0, 0.0, 1.0, 0.1) > 5.0);
}

TEST_CASE("NIW posterior updates match the conjugate formulas") {
    HyperParams hp;  // NIW(0, 1, 1, 3)
    const std::vector<double> obs = {1.0, 2.0, 3.0, 2.0};
    const NiwPosterior post = niw_posterior(hp, obs);
    const double k = 4.0, xbar = 2.0;
    CHECK(post.kappa == hp.niw_kappa + k);
    CHECK(post.dof == hp.niw_dof + k);
    CHECK(post.mean == doctest::Approx((hp.niw_kappa * hp.niw_mean + k * xbar) /
                                       (hp.niw_kappa + k)).epsilon(1e-14));
    double ss = 0.0;
    for (double x : obs) ss += (x - xbar) * (x - xbar);
    const double expect_scale =
        hp.niw_scale + ss + (hp.niw_kappa * k / (hp.niw_kappa + k)) * xbar * xbar;
    CHECK(post.scale == doctest::Approx(expect_scale).epsilon(1e-14));
}

TEST_CASE("NIW posterior with no observations echoes the prior") {
    HyperParams hp;
    hp.niw_mean = -1.5;
    hp.niw_scale = 2.5;
    const NiwPosterior post = niw_posterior(hp, {});
    CHECK(post.mean == -1.5);
    CHECK(post.scale == 2.5);
    CHECK(post.kappa == hp.niw_kappa);
    CHECK(post.dof == hp.niw_dof);
}

TEST_CASE("normal-inverse-gamma draws are deterministic with positive variance") {
    NiwPosterior post{0.5, 2.0, 3.0, 5.0};
    RngStream r1(5, StreamPurpose::generic, 0), r2(5, StreamPurpose::generic, 0);
    for (int i = 0; i < 200; ++i) {
        const auto [m1, v1] = draw_normal_inverse_gamma(post, r1);
        const auto [m2, v2] = draw_normal_inverse_gamma(post, r2);
        CHECK(v1 > 0.0);
        CHECK(m1 == m2);
        CHECK(v1 == v2);
    }
}

TEST_CASE("fixed-mode hyperparameters pass through unchanged") {
    HyperParams hp;
    hp.mu_w = 0.7;
    hp.s_w = 1.3;
    hp.mu_b = -0.2;
    hp.s_b = 0.9;
    NetworkSample net = empty_net(3, 0.0);
    net.adjacency(0, 1) = 1.0;
    net.weights(0, 1) = 2.0;
    RngStream rng(1, StreamPurpose::hyper, 0);
    const HyperState hs = resample_niw_hyperparameters(net, hp, false, rng);
    for (int n = 0; n < 3; ++n) {
        CHECK(hs.mu_w(n) == 0.7);
        CHECK(hs.s_w(n) == 1.3);
    }
    CHECK(hs.mu_b == -0.2);
    CHECK(hs.s_b == 0.9);
}

TEST_CASE("resampled hyperparameters track the included weights") {
    HyperParams hp;
    NetworkSample net = empty_net(2, 0.1);
    net.adjacency.setOnes();
    net.weights.setConstant(5.0);  // every included weight is 5
    double mu_sum = 0.0;
    for (int i = 0; i < 400; ++i) {
        RngStream rng(100 + i, StreamPurpose::hyper, 0);
        const HyperState hs = resample_niw_hyperparameters(net, hp, true, rng);
        mu_sum += hs.mu_w(0);
        CHECK(hs.s_w(0) > 0.0);
        CHECK(hs.s_b > 0.0);
    }
    // posterior mean of mu_w: (kappa0*0 + 2*5) / (1 + 2) = 10/3
    CHECK(mu_sum / 400.0 == doctest::Approx(10.0 / 3.0).epsilon(0.15));
}

TEST_CASE("auxiliary resampling is positive and width-invariant") {
    HyperParams hp;
    NetworkSample net = empty_net(3, -0.5);
    net.adjacency(0, 1) = 1.0;
    net.weights(0, 1) = 1.0;
    const SpikeTrain t = simulate_spike_train(net, 800, hp, 3);
    const FilteredRegressors F = filter_spike_history(t, hp);
    const Eigen::MatrixXd om1 = resample_auxiliary(net, F, 9, 4, 1);
    const Eigen::MatrixXd om8 = resample_auxiliary(net, F, 9, 4, 8);
    CHECK(om1 == om8);
    CHECK(om1.minCoeff() > 0.0);
    CHECK(om1.rows() == t.n_bins());
    CHECK(om1.cols() == 3);
    // different sweep index gives different draws
    CHECK(resample_auxiliary(net, F, 9, 5, 1) != om1);
}

TEST_CASE("a strong directed edge is recovered and its reverse is not invented") {
    NetworkSample truth = empty_net(2, -2.0);
    truth.adjacency(0, 1) = 1.0;
    truth.weights(0, 1) = 3.0;
    HyperParams hp;
    const SpikeTrain train = simulate_spike_train(truth, 4000, hp, 14);
    SamplerConfig cfg;
    cfg.n_iterations = 300;
    cfg.burn_in = 150;
    cfg.seed = 77;
    const PosteriorChain chain = run_gibbs(train, hp, cfg);
    REQUIRE(chain.samples.size() == 150);
    const ChainSummary s = summarize_chain(chain);
    CHECK(s.edge_probability(0, 1) > 0.9);
    CHECK(s.edge_probability(1, 0) < 0.5);
    CHECK(s.mean_weights(0, 1) > 1.0);
    CHECK(s.mean_bias(0) == doctest::Approx(-2.0).epsilon(0.25));
}

TEST_CASE("chains are identical across parallel widths and reproducible by seed") {
    NetworkSample truth = empty_net(4, -1.5);
    truth.adjacency(0, 1) = truth.adjacency(2, 3) = 1.0;
    truth.weights(0, 1) = 1.2;
    truth.weights(2, 3) = -1.5;
    HyperParams hp;
    const SpikeTrain train = simulate_spike_train(truth, 2000, hp, 31);
    SamplerConfig cfg;
    cfg.n_iterations = 60;
    cfg.burn_in = 30;
    cfg.seed = 9;
    cfg.parallel_width = 1;
    const PosteriorChain c1 = run_gibbs(train, hp, cfg);
    cfg.parallel_width = 24;
    const PosteriorChain c24 = run_gibbs(train, hp, cfg);
    CHECK(same_samples(c1, c24));

    cfg.parallel_width = 1;
    const PosteriorChain again = run_gibbs(train, hp, cfg);
    CHECK(same_samples(c1, again));

    cfg.seed = 10;
    const PosteriorChain other = run_gibbs(train, hp, cfg);
    CHECK_FALSE(same_samples(c1, other));
}

TEST_CASE("log likelihood climbs from the random initialization") {
    NetworkSample truth = empty_net(4, -2.0);
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n)
            if ((m + n) % 2 == 0) {
                truth.adjacency(m, n) = 1.0;
                truth.weights(m, n) = (m < n) ? 1.0 : -1.0;
            }
    HyperParams hp;
    const SpikeTrain train = simulate_spike_train(truth, 6000, hp, 44);
    SamplerConfig cfg;
    cfg.n_iterations = 200;
    cfg.burn_in = 100;
    cfg.seed = 45;
    const PosteriorChain chain = run_gibbs(train, hp, cfg);
    const auto mean_of = [&](std::size_t from, std::size_t count) {
        return std::accumulate(chain.sweep_loglik.begin() + from,
                               chain.sweep_loglik.begin() + from + count, 0.0) / count;
    };
    CHECK(mean_of(chain.sweep_loglik.size() - 100, 100) > mean_of(0, 10));
    for (const double v : chain.sweep_loglik) CHECK(v < 0.0);
}

TEST_CASE("a looser edge prior includes more edges") {
    NetworkSample truth = empty_net(4, -1.5);
    truth.adjacency(0, 1) = 1.0;
    truth.weights(0, 1) = 0.8;
    HyperParams hp;
    const SpikeTrain train = simulate_spike_train(truth, 1500, hp, 55);
    SamplerConfig cfg;
    cfg.n_iterations = 120;
    cfg.burn_in = 60;
    cfg.seed = 8;
    const auto total_edges = [&](double rho) {
        HyperParams h2 = hp;
        h2.rho = rho;
        double edges = 0.0;
        for (const NetworkSample& s : run_gibbs(train, h2, cfg).samples)
            edges += s.adjacency.sum();
        return edges;
    };
    CHECK(total_edges(0.9) > total_edges(0.1));
}

TEST_CASE("degenerate edge priors pin the adjacency") {
    NetworkSample truth = empty_net(3, -1.0);
    truth.adjacency(0, 1) = 1.0;
    truth.weights(0, 1) = 1.0;
    HyperParams hp;
    const SpikeTrain train = simulate_spike_train(truth, 800, hp, 66);
    SamplerConfig cfg;
    cfg.n_iterations = 40;
    cfg.burn_in = 20;
    cfg.seed = 5;

    HyperParams all = hp;
    all.rho = 1.0;
    for (const NetworkSample& s : run_gibbs(train, all, cfg).samples)
        CHECK(s.adjacency.sum() == 9.0);

    HyperParams none = hp;
    none.rho = 0.0;
    for (const NetworkSample& s : run_gibbs(train, none, cfg).samples)
        CHECK(s.adjacency.sum() == 0.0);
}

TEST_CASE("self edges can be forbidden") {
    NetworkSample truth = empty_net(3, -1.0);
    truth.adjacency(1, 1) = 1.0;
    truth.weights(1, 1) = 1.5;
    HyperParams hp;
    const SpikeTrain train = simulate_spike_train(truth, 1000, hp, 67);
    SamplerConfig cfg;
    cfg.n_iterations = 40;
    cfg.burn_in = 20;
    cfg.seed = 6;
    cfg.allow_self_edges = false;
    for (const NetworkSample& s : run_gibbs(train, hp, cfg).samples)
        CHECK(s.adjacency.diagonal().sum() == 0.0);
}

TEST_CASE("thinning keeps every thin-th sweep after burn-in") {
    NetworkSample truth = empty_net(2, -1.0);
    HyperParams hp;
    const SpikeTrain train = simulate_spike_train(truth, 500, hp, 68);
    SamplerConfig cfg;
    cfg.n_iterations = 50;
    cfg.burn_in = 20;
    cfg.thin = 7;
    cfg.seed = 3;
    const PosteriorChain chain = run_gibbs(train, hp, cfg);
    REQUIRE(chain.samples.size() == 5);  // sweeps 20, 27, 34, 41, 48
    CHECK(chain.sample_iterations == std::vector<int>{20, 27, 34, 41, 48});
    for (std::size_t i = 0; i < chain.samples.size(); ++i)
        CHECK(chain.loglik_trace[i] ==
              chain.sweep_loglik[static_cast<std::size_t>(chain.sample_iterations[i])]);
    CHECK(chain.sweep_loglik.size() == 50);
    CHECK(chain.sweep_seconds.size() == 50);
}

TEST_CASE("alternative sampler modes run deterministically") {
    NetworkSample truth = empty_net(3, -1.0);
    truth.adjacency(0, 1) = truth.adjacency(1, 2) = 1.0;
    truth.weights(0, 1) = 1.0;
    truth.weights(1, 2) = -1.0;
    HyperParams hp;
    const SpikeTrain train = simulate_spike_train(truth, 1200, hp, 70);
    SamplerConfig cfg;
    cfg.n_iterations = 50;
    cfg.burn_in = 25;
    cfg.seed = 4;

    for (const bool random_scan : {false, true}) {
        for (const bool resample : {false, true}) {
            for (const PgMethod m : {PgMethod::devroye, PgMethod::truncated}) {
                SamplerConfig c = cfg;
                c.random_scan = random_scan;
                c.resample_hypers = resample;
                c.pg_method = m;
                const PosteriorChain a = run_gibbs(train, hp, c);
                const PosteriorChain b = run_gibbs(train, hp, c);
                CHECK(same_samples(a, b));
                CHECK(a.samples.size() == 25);
            }
        }
    }
}

TEST_CASE("an initialization of the wrong size is rejected") {
    NetworkSample truth = empty_net(3, -1.0);
    HyperParams hp;
    const SpikeTrain train = simulate_spike_train(truth, 300, hp, 71);
    SamplerConfig cfg;
    cfg.n_iterations = 10;
    cfg.burn_in = 5;
    const NetworkSample bad = empty_net(4, 0.0);
    CHECK_THROWS_AS(run_gibbs(train, hp, cfg, &bad), data_error);
    const NetworkSample good = empty_net(3, 0.0);
    CHECK_NOTHROW(run_gibbs(train, hp, cfg, &good));
}

TEST_CASE("a provided initialization changes the start but not the target") {
    NetworkSample truth = empty_net(2, -2.0);
    truth.adjacency(0, 1) = 1.0;
    truth.weights(0, 1) = 3.0;
    HyperParams hp;
    const SpikeTrain train = simulate_spike_train(truth, 3000, hp, 72);
    SamplerConfig cfg;
    cfg.n_iterations = 150;
    cfg.burn_in = 100;
    cfg.seed = 12;
    const PosteriorChain from_prior = run_gibbs(train, hp, cfg);
    const PosteriorChain from_truth = run_gibbs(train, hp, cfg, &truth);
    CHECK_FALSE(same_samples(from_prior, from_truth));
    CHECK(summarize_chain(from_truth).edge_probability(0, 1) > 0.9);
    CHECK(summarize_chain(from_prior).edge_probability(0, 1) > 0.9);
}

TEST_CASE("single-row resampling matches its contract") {
    NetworkSample net = empty_net(3, -1.0);
    net.adjacency(0, 2) = 1.0;
    net.weights(0, 2) = 1.0;
    HyperParams hp;
    const SpikeTrain train = simulate_spike_train(net, 600, hp, 73);
    const FilteredRegressors F = filter_spike_history(train, hp);
    const Eigen::MatrixXd omega = resample_auxiliary(net, F, 2, 0, 1);
    SamplerConfig cfg;

    RngStream r1(2, StreamPurpose::row, 1), r2(2, StreamPurpose::row, 1);
    const RowUpdate u1 = resample_connections_row(2, net, train, F, omega.col(2), hp, cfg, r1);
    const RowUpdate u2 = resample_connections_row(2, net, train, F, omega.col(2), hp, cfg, r2);
    CHECK(u1.adjacency_col == u2.adjacency_col);
    CHECK(u1.weight_col == u2.weight_col);
    CHECK(u1.bias == u2.bias);
    for (int m = 0; m < 3; ++m) {
        const double a = u1.adjacency_col(m);
        CHECK((a == 0.0 || a == 1.0));
        CHECK(std::isfinite(u1.weight_col(m)));
    }
    CHECK(std::isfinite(u1.bias));
}
