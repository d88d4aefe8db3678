#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "meanet/hyper.hpp"
#include "meanet/model.hpp"
#include "meanet/network.hpp"
#include "meanet/philox.hpp"
#include "meanet/polya_gamma.hpp"
#include "meanet/spike_train.hpp"

namespace meanet {

struct SamplerConfig {
    int n_iterations = 1000;
    int burn_in = 500;
    int thin = 1;
    std::uint64_t seed = 0;
    bool resample_hypers = false;   // fixed-hyperparameter mode by default
    bool allow_self_edges = true;
    bool random_scan = false;       // default: systematic ascending-m scan
    unsigned parallel_width = 0;    // 0 = hardware concurrency
    PgMethod pg_method = PgMethod::devroye;

    void validate() const;  // throws config_error
};

struct PosteriorChain {
    std::vector<NetworkSample> samples;       // retained after burn-in, stride thin
    std::vector<int> sample_iterations;       // global sweep index per retained sample
    std::vector<double> loglik_trace;         // per retained sample
    std::vector<double> sweep_loglik;         // per sweep, all sweeps
    std::vector<double> sweep_seconds;        // wall time per sweep
    int n_electrodes = 0;
    std::vector<int> electrode_indices;       // identity within the parent recording
    std::vector<std::string> electrode_ids;
    double bin_ms = 1.0;
    HyperParams hyper;
    SamplerConfig config;
};

// Log of the ratio between the augmented-regression evidence with one edge
// included (its weight integrated against the N(mu_w, s_w) prior) and
// excluded. lin = sum_t f_t (kappa_t - omega_t psi_t^rest), quad = sum_t
// omega_t f_t^2 where psi^rest excludes this edge's own contribution.
double edge_log_evidence_ratio(double lin, double quad, double mu_w, double s_w);

// Above plus the prior odds; rho must lie strictly inside (0,1).
double edge_inclusion_log_odds(double lin, double quad, double mu_w, double s_w, double rho);

// Conjugate scalar normal-inverse-Wishart update.
struct NiwPosterior {
    double mean, kappa, scale, dof;
};
NiwPosterior niw_posterior(const HyperParams& hp, const std::vector<double>& obs);
// (mean, variance) draw: variance ~ InvGamma(dof/2, scale/2), mean ~ N(mean, variance/kappa).
std::pair<double, double> draw_normal_inverse_gamma(const NiwPosterior& post, RngStream& rng);

// Per-target weight/bias priors carried between sweeps.
struct HyperState {
    Eigen::VectorXd mu_w, s_w;  // per target electrode
    double mu_b = 0.0, s_b = 1.0;
};
// With resample off, returns the fixed values from hp unchanged; otherwise
// draws each target's (mu_w, s_w) from the NIW posterior given that column's
// included weights, and (mu_b, s_b) given the bias vector.
HyperState resample_niw_hyperparameters(const NetworkSample& current, const HyperParams& hp,
                                        bool resample, RngStream& rng);

// omega(t, n) ~ PG(1, psi(t, n)), parallel across targets; streams are keyed
// by (iteration, target) so any parallel width gives identical output.
Eigen::MatrixXd resample_auxiliary(const NetworkSample& net, const FilteredRegressors& F,
                                   std::uint64_t seed, std::int64_t iteration,
                                   unsigned parallel_width = 1,
                                   PgMethod method = PgMethod::devroye);

// One collapsed scan over the incoming edges of target n followed by the
// joint Gaussian redraw of the included weights and bias. Returns the new
// adjacency column, weight column, and bias.
struct RowUpdate {
    Eigen::VectorXd adjacency_col, weight_col;
    double bias = 0.0;
};
RowUpdate resample_connections_row(int n, const NetworkSample& net, const SpikeTrain& train,
                                   const FilteredRegressors& F, const Eigen::VectorXd& omega_col,
                                   const HyperParams& hp, const SamplerConfig& cfg,
                                   RngStream& rng);

PosteriorChain run_gibbs(const SpikeTrain& train, const HyperParams& hp, const SamplerConfig& cfg,
                         const NetworkSample* init = nullptr);

} // namespace meanet
