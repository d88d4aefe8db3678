#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "meanet/hyper.hpp"
#include "meanet/network.hpp"
#include "meanet/spike_train.hpp"

namespace meanet {

// F(t, m) = sum over lags d in [1, T] of exp(-d * bin_ms / tau_ms) * X(t-d, m).
// Column-major so each electrode's regressor column is contiguous.
struct FilteredRegressors {
    Eigen::MatrixXd values;  // n_bins x N
};

enum class FilterScheme {
    exact,      // truncated kernel, evaluated exactly per spike
    recursive   // untruncated one-pole recursion; faster but approximate
};

FilteredRegressors filter_spike_history(const SpikeTrain& train, const HyperParams& hp,
                                        FilterScheme scheme = FilterScheme::exact);

double sigmoid(double x);
double softplus(double x);  // log(1 + e^x), stable for large |x|

// Firing probability of one bin given its activation psi.
double firing_probability(double psi);

// psi(t, n) = bias(n) + sum_m adjacency(m,n) * weights(m,n) * F(t,m)
double activation(const NetworkSample& net, const FilteredRegressors& F, std::int64_t t, int n);
Eigen::MatrixXd activation_matrix(const NetworkSample& net, const FilteredRegressors& F);

// Bernoulli log-likelihood of the train under the network; always <= 0.
double log_likelihood(const NetworkSample& net, const SpikeTrain& train, const HyperParams& hp);
double log_likelihood_from_activation(const Eigen::MatrixXd& psi, const SpikeTrain& train);

// Ancestral simulation: bins in order, each electrode fires independently
// with probability sigmoid(psi) given the already-generated history.
// Deterministic in seed. Geometry defaults to the synthesized grid.
SpikeTrain simulate_spike_train(const NetworkSample& net, std::int64_t n_bins,
                                const HyperParams& hp, std::uint64_t seed,
                                double bin_ms = 1.0,
                                std::vector<ElectrodePosition> geometry = {},
                                std::vector<std::string> ids = {});

} // namespace meanet
