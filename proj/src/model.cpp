#include "meanet/model.hpp"

#include <cmath>

#include "meanet/errors.hpp"
#include "meanet/philox.hpp"

namespace meanet {

namespace {

// Per-lag kernel values exp(-d * bin_ms / tau_ms), d = 1..T.
std::vector<double> lag_kernel(const HyperParams& hp, double bin_ms) {
    std::vector<double> lag(static_cast<std::size_t>(hp.window_bins) + 1, 0.0);
    for (int d = 1; d <= hp.window_bins; ++d)
        lag[static_cast<std::size_t>(d)] = std::exp(-static_cast<double>(d) * bin_ms / hp.tau_ms);
    return lag;
}

} // namespace

FilteredRegressors filter_spike_history(const SpikeTrain& train, const HyperParams& hp,
                                        FilterScheme scheme) {
    hp.validate();
    const int N = train.n_electrodes();
    const std::int64_t B = train.n_bins();
    FilteredRegressors F;
    F.values = Eigen::MatrixXd::Zero(B, N);
    const auto& data = train.data();

    if (scheme == FilterScheme::recursive) {
        // One-pole recursion without truncation; cheap, labeled approximate.
        const double d = std::exp(-train.bin_ms() / hp.tau_ms);
        for (std::int64_t t = 1; t < B; ++t) {
            const std::uint8_t* prev = &data[static_cast<std::size_t>(t - 1) * N];
            for (int m = 0; m < N; ++m)
                F.values(t, m) = d * (F.values(t - 1, m) + static_cast<double>(prev[m]));
        }
        return F;
    }

    const std::vector<double> lag = lag_kernel(hp, train.bin_ms());
    const int T = hp.window_bins;
    for (std::int64_t t0 = 0; t0 < B; ++t0) {
        const std::uint8_t* row = &data[static_cast<std::size_t>(t0) * N];
        const std::int64_t dmax = std::min<std::int64_t>(T, B - 1 - t0);
        for (int m = 0; m < N; ++m) {
            if (!row[m]) continue;
            double* col = F.values.col(m).data();
            for (std::int64_t d = 1; d <= dmax; ++d) col[t0 + d] += lag[static_cast<std::size_t>(d)];
        }
    }
    return F;
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

double firing_probability(double psi) {
    if (!std::isfinite(psi)) throw numerical_error("activation is not finite");
    return sigmoid(psi);
}

double activation(const NetworkSample& net, const FilteredRegressors& F, std::int64_t t, int n) {
    const int N = net.n_electrodes();
    if (F.values.cols() != N) throw data_error("regressors do not match network size");
    if (t < 0 || t >= F.values.rows()) throw std::out_of_range("bin index out of range");
    if (n < 0 || n >= N) throw std::out_of_range("electrode index out of range");
    double psi = net.bias(n);
    for (int m = 0; m < N; ++m) psi += net.adjacency(m, n) * net.weights(m, n) * F.values(t, m);
    return psi;
}

Eigen::MatrixXd activation_matrix(const NetworkSample& net, const FilteredRegressors& F) {
    if (F.values.cols() != net.n_electrodes())
        throw data_error("regressors do not match network size");
    Eigen::MatrixXd psi(F.values.rows(), F.values.cols());
    psi.noalias() = F.values * net.effective_weights();
    psi.rowwise() += net.bias.transpose();
    return psi;
}

double log_likelihood_from_activation(const Eigen::MatrixXd& psi, const SpikeTrain& train) {
    const int N = train.n_electrodes();
    const std::int64_t B = train.n_bins();
    if (psi.rows() != B || psi.cols() != N)
        throw data_error("activation matrix does not match train shape");
    const auto& data = train.data();
    double total = 0.0;
    for (int n = 0; n < N; ++n) {
        const double* col = psi.col(n).data();
        double spike_part = 0.0;
        for (std::int64_t t = 0; t < B; ++t) {
            if (data[static_cast<std::size_t>(t) * N + n]) spike_part += col[t];
        }
        // (1 + e).log() instead of e.log1p(): same value to ~1 ulp since
        // e <= 1 here, and Eigen vectorizes log but not log1p.
        const double softplus_part =
            psi.col(n).array().max(0.0).sum() +
            (1.0 + (-psi.col(n).array().abs()).exp()).log().sum();
        total += spike_part - softplus_part;
    }
    if (std::isnan(total)) throw numerical_error("log-likelihood is NaN");
    return total;
}

double log_likelihood(const NetworkSample& net, const SpikeTrain& train, const HyperParams& hp) {
    net.validate();
    if (net.n_electrodes() != train.n_electrodes())
        throw data_error("network size does not match train");
    const FilteredRegressors F = filter_spike_history(train, hp);
    return log_likelihood_from_activation(activation_matrix(net, F), train);
}

SpikeTrain simulate_spike_train(const NetworkSample& net, std::int64_t n_bins,
                                const HyperParams& hp, std::uint64_t seed, double bin_ms,
                                std::vector<ElectrodePosition> geometry,
                                std::vector<std::string> ids) {
    net.validate();
    hp.validate();
    if (n_bins < 1) throw data_error("n_bins must be >= 1");
    const int N = net.n_electrodes();
    const int T = hp.window_bins;
    const std::vector<double> lag = lag_kernel(hp, bin_ms);
    const Eigen::MatrixXd aw = net.effective_weights();

    // Ring of filtered-history rows: slot (t mod T+1) holds F(t, .) for the
    // bin about to be generated, fed by per-spike forward propagation (the
    // same additions, in the same order, as filter_spike_history).
    const int slots = T + 1;
    std::vector<double> ring(static_cast<std::size_t>(slots) * N, 0.0);
    std::vector<std::uint8_t> data(static_cast<std::size_t>(n_bins) * N, 0);

    RngStream rng(seed, StreamPurpose::simulate);
    for (std::int64_t t = 0; t < n_bins; ++t) {
        const int slot = static_cast<int>(t % slots);
        double* f_now = &ring[static_cast<std::size_t>(slot) * N];
        std::uint8_t* out = &data[static_cast<std::size_t>(t) * N];
        for (int n = 0; n < N; ++n) {
            double psi = net.bias(n);
            for (int m = 0; m < N; ++m) psi += aw(m, n) * f_now[m];
            out[n] = rng.uniform() < firing_probability(psi) ? 1 : 0;
        }
        for (int m = 0; m < N; ++m) f_now[m] = 0.0;  // slot becomes bin t + T + 1
        const std::int64_t dmax = std::min<std::int64_t>(T, n_bins - 1 - t);
        for (int m = 0; m < N; ++m) {
            if (!out[m]) continue;
            for (std::int64_t d = 1; d <= dmax; ++d) {
                const int s = static_cast<int>((t + d) % slots);
                ring[static_cast<std::size_t>(s) * N + m] += lag[static_cast<std::size_t>(d)];
            }
        }
    }

    const bool synthesized = geometry.empty();
    return SpikeTrain::build(N, n_bins, bin_ms, std::move(data), std::move(geometry),
                             std::move(ids), synthesized);
}

} // namespace meanet
