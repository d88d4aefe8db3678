#include "meanet/sampler.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "meanet/errors.hpp"
#include "meanet/parallel.hpp"

namespace meanet {

void SamplerConfig::validate() const {
    if (n_iterations < 1) throw config_error("n_iterations must be >= 1");
    if (burn_in < 0 || burn_in >= n_iterations)
        throw config_error("burn_in must lie in [0, n_iterations)");
    if (thin < 1) throw config_error("thin must be >= 1");
}

double edge_log_evidence_ratio(double lin, double quad, double mu_w, double s_w) {
    if (!(s_w > 0.0)) throw config_error("weight prior variance must be positive");
    if (!(quad >= 0.0)) throw numerical_error("negative quadratic term in edge evidence");
    const double lam = 1.0 / s_w + quad;
    const double h = mu_w / s_w + lin;
    return -0.5 * std::log(s_w * lam) + 0.5 * h * h / lam - 0.5 * mu_w * mu_w / s_w;
}

double edge_inclusion_log_odds(double lin, double quad, double mu_w, double s_w, double rho) {
    if (!(rho > 0.0 && rho < 1.0))
        throw config_error("edge_inclusion_log_odds needs rho strictly inside (0,1)");
    return std::log(rho / (1.0 - rho)) + edge_log_evidence_ratio(lin, quad, mu_w, s_w);
}

NiwPosterior niw_posterior(const HyperParams& hp, const std::vector<double>& obs) {
    const double k = static_cast<double>(obs.size());
    NiwPosterior post;
    post.kappa = hp.niw_kappa + k;
    post.dof = hp.niw_dof + k;
    if (obs.empty()) {
        post.mean = hp.niw_mean;
        post.scale = hp.niw_scale;
        return post;
    }
    const double xbar = std::accumulate(obs.begin(), obs.end(), 0.0) / k;
    double ss = 0.0;
    for (double x : obs) ss += (x - xbar) * (x - xbar);
    post.mean = (hp.niw_kappa * hp.niw_mean + k * xbar) / post.kappa;
    post.scale = hp.niw_scale + ss +
                 (hp.niw_kappa * k / post.kappa) * (xbar - hp.niw_mean) * (xbar - hp.niw_mean);
    return post;
}

std::pair<double, double> draw_normal_inverse_gamma(const NiwPosterior& post, RngStream& rng) {
    const double variance = 0.5 * post.scale / rng.gamma(0.5 * post.dof);
    const double mean = post.mean + rng.normal() * std::sqrt(variance / post.kappa);
    return {mean, variance};
}

namespace {

HyperState niw_step(const Eigen::MatrixXd& A, const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                    const HyperParams& hp, bool resample, RngStream& rng) {
    const int N = static_cast<int>(b.size());
    HyperState hs;
    hs.mu_w = Eigen::VectorXd::Constant(N, hp.mu_w);
    hs.s_w = Eigen::VectorXd::Constant(N, hp.s_w);
    hs.mu_b = hp.mu_b;
    hs.s_b = hp.s_b;
    if (!resample) return hs;

    std::vector<double> obs;
    for (int n = 0; n < N; ++n) {
        obs.clear();
        for (int m = 0; m < N; ++m) {
            if (A(m, n) == 1.0) obs.push_back(W(m, n));
        }
        const auto [mu, var] = draw_normal_inverse_gamma(niw_posterior(hp, obs), rng);
        hs.mu_w(n) = mu;
        hs.s_w(n) = var;
    }
    obs.assign(b.data(), b.data() + N);
    const auto [mu_b, s_b] = draw_normal_inverse_gamma(niw_posterior(hp, obs), rng);
    hs.mu_b = mu_b;
    hs.s_b = s_b;
    return hs;
}

// Reused per-thread scratch; carries no state between row updates.
struct RowScratch {
    std::vector<double> omega, psi, u, sqrt_om, Y;
    Eigen::MatrixXd G;
    Eigen::VectorXd h, z;
    std::vector<int> order, included;
};
thread_local RowScratch tl_scratch;

// s = sum_t u[t] f[t], q = sum_t om[t] f[t]^2, one fused pass with a fixed
// summation tree so results do not depend on the surrounding code path.
inline void dual_dot(const double* f, const double* u, const double* om, std::int64_t B,
                     double& s_out, double& q_out) {
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0, q0 = 0, q1 = 0, q2 = 0, q3 = 0;
    std::int64_t t = 0;
    for (; t + 4 <= B; t += 4) {
        const double f0 = f[t], f1 = f[t + 1], f2 = f[t + 2], f3 = f[t + 3];
        s0 += u[t] * f0;
        s1 += u[t + 1] * f1;
        s2 += u[t + 2] * f2;
        s3 += u[t + 3] * f3;
        q0 += om[t] * f0 * f0;
        q1 += om[t + 1] * f1 * f1;
        q2 += om[t + 2] * f2 * f2;
        q3 += om[t + 3] * f3 * f3;
    }
    for (; t < B; ++t) {
        s0 += u[t] * f[t];
        q0 += om[t] * f[t] * f[t];
    }
    s_out = (s0 + s1) + (s2 + s3);
    q_out = (q0 + q1) + (q2 + q3);
}

struct RowParams {
    int n = 0;
    double mu_w = 1.0, s_w = 1.0, mu_b = 0.0, s_b = 1.0;
    double rho = 0.5;
    bool allow_self = true;
    bool random_scan = false;
};

// Collapsed scan + bias step + joint Gaussian redraw for one target column.
// a_col/w_col/bias are the current state and are updated in place.
void update_row(const RowParams& rp, const Eigen::MatrixXd& F, const double* omega,
                const double* r_col, double r_b, const double* psi_init, double* a_col,
                double* w_col, double* bias, RngStream& rng) {
    const std::int64_t B = F.rows();
    const int N = static_cast<int>(F.cols());
    RowScratch& sc = tl_scratch;

    sc.psi.assign(psi_init, psi_init + B);
    sc.u.resize(static_cast<std::size_t>(B));
    double q_b = 0.0;
    for (std::int64_t t = 0; t < B; ++t) {
        sc.u[static_cast<std::size_t>(t)] = omega[t] * sc.psi[static_cast<std::size_t>(t)];
        q_b += omega[t];
    }

    sc.order.resize(static_cast<std::size_t>(N));
    std::iota(sc.order.begin(), sc.order.end(), 0);
    if (rp.random_scan) {
        for (int i = N - 1; i > 0; --i) {
            const int j = std::min(static_cast<int>(rng.uniform() * (i + 1)), i);
            std::swap(sc.order[static_cast<std::size_t>(i)], sc.order[static_cast<std::size_t>(j)]);
        }
    }

    const double logit_rho =
        (rp.rho > 0.0 && rp.rho < 1.0) ? std::log(rp.rho / (1.0 - rp.rho)) : 0.0;

    for (int idx = 0; idx < N; ++idx) {
        const int m = sc.order[static_cast<std::size_t>(idx)];
        if (m == rp.n && !rp.allow_self) {
            const double w_new = rp.mu_w + rng.normal() * std::sqrt(rp.s_w);
            const double delta = -a_col[m] * w_col[m];
            if (delta != 0.0) {
                const double* f = F.col(m).data();
                for (std::int64_t t = 0; t < B; ++t) {
                    sc.psi[static_cast<std::size_t>(t)] += delta * f[t];
                    sc.u[static_cast<std::size_t>(t)] = omega[t] * sc.psi[static_cast<std::size_t>(t)];
                }
            }
            a_col[m] = 0.0;
            w_col[m] = w_new;
            continue;
        }

        const double* f = F.col(m).data();
        double s = 0.0, q = 0.0;
        dual_dot(f, sc.u.data(), omega, B, s, q);
        const double lin = r_col[m] - s + a_col[m] * w_col[m] * q;

        double include;
        if (rp.rho <= 0.0) {
            include = 0.0;
        } else if (rp.rho >= 1.0) {
            include = 1.0;
        } else {
            const double odds = logit_rho + edge_log_evidence_ratio(lin, q, rp.mu_w, rp.s_w);
            include = rng.uniform() < sigmoid(odds) ? 1.0 : 0.0;
        }

        double w_new;
        if (include == 1.0) {
            const double lam = 1.0 / rp.s_w + q;
            const double mean = (rp.mu_w / rp.s_w + lin) / lam;
            w_new = mean + rng.normal() / std::sqrt(lam);
        } else {
            w_new = rp.mu_w + rng.normal() * std::sqrt(rp.s_w);
        }

        const double delta = include * w_new - a_col[m] * w_col[m];
        if (delta != 0.0) {
            for (std::int64_t t = 0; t < B; ++t) {
                sc.psi[static_cast<std::size_t>(t)] += delta * f[t];
                sc.u[static_cast<std::size_t>(t)] = omega[t] * sc.psi[static_cast<std::size_t>(t)];
            }
        }
        a_col[m] = include;
        w_col[m] = w_new;
    }

    // Bias as the always-included weight on a constant-1 regressor.
    {
        double s_psi = 0.0;
        for (std::int64_t t = 0; t < B; ++t) s_psi += sc.u[static_cast<std::size_t>(t)];
        const double lin_b = r_b - s_psi + (*bias) * q_b;
        const double lam_b = 1.0 / rp.s_b + q_b;
        const double mean_b = (rp.mu_b / rp.s_b + lin_b) / lam_b;
        *bias = mean_b + rng.normal() / std::sqrt(lam_b);
    }

    // Joint conditional Gaussian over the included weights and the bias.
    sc.included.clear();
    for (int m = 0; m < N; ++m) {
        if (a_col[m] == 1.0) sc.included.push_back(m);
    }
    const int k = static_cast<int>(sc.included.size());
    if (k == 0) return;  // bias already refreshed above

    sc.sqrt_om.resize(static_cast<std::size_t>(B));
    for (std::int64_t t = 0; t < B; ++t)
        sc.sqrt_om[static_cast<std::size_t>(t)] = std::sqrt(omega[t]);

    sc.Y.resize(static_cast<std::size_t>(B) * (k + 1));
    Eigen::Map<Eigen::MatrixXd> Y(sc.Y.data(), B, k + 1);
    for (int j = 0; j < k; ++j) {
        const double* f = F.col(sc.included[static_cast<std::size_t>(j)]).data();
        double* y = Y.col(j).data();
        for (std::int64_t t = 0; t < B; ++t) y[t] = sc.sqrt_om[static_cast<std::size_t>(t)] * f[t];
    }
    {
        double* y = Y.col(k).data();
        for (std::int64_t t = 0; t < B; ++t) y[t] = sc.sqrt_om[static_cast<std::size_t>(t)];
    }

    sc.G.noalias() = Y.transpose() * Y;
    for (int j = 0; j < k; ++j) sc.G(j, j) += 1.0 / rp.s_w;
    sc.G(k, k) += 1.0 / rp.s_b;

    sc.h.resize(k + 1);
    for (int j = 0; j < k; ++j)
        sc.h(j) = rp.mu_w / rp.s_w + r_col[sc.included[static_cast<std::size_t>(j)]];
    sc.h(k) = rp.mu_b / rp.s_b + r_b;

    Eigen::LLT<Eigen::MatrixXd> llt(sc.G);
    if (llt.info() != Eigen::Success)
        throw numerical_error("posterior precision factorization failed");
    const Eigen::VectorXd mean = llt.solve(sc.h);
    sc.z.resize(k + 1);
    for (int j = 0; j <= k; ++j) sc.z(j) = rng.normal();
    const Eigen::VectorXd theta = mean + llt.matrixU().solve(sc.z);

    for (int j = 0; j < k; ++j) w_col[sc.included[static_cast<std::size_t>(j)]] = theta(j);
    *bias = theta(k);
}

// R(m, n) = sum_t F(t, m) * (X(t, n) - 1/2), computed in bin blocks.
Eigen::MatrixXd kappa_cross(const Eigen::MatrixXd& F, const SpikeTrain& train) {
    const std::int64_t B = F.rows();
    const int N = train.n_electrodes();
    const auto& data = train.data();
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(F.cols(), N);
    const std::int64_t block = 8192;
    Eigen::MatrixXd xd(std::min(block, B), N);
    for (std::int64_t t0 = 0; t0 < B; t0 += block) {
        const std::int64_t nb = std::min(block, B - t0);
        for (std::int64_t t = 0; t < nb; ++t) {
            const std::uint8_t* row = &data[static_cast<std::size_t>(t0 + t) * N];
            for (int n = 0; n < N; ++n) xd(t, n) = static_cast<double>(row[n]);
        }
        R.noalias() += F.middleRows(t0, nb).transpose() * xd.topRows(nb);
    }
    const Eigen::VectorXd colsum = F.colwise().sum();
    R.colwise() -= 0.5 * colsum;
    return R;
}

} // namespace

Eigen::MatrixXd resample_auxiliary(const NetworkSample& net, const FilteredRegressors& F,
                                   std::uint64_t seed, std::int64_t iteration,
                                   unsigned parallel_width, PgMethod method) {
    const Eigen::MatrixXd psi = activation_matrix(net, F);
    Eigen::MatrixXd omega(psi.rows(), psi.cols());
    parallel_for(static_cast<std::size_t>(psi.cols()), parallel_width, [&](std::size_t n) {
        RngStream rng(seed, StreamPurpose::auxiliary,
                      (static_cast<std::uint64_t>(iteration) << 32) | static_cast<std::uint32_t>(n));
        double* out = omega.col(static_cast<Eigen::Index>(n)).data();
        const double* in = psi.col(static_cast<Eigen::Index>(n)).data();
        for (Eigen::Index t = 0; t < psi.rows(); ++t) out[t] = sample_polya_gamma(in[t], rng, method);
    });
    return omega;
}

RowUpdate resample_connections_row(int n, const NetworkSample& net, const SpikeTrain& train,
                                   const FilteredRegressors& F, const Eigen::VectorXd& omega_col,
                                   const HyperParams& hp, const SamplerConfig& cfg,
                                   RngStream& rng) {
    net.validate();
    hp.validate();
    const int N = net.n_electrodes();
    const std::int64_t B = F.values.rows();
    if (n < 0 || n >= N) throw std::out_of_range("target electrode out of range");
    if (train.n_electrodes() != N || train.n_bins() != B)
        throw data_error("train does not match regressors/network");
    if (omega_col.size() != B) throw data_error("omega column length mismatch");
    for (std::int64_t t = 0; t < B; ++t) {
        if (!(omega_col(t) > 0.0)) throw data_error("omega entries must be positive");
    }

    Eigen::VectorXd kappa(B);
    for (std::int64_t t = 0; t < B; ++t)
        kappa(t) = static_cast<double>(train.at(t, n)) - 0.5;
    const Eigen::VectorXd r_col = F.values.transpose() * kappa;
    const double r_b = kappa.sum();

    Eigen::VectorXd psi0 = F.values * net.effective_weights().col(n);
    psi0.array() += net.bias(n);

    RowUpdate out;
    out.adjacency_col = net.adjacency.col(n);
    out.weight_col = net.weights.col(n);
    out.bias = net.bias(n);

    RowParams rp;
    rp.n = n;
    rp.mu_w = hp.mu_w;
    rp.s_w = hp.s_w;
    rp.mu_b = hp.mu_b;
    rp.s_b = hp.s_b;
    rp.rho = hp.rho;
    rp.allow_self = cfg.allow_self_edges;
    rp.random_scan = cfg.random_scan;
    update_row(rp, F.values, omega_col.data(), r_col.data(), r_b, psi0.data(),
               out.adjacency_col.data(), out.weight_col.data(), &out.bias, rng);
    return out;
}

PosteriorChain run_gibbs(const SpikeTrain& train, const HyperParams& hp, const SamplerConfig& cfg,
                         const NetworkSample* init) {
    hp.validate();
    cfg.validate();
    const int N = train.n_electrodes();
    const std::int64_t B = train.n_bins();

    const FilteredRegressors F = filter_spike_history(train, hp);
    const Eigen::MatrixXd R = kappa_cross(F.values, train);
    Eigen::VectorXd r_b(N);
    for (int n = 0; n < N; ++n)
        r_b(n) = static_cast<double>(train.spike_count(n)) - 0.5 * static_cast<double>(B);

    Eigen::MatrixXd A(N, N), W(N, N);
    Eigen::VectorXd b(N);
    if (init) {
        init->validate();
        if (init->n_electrodes() != N)
            throw data_error("initialization network size does not match train");
        A = init->adjacency;
        W = init->weights;
        b = init->bias;
    } else {
        for (int n = 0; n < N; ++n) {
            RngStream rng(cfg.seed, StreamPurpose::init, static_cast<std::uint64_t>(n));
            for (int m = 0; m < N; ++m) {
                A(m, n) = rng.uniform() < hp.rho ? 1.0 : 0.0;
                W(m, n) = hp.mu_w + rng.normal() * std::sqrt(hp.s_w);
            }
            b(n) = hp.mu_b;
        }
    }
    if (!cfg.allow_self_edges) A.diagonal().setZero();

    HyperState hs;
    hs.mu_w = Eigen::VectorXd::Constant(N, hp.mu_w);
    hs.s_w = Eigen::VectorXd::Constant(N, hp.s_w);
    hs.mu_b = hp.mu_b;
    hs.s_b = hp.s_b;

    Eigen::MatrixXd psi(B, N);
    psi.noalias() = F.values * A.cwiseProduct(W);
    psi.rowwise() += b.transpose();

    PosteriorChain chain;
    chain.n_electrodes = N;
    chain.electrode_indices.resize(static_cast<std::size_t>(N));
    std::iota(chain.electrode_indices.begin(), chain.electrode_indices.end(), 0);
    chain.electrode_ids = train.electrode_ids();
    chain.bin_ms = train.bin_ms();
    chain.hyper = hp;
    chain.config = cfg;

    for (int iter = 0; iter < cfg.n_iterations; ++iter) {
        const auto t_start = std::chrono::steady_clock::now();
        try {
            parallel_for(static_cast<std::size_t>(N), cfg.parallel_width, [&](std::size_t ni) {
                const int n = static_cast<int>(ni);
                const std::uint64_t ctx =
                    (static_cast<std::uint64_t>(iter) << 32) | static_cast<std::uint32_t>(n);
                RowScratch& sc = tl_scratch;
                sc.omega.resize(static_cast<std::size_t>(B));
                {
                    RngStream aux_rng(cfg.seed, StreamPurpose::auxiliary, ctx);
                    const double* pc = psi.col(n).data();
                    for (std::int64_t t = 0; t < B; ++t)
                        sc.omega[static_cast<std::size_t>(t)] =
                            sample_polya_gamma(pc[t], aux_rng, cfg.pg_method);
                }
                RowParams rp;
                rp.n = n;
                rp.mu_w = hs.mu_w(n);
                rp.s_w = hs.s_w(n);
                rp.mu_b = hs.mu_b;
                rp.s_b = hs.s_b;
                rp.rho = hp.rho;
                rp.allow_self = cfg.allow_self_edges;
                rp.random_scan = cfg.random_scan;
                RngStream row_rng(cfg.seed, StreamPurpose::row, ctx);
                update_row(rp, F.values, sc.omega.data(), R.col(n).data(), r_b(n),
                           psi.col(n).data(), A.col(n).data(), W.col(n).data(), &b(n), row_rng);
            });

            if (cfg.resample_hypers) {
                RngStream hyper_rng(cfg.seed, StreamPurpose::hyper,
                                    static_cast<std::uint64_t>(iter));
                hs = niw_step(A, W, b, hp, true, hyper_rng);
            }

            psi.noalias() = F.values * A.cwiseProduct(W);
            psi.rowwise() += b.transpose();
            const double ll = log_likelihood_from_activation(psi, train);
            chain.sweep_loglik.push_back(ll);
        } catch (const numerical_error& e) {
            throw numerical_error("sweep " + std::to_string(iter) + ": " + e.what());
        }

        const auto t_end = std::chrono::steady_clock::now();
        chain.sweep_seconds.push_back(std::chrono::duration<double>(t_end - t_start).count());

        if (iter >= cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0) {
            NetworkSample s;
            s.adjacency = A;
            s.weights = W;
            s.bias = b;
            chain.samples.push_back(std::move(s));
            chain.sample_iterations.push_back(iter);
            chain.loglik_trace.push_back(chain.sweep_loglik.back());
        }
    }
    return chain;
}

HyperState resample_niw_hyperparameters(const NetworkSample& current, const HyperParams& hp,
                                        bool resample, RngStream& rng) {
    current.validate();
    return niw_step(current.adjacency, current.weights, current.bias, hp, resample, rng);
}

} // namespace meanet
