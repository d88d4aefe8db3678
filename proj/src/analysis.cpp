#include "meanet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <queue>

#include "meanet/errors.hpp"
#include "meanet/format.hpp"
#include "meanet/parallel.hpp"

namespace meanet {

double cosine_similarity(const Eigen::MatrixXd& m1, const Eigen::MatrixXd& m2) {
    if (m1.rows() != m2.rows() || m1.cols() != m2.cols())
        throw data_error("cosine similarity needs matrices of the same shape");
    const double n1 = m1.norm();
    const double n2 = m2.norm();
    if (n1 == 0.0 || n2 == 0.0)
        throw data_error("cosine similarity is undefined for an all-zero matrix");
    return m1.cwiseProduct(m2).sum() / (n1 * n2);
}

double empirical_quantile(std::vector<double> xs, double p) {
    if (xs.empty()) throw data_error("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw config_error("quantile probability outside [0,1]");
    std::sort(xs.begin(), xs.end());
    const double h = p * static_cast<double>(xs.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= xs.size()) return xs.back();
    const double frac = h - static_cast<double>(lo);
    return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

ChainSummary summarize_chain(const PosteriorChain& chain) {
    if (chain.samples.empty()) throw data_error("cannot summarize an empty chain");
    const int N = chain.samples.front().n_electrodes();
    const double S = static_cast<double>(chain.samples.size());

    ChainSummary out;
    out.edge_probability = Eigen::MatrixXd::Zero(N, N);
    out.mean_weights = Eigen::MatrixXd::Zero(N, N);
    out.weight_lo = Eigen::MatrixXd::Zero(N, N);
    out.weight_hi = Eigen::MatrixXd::Zero(N, N);
    out.mean_bias = Eigen::VectorXd::Zero(N);

    for (const auto& s : chain.samples) {
        out.edge_probability += s.adjacency;
        out.mean_weights += s.adjacency.cwiseProduct(s.weights);
        out.mean_bias += s.bias;
    }
    out.edge_probability /= S;
    out.mean_weights /= S;
    out.mean_bias /= S;

    std::vector<double> edge(chain.samples.size());
    for (int n = 0; n < N; ++n) {
        for (int m = 0; m < N; ++m) {
            for (std::size_t i = 0; i < chain.samples.size(); ++i)
                edge[i] = chain.samples[i].adjacency(m, n) * chain.samples[i].weights(m, n);
            out.weight_lo(m, n) = empirical_quantile(edge, 0.025);
            out.weight_hi(m, n) = empirical_quantile(edge, 0.975);
        }
    }
    return out;
}

Eigen::MatrixXd threshold_network(const Eigen::MatrixXd& w_mean, const Eigen::MatrixXd& a_mean,
                                  double theta_w, double theta_a) {
    if (w_mean.rows() != a_mean.rows() || w_mean.cols() != a_mean.cols())
        throw data_error("weight and probability matrices differ in shape");
    if (!(theta_w >= 0.0)) throw config_error("theta_w must be >= 0");
    if (!(theta_a >= 0.0 && theta_a <= 1.0)) throw config_error("theta_a must lie in [0,1]");
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(w_mean.rows(), w_mean.cols());
    for (Eigen::Index n = 0; n < w_mean.cols(); ++n)
        for (Eigen::Index m = 0; m < w_mean.rows(); ++m)
            if (std::fabs(w_mean(m, n)) >= theta_w && a_mean(m, n) >= theta_a) g(m, n) = 1.0;
    return g;
}

GraphMetrics graph_metrics(const Eigen::MatrixXd& graph) {
    if (graph.rows() != graph.cols()) throw data_error("graph matrix must be square");
    const int N = static_cast<int>(graph.rows());
    if (N < 1) throw data_error("graph needs at least one node");

    GraphMetrics out;
    for (int n = 0; n < N; ++n)
        for (int m = 0; m < N; ++m)
            if (graph(m, n) != 0.0) ++out.n_connections;

    // Topology metrics use the symmetrized simple graph, diagonal dropped.
    std::vector<std::vector<int>> nbr(static_cast<std::size_t>(N));
    std::vector<std::uint8_t> und(static_cast<std::size_t>(N) * N, 0);
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            if (graph(i, j) != 0.0 || graph(j, i) != 0.0) {
                und[static_cast<std::size_t>(i) * N + j] = 1;
                und[static_cast<std::size_t>(j) * N + i] = 1;
                nbr[static_cast<std::size_t>(i)].push_back(j);
                nbr[static_cast<std::size_t>(j)].push_back(i);
            }
        }
    }

    double clust_sum = 0.0;
    for (int i = 0; i < N; ++i) {
        const auto& ni = nbr[static_cast<std::size_t>(i)];
        const std::size_t deg = ni.size();
        if (deg < 2) continue;
        std::int64_t links = 0;
        for (std::size_t a = 0; a < deg; ++a)
            for (std::size_t b = a + 1; b < deg; ++b)
                if (und[static_cast<std::size_t>(ni[a]) * N + ni[b]]) ++links;
        clust_sum += 2.0 * static_cast<double>(links) / (static_cast<double>(deg) * (deg - 1));
    }
    out.avg_clustering = clust_sum / static_cast<double>(N);

    std::int64_t pair_count = 0;
    std::int64_t dist_sum = 0;
    std::vector<int> dist(static_cast<std::size_t>(N));
    std::vector<int> frontier;
    for (int s = 0; s < N; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[static_cast<std::size_t>(s)] = 0;
        frontier.assign(1, s);
        while (!frontier.empty()) {
            std::vector<int> next;
            for (int v : frontier) {
                for (int w : nbr[static_cast<std::size_t>(v)]) {
                    if (dist[static_cast<std::size_t>(w)] < 0) {
                        dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
                        next.push_back(w);
                    }
                }
            }
            frontier = std::move(next);
        }
        for (int v = 0; v < N; ++v) {
            if (v != s && dist[static_cast<std::size_t>(v)] > 0) {
                ++pair_count;
                dist_sum += dist[static_cast<std::size_t>(v)];
            }
        }
    }
    if (pair_count > 0)
        out.avg_path_length = static_cast<double>(dist_sum) / static_cast<double>(pair_count);
    const std::int64_t ordered = static_cast<std::int64_t>(N) * (N - 1);
    out.reachable_fraction =
        ordered > 0 ? static_cast<double>(pair_count) / static_cast<double>(ordered) : 0.0;
    return out;
}

std::vector<GraphMetrics> posterior_metric_distribution(const PosteriorChain& chain,
                                                        double theta_w, double theta_a,
                                                        unsigned parallel_width) {
    if (chain.samples.empty()) throw data_error("metric distribution of an empty chain");
    std::vector<GraphMetrics> out(chain.samples.size());
    parallel_for(chain.samples.size(), parallel_width, [&](std::size_t i) {
        const auto& s = chain.samples[i];
        const Eigen::MatrixXd g = threshold_network(s.adjacency.cwiseProduct(s.weights),
                                                    s.adjacency, theta_w, theta_a);
        out[i] = graph_metrics(g);
    });
    return out;
}

DegreeProfile degree_profile(const Eigen::MatrixXd& graph) {
    if (graph.rows() != graph.cols()) throw data_error("graph matrix must be square");
    const int N = static_cast<int>(graph.rows());
    DegreeProfile out;
    out.indegree.assign(static_cast<std::size_t>(N), 0);
    out.outdegree.assign(static_cast<std::size_t>(N), 0);
    for (int n = 0; n < N; ++n) {
        for (int m = 0; m < N; ++m) {
            if (graph(m, n) != 0.0) {
                ++out.indegree[static_cast<std::size_t>(n)];
                ++out.outdegree[static_cast<std::size_t>(m)];
            }
        }
    }
    return out;
}

DetectionReport compare_to_reference(const Eigen::MatrixXd& graph,
                                     const std::vector<std::pair<int, int>>& reference_edges) {
    if (graph.rows() != graph.cols()) throw data_error("graph matrix must be square");
    if (reference_edges.empty())
        throw data_error("detection fraction is undefined for an empty reference");
    const int N = static_cast<int>(graph.rows());
    std::vector<std::uint8_t> in_ref(static_cast<std::size_t>(N) * N, 0);
    std::int64_t hits = 0;
    DetectionReport out;
    for (const auto& [m, n] : reference_edges) {
        if (m < 0 || m >= N || n < 0 || n >= N)
            throw data_error("reference edge index out of range");
        in_ref[static_cast<std::size_t>(m) * N + n] = 1;
        if (graph(m, n) != 0.0) {
            ++hits;
        } else {
            out.missed_edges.emplace_back(m, n);
        }
    }
    out.fraction_detected = static_cast<double>(hits) / static_cast<double>(reference_edges.size());
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n)
            if (graph(m, n) != 0.0 && !in_ref[static_cast<std::size_t>(m) * N + n])
                ++out.extra_edges;
    return out;
}

void write_metrics_csv(const std::vector<GraphMetrics>& rows, std::ostream& sink) {
    sink << "sample,n_connections,avg_clustering,avg_path_length,reachable_fraction\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        sink << i << ',' << rows[i].n_connections << ',' << fmt_double(rows[i].avg_clustering)
             << ',' << fmt_double(rows[i].avg_path_length) << ','
             << fmt_double(rows[i].reachable_fraction) << '\n';
    }
}

void write_metrics_csv_file(const std::string& path, const std::vector<GraphMetrics>& rows) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw data_error("cannot open " + path + " for writing");
    write_metrics_csv(rows, f);
    if (!f.good()) throw data_error("failed writing " + path);
}

} // namespace meanet
