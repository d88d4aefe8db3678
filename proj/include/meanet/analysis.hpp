#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "meanet/sampler.hpp"

namespace meanet {

// Normalized inner product of the flattened matrices, in [-1, 1].
// Throws data_error on shape mismatch or when either matrix is all zero.
double cosine_similarity(const Eigen::MatrixXd& m1, const Eigen::MatrixXd& m2);

struct ChainSummary {
    Eigen::MatrixXd edge_probability;  // elementwise mean of A
    Eigen::MatrixXd mean_weights;      // elementwise mean of A .* W
    Eigen::MatrixXd weight_lo;         // 2.5% empirical quantile of A .* W
    Eigen::MatrixXd weight_hi;         // 97.5% empirical quantile
    Eigen::VectorXd mean_bias;
};

ChainSummary summarize_chain(const PosteriorChain& chain);

// Binary graph: edge m->n kept iff |w_mean| >= theta_w and a_mean >= theta_a
// (both inclusive).
Eigen::MatrixXd threshold_network(const Eigen::MatrixXd& w_mean, const Eigen::MatrixXd& a_mean,
                                  double theta_w = 0.05, double theta_a = 0.5);

struct GraphMetrics {
    std::int64_t n_connections = 0;  // directed edges, self-edges included in the count
    double avg_clustering = 0.0;     // mean local coefficient, symmetrized simple graph
    double avg_path_length = 0.0;    // mean BFS distance over ordered reachable pairs; 0 if none
    double reachable_fraction = 0.0;
};

GraphMetrics graph_metrics(const Eigen::MatrixXd& graph);

// Per retained sample: threshold that sample's A-masked W, then measure.
std::vector<GraphMetrics> posterior_metric_distribution(const PosteriorChain& chain,
                                                        double theta_w = 0.05,
                                                        double theta_a = 0.5,
                                                        unsigned parallel_width = 0);

struct DegreeProfile {
    std::vector<std::int64_t> indegree;
    std::vector<std::int64_t> outdegree;
};

DegreeProfile degree_profile(const Eigen::MatrixXd& graph);

struct DetectionReport {
    double fraction_detected = 0.0;
    std::vector<std::pair<int, int>> missed_edges;  // reference edges absent from the graph
    std::int64_t extra_edges = 0;                   // graph edges not in the reference
};

DetectionReport compare_to_reference(const Eigen::MatrixXd& graph,
                                     const std::vector<std::pair<int, int>>& reference_edges);

// Linear-interpolation empirical quantile of an unsorted copy of xs.
double empirical_quantile(std::vector<double> xs, double p);

// CSV: sample,n_connections,avg_clustering,avg_path_length,reachable_fraction
void write_metrics_csv(const std::vector<GraphMetrics>& rows, std::ostream& sink);
void write_metrics_csv_file(const std::string& path, const std::vector<GraphMetrics>& rows);

} // namespace meanet
