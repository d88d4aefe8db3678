#pragma once

#include <Eigen/Dense>
#include <string>

namespace meanet {

// One realization of the latent network. Index convention, used everywhere:
// first index = source electrode m, second index = target electrode n, so
// adjacency(m, n) is the edge m -> n. Adjacency entries are 0/1 stored as
// doubles; weights are defined for every entry (analysis masks by adjacency).
struct NetworkSample {
    Eigen::MatrixXd adjacency;
    Eigen::MatrixXd weights;
    Eigen::VectorXd bias;

    int n_electrodes() const { return static_cast<int>(bias.size()); }
    Eigen::MatrixXd effective_weights() const { return adjacency.cwiseProduct(weights); }
    void validate() const;  // throws data_error
};

// Matrix CSV with the `# mea-netinfer network v1, N=<rows>` header line.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

// adjacency.csv / weights.csv / bias.csv inside dir.
void write_network(const std::string& dir, const NetworkSample& net);
NetworkSample read_network(const std::string& dir);

} // namespace meanet
