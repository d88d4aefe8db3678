#include "meanet/network.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "meanet/errors.hpp"
#include "meanet/format.hpp"

namespace meanet {

void NetworkSample::validate() const {
    const Eigen::Index n = bias.size();
    if (n < 1) throw data_error("network must have at least one electrode");
    if (adjacency.rows() != n || adjacency.cols() != n)
        throw data_error("adjacency must be N x N with N matching bias length");
    if (weights.rows() != n || weights.cols() != n)
        throw data_error("weights must be N x N with N matching bias length");
    for (Eigen::Index m = 0; m < n; ++m) {
        for (Eigen::Index c = 0; c < n; ++c) {
            const double a = adjacency(m, c);
            if (a != 0.0 && a != 1.0)
                throw data_error("adjacency entries must be 0 or 1");
            if (!std::isfinite(weights(m, c)))
                throw data_error("weights must be finite");
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(bias(i))) throw data_error("bias must be finite");
    }
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write '" + path + "'");
    out << "# mea-netinfer network v1, N=" << m.rows() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << fmt_double(m(r, c));
        }
        out << '\n';
    }
    out.flush();
    if (!out) throw data_error("failed writing '" + path + "'");
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("# mea-netinfer network v1", 0) != 0)
        throw data_error("'" + path + "': missing network v1 header");
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (used != cell.size() && cell.find_first_not_of(" \t", used) != std::string::npos)
                    throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw data_error("'" + path + "' line " + std::to_string(line_no) +
                                 ": bad number '" + cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw data_error("'" + path + "' line " + std::to_string(line_no) +
                             ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw data_error("'" + path + "': no data rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    return m;
}

void write_network(const std::string& dir, const NetworkSample& net) {
    net.validate();
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    write_matrix_csv((base / "adjacency.csv").string(), net.adjacency);
    write_matrix_csv((base / "weights.csv").string(), net.weights);
    write_matrix_csv((base / "bias.csv").string(), net.bias);
}

NetworkSample read_network(const std::string& dir) {
    const std::filesystem::path base(dir);
    NetworkSample net;
    net.adjacency = read_matrix_csv((base / "adjacency.csv").string());
    Eigen::MatrixXd bias = read_matrix_csv((base / "bias.csv").string());
    net.weights = read_matrix_csv((base / "weights.csv").string());
    if (bias.cols() != 1) throw data_error("bias.csv must have one column");
    net.bias = bias.col(0);
    net.validate();
    return net;
}

} // namespace meanet
