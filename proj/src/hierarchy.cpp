#include "meanet/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "meanet/analysis.hpp"
#include "meanet/errors.hpp"
#include "meanet/parallel.hpp"

namespace meanet {

using nlohmann::json;

void RegionLayout::validate(int n_electrodes) const {
    if (regions.empty()) throw data_error("layout has no regions");
    std::vector<int> owners(static_cast<std::size_t>(n_electrodes), 0);
    for (const auto& region : regions) {
        if (region.empty()) throw data_error("layout contains an empty region");
        std::set<int> seen;
        for (int e : region) {
            if (e < 0 || e >= n_electrodes)
                throw data_error("layout electrode index " + std::to_string(e) +
                                 " out of range");
            if (!seen.insert(e).second)
                throw data_error("electrode " + std::to_string(e) + " repeated within a region");
            ++owners[static_cast<std::size_t>(e)];
        }
    }
    for (int e = 0; e < n_electrodes; ++e) {
        if (owners[static_cast<std::size_t>(e)] == 0)
            throw data_error("electrode " + std::to_string(e) + " belongs to no region");
    }

    std::vector<std::set<int>> region_sets;
    region_sets.reserve(regions.size());
    for (const auto& r : regions) region_sets.emplace_back(r.begin(), r.end());

    std::set<int> in_overlap;
    for (const auto& p : overlap_pairs) {
        const int k = static_cast<int>(regions.size());
        if (p.first_region < 0 || p.first_region >= k || p.second_region < 0 ||
            p.second_region >= k || p.first_region == p.second_region)
            throw data_error("overlap pair names an invalid region");
        if (overlap_count > 0 && static_cast<int>(p.electrodes.size()) != overlap_count)
            throw data_error("overlap set size differs from the declared overlap count");
        for (int e : p.electrodes) {
            if (!region_sets[static_cast<std::size_t>(p.first_region)].count(e) ||
                !region_sets[static_cast<std::size_t>(p.second_region)].count(e))
                throw data_error("overlap electrode " + std::to_string(e) +
                                 " is not a member of both joined regions");
            in_overlap.insert(e);
        }
    }
    for (int e = 0; e < n_electrodes; ++e) {
        if (owners[static_cast<std::size_t>(e)] > 1 && !in_overlap.count(e))
            throw data_error("electrode " + std::to_string(e) +
                             " is shared by regions without a declared overlap pair");
    }
    if (mean_threshold_mode && !(mean_threshold >= 0.0 && mean_threshold < 1.0))
        throw config_error("aggregation mean threshold must lie in [0,1)");
}

namespace {

struct Grid {
    int rows = 0, cols = 0;
    std::vector<int> at;  // electrode index per cell, row-major
};

Grid grid_from(const std::vector<ElectrodePosition>& geometry) {
    if (geometry.empty()) throw data_error("empty geometry");
    Grid g;
    for (const auto& p : geometry) {
        if (p.row < 0 || p.col < 0) throw data_error("negative grid coordinates");
        g.rows = std::max(g.rows, p.row + 1);
        g.cols = std::max(g.cols, p.col + 1);
    }
    if (static_cast<std::size_t>(g.rows) * g.cols != geometry.size())
        throw data_error("geometry does not fill a complete grid");
    g.at.assign(geometry.size(), -1);
    for (std::size_t e = 0; e < geometry.size(); ++e) {
        const std::size_t cell =
            static_cast<std::size_t>(geometry[e].row) * g.cols + geometry[e].col;
        if (g.at[cell] != -1) throw data_error("duplicate grid position in geometry");
        g.at[cell] = static_cast<int>(e);
    }
    return g;
}

std::vector<int> band_bounds(int extent, int bands) {
    std::vector<int> b(static_cast<std::size_t>(bands) + 1);
    for (int s = 0; s <= bands; ++s)
        b[static_cast<std::size_t>(s)] =
            static_cast<int>((static_cast<std::int64_t>(extent) * s) / bands);
    return b;
}

} // namespace

RegionLayout plan_split_grid(const std::vector<ElectrodePosition>& geometry, int row_bands,
                             int col_bands, int overlap) {
    if (row_bands < 1 || col_bands < 1) throw config_error("band counts must be >= 1");
    if (overlap < 0 || overlap % 2 != 0) throw config_error("overlap must be even and >= 0");
    const Grid grid = grid_from(geometry);
    const std::int64_t k = static_cast<std::int64_t>(row_bands) * col_bands;
    if (k > static_cast<std::int64_t>(geometry.size()))
        throw config_error("region count exceeds electrode count");
    if (row_bands > grid.rows || col_bands > grid.cols)
        throw config_error("more bands than grid rows/cols");

    const std::vector<int> rb = band_bounds(grid.rows, row_bands);
    const std::vector<int> cb = band_bounds(grid.cols, col_bands);

    const auto block_members = [&](int sr, int sc) {
        std::vector<int> out;
        for (int r = rb[static_cast<std::size_t>(sr)]; r < rb[static_cast<std::size_t>(sr) + 1];
             ++r)
            for (int c = cb[static_cast<std::size_t>(sc)];
                 c < cb[static_cast<std::size_t>(sc) + 1]; ++c)
                out.push_back(grid.at[static_cast<std::size_t>(r) * grid.cols + c]);
        std::sort(out.begin(), out.end());
        return out;
    };

    RegionLayout layout;
    layout.overlap_count = overlap;
    std::vector<std::vector<int>> base;
    for (int sr = 0; sr < row_bands; ++sr)
        for (int sc = 0; sc < col_bands; ++sc) base.push_back(block_members(sr, sc));

    std::size_t min_base = base.front().size();
    for (const auto& b : base) min_base = std::min(min_base, b.size());
    if (overlap > static_cast<int>(min_base))
        throw config_error("overlap exceeds the smallest region size");

    std::vector<std::set<int>> extended;
    extended.reserve(base.size());
    for (const auto& b : base) extended.emplace_back(b.begin(), b.end());

    if (overlap > 0) {
        // nearest = smallest |coordinate - border|, ties to the lower index
        const auto nearest = [&](const std::vector<int>& members, double border, bool use_col) {
            std::vector<std::pair<double, int>> ranked;
            ranked.reserve(members.size());
            for (int e : members) {
                const double coord = use_col ? geometry[static_cast<std::size_t>(e)].col
                                             : geometry[static_cast<std::size_t>(e)].row;
                ranked.emplace_back(std::fabs(coord - border), e);
            }
            std::sort(ranked.begin(), ranked.end());
            std::vector<int> out;
            for (int i = 0; i < overlap / 2; ++i)
                out.push_back(ranked[static_cast<std::size_t>(i)].second);
            return out;
        };
        const auto add_pair = [&](int i, int j, double border, bool use_col) {
            std::vector<int> shared = nearest(base[static_cast<std::size_t>(i)], border, use_col);
            const std::vector<int> from_j =
                nearest(base[static_cast<std::size_t>(j)], border, use_col);
            shared.insert(shared.end(), from_j.begin(), from_j.end());
            std::sort(shared.begin(), shared.end());
            for (int e : shared) {
                extended[static_cast<std::size_t>(i)].insert(e);
                extended[static_cast<std::size_t>(j)].insert(e);
            }
            layout.overlap_pairs.push_back({i, j, std::move(shared)});
        };
        for (int sr = 0; sr < row_bands; ++sr) {
            for (int sc = 0; sc + 1 < col_bands; ++sc) {
                const double border = cb[static_cast<std::size_t>(sc) + 1] - 0.5;
                add_pair(sr * col_bands + sc, sr * col_bands + sc + 1, border, true);
            }
        }
        for (int sr = 0; sr + 1 < row_bands; ++sr) {
            for (int sc = 0; sc < col_bands; ++sc) {
                const double border = rb[static_cast<std::size_t>(sr) + 1] - 0.5;
                add_pair(sr * col_bands + sc, (sr + 1) * col_bands + sc, border, false);
            }
        }
    }

    for (const auto& s : extended) layout.regions.emplace_back(s.begin(), s.end());
    layout.validate(static_cast<int>(geometry.size()));
    return layout;
}

RegionLayout plan_split(const std::vector<ElectrodePosition>& geometry, int k_regions,
                        int overlap) {
    if (k_regions < 1) throw config_error("k_regions must be >= 1");
    const Grid grid = grid_from(geometry);
    if (k_regions > static_cast<int>(geometry.size()))
        throw config_error("region count exceeds electrode count");

    // a row bands x b col bands with a*b = k; pick the most square blocks.
    int best_a = -1, best_b = -1;
    std::int64_t best_score = 0;
    for (int a = 1; a <= k_regions; ++a) {
        if (k_regions % a != 0) continue;
        const int b = k_regions / a;
        if (a > grid.rows || b > grid.cols) continue;
        const std::int64_t score = std::llabs(static_cast<std::int64_t>(a) * grid.cols -
                                              static_cast<std::int64_t>(b) * grid.rows);
        if (best_a < 0 || score < best_score) {
            best_a = a;
            best_b = b;
            best_score = score;
        }
    }
    if (best_a < 0)
        throw config_error("no row x col band arrangement fits " + std::to_string(k_regions) +
                           " regions on this grid");
    return plan_split_grid(geometry, best_a, best_b, overlap);
}

SpikeTrain aggregate_regions(const SpikeTrain& train, const RegionLayout& layout) {
    layout.validate(train.n_electrodes());
    const int k = static_cast<int>(layout.regions.size());
    const std::int64_t B = train.n_bins();
    const int N = train.n_electrodes();
    const auto& data = train.data();

    std::vector<std::uint8_t> out(static_cast<std::size_t>(B) * k, 0);
    for (int r = 0; r < k; ++r) {
        const auto& members = layout.regions[static_cast<std::size_t>(r)];
        const double size = static_cast<double>(members.size());
        for (std::int64_t t = 0; t < B; ++t) {
            int sum = 0;
            const std::uint8_t* row = &data[static_cast<std::size_t>(t) * N];
            for (int e : members) sum += row[e];
            const bool fire = layout.mean_threshold_mode
                                  ? (static_cast<double>(sum) / size > layout.mean_threshold)
                                  : (sum > 0);
            out[static_cast<std::size_t>(t) * k + r] = fire ? 1 : 0;
        }
    }

    std::vector<ElectrodePosition> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    for (const auto& members : layout.regions) {
        double rsum = 0, csum = 0;
        for (int e : members) {
            rsum += train.geometry()[static_cast<std::size_t>(e)].row;
            csum += train.geometry()[static_cast<std::size_t>(e)].col;
        }
        centroids.push_back({static_cast<int>(std::llround(rsum / members.size())),
                             static_cast<int>(std::llround(csum / members.size()))});
    }
    bool distinct = true;
    for (int i = 0; i < k && distinct; ++i)
        for (int j = i + 1; j < k; ++j)
            if (centroids[static_cast<std::size_t>(i)] == centroids[static_cast<std::size_t>(j)]) {
                distinct = false;
                break;
            }
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) ids.push_back("R" + std::to_string(r));
    if (distinct) return SpikeTrain::build(k, B, train.bin_ms(), std::move(out), centroids, ids);
    return SpikeTrain::build(k, B, train.bin_ms(), std::move(out), grid_geometry(k), ids, true);
}

HierarchicalResult infer_hierarchical(const SpikeTrain& train, const RegionLayout& layout,
                                      const HyperParams& hp, const SamplerConfig& cfg,
                                      unsigned region_jobs) {
    layout.validate(train.n_electrodes());
    const std::size_t k = layout.regions.size();

    HierarchicalResult out;
    out.region_chains.resize(k);
    parallel_for(k, region_jobs == 0 ? 1 : region_jobs, [&](std::size_t r) {
        SamplerConfig rc = cfg;
        rc.seed = cfg.seed + static_cast<std::uint64_t>(r);
        const SpikeTrain sub = train.select_electrodes(layout.regions[r]);
        out.region_chains[r] = run_gibbs(sub, hp, rc);
        out.region_chains[r].electrode_indices = layout.regions[r];
    });

    SamplerConfig rc = cfg;
    rc.seed = cfg.seed + static_cast<std::uint64_t>(k);
    out.regional_chain = run_gibbs(aggregate_regions(train, layout), hp, rc);
    return out;
}

MergedSummary merge_region_posteriors(const std::vector<PosteriorChain>& chains,
                                      const RegionLayout& layout, int n_electrodes) {
    layout.validate(n_electrodes);
    if (chains.size() != layout.regions.size())
        throw data_error("chain count differs from region count");
    for (std::size_t r = 0; r < chains.size(); ++r) {
        if (chains[r].electrode_indices != layout.regions[r])
            throw data_error("region " + std::to_string(r) +
                             " chain carries a different electrode mapping than the layout");
    }

    MergedSummary out;
    out.edge_probability = Eigen::MatrixXd::Zero(n_electrodes, n_electrodes);
    out.mean_weights = Eigen::MatrixXd::Zero(n_electrodes, n_electrodes);
    Eigen::MatrixXd count = Eigen::MatrixXd::Zero(n_electrodes, n_electrodes);

    for (std::size_t r = 0; r < chains.size(); ++r) {
        const ChainSummary s = summarize_chain(chains[r]);
        const auto& idx = layout.regions[r];
        for (std::size_t b = 0; b < idx.size(); ++b) {
            for (std::size_t a = 0; a < idx.size(); ++a) {
                out.edge_probability(idx[a], idx[b]) += s.edge_probability(
                    static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                out.mean_weights(idx[a], idx[b]) +=
                    s.mean_weights(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                count(idx[a], idx[b]) += 1.0;
            }
        }
    }
    out.estimated = (count.array() > 0.0).cast<double>();
    for (int n = 0; n < n_electrodes; ++n) {
        for (int m = 0; m < n_electrodes; ++m) {
            if (count(m, n) > 0.0) {
                out.edge_probability(m, n) /= count(m, n);
                out.mean_weights(m, n) /= count(m, n);
            }
        }
    }
    return out;
}

void write_layout(const RegionLayout& layout, const std::string& path) {
    json j;
    j["regions"] = layout.regions;
    json pairs = json::array();
    for (const auto& p : layout.overlap_pairs)
        pairs.push_back(json::array({p.first_region, p.second_region, p.electrodes}));
    j["overlap_pairs"] = std::move(pairs);
    if (layout.mean_threshold_mode)
        j["aggregation"] = json{{"mean-threshold", layout.mean_threshold}};
    else
        j["aggregation"] = "any-spike";

    std::ofstream f(path, std::ios::binary);
    if (!f) throw data_error("cannot open " + path + " for writing");
    f << j.dump(2) << '\n';
    if (!f.good()) throw data_error("failed writing " + path);
}

RegionLayout read_layout(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw data_error("cannot open layout file " + path);
    RegionLayout layout;
    try {
        json j;
        f >> j;
        layout.regions = j.at("regions").get<std::vector<std::vector<int>>>();
        for (const auto& p : j.at("overlap_pairs")) {
            RegionLayout::OverlapPair pair;
            pair.first_region = p.at(0).get<int>();
            pair.second_region = p.at(1).get<int>();
            pair.electrodes = p.at(2).get<std::vector<int>>();
            layout.overlap_pairs.push_back(std::move(pair));
        }
        const auto& agg = j.at("aggregation");
        if (agg.is_string()) {
            if (agg.get<std::string>() != "any-spike")
                throw data_error("unknown aggregation rule '" + agg.get<std::string>() + "'");
        } else {
            layout.mean_threshold_mode = true;
            layout.mean_threshold = agg.at("mean-threshold").get<double>();
        }
    } catch (const json::exception& e) {
        throw data_error(path + ": " + e.what());
    }
    if (!layout.overlap_pairs.empty())
        layout.overlap_count = static_cast<int>(layout.overlap_pairs.front().electrodes.size());
    return layout;
}

} // namespace meanet
