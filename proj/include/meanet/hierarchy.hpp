#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "meanet/sampler.hpp"
#include "meanet/spike_train.hpp"

namespace meanet {

// Partition of an electrode array into regions, optionally sharing overlap
// electrodes across adjacent region borders.
struct RegionLayout {
    std::vector<std::vector<int>> regions;  // global electrode indices, ascending

    struct OverlapPair {
        int first_region = 0;
        int second_region = 0;
        std::vector<int> electrodes;  // shared members, ascending
    };
    std::vector<OverlapPair> overlap_pairs;
    int overlap_count = 0;  // electrodes per overlap set (0 = disjoint regions)

    bool mean_threshold_mode = false;  // false: any-spike aggregation
    double mean_threshold = 0.5;       // used only in mean-threshold mode

    // Coverage, index ranges, overlap-set consistency; throws data_error.
    void validate(int n_electrodes) const;
};

// Split a full grid into k near-equal contiguous rectangular blocks; with
// overlap > 0 each adjacent block pair shares the `overlap` electrodes
// nearest their border (overlap/2 drawn from each side).
RegionLayout plan_split(const std::vector<ElectrodePosition>& geometry, int k_regions,
                        int overlap = 0);

// Same, with the row-band x col-band arrangement given explicitly.
RegionLayout plan_split_grid(const std::vector<ElectrodePosition>& geometry, int row_bands,
                             int col_bands, int overlap = 0);

// One super-electrode per region; a region fires in a bin when the mean of
// its members' values exceeds 0 (any-spike) or the configured threshold.
SpikeTrain aggregate_regions(const SpikeTrain& train, const RegionLayout& layout);

struct HierarchicalResult {
    std::vector<PosteriorChain> region_chains;  // level 1, one per region
    PosteriorChain regional_chain;              // level 2, over super-electrodes
};

// Level 1 runs use seed + region index, level 2 uses seed + region count, so
// a k=1 split reproduces a plain run_gibbs on the same data bit-for-bit.
HierarchicalResult infer_hierarchical(const SpikeTrain& train, const RegionLayout& layout,
                                      const HyperParams& hp, const SamplerConfig& cfg,
                                      unsigned region_jobs = 1);

// Electrode-level merge of per-region posterior summaries. Entries estimated
// by several regions (overlap) are averaged; entries no region estimated are
// zero with estimated(m,n) = 0.
struct MergedSummary {
    Eigen::MatrixXd edge_probability;
    Eigen::MatrixXd mean_weights;
    Eigen::MatrixXd estimated;  // 1 = estimated at electrode level
};

MergedSummary merge_region_posteriors(const std::vector<PosteriorChain>& chains,
                                      const RegionLayout& layout, int n_electrodes);

// JSON layout file.
void write_layout(const RegionLayout& layout, const std::string& path);
RegionLayout read_layout(const std::string& path);

} // namespace meanet
