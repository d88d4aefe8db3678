#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace meanet {

struct ElectrodePosition {
    int row = 0;
    int col = 0;
    friend bool operator==(const ElectrodePosition& a, const ElectrodePosition& b) {
        return a.row == b.row && a.col == b.col;
    }
};

struct SpikeEvent {
    double time_ms = 0.0;
    int electrode = 0;
};

// Binned binary spike matrix with electrode geometry. Immutable after
// construction; entries live in a row-major [bin][electrode] byte array.
class SpikeTrain {
public:
    SpikeTrain() = default;

    // Validates every invariant (0/1 entries, distinct geometry, distinct
    // non-empty ids, positive bin width) and throws data_error on violation.
    static SpikeTrain build(int n_electrodes, std::int64_t n_bins, double bin_ms,
                            std::vector<std::uint8_t> data,
                            std::vector<ElectrodePosition> geometry,
                            std::vector<std::string> ids,
                            bool geometry_synthesized = false);

    int n_electrodes() const { return n_electrodes_; }
    std::int64_t n_bins() const { return n_bins_; }
    double bin_ms() const { return bin_ms_; }
    bool geometry_synthesized() const { return geometry_synthesized_; }

    std::uint8_t at(std::int64_t t, int n) const;
    const std::vector<std::uint8_t>& data() const { return data_; }
    const std::vector<ElectrodePosition>& geometry() const { return geometry_; }
    const std::vector<std::string>& electrode_ids() const { return ids_; }

    std::int64_t spike_count() const;
    std::int64_t spike_count(int electrode) const;

    // Events at bin centers, (t + 0.5) * bin_ms, so re-binning at the same
    // width reproduces the train exactly.
    std::vector<SpikeEvent> extract_events() const;

    // New train holding the listed electrodes, in the listed order.
    SpikeTrain select_electrodes(const std::vector<int>& keep) const;

    // Payload equality; the geometry_synthesized diagnostic flag does not
    // participate (it cannot round-trip through the file format).
    friend bool operator==(const SpikeTrain& a, const SpikeTrain& b);

private:
    int n_electrodes_ = 0;
    std::int64_t n_bins_ = 0;
    double bin_ms_ = 1.0;
    std::vector<std::uint8_t> data_;
    std::vector<ElectrodePosition> geometry_;
    std::vector<std::string> ids_;
    bool geometry_synthesized_ = false;
};

// Row-major near-square grid (wider than tall), used when data carries no
// geometry of its own.
std::vector<ElectrodePosition> grid_geometry(int n_electrodes);
std::vector<std::string> default_electrode_ids(int n_electrodes);

struct BinResult {
    SpikeTrain train;
    std::int64_t collapsed_events = 0;  // same-bin duplicates dropped
};

BinResult bin_spike_events(const std::vector<SpikeEvent>& events, int n_electrodes,
                           double bin_ms, double duration_ms,
                           std::vector<ElectrodePosition> geometry = {},
                           std::vector<std::string> ids = {});

// MEASPIKES v1 text format.
SpikeTrain read_spike_train(std::istream& source);
void write_spike_train(const SpikeTrain& train, std::ostream& sink);
SpikeTrain read_spike_train_file(const std::string& path);
void write_spike_train_file(const std::string& path, const SpikeTrain& train);

} // namespace meanet
