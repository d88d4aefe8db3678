#include "meanet/spike_train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "meanet/errors.hpp"
#include "meanet/format.hpp"

namespace meanet {

SpikeTrain SpikeTrain::build(int n_electrodes, std::int64_t n_bins, double bin_ms,
                             std::vector<std::uint8_t> data,
                             std::vector<ElectrodePosition> geometry,
                             std::vector<std::string> ids,
                             bool geometry_synthesized) {
    if (n_electrodes < 1) throw data_error("spike train needs at least one electrode");
    if (n_bins < 1) throw data_error("spike train needs at least one bin");
    if (!(bin_ms > 0.0) || !std::isfinite(bin_ms)) throw data_error("bin_ms must be positive and finite");
    if (data.size() != static_cast<std::size_t>(n_bins) * static_cast<std::size_t>(n_electrodes))
        throw data_error("spike data size does not match n_bins * n_electrodes");
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i] > 1)
            throw data_error("spike data entry " + std::to_string(i) + " is not 0 or 1");
    }

    if (geometry.empty()) {
        geometry = grid_geometry(n_electrodes);
        geometry_synthesized = true;
    }
    if (geometry.size() != static_cast<std::size_t>(n_electrodes))
        throw data_error("geometry size does not match n_electrodes");
    std::set<std::pair<int, int>> seen;
    for (const auto& g : geometry) {
        if (!seen.insert({g.row, g.col}).second)
            throw data_error("duplicate geometry position (" + std::to_string(g.row) + "," +
                             std::to_string(g.col) + ")");
    }

    if (ids.empty()) ids = default_electrode_ids(n_electrodes);
    if (ids.size() != static_cast<std::size_t>(n_electrodes))
        throw data_error("electrode id count does not match n_electrodes");
    std::set<std::string> id_seen;
    for (const auto& id : ids) {
        if (id.empty()) throw data_error("empty electrode id");
        if (id.find_first_of(" \t\r\n") != std::string::npos)
            throw data_error("electrode id '" + id + "' contains whitespace");
        if (!id_seen.insert(id).second) throw data_error("duplicate electrode id '" + id + "'");
    }

    SpikeTrain t;
    t.n_electrodes_ = n_electrodes;
    t.n_bins_ = n_bins;
    t.bin_ms_ = bin_ms;
    t.data_ = std::move(data);
    t.geometry_ = std::move(geometry);
    t.ids_ = std::move(ids);
    t.geometry_synthesized_ = geometry_synthesized;
    return t;
}

std::uint8_t SpikeTrain::at(std::int64_t t, int n) const {
    if (t < 0 || t >= n_bins_) throw std::out_of_range("bin index out of range");
    if (n < 0 || n >= n_electrodes_) throw std::out_of_range("electrode index out of range");
    return data_[static_cast<std::size_t>(t) * n_electrodes_ + n];
}

std::int64_t SpikeTrain::spike_count() const {
    std::int64_t c = 0;
    for (std::uint8_t v : data_) c += v;
    return c;
}

std::int64_t SpikeTrain::spike_count(int electrode) const {
    if (electrode < 0 || electrode >= n_electrodes_)
        throw std::out_of_range("electrode index out of range");
    std::int64_t c = 0;
    for (std::int64_t t = 0; t < n_bins_; ++t)
        c += data_[static_cast<std::size_t>(t) * n_electrodes_ + electrode];
    return c;
}

std::vector<SpikeEvent> SpikeTrain::extract_events() const {
    std::vector<SpikeEvent> events;
    events.reserve(static_cast<std::size_t>(spike_count()));
    for (std::int64_t t = 0; t < n_bins_; ++t) {
        for (int n = 0; n < n_electrodes_; ++n) {
            if (data_[static_cast<std::size_t>(t) * n_electrodes_ + n])
                events.push_back({(static_cast<double>(t) + 0.5) * bin_ms_, n});
        }
    }
    return events;
}

SpikeTrain SpikeTrain::select_electrodes(const std::vector<int>& keep) const {
    if (keep.empty()) throw data_error("electrode selection is empty");
    for (int n : keep) {
        if (n < 0 || n >= n_electrodes_)
            throw data_error("electrode selection index " + std::to_string(n) + " out of range");
    }
    const int k = static_cast<int>(keep.size());
    std::vector<std::uint8_t> sub(static_cast<std::size_t>(n_bins_) * k);
    for (std::int64_t t = 0; t < n_bins_; ++t) {
        const std::uint8_t* row = &data_[static_cast<std::size_t>(t) * n_electrodes_];
        std::uint8_t* out = &sub[static_cast<std::size_t>(t) * k];
        for (int i = 0; i < k; ++i) out[i] = row[keep[i]];
    }
    std::vector<ElectrodePosition> geom(k);
    std::vector<std::string> ids(k);
    for (int i = 0; i < k; ++i) {
        geom[i] = geometry_[keep[i]];
        ids[i] = ids_[keep[i]];
    }
    return build(k, n_bins_, bin_ms_, std::move(sub), std::move(geom), std::move(ids),
                 geometry_synthesized_);
}

bool operator==(const SpikeTrain& a, const SpikeTrain& b) {
    return a.n_electrodes_ == b.n_electrodes_ && a.n_bins_ == b.n_bins_ &&
           a.bin_ms_ == b.bin_ms_ && a.data_ == b.data_ && a.geometry_ == b.geometry_ &&
           a.ids_ == b.ids_;
}

std::vector<ElectrodePosition> grid_geometry(int n_electrodes) {
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_electrodes))));
    std::vector<ElectrodePosition> geom(n_electrodes);
    for (int i = 0; i < n_electrodes; ++i) geom[i] = {i / cols, i % cols};
    return geom;
}

std::vector<std::string> default_electrode_ids(int n_electrodes) {
    std::vector<std::string> ids(n_electrodes);
    for (int i = 0; i < n_electrodes; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "E%03d", i);
        ids[i] = buf;
    }
    return ids;
}

BinResult bin_spike_events(const std::vector<SpikeEvent>& events, int n_electrodes,
                           double bin_ms, double duration_ms,
                           std::vector<ElectrodePosition> geometry,
                           std::vector<std::string> ids) {
    if (n_electrodes < 1) throw data_error("bin_spike_events: need at least one electrode");
    if (!(bin_ms > 0.0)) throw data_error("bin_spike_events: bin_ms must be positive");
    if (!(duration_ms > 0.0)) throw data_error("bin_spike_events: duration_ms must be positive");
    const std::int64_t n_bins = static_cast<std::int64_t>(std::ceil(duration_ms / bin_ms));
    std::vector<std::uint8_t> data(static_cast<std::size_t>(n_bins) * n_electrodes, 0);
    std::int64_t collapsed = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (e.electrode < 0 || e.electrode >= n_electrodes)
            throw data_error("event " + std::to_string(i) + ": electrode index " +
                             std::to_string(e.electrode) + " out of range");
        if (!(e.time_ms >= 0.0) || !(e.time_ms < duration_ms))
            throw data_error("event " + std::to_string(i) + ": time " + fmt_double(e.time_ms) +
                             " outside [0, duration)");
        std::int64_t bin = static_cast<std::int64_t>(e.time_ms / bin_ms);
        if (bin >= n_bins) bin = n_bins - 1;
        std::uint8_t& cell = data[static_cast<std::size_t>(bin) * n_electrodes + e.electrode];
        if (cell)
            ++collapsed;
        else
            cell = 1;
    }
    BinResult r;
    r.train = SpikeTrain::build(n_electrodes, n_bins, bin_ms, std::move(data),
                                std::move(geometry), std::move(ids));
    r.collapsed_events = collapsed;
    return r;
}

namespace {

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
    throw data_error("line " + std::to_string(line_no) + ": " + what);
}

// Next content line: skips blank lines and `#` comment lines.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (line[first] == '#') continue;
        return true;
    }
    return false;
}

} // namespace

SpikeTrain read_spike_train(std::istream& source) {
    std::string line;
    std::size_t line_no = 0;

    if (!next_line(source, line, line_no)) throw data_error("empty spike train file");
    {
        std::istringstream h(line);
        std::string magic;
        int version = 0;
        std::string extra;
        if (!(h >> magic >> version) || magic != "MEASPIKES" || (h >> extra))
            parse_fail(line_no, "expected header 'MEASPIKES 1'");
        if (version != 1)
            parse_fail(line_no, "unsupported MEASPIKES version " + std::to_string(version));
    }

    if (!next_line(source, line, line_no)) throw data_error("missing dimensions line");
    int n_electrodes = 0;
    std::int64_t n_bins = 0;
    double bin_ms = 0.0;
    {
        std::istringstream d(line);
        std::string extra;
        if (!(d >> n_electrodes >> n_bins >> bin_ms) || (d >> extra))
            parse_fail(line_no, "expected '<n_electrodes> <n_bins> <bin_ms>'");
        if (n_electrodes < 1) parse_fail(line_no, "n_electrodes must be >= 1");
        if (n_bins < 1) parse_fail(line_no, "n_bins must be >= 1");
        if (!(bin_ms > 0.0)) parse_fail(line_no, "bin_ms must be > 0");
    }

    std::vector<ElectrodePosition> geometry(n_electrodes);
    std::vector<std::string> ids(n_electrodes);
    std::vector<bool> have(n_electrodes, false);
    for (int i = 0; i < n_electrodes; ++i) {
        if (!next_line(source, line, line_no))
            throw data_error("unexpected end of file: expected " + std::to_string(n_electrodes) +
                             " GEOM lines, got " + std::to_string(i));
        std::istringstream g(line);
        std::string tag, id, extra;
        int idx = 0, row = 0, col = 0;
        if (!(g >> tag >> idx >> row >> col >> id) || tag != "GEOM" || (g >> extra))
            parse_fail(line_no, "expected 'GEOM <index> <row> <col> <id>'");
        if (idx < 0 || idx >= n_electrodes) parse_fail(line_no, "GEOM electrode index out of range");
        if (have[idx]) parse_fail(line_no, "duplicate GEOM entry for electrode " + std::to_string(idx));
        have[idx] = true;
        geometry[idx] = {row, col};
        ids[idx] = id;
    }

    std::vector<std::uint8_t> data(static_cast<std::size_t>(n_bins) * n_electrodes, 0);
    while (next_line(source, line, line_no)) {
        std::istringstream s(line);
        std::int64_t bin = 0;
        int electrode = 0;
        std::string extra;
        if (!(s >> bin >> electrode) || (s >> extra))
            parse_fail(line_no, "expected '<bin_index> <electrode_index>'");
        if (bin < 0 || bin >= n_bins) parse_fail(line_no, "bin index out of range");
        if (electrode < 0 || electrode >= n_electrodes)
            parse_fail(line_no, "electrode index out of range");
        data[static_cast<std::size_t>(bin) * n_electrodes + electrode] = 1;
    }

    try {
        return SpikeTrain::build(n_electrodes, n_bins, bin_ms, std::move(data),
                                 std::move(geometry), std::move(ids));
    } catch (const data_error& e) {
        throw data_error(std::string("invalid spike train file: ") + e.what());
    }
}

void write_spike_train(const SpikeTrain& train, std::ostream& sink) {
    sink << "MEASPIKES 1\n";
    sink << train.n_electrodes() << ' ' << train.n_bins() << ' ' << fmt_double(train.bin_ms())
         << '\n';
    for (int i = 0; i < train.n_electrodes(); ++i) {
        const auto& g = train.geometry()[i];
        sink << "GEOM " << i << ' ' << g.row << ' ' << g.col << ' ' << train.electrode_ids()[i]
             << '\n';
    }
    const auto& data = train.data();
    const int n = train.n_electrodes();
    for (std::int64_t t = 0; t < train.n_bins(); ++t) {
        const std::uint8_t* row = &data[static_cast<std::size_t>(t) * n];
        for (int e = 0; e < n; ++e) {
            if (row[e]) sink << t << ' ' << e << '\n';
        }
    }
}

SpikeTrain read_spike_train_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open spike train file '" + path + "'");
    return read_spike_train(in);
}

void write_spike_train_file(const std::string& path, const SpikeTrain& train) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write spike train file '" + path + "'");
    write_spike_train(train, out);
    out.flush();
    if (!out) throw data_error("failed writing spike train file '" + path + "'");
}

} // namespace meanet
