#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>
#include <stdexcept>

#include "meanet/errors.hpp"
#include "meanet/spike_train.hpp"

using namespace meanet;

namespace {

SpikeTrain small_train() {
    // 3 electrodes x 4 bins, column layout [bin][electrode]
    std::vector<std::uint8_t> data = {
        1, 0, 0,  //
        0, 1, 0,  //
        1, 1, 0,  //
        0, 0, 1,  //
    };
    return SpikeTrain::build(3, 4, 1.0, data, grid_geometry(3), default_electrode_ids(3));
}

} // namespace

TEST_CASE("build validates entries, geometry, ids, and sizes") {
    auto geom = grid_geometry(2);
    auto ids = default_electrode_ids(2);
    CHECK_NOTHROW(SpikeTrain::build(2, 2, 1.0, {0, 1, 1, 0}, geom, ids));
    CHECK_THROWS_AS(SpikeTrain::build(2, 2, 1.0, {0, 2, 1, 0}, geom, ids), data_error);
    CHECK_THROWS_AS(SpikeTrain::build(2, 2, 1.0, {0, 1, 1}, geom, ids), data_error);
    CHECK_THROWS_AS(SpikeTrain::build(2, 2, 0.0, {0, 1, 1, 0}, geom, ids), data_error);
    CHECK_THROWS_AS(SpikeTrain::build(2, 2, 1.0, {0, 1, 1, 0}, {{0, 0}, {0, 0}}, ids),
                    data_error);
    CHECK_THROWS_AS(SpikeTrain::build(2, 2, 1.0, {0, 1, 1, 0}, geom, {"a", "a"}), data_error);
    CHECK_THROWS_AS(SpikeTrain::build(2, 2, 1.0, {0, 1, 1, 0}, geom, {"a", ""}), data_error);
}

TEST_CASE("accessors, counts, and bounds") {
    const SpikeTrain t = small_train();
    CHECK(t.n_electrodes() == 3);
    CHECK(t.n_bins() == 4);
    CHECK(t.at(0, 0) == 1);
    CHECK(t.at(2, 1) == 1);
    CHECK(t.at(3, 2) == 1);
    CHECK(t.spike_count() == 5);
    CHECK(t.spike_count(0) == 2);
    CHECK(t.spike_count(1) == 2);
    CHECK(t.spike_count(2) == 1);
    CHECK_THROWS_AS((void)t.at(4, 0), std::out_of_range);
    CHECK_THROWS_AS((void)t.at(0, 3), std::out_of_range);
}

TEST_CASE("grid geometry is row-major and no taller than wide") {
    const auto g12 = grid_geometry(12);
    CHECK(g12.size() == 12);
    CHECK(g12[0] == ElectrodePosition{0, 0});
    CHECK(g12[1] == ElectrodePosition{0, 1});
    CHECK(g12[4] == ElectrodePosition{1, 0});
    int max_row = 0, max_col = 0;
    for (const auto& p : g12) {
        max_row = std::max(max_row, p.row);
        max_col = std::max(max_col, p.col);
    }
    CHECK(max_col >= max_row);
    CHECK(grid_geometry(1).size() == 1);
}

TEST_CASE("default ids are zero-padded and distinct") {
    const auto ids = default_electrode_ids(3);
    CHECK(ids[0] == "E000");
    CHECK(ids[2] == "E002");
}

TEST_CASE("events sit at bin centers and re-binning is the identity") {
    const SpikeTrain t = small_train();
    const auto events = t.extract_events();
    CHECK(events.size() == 5);
    CHECK(events.front().time_ms == 0.5);

    const BinResult r = bin_spike_events(events, t.n_electrodes(), t.bin_ms(),
                                         static_cast<double>(t.n_bins()) * t.bin_ms(),
                                         t.geometry(), t.electrode_ids());
    CHECK(r.collapsed_events == 0);
    CHECK(r.train == t);
}

TEST_CASE("same-bin duplicates collapse to a single spike") {
    std::vector<SpikeEvent> ev = {{0.2, 0}, {0.7, 0}, {1.5, 1}};
    const BinResult r = bin_spike_events(ev, 2, 1.0, 2.0);
    CHECK(r.collapsed_events == 1);
    CHECK(r.train.at(0, 0) == 1);
    CHECK(r.train.at(1, 1) == 1);
    CHECK(r.train.spike_count() == 2);
}

TEST_CASE("events outside the recording are rejected") {
    CHECK_THROWS_AS(bin_spike_events({{2.0, 0}}, 1, 1.0, 2.0), data_error);
    CHECK_THROWS_AS(bin_spike_events({{-0.1, 0}}, 1, 1.0, 2.0), data_error);
    CHECK_THROWS_AS(bin_spike_events({{0.5, 1}}, 1, 1.0, 2.0), data_error);
}

TEST_CASE("select_electrodes keeps the requested order") {
    const SpikeTrain t = small_train();
    const SpikeTrain s = t.select_electrodes({2, 0});
    CHECK(s.n_electrodes() == 2);
    CHECK(s.n_bins() == t.n_bins());
    CHECK(s.electrode_ids()[0] == "E002");
    CHECK(s.electrode_ids()[1] == "E000");
    for (std::int64_t b = 0; b < t.n_bins(); ++b) {
        CHECK(s.at(b, 0) == t.at(b, 2));
        CHECK(s.at(b, 1) == t.at(b, 0));
    }
    CHECK_THROWS_AS(t.select_electrodes({0, 3}), data_error);
}

TEST_CASE("file format round trip") {
    const SpikeTrain t = small_train();
    std::stringstream buf;
    write_spike_train(t, buf);
    const SpikeTrain back = read_spike_train(buf);
    CHECK(back == t);
}

TEST_CASE("malformed files are data errors") {
    std::stringstream bad1("not a spike file\n");
    CHECK_THROWS_AS(read_spike_train(bad1), data_error);
    std::stringstream empty;
    CHECK_THROWS_AS(read_spike_train(empty), data_error);

    std::stringstream missing_geom("MEASPIKES 1\n3 4 1\nGEOM 0 0 0 E000\n");
    CHECK_THROWS_AS(read_spike_train(missing_geom), data_error);

    std::stringstream bad_spike(
        "MEASPIKES 1\n1 2 1\nGEOM 0 0 0 E000\n5 0\n");  // bin out of range
    CHECK_THROWS_AS(read_spike_train(bad_spike), data_error);

    std::stringstream bad_version("MEASPIKES 9\n1 2 1\nGEOM 0 0 0 E000\n");
    CHECK_THROWS_AS(read_spike_train(bad_version), data_error);
}

TEST_CASE("comments and blank lines are ignored") {
    std::stringstream src(
        "# recorded somewhere\nMEASPIKES 1\n\n2 3 0.5\n"
        "GEOM 0 0 0 a\nGEOM 1 0 1 b\n# spikes\n0 0\n2 1\n");
    const SpikeTrain t = read_spike_train(src);
    CHECK(t.n_electrodes() == 2);
    CHECK(t.n_bins() == 3);
    CHECK(t.bin_ms() == 0.5);
    CHECK(t.at(0, 0) == 1);
    CHECK(t.at(2, 1) == 1);
    CHECK(t.spike_count() == 2);
}
