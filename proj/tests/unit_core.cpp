#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>
#include <vector>

#include "meanet/format.hpp"
#include "meanet/parallel.hpp"
#include "meanet/philox.hpp"

using namespace meanet;

TEST_CASE("philox block is a pure function of counter and key") {
    const std::array<std::uint32_t, 4> ctr{1, 2, 3, 4};
    const std::array<std::uint32_t, 2> key{5, 6};
    CHECK(philox4x32_block(ctr, key) == philox4x32_block(ctr, key));
    CHECK(philox4x32_block(ctr, key) != philox4x32_block({1, 2, 3, 5}, key));
    CHECK(philox4x32_block(ctr, key) != philox4x32_block(ctr, {5, 7}));
}

TEST_CASE("derive_seed separates salts") {
    CHECK(derive_seed(42, 1) == derive_seed(42, 1));
    CHECK(derive_seed(42, 1) != derive_seed(42, 2));
    CHECK(derive_seed(42, 1) != derive_seed(43, 1));
}

TEST_CASE("streams are reproducible and separated by purpose and context") {
    RngStream a(9, StreamPurpose::generic, 3);
    RngStream b(9, StreamPurpose::generic, 3);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RngStream c(9, StreamPurpose::row, 3);
    RngStream d(9, StreamPurpose::generic, 4);
    RngStream e(9, StreamPurpose::generic, 3);
    bool differ_purpose = false, differ_ctx = false;
    RngStream base(9, StreamPurpose::generic, 3);
    for (int i = 0; i < 10; ++i) {
        const std::uint64_t r = base.next_u64();
        differ_purpose |= c.next_u64() != r;
        differ_ctx |= d.next_u64() != r;
    }
    CHECK(differ_purpose);
    CHECK(differ_ctx);
    CHECK(e.next_u64() == RngStream(9, StreamPurpose::generic, 3).next_u64());
}

TEST_CASE("uniform lies strictly inside (0,1)") {
    RngStream rng(1, StreamPurpose::generic, 0);
    for (int i = 0; i < 200000; ++i) {
        const double u = rng.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("normal moments") {
    RngStream rng(2, StreamPurpose::generic, 0);
    const int n = 200000;
    double s = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        s += x;
        ss += x * x;
    }
    const double mean = s / n;
    const double var = ss / n - mean * mean;
    CHECK(std::fabs(mean) < 0.01);
    CHECK(std::fabs(var - 1.0) < 0.02);
}

TEST_CASE("exponential and gamma moments") {
    RngStream rng(3, StreamPurpose::generic, 0);
    const int n = 200000;
    double se = 0.0;
    for (int i = 0; i < n; ++i) se += rng.exponential();
    CHECK(std::fabs(se / n - 1.0) < 0.02);

    double sg = 0.0, ssg = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.gamma(4.0);
        sg += x;
        ssg += x * x;
    }
    const double mean = sg / n;
    CHECK(std::fabs(mean - 4.0) < 0.05);
    CHECK(std::fabs(ssg / n - mean * mean - 4.0) < 0.2);
}

TEST_CASE("gamma rejects non-positive shape") {
    RngStream rng(4, StreamPurpose::generic, 0);
    CHECK_THROWS(rng.gamma(0.0));
}

TEST_CASE("parallel_for computes the same result at every width") {
    const std::size_t n = 10007;
    std::vector<std::uint64_t> ref(n);
    parallel_for(n, 1, [&](std::size_t i) { ref[i] = i * i + 1; });
    for (const unsigned width : {0u, 2u, 3u, 8u, 24u}) {
        std::vector<std::uint64_t> got(n, 0);
        parallel_for(n, width, [&](std::size_t i) { got[i] = i * i + 1; });
        CHECK(got == ref);
    }
    parallel_for(0, 4, [&](std::size_t) { CHECK(false); });  // empty range: no calls
}

TEST_CASE("effective width resolves zero to at least one thread") {
    CHECK(effective_width(0) >= 1u);
    CHECK(effective_width(7) == 7u);
}

TEST_CASE("fmt_double round-trips exactly") {
    const double values[] = {0.0,   -0.0,       0.1,    1.0 / 3.0, 2.0,       -2.5,
                             1e-300, 1e300,     6.02e23, 0.1 + 0.2, 123456.75, 3.141592653589793};
    for (const double v : values) {
        const std::string s = fmt_double(v);
        char* end = nullptr;
        const double back = std::strtod(s.c_str(), &end);
        CHECK(*end == '\0');
        CHECK(back == v);
    }
    CHECK(fmt_double(2.0).size() <= 2);  // compact integers, no trailing zeros
}
