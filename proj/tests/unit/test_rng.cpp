#include "thickpoints/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

using thickpoints::Rng;
using thickpoints::philox4x32_10;

// Known-answer vectors published with Random123.
TEST_CASE("philox known answers") {
    using A4 = std::array<std::uint32_t, 4>;
    using A2 = std::array<std::uint32_t, 2>;
    CHECK(philox4x32_10(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10(A4{~0u, ~0u, ~0u, ~0u}, A2{~0u, ~0u}) == A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are deterministic and distinct") {
    Rng a(7, 3), b(7, 3), c(7, 4), d(8, 3);
    std::vector<std::uint64_t> va, vb, vc, vd;
    for (int i = 0; i < 64; ++i) {
        va.push_back(a.next_u64());
        vb.push_back(b.next_u64());
        vc.push_back(c.next_u64());
        vd.push_back(d.next_u64());
    }
    CHECK(va == vb);
    CHECK(va != vc);
    CHECK(va != vd);
}

TEST_CASE("stream ids of different tags do not collide") {
    std::set<std::uint64_t> ids;
    for (std::uint32_t tag = 1; tag < 20; ++tag)
        for (std::uint64_t i = 0; i < 1000; ++i) ids.insert(thickpoints::stream_id(tag, i));
    CHECK(ids.size() == 19u * 1000u);
}

TEST_CASE("uniform stays in (0, 1]") {
    Rng r(1, 1);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    CHECK(lo > 0.0);
    CHECK(hi <= 1.0);
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("gamma moments") {
    Rng r(11, 0);
    CHECK(r.gamma(0) == 0.0);
    for (std::uint64_t k : {1u, 3u, 4u, 5u, 20u}) {
        const int n = 100000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double v = r.gamma(k);
            s += v;
            s2 += v * v;
        }
        const double mean = s / n, var = s2 / n - mean * mean;
        // mean k, variance k; the mean is within 5 standard errors
        CHECK(std::abs(mean - double(k)) < 5.0 * std::sqrt(double(k) / n));
        CHECK(var == doctest::Approx(double(k)).epsilon(0.05));
    }
}

TEST_CASE("exponential and normal moments") {
    Rng r(5, 9);
    const int n = 100000;
    double se = 0, sn = 0, sn2 = 0;
    for (int i = 0; i < n; ++i) {
        se += r.exponential();
        const double z = r.normal();
        sn += z;
        sn2 += z * z;
    }
    CHECK(std::abs(se / n - 1.0) < 5.0 / std::sqrt(double(n)));
    CHECK(std::abs(sn / n) < 5.0 / std::sqrt(double(n)));
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
}
