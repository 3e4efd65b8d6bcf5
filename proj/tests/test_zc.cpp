#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <numeric>

#include "goldenphy/rng.hpp"
#include "goldenphy/zc.hpp"

using namespace goldenphy;

namespace {

// O(N^2) cyclic correlation oracle.
cvec naive_cyclic_xcorr(const cvec& a, const cvec& b) {
    const std::size_t n = a.size();
    cvec out(n, cplx{0.0, 0.0});
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t k = 0; k < n; ++k) out[s] += a[k] * std::conj(b[(k + s) % n]);
    return out;
}

}  // namespace

TEST_CASE("zc_generate handles the degenerate length-1 sequence") {
    const ChipSequence seq = zc_generate(ZcParams::make(1, 1, 0));
    REQUIRE(seq.size() == 1);
    REQUIRE(std::abs(seq.chips[0] - cplx{1.0, 0.0}) < 1e-15);
}

TEST_CASE("zc_generate matches hand-evaluated values at N=3") {
    const ChipSequence seq = zc_generate(ZcParams::make(3, 1, 0));
    const cplx w{std::cos(2.0 * std::numbers::pi / 3.0), std::sin(2.0 * std::numbers::pi / 3.0)};
    REQUIRE(std::abs(seq.chips[0] - cplx{1.0, 0.0}) < 1e-15);
    REQUIRE(std::abs(seq.chips[1] - w) < 1e-15);
    REQUIRE(std::abs(seq.chips[2] - cplx{1.0, 0.0}) < 1e-15);
}

TEST_CASE("frequency offset is reduced mod N") {
    const ChipSequence a = zc_generate(ZcParams::make(5, 2, 7));
    const ChipSequence b = zc_generate(ZcParams::make(5, 2, 2));
    REQUIRE(a.params->offset == 2);
    for (std::size_t k = 0; k < 5; ++k) REQUIRE(a.chips[k] == b.chips[k]);

    // Large offsets reduce identically for even lengths too.
    const ChipSequence c = zc_generate(ZcParams::make(8, 3, 8 + 5));
    const ChipSequence d = zc_generate(ZcParams::make(8, 3, 5));
    for (std::size_t k = 0; k < 8; ++k) REQUIRE(c.chips[k] == d.chips[k]);
}

TEST_CASE("invalid parameters are rejected with a descriptive error") {
    REQUIRE_THROWS_AS(ZcParams::make(130, 2, 0), std::invalid_argument);  // gcd(2,130)=2
    REQUIRE_THROWS_AS(ZcParams::make(7, 0, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(ZcParams::make(7, 7, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(ZcParams::make(0, 1, 0), std::invalid_argument);
    REQUIRE_THROWS_WITH(ZcParams::make(130, 2, 0), Catch::Matchers::ContainsSubstring("gcd"));
}

TEST_CASE("all chips have unit magnitude") {
    Rng rng(42);
    for (int trial = 0; trial < 40; ++trial) {
        const std::uint32_t n = 2 + static_cast<std::uint32_t>(rng.uniform_int(3000));
        std::uint32_t root;
        do {
            root = 1 + static_cast<std::uint32_t>(rng.uniform_int(n - 1));
        } while (std::gcd(root, n) != 1);
        const std::uint64_t q = rng.uniform_int(2 * n);
        const ChipSequence seq = zc_generate(ZcParams::make(n, root, q));
        for (const cplx& c : seq.chips) REQUIRE(std::abs(std::abs(c) - 1.0) < 1e-12);
    }
    // Largest supported length stays exact thanks to integer phase reduction.
    const ChipSequence big = zc_generate(ZcParams::make(65537, 65521, 12345));
    for (const cplx& c : big.chips) REQUIRE(std::abs(std::abs(c) - 1.0) < 1e-12);
}

TEST_CASE("cyclic autocorrelation is a delta") {
    const ChipSequence seq = zc_generate(ZcParams::make(521, 3, 0));
    const CorrelationProfile prof = cyclic_xcorr(seq, seq);
    REQUIRE(prof.values.size() == 521);
    REQUIRE(std::abs(prof.values[0]) == Catch::Approx(521.0).epsilon(1e-12));
    for (std::size_t s = 1; s < 521; ++s) REQUIRE(std::abs(prof.values[s]) < 1e-6);
}

TEST_CASE("cross-correlation between distinct roots is flat at sqrt(N)") {
    const ChipSequence a = zc_generate(ZcParams::make(521, 3, 0));
    const ChipSequence b = zc_generate(ZcParams::make(521, 5, 0));
    const CorrelationProfile prof = cyclic_xcorr(a, b);
    const double expect = std::sqrt(521.0);
    for (const cplx& v : prof.values)
        REQUIRE(std::abs(v) == Catch::Approx(expect).epsilon(1e-6));
}

TEST_CASE("cyclic_xcorr matches the O(N^2) oracle for small lengths") {
    Rng rng(7);
    for (std::uint32_t n = 2; n <= 31; ++n) {
        cvec a(n), b(n);
        for (std::size_t k = 0; k < n; ++k) {
            a[k] = {rng.gaussian(), rng.gaussian()};
            b[k] = {rng.gaussian(), rng.gaussian()};
        }
        const ChipSequence sa{a, std::nullopt}, sb{b, std::nullopt};
        const cvec got = cyclic_xcorr(sa, sb).values;
        const cvec want = naive_cyclic_xcorr(a, b);
        for (std::size_t s = 0; s < n; ++s) REQUIRE(std::abs(got[s] - want[s]) < 1e-12);
    }
}

TEST_CASE("cyclic_xcorr rejects length mismatches") {
    const ChipSequence a = zc_generate(ZcParams::make(7, 1, 0));
    const ChipSequence b = zc_generate(ZcParams::make(11, 1, 0));
    REQUIRE_THROWS_AS(cyclic_xcorr(a, b), std::invalid_argument);
}

TEST_CASE("aperiodic correlation basics") {
    const ChipSequence one{{cplx{1.0, 0.0}}, std::nullopt};
    const CorrelationProfile unit = aperiodic_xcorr(one, one);
    REQUIRE(unit.values.size() == 1);
    REQUIRE(std::abs(unit.values[0] - cplx{1.0, 0.0}) < 1e-15);

    const ChipSequence a = zc_generate(ZcParams::make(521, 1, 0));
    const CorrelationProfile self = aperiodic_xcorr(a, a);
    REQUIRE(self.values.size() == 2 * 521 - 1);
    // Zero lag sits at index len(b)-1 and equals the sequence energy.
    REQUIRE(std::abs(self.values[520]) == Catch::Approx(521.0).epsilon(1e-9));

    const ChipSequence empty{{}, std::nullopt};
    REQUIRE_THROWS_AS(aperiodic_xcorr(empty, a), std::invalid_argument);
}

TEST_CASE("aperiodic cross-correlation peaks stay below 3 sqrt(N) across random pairs") {
    const std::uint32_t n = 521;
    const std::vector<std::uint32_t> roots = root_set(n, 200, 2024);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const ChipSequence a = zc_generate(ZcParams::make(n, roots[2 * i], 0));
        const ChipSequence b = zc_generate(ZcParams::make(n, roots[2 * i + 1], 0));
        for (const cplx& v : aperiodic_xcorr(a, b).values) worst = std::max(worst, std::abs(v));
    }
    REQUIRE(worst < 3.0 * std::sqrt(521.0));
}

TEST_CASE("aperiodic correlation supports different lengths") {
    const ChipSequence a = zc_generate(ZcParams::make(131, 1, 0));
    const ChipSequence b = zc_generate(ZcParams::make(257, 1, 0));
    REQUIRE(aperiodic_xcorr(a, b).values.size() == 131 + 257 - 1);
}

TEST_CASE("smallest_prime_geq reproduces the family lengths") {
    REQUIRE(smallest_prime_geq(1ull << 7) == 131);
    REQUIRE(smallest_prime_geq(1ull << 12) == 4099);
    REQUIRE(smallest_prime_geq(1ull << 16) == 65537);
    REQUIRE(smallest_prime_geq(2) == 2);
    REQUIRE(smallest_prime_geq(8) == 11);
    REQUIRE_THROWS_AS(smallest_prime_geq(1), std::invalid_argument);
}

TEST_CASE("root_set selections") {
    REQUIRE(root_set(7, 6) == std::vector<std::uint32_t>{1, 2, 3, 4, 5, 6});
    const auto all = root_set(131, 130);
    REQUIRE(all.size() == 130);
    REQUIRE(all.front() == 1);
    REQUIRE(all.back() == 130);

    const auto sel = root_set(521, 100);
    for (std::size_t i = 0; i < sel.size(); ++i)
        for (std::size_t j = i + 1; j < sel.size(); ++j) {
            const std::int64_t d = static_cast<std::int64_t>(sel[i]) - sel[j];
            REQUIRE(std::gcd<std::int64_t>(d < 0 ? -d : d, 521) == 1);
        }

    const auto seeded = root_set(521, 100, 99);
    REQUIRE(seeded == root_set(521, 100, 99));
    std::vector<std::uint32_t> sorted = seeded;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());

    REQUIRE_THROWS_AS(root_set(7, 7), std::invalid_argument);
    REQUIRE_THROWS_AS(root_set(10, 3), std::invalid_argument);
}

TEST_CASE("truncated parent-index correlation stays near the full flat level") {
    // Dropping t tail terms can move each correlation value by at most t.
    const std::uint32_t n = 2053;
    const std::size_t keep = 2048;
    const ChipSequence a = zc_generate(ZcParams::make(n, 17, 0));
    const ChipSequence a_trunc{cvec(a.chips.begin(), a.chips.begin() + keep), a.params};
    const ChipSequence b = zc_generate(ZcParams::make(n, 29, 0));
    const CorrelationProfile prof = cyclic_xcorr_parent(a_trunc, b);
    REQUIRE(prof.values.size() == n);
    const double flat = std::sqrt(static_cast<double>(n));
    for (const cplx& v : prof.values) {
        REQUIRE(std::abs(v) <= flat + 5.0 + 1e-9);
        REQUIRE(std::abs(v) >= flat - 5.0 - 1e-9);
    }
}
