#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "goldenphy/common.hpp"
#include "goldenphy/dft.hpp"
#include "goldenphy/primes.hpp"
#include "goldenphy/rng.hpp"

// Frequency-shifted Zadoff-Chu sequences and the correlation primitives the
// rest of the library is built on.

namespace goldenphy {

struct ZcParams {
    std::uint32_t n = 0;       // sequence length in chips
    std::uint32_t root = 0;    // coprime with n
    std::uint32_t offset = 0;  // frequency offset q, stored reduced mod n

    // Validates and reduces q mod n. Any non-negative q is accepted; the
    // generated sequence only depends on q mod n.
    static ZcParams make(std::uint32_t n, std::uint32_t root, std::uint64_t q) {
        ZcParams p{n, root, static_cast<std::uint32_t>(n ? q % n : 0)};
        p.validate();
        return p;
    }

    void validate() const {
        if (n < 1) throw std::invalid_argument("ZcParams: length must be >= 1");
        if (root < 1 || (n > 1 && root >= n))
            throw std::invalid_argument("ZcParams: root must satisfy 1 <= r < N (r=" +
                                        std::to_string(root) + ", N=" + std::to_string(n) + ")");
        if (std::gcd<std::uint64_t>(root, n) != 1)
            throw std::invalid_argument("ZcParams: gcd(r, N) must be 1 (r=" + std::to_string(root) +
                                        ", N=" + std::to_string(n) + ")");
        if (offset >= n) throw std::invalid_argument("ZcParams: offset must be reduced mod N");
    }
};

// A run of complex chips. `params` is set when the chips were produced from a
// Zadoff-Chu formula (possibly truncated, in which case size() < params->n);
// derived or processed sequences leave it empty.
struct ChipSequence {
    cvec chips;
    std::optional<ZcParams> params;

    std::size_t size() const { return chips.size(); }
    bool truncated() const { return params && chips.size() < params->n; }
};

enum class CorrelationKind { cyclic, aperiodic };

struct CorrelationProfile {
    cvec values;
    CorrelationKind kind = CorrelationKind::cyclic;
};

// Z_N^{r,q}(k) = exp(j pi r (k+1+2q) k / N) for odd N,
//               exp(j pi r (k+2q)   k / N) for even N,   k = 0..N-1.
// The exponent is reduced mod 2N in integer arithmetic before conversion to
// an angle, so the phase is exact for every supported N.
inline ChipSequence zc_generate(const ZcParams& params) {
    params.validate();
    const std::uint64_t n = params.n;
    const std::uint64_t two_n = 2 * n;
    cvec chips(n);
    for (std::uint64_t k = 0; k < n; ++k) {
        const std::uint64_t base = (n % 2 == 1) ? (k + 1 + 2ull * params.offset) : (k + 2ull * params.offset);
        const std::uint64_t prod = (base % two_n) * (k % two_n) % two_n;
        const std::uint64_t e = (prod * params.root) % two_n;
        const double angle = std::numbers::pi * static_cast<double>(e) / static_cast<double>(n);
        chips[k] = {std::cos(angle), std::sin(angle)};
    }
    return {std::move(chips), params};
}

// c[s] = sum_k a(k) conj(b((k+s) mod N)), unnormalized. The flat
// cross-correlation level between distinct coprime roots is sqrt(N) in this
// convention; report layers divide by N where a normalized level is wanted.
inline CorrelationProfile cyclic_xcorr(const ChipSequence& a, const ChipSequence& b) {
    const std::size_t n = a.size();
    if (n == 0 || b.size() != n)
        throw std::invalid_argument("cyclic_xcorr: sequences must be non-empty and of equal length");
    const DftPlan& plan = plan_for(n);
    cvec fa(n), fb(n);
    plan.forward(a.chips.data(), fa.data());
    plan.forward(b.chips.data(), fb.data());
    for (std::size_t k = 0; k < n; ++k) fa[k] *= std::conj(fb[k]);
    cvec out(n);
    plan.forward(fa.data(), out.data());
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : out) v *= scale;
    return {std::move(out), CorrelationKind::cyclic};
}

// Cyclic correlation of a truncated sequence against a full parent-length
// sequence, over parent-index shifts:
//   c[s] = sum_{k < len(a)} a(k) conj(b((k+s) mod N_parent)),  s = 0..N_parent-1.
// This is what a truncated-mode receiver's correlator bank sees; each value
// differs from the full-length flat level by at most the dropped tail terms.
inline CorrelationProfile cyclic_xcorr_parent(const ChipSequence& a, const ChipSequence& b_parent) {
    const std::size_t n = b_parent.size();
    if (a.size() == 0 || a.size() > n)
        throw std::invalid_argument("cyclic_xcorr_parent: need 0 < len(a) <= len(b)");
    cvec padded(n, cplx{0.0, 0.0});
    std::copy(a.chips.begin(), a.chips.end(), padded.begin());
    const DftPlan& plan = plan_for(n);
    cvec fa(n), fb(n);
    plan.forward(padded.data(), fa.data());
    plan.forward(b_parent.chips.data(), fb.data());
    for (std::size_t k = 0; k < n; ++k) fa[k] *= std::conj(fb[k]);
    cvec out(n);
    plan.forward(fa.data(), out.data());
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : out) v *= scale;
    return {std::move(out), CorrelationKind::cyclic};
}

// Full linear cross-correlation, zero-padded, length len(a)+len(b)-1.
// values[i] = sum_j a(j) conj(b(j - (i - (len(b)-1)))); the zero-lag term
// sits at index len(b)-1.
inline CorrelationProfile aperiodic_xcorr(const ChipSequence& a, const ChipSequence& b) {
    const std::size_t la = a.size(), lb = b.size();
    if (la == 0 || lb == 0) throw std::invalid_argument("aperiodic_xcorr: sequences must be non-empty");
    const std::size_t out_len = la + lb - 1;
    const std::size_t m = detail::next_pow2(out_len);
    const DftPlan& plan = plan_for(m);
    cvec fa(m, cplx{0.0, 0.0}), fb(m, cplx{0.0, 0.0});
    std::copy(a.chips.begin(), a.chips.end(), fa.begin());
    for (std::size_t j = 0; j < lb; ++j) fb[j] = std::conj(b.chips[lb - 1 - j]);
    cvec Fa(m), Fb(m);
    plan.forward(fa.data(), Fa.data());
    plan.forward(fb.data(), Fb.data());
    for (std::size_t k = 0; k < m; ++k) Fa[k] *= Fb[k];
    cvec conv(m);
    plan.inverse(Fa.data(), conv.data());
    conv.resize(out_len);
    return {std::move(conv), CorrelationKind::aperiodic};
}

// K distinct roots of a prime N. For prime N any pair of distinct roots
// automatically satisfies gcd(r_i - r_j, N) = 1. Default selection is
// ascending from 1 for reproducibility; pass a seed for a random subset.
inline std::vector<std::uint32_t> root_set(std::uint32_t n, std::uint32_t count,
                                           std::optional<std::uint64_t> seed = std::nullopt) {
    if (!is_prime(n)) throw std::invalid_argument("root_set: N must be prime");
    if (count < 1 || count > n - 1)
        throw std::invalid_argument("root_set: need 1 <= K <= N-1");
    std::vector<std::uint32_t> roots;
    roots.reserve(count);
    if (!seed) {
        for (std::uint32_t r = 1; r <= count; ++r) roots.push_back(r);
        return roots;
    }
    std::vector<std::uint32_t> pool(n - 1);
    for (std::uint32_t i = 0; i < n - 1; ++i) pool[i] = i + 1;
    Rng rng(*seed);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint64_t j = i + rng.uniform_int(pool.size() - i);
        std::swap(pool[i], pool[j]);
        roots.push_back(pool[i]);
    }
    return roots;
}

}  // namespace goldenphy
