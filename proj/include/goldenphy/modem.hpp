#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "goldenphy/common.hpp"
#include "goldenphy/dft.hpp"
#include "goldenphy/primes.hpp"
#include "goldenphy/zc.hpp"

// Symbol-level modulation and the de-chirp + DFT receiver.
//
// A symbol q selects the frequency offset of the Zadoff-Chu block. De-chirping
// with the conjugate q=0 reference turns it into the pure tone
// exp(j 2 pi (r q mod N) k / N), so the DFT of the de-chirped block peaks at
// bin (r q mod N) and the symbol is recovered by argmax followed by
// multiplication with r^-1 mod N.
//
// Truncated mode transmits only the first 2^SF chips of the parent length-N
// block. The receiver zero-pads the de-chirped block back to N before the
// DFT, which evaluates the exact matched-filter bank on the parent frequency
// grid; plain power-of-two bins would alias neighboring symbols together.

namespace goldenphy {

enum class LinkMode { full, truncated };

struct LinkConfig {
    std::uint32_t n = 0;        // chips per symbol (parent length in truncated mode)
    std::uint32_t root = 1;
    std::uint32_t m = 2;        // modulation cardinality, power of two
    double bandwidth_hz = 125000.0;
    LinkMode mode = LinkMode::full;

    std::uint32_t sf() const {
        return static_cast<std::uint32_t>(std::lround(std::log2(static_cast<double>(n))));
    }
    std::uint32_t bits_per_symbol() const {
        std::uint32_t b = 0;
        while ((1u << (b + 1)) <= m) ++b;
        return b;
    }
    // Chips actually transmitted per symbol.
    std::uint32_t block_length() const {
        return mode == LinkMode::truncated ? (1u << sf()) : n;
    }
    double chip_period_s() const { return 1.0 / bandwidth_hz; }
    double symbol_period_s() const { return block_length() * chip_period_s(); }
    double symbol_rate_hz() const { return 1.0 / symbol_period_s(); }
    double bit_rate_hz() const { return bits_per_symbol() * symbol_rate_hz(); }

    void validate() const {
        if (n < 2) throw std::invalid_argument("LinkConfig: N must be >= 2");
        ZcParams::make(n, root, 0);
        if (m < 2 || (m & (m - 1)) != 0)
            throw std::invalid_argument("LinkConfig: M must be a power of two >= 2");
        if (bandwidth_hz <= 0.0) throw std::invalid_argument("LinkConfig: bandwidth must be positive");
        if (mode == LinkMode::truncated) {
            if ((1u << sf()) > n)
                throw std::invalid_argument("LinkConfig: truncated mode needs 2^SF <= N (N=" +
                                            std::to_string(n) + ", SF=" + std::to_string(sf()) + ")");
            if (!is_prime(n))
                throw std::invalid_argument("LinkConfig: truncated mode requires a prime parent length");
        }
        if (m > block_length())
            throw std::invalid_argument("LinkConfig: M must not exceed the chips per symbol");
    }
};

using SymbolStream = std::vector<std::uint32_t>;

struct DemodOutput {
    std::vector<std::uint32_t> hard_symbols;            // raw q-hat in [0, N)
    std::vector<std::uint8_t> out_of_alphabet;          // 1 where q-hat >= M
    std::vector<std::vector<double>> dft_magnitudes;    // per symbol, when retained
};

// q=0 reference block (truncated to the transmit length in truncated mode).
inline cvec modem_reference(const LinkConfig& cfg) {
    cfg.validate();
    cvec ref = zc_generate(ZcParams::make(cfg.n, cfg.root, 0)).chips;
    ref.resize(cfg.block_length());
    return ref;
}

// Each symbol occupies one block; block l carries zc(N, r, q_l) evaluated at
// block-local chip indices (the sequence is N-periodic, so absolute-time and
// block-local indexing agree).
inline cvec modulate(const SymbolStream& symbols, const LinkConfig& cfg) {
    cfg.validate();
    const std::uint32_t block = cfg.block_length();
    cvec out;
    out.reserve(symbols.size() * static_cast<std::size_t>(block));
    for (const std::uint32_t q : symbols) {
        if (q >= cfg.m)
            throw std::invalid_argument("modulate: symbol " + std::to_string(q) +
                                        " outside alphabet M=" + std::to_string(cfg.m));
        const cvec chips = zc_generate(ZcParams::make(cfg.n, cfg.root, q)).chips;
        out.insert(out.end(), chips.begin(), chips.begin() + block);
    }
    return out;
}

inline cvec dechirp(std::span<const cplx> block, const LinkConfig& cfg) {
    const cvec ref = modem_reference(cfg);
    if (block.size() != ref.size())
        throw std::invalid_argument("dechirp: block length must equal " + std::to_string(ref.size()));
    cvec out(block.size());
    for (std::size_t k = 0; k < block.size(); ++k) out[k] = block[k] * std::conj(ref[k]);
    return out;
}

namespace detail {

// Shared demodulation core: de-chirped block -> (q_hat, optional magnitudes).
// `scratch` must have capacity n; ties break toward the lowest bin index.
inline std::uint32_t demod_core(const cplx* dechirped, std::size_t block_len, const LinkConfig& cfg,
                                cvec& scratch, std::vector<double>* magnitudes) {
    const std::size_t n = cfg.n;
    thread_local cvec padded;
    padded.assign(n, cplx{0.0, 0.0});
    std::copy(dechirped, dechirped + block_len, padded.begin());
    scratch.resize(n);
    plan_for(n).forward(padded.data(), scratch.data());
    std::size_t best_bin = 0;
    double best_mag2 = -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double mag2 = std::norm(scratch[k]);
        if (mag2 > best_mag2) {
            best_mag2 = mag2;
            best_bin = k;
        }
    }
    if (magnitudes) {
        magnitudes->resize(n);
        for (std::size_t k = 0; k < n; ++k) (*magnitudes)[k] = std::abs(scratch[k]);
    }
    const std::uint64_t rinv = mod_inverse(cfg.root, cfg.n);
    return static_cast<std::uint32_t>((best_bin * rinv) % cfg.n);
}

}  // namespace detail

struct SymbolDemod {
    std::uint32_t q_hat = 0;
    std::vector<double> bin_magnitudes;  // raw DFT-bin order
};

inline SymbolDemod demodulate_symbol(std::span<const cplx> block, const LinkConfig& cfg,
                                     bool keep_magnitudes = true) {
    const cvec dechirped = dechirp(block, cfg);
    SymbolDemod result;
    cvec scratch;
    result.q_hat = detail::demod_core(dechirped.data(), dechirped.size(), cfg, scratch,
                                      keep_magnitudes ? &result.bin_magnitudes : nullptr);
    return result;
}

inline DemodOutput demodulate_stream(std::span<const cplx> signal, const LinkConfig& cfg,
                                     std::size_t symbol_count, bool keep_magnitudes = false) {
    cfg.validate();
    const std::size_t block = cfg.block_length();
    if (signal.size() < block * symbol_count)
        throw std::invalid_argument("demodulate_stream: signal shorter than requested symbol count");
    const cvec ref = modem_reference(cfg);
    DemodOutput out;
    out.hard_symbols.reserve(symbol_count);
    out.out_of_alphabet.reserve(symbol_count);
    cvec dechirped(block), scratch;
    for (std::size_t l = 0; l < symbol_count; ++l) {
        const cplx* blk = signal.data() + l * block;
        for (std::size_t k = 0; k < block; ++k) dechirped[k] = blk[k] * std::conj(ref[k]);
        std::vector<double> mags;
        const std::uint32_t q_hat =
            detail::demod_core(dechirped.data(), block, cfg, scratch, keep_magnitudes ? &mags : nullptr);
        out.hard_symbols.push_back(q_hat);
        out.out_of_alphabet.push_back(q_hat >= cfg.m ? 1 : 0);
        if (keep_magnitudes) out.dft_magnitudes.push_back(std::move(mags));
    }
    return out;
}

// Big-endian grouping of b bits per symbol.
inline SymbolStream bits_to_symbols(const std::vector<std::uint8_t>& bits, std::uint32_t b) {
    if (b < 1 || b > 31) throw std::invalid_argument("bits_to_symbols: need 1 <= b <= 31");
    if (bits.size() % b != 0)
        throw std::invalid_argument("bits_to_symbols: bit count must be a multiple of b");
    SymbolStream symbols(bits.size() / b);
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        std::uint32_t v = 0;
        for (std::uint32_t j = 0; j < b; ++j) {
            const std::uint8_t bit = bits[i * b + j];
            if (bit > 1) throw std::invalid_argument("bits_to_symbols: bits must be 0 or 1");
            v = (v << 1) | bit;
        }
        symbols[i] = v;
    }
    return symbols;
}

inline std::vector<std::uint8_t> symbols_to_bits(const SymbolStream& symbols, std::uint32_t b) {
    if (b < 1 || b > 31) throw std::invalid_argument("symbols_to_bits: need 1 <= b <= 31");
    std::vector<std::uint8_t> bits(symbols.size() * b);
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (symbols[i] >= (1ull << b))
            throw std::invalid_argument("symbols_to_bits: symbol exceeds 2^b - 1");
        for (std::uint32_t j = 0; j < b; ++j)
            bits[i * b + j] = static_cast<std::uint8_t>((symbols[i] >> (b - 1 - j)) & 1u);
    }
    return bits;
}

}  // namespace goldenphy
