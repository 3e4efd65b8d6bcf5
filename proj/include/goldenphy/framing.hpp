#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "goldenphy/channel.hpp"
#include "goldenphy/common.hpp"
#include "goldenphy/modem.hpp"
#include "goldenphy/zc.hpp"

// Frame construction (repeated known preamble symbol + payload) and the
// correlation-based preamble detector used for timing acquisition.

namespace goldenphy {

struct FrameConfig {
    LinkConfig link;
    std::uint32_t preamble_len = 8;  // repeated preamble symbols
    std::uint32_t q0 = 0;            // preamble symbol value
    std::uint32_t payload_len = 0;   // payload symbols

    std::size_t frame_chips() const {
        return static_cast<std::size_t>(preamble_len + payload_len) * link.block_length();
    }
    std::size_t payload_bits() const {
        return static_cast<std::size_t>(payload_len) * link.bits_per_symbol();
    }

    void validate() const {
        link.validate();
        if (preamble_len < 1) throw std::invalid_argument("FrameConfig: preamble_len must be >= 1");
        if (q0 >= link.n) throw std::invalid_argument("FrameConfig: q0 must be < N");
    }
};

struct DetectionResult {
    bool found = false;
    std::int64_t offset_samples = 0;  // frame start, in buffer samples
    double metric = 0.0;              // normalized correlation peak, [0, 1+eps]
};

// Preamble block (q0 offset, truncated to the transmit length if needed).
inline cvec preamble_block(const FrameConfig& cfg) {
    cvec block = zc_generate(ZcParams::make(cfg.link.n, cfg.link.root, cfg.q0)).chips;
    block.resize(cfg.link.block_length());
    return block;
}

// preamble_len repetitions of the q0 block followed by the modulated payload.
inline cvec frame_encode(const std::vector<std::uint8_t>& payload_bits, const FrameConfig& cfg) {
    cfg.validate();
    if (payload_bits.size() != cfg.payload_bits())
        throw std::invalid_argument("frame_encode: expected " + std::to_string(cfg.payload_bits()) +
                                    " payload bits, got " + std::to_string(payload_bits.size()));
    const cvec pre = preamble_block(cfg);
    cvec out;
    out.reserve(cfg.frame_chips());
    for (std::uint32_t i = 0; i < cfg.preamble_len; ++i) out.insert(out.end(), pre.begin(), pre.end());
    if (cfg.payload_len > 0) {
        const SymbolStream symbols = bits_to_symbols(payload_bits, cfg.link.bits_per_symbol());
        if (symbols.size() != cfg.payload_len)
            throw std::invalid_argument("frame_encode: payload bit count does not match payload_len");
        const cvec body = modulate(symbols, cfg.link);
        out.insert(out.end(), body.begin(), body.end());
    }
    return out;
}

namespace detail {

// Linear correlation of the buffer against a reference at every lag where the
// reference fits; c[lag] = sum_k buf[lag+k] conj(ref[k]).
inline cvec sliding_correlation(std::span<const cplx> buf, const cvec& ref) {
    ChipSequence a{cvec(buf.begin(), buf.end()), std::nullopt};
    ChipSequence b{ref, std::nullopt};
    const CorrelationProfile prof = aperiodic_xcorr(a, b);
    const std::size_t n_lags = buf.size() - ref.size() + 1;
    cvec out(n_lags);
    for (std::size_t lag = 0; lag < n_lags; ++lag) out[lag] = prof.values[lag + ref.size() - 1];
    return out;
}

}  // namespace detail

// Sliding correlation of the known preamble block at integer-chip lags. The
// metric at a lag averages the energy-normalized correlation over
// preamble_len consecutive windows, so only the true alignment scores ~1 and
// the modulo-N ambiguity is resolved. Below-threshold peaks return
// found=false rather than an error.
inline DetectionResult preamble_detect(std::span<const cplx> buffer, const FrameConfig& cfg,
                                       double threshold = 0.5) {
    cfg.validate();
    const cvec ref = preamble_block(cfg);
    const std::size_t block = ref.size();
    if (buffer.size() < block)
        throw std::invalid_argument("preamble_detect: buffer shorter than one symbol");
    double ref_energy = 0.0;
    for (const cplx& v : ref) ref_energy += std::norm(v);

    const cvec corr = detail::sliding_correlation(buffer, ref);
    std::vector<double> prefix(buffer.size() + 1, 0.0);
    for (std::size_t i = 0; i < buffer.size(); ++i) prefix[i + 1] = prefix[i] + std::norm(buffer[i]);

    const std::size_t span_needed = static_cast<std::size_t>(cfg.preamble_len) * block;
    if (buffer.size() < span_needed) {
        // Not enough room for the full preamble at any lag; single-window fallback.
        DetectionResult best;
        for (std::size_t lag = 0; lag < corr.size(); ++lag) {
            const double energy = prefix[lag + block] - prefix[lag];
            const double m = energy > 0.0 ? std::abs(corr[lag]) / std::sqrt(ref_energy * energy) : 0.0;
            if (m > best.metric) best = {m >= threshold, static_cast<std::int64_t>(lag), m};
        }
        best.found = best.metric >= threshold;
        return best;
    }

    DetectionResult best;
    const std::size_t last_lag = buffer.size() - span_needed;
    for (std::size_t lag = 0; lag <= last_lag; ++lag) {
        double acc = 0.0;
        for (std::uint32_t i = 0; i < cfg.preamble_len; ++i) {
            const std::size_t pos = lag + static_cast<std::size_t>(i) * block;
            const double energy = prefix[pos + block] - prefix[pos];
            if (energy > 0.0) acc += std::abs(corr[pos]) / std::sqrt(ref_energy * energy);
        }
        const double m = acc / cfg.preamble_len;
        if (m > best.metric) {
            best.metric = m;
            best.offset_samples = static_cast<std::int64_t>(lag);
        }
    }
    best.found = best.metric >= threshold;
    return best;
}

// Demodulates the payload blocks that follow the detected preamble.
// Out-of-alphabet decisions are folded onto the low b bits.
inline std::vector<std::uint8_t> frame_decode(std::span<const cplx> buffer, const FrameConfig& cfg,
                                              const DetectionResult& detection) {
    cfg.validate();
    if (!detection.found) throw std::invalid_argument("frame_decode: detection has found=false");
    const std::size_t block = cfg.link.block_length();
    const std::size_t start =
        static_cast<std::size_t>(detection.offset_samples) + static_cast<std::size_t>(cfg.preamble_len) * block;
    if (buffer.size() < start + static_cast<std::size_t>(cfg.payload_len) * block)
        throw std::invalid_argument("frame_decode: insufficient samples after offset");
    const DemodOutput demod =
        demodulate_stream(buffer.subspan(start), cfg.link, cfg.payload_len);
    SymbolStream symbols(demod.hard_symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) symbols[i] = demod.hard_symbols[i] & (cfg.link.m - 1);
    return symbols_to_bits(symbols, cfg.link.bits_per_symbol());
}

// Oversampled-lag detection on a shaped + matched-filtered buffer: the
// chip-spaced reference is correlated on the sample grid, so residual
// sub-chip timing shows up as the best sample phase.
inline DetectionResult preamble_detect_oversampled(const SampleBuffer& buffer, const FrameConfig& cfg,
                                                   double threshold = 0.5) {
    cfg.validate();
    const cvec ref = preamble_block(cfg);
    const std::size_t os = buffer.oversampling;
    const std::size_t block_samples = ref.size() * os;
    const std::size_t span_needed = static_cast<std::size_t>(cfg.preamble_len) * block_samples;
    if (buffer.samples.size() < span_needed)
        throw std::invalid_argument("preamble_detect_oversampled: buffer too short");
    double ref_energy = 0.0;
    for (const cplx& v : ref) ref_energy += std::norm(v);

    // Zero-stuffed reference makes the strided correlation a plain linear one.
    cvec ref_up((ref.size() - 1) * os + 1, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < ref.size(); ++k) ref_up[k * os] = ref[k];
    const cvec corr = detail::sliding_correlation(buffer.samples, ref_up);

    DetectionResult best;
    const std::size_t last_lag = buffer.samples.size() - span_needed;
    for (std::size_t lag = 0; lag <= last_lag && lag < corr.size(); ++lag) {
        double acc = 0.0;
        for (std::uint32_t i = 0; i < cfg.preamble_len; ++i) {
            const std::size_t pos = lag + static_cast<std::size_t>(i) * block_samples;
            if (pos >= corr.size()) break;
            double energy = 0.0;
            for (std::size_t k = 0; k < ref.size(); ++k) energy += std::norm(buffer.samples[pos + k * os]);
            if (energy > 0.0) acc += std::abs(corr[pos]) / std::sqrt(ref_energy * energy);
        }
        const double m = acc / cfg.preamble_len;
        if (m > best.metric) {
            best.metric = m;
            best.offset_samples = static_cast<std::int64_t>(lag);
        }
    }
    best.found = best.metric >= threshold;
    return best;
}

// Payload decode from an oversampled buffer at the detected sample phase.
inline std::vector<std::uint8_t> frame_decode_oversampled(const SampleBuffer& buffer, const FrameConfig& cfg,
                                                          const DetectionResult& detection) {
    cfg.validate();
    if (!detection.found) throw std::invalid_argument("frame_decode_oversampled: detection has found=false");
    const std::size_t os = buffer.oversampling;
    const std::size_t block = cfg.link.block_length();
    const std::size_t start = static_cast<std::size_t>(detection.offset_samples) +
                              static_cast<std::size_t>(cfg.preamble_len) * block * os;
    const std::size_t n_chips = static_cast<std::size_t>(cfg.payload_len) * block;
    if (buffer.samples.size() < start + (n_chips > 0 ? (n_chips - 1) * os + 1 : 0))
        throw std::invalid_argument("frame_decode_oversampled: insufficient samples after offset");
    cvec chips(n_chips);
    for (std::size_t k = 0; k < n_chips; ++k) chips[k] = buffer.samples[start + k * os];
    const DemodOutput demod = demodulate_stream(chips, cfg.link, cfg.payload_len);
    SymbolStream symbols(demod.hard_symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) symbols[i] = demod.hard_symbols[i] & (cfg.link.m - 1);
    return symbols_to_bits(symbols, cfg.link.bits_per_symbol());
}

// Truncated-mode variant of a link: transmit only the first 2^SF chips of
// each parent length-N block.
inline LinkConfig truncated(LinkConfig link) {
    link.mode = LinkMode::truncated;
    link.validate();
    return link;
}

// First block_length chips of a generated sequence.
inline ChipSequence truncate_sequence(const ChipSequence& seq, std::size_t keep) {
    if (keep == 0 || keep > seq.size())
        throw std::invalid_argument("truncate_sequence: keep must be in [1, len]");
    ChipSequence out{cvec(seq.chips.begin(), seq.chips.begin() + keep), seq.params};
    return out;
}

}  // namespace goldenphy
