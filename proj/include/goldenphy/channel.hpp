#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "goldenphy/common.hpp"
#include "goldenphy/dft.hpp"
#include "goldenphy/rng.hpp"
#include "goldenphy/special.hpp"

// Channel-domain processing: root-raised-cosine pulse shaping, oversampling,
// fractional delay, AWGN injection and Welch PSD estimation.

namespace goldenphy {

struct ShapingConfig {
    double beta = 0.25;            // RRC roll-off; occupied bandwidth (1+beta)*B
    std::uint32_t oversampling = 4;  // samples per chip
    std::uint32_t span_chips = 16;   // filter span

    void validate() const {
        if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("ShapingConfig: beta must be in [0, 1]");
        if (span_chips < 2) throw std::invalid_argument("ShapingConfig: span must be >= 2 chips");
        if (oversampling < 1) throw std::invalid_argument("ShapingConfig: oversampling must be >= 1");
    }
};

// Complex baseband samples at rate_hz = B * oversampling. `delay_samples`
// records where chip 0 of the originating chip sequence peaks.
struct SampleBuffer {
    cvec samples;
    double rate_hz = 0.0;
    std::uint32_t oversampling = 1;
    std::int64_t delay_samples = 0;
};

struct ChannelConfig {
    double snr_db = 0.0;       // per-chip SNR (Gamma), dB
    std::uint64_t seed = 0;
    double delay_chips = 0.0;  // used by scenario builders, not by add_awgn
};

// Unit-energy root-raised-cosine taps, length span*oversampling + 1, centered.
// The two removable singularities (t = 0 and |t| = 1/(4 beta) chip periods)
// are evaluated by their analytic limits; beta = 0 degenerates to a sinc.
inline std::vector<double> rrc_taps(const ShapingConfig& cfg) {
    cfg.validate();
    const std::int64_t half = static_cast<std::int64_t>(cfg.span_chips) * cfg.oversampling / 2;
    std::vector<double> taps(2 * half + 1);
    const double beta = cfg.beta;
    for (std::int64_t i = -half; i <= half; ++i) {
        const double t = static_cast<double>(i) / cfg.oversampling;  // in chip periods
        double v;
        if (std::abs(t) < 1e-12) {
            v = 1.0 - beta + 4.0 * beta / std::numbers::pi;
        } else if (beta > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-9) {
            v = (beta / std::numbers::sqrt2) *
                ((1.0 + 2.0 / std::numbers::pi) * std::sin(std::numbers::pi / (4.0 * beta)) +
                 (1.0 - 2.0 / std::numbers::pi) * std::cos(std::numbers::pi / (4.0 * beta)));
        } else {
            const double num = std::sin(std::numbers::pi * t * (1.0 - beta)) +
                               4.0 * beta * t * std::cos(std::numbers::pi * t * (1.0 + beta));
            const double den = std::numbers::pi * t * (1.0 - 16.0 * beta * beta * t * t);
            v = num / den;
        }
        taps[i + half] = v;
    }
    double energy = 0.0;
    for (const double v : taps) energy += v * v;
    const double scale = 1.0 / std::sqrt(energy);
    for (double& v : taps) v *= scale;
    return taps;
}

// Upsample-by-oversampling then FIR filter (full convolution). Chip k peaks
// at sample k*oversampling + (ntaps-1)/2.
inline SampleBuffer pulse_shape(std::span<const cplx> chips, const ShapingConfig& cfg,
                                double bandwidth_hz = 125000.0) {
    cfg.validate();
    if (chips.empty()) throw std::invalid_argument("pulse_shape: empty input");
    const std::vector<double> taps = rrc_taps(cfg);
    const std::size_t os = cfg.oversampling;
    const std::size_t out_len = chips.size() * os + taps.size() - 1;
    cvec out(out_len, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < chips.size(); ++k) {
        const cplx c = chips[k];
        const std::size_t base = k * os;
        for (std::size_t j = 0; j < taps.size(); ++j) out[base + j] += c * taps[j];
    }
    return {std::move(out), bandwidth_hz * cfg.oversampling, cfg.oversampling,
            static_cast<std::int64_t>((taps.size() - 1) / 2)};
}

// Matched filter (time-reversed conjugate taps; RRC taps are real and
// symmetric) followed by chip-rate sampling at the group-delay-compensated
// instants. Returns the recovered chip estimates.
inline cvec matched_filter(const SampleBuffer& buffer, const ShapingConfig& cfg) {
    cfg.validate();
    const std::vector<double> taps = rrc_taps(cfg);
    const std::size_t os = cfg.oversampling;
    if (buffer.samples.size() + 1 < taps.size() + os)
        throw std::invalid_argument("matched_filter: buffer too short");
    const std::size_t n_chips = (buffer.samples.size() - (taps.size() - 1)) / os;
    cvec out(n_chips, cplx{0.0, 0.0});
    // Cascade of the two filters delays chip k to sample k*os + (ntaps-1).
    for (std::size_t k = 0; k < n_chips; ++k) {
        const std::size_t center = k * os + (taps.size() - 1);
        cplx acc{0.0, 0.0};
        for (std::size_t j = 0; j < taps.size(); ++j) {
            const std::size_t idx = center - (taps.size() - 1) + j;
            // Correlating with the reversed real taps: plain dot product.
            acc += buffer.samples[idx] * taps[taps.size() - 1 - j];
        }
        out[k] = acc;
    }
    return out;
}

namespace detail {

// Windowed-sinc interpolator for sub-sample shifts (Kaiser window, 16 taps).
// frac in [0, 1); tap t weights input sample (i - int_part - t).
inline std::vector<double> fractional_taps(double frac, std::size_t ntaps = 16, double kaiser_beta = 8.6) {
    std::vector<double> taps(ntaps);
    const double half_span = static_cast<double>(ntaps) / 2.0;
    double sum = 0.0;
    for (std::size_t j = 0; j < ntaps; ++j) {
        const double t = static_cast<double>(j) - (static_cast<double>(ntaps) / 2.0 - 1.0) - frac;
        const double sinc = (std::abs(t) < 1e-12) ? 1.0
                            : std::sin(std::numbers::pi * t) / (std::numbers::pi * t);
        const double x = t / half_span;
        const double window = (std::abs(x) <= 1.0)
                                  ? bessel_i0(kaiser_beta * std::sqrt(1.0 - x * x)) / bessel_i0(kaiser_beta)
                                  : 0.0;
        taps[j] = sinc * window;
        sum += taps[j];
    }
    for (double& v : taps) v /= sum;  // unity DC gain
    return taps;
}

}  // namespace detail

// Delays the buffer content by delay_chips. The integer sample part is an
// exact shift at the buffer rate (so at 4x oversampling every multiple of
// Tc/4 is exact); any sub-sample remainder uses band-limited interpolation.
// Output grows by the integer shift; negative delays advance the signal.
inline SampleBuffer fractional_delay(const SampleBuffer& buffer, double delay_chips) {
    const double shift_samples = delay_chips * buffer.oversampling;
    if (std::abs(shift_samples) > static_cast<double>(buffer.samples.size()))
        throw std::invalid_argument("fractional_delay: delay exceeds buffer length");
    const double floor_shift = std::floor(shift_samples);
    const std::int64_t int_shift = static_cast<std::int64_t>(floor_shift);
    const double frac = shift_samples - floor_shift;

    const cvec* src = &buffer.samples;
    cvec interp;
    if (frac > 1e-12) {
        const std::vector<double> taps = detail::fractional_taps(frac);
        const std::int64_t lead = static_cast<std::int64_t>(taps.size() / 2 - 1);
        interp.assign(buffer.samples.size(), cplx{0.0, 0.0});
        const std::int64_t n = static_cast<std::int64_t>(buffer.samples.size());
        for (std::int64_t i = 0; i < n; ++i) {
            cplx acc{0.0, 0.0};
            for (std::size_t j = 0; j < taps.size(); ++j) {
                const std::int64_t idx = i - (static_cast<std::int64_t>(j) - lead);
                if (idx >= 0 && idx < n) acc += buffer.samples[idx] * taps[j];
            }
            interp[i] = acc;
        }
        src = &interp;
    }

    SampleBuffer out{{}, buffer.rate_hz, buffer.oversampling, buffer.delay_samples};
    if (int_shift >= 0) {
        out.samples.assign(src->size() + int_shift, cplx{0.0, 0.0});
        std::copy(src->begin(), src->end(), out.samples.begin() + int_shift);
    } else {
        out.samples.assign(src->begin() + (-int_shift), src->end());
    }
    return out;
}

// Adds circular complex white Gaussian noise with variance sigma_w^2 =
// P_ref / Gamma, where P_ref is the mean sample power referenced to the chip
// rate (oversampled buffers carry 1/oversampling of the chip power per
// sample). Deterministic for a fixed seed.
inline SampleBuffer add_awgn(const SampleBuffer& buffer, const ChannelConfig& cfg) {
    if (buffer.samples.empty()) throw std::invalid_argument("add_awgn: empty buffer");
    if (!std::isfinite(cfg.snr_db)) throw std::invalid_argument("add_awgn: SNR must be finite");
    double power = 0.0;
    for (const cplx& v : buffer.samples) power += std::norm(v);
    power = power / static_cast<double>(buffer.samples.size()) * buffer.oversampling;
    const double gamma = std::pow(10.0, cfg.snr_db / 10.0);
    const double sigma2 = power / gamma;
    Rng rng(cfg.seed);
    SampleBuffer out = buffer;
    for (cplx& v : out.samples) v += rng.cgaussian(sigma2);
    return out;
}

struct PsdEstimate {
    std::vector<double> freq_hz;    // ascending, two-sided
    std::vector<double> power;      // linear, Welch-averaged
    std::vector<double> power_db;   // normalized to 0 dB peak
};

// Welch-averaged periodogram with a Hann window. Frequencies cover
// [-rate/2, rate/2) in ascending order; power_db is peak-normalized.
inline PsdEstimate psd_estimate(std::span<const cplx> samples, double rate_hz,
                                std::size_t segment_length, double overlap = 0.5) {
    if (segment_length < 8) throw std::invalid_argument("psd_estimate: segment too short");
    if (samples.size() < segment_length)
        throw std::invalid_argument("psd_estimate: buffer shorter than one segment");
    if (overlap < 0.0 || overlap >= 1.0) throw std::invalid_argument("psd_estimate: overlap in [0,1)");
    const std::size_t hop = std::max<std::size_t>(1, static_cast<std::size_t>(segment_length * (1.0 - overlap)));
    std::vector<double> window(segment_length);
    for (std::size_t i = 0; i < segment_length; ++i)
        window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / segment_length));

    const DftPlan& plan = plan_for(segment_length);
    std::vector<double> acc(segment_length, 0.0);
    cvec seg(segment_length), spec(segment_length);
    std::size_t n_segments = 0;
    for (std::size_t start = 0; start + segment_length <= samples.size(); start += hop) {
        for (std::size_t i = 0; i < segment_length; ++i) seg[i] = samples[start + i] * window[i];
        plan.forward(seg.data(), spec.data());
        for (std::size_t i = 0; i < segment_length; ++i) acc[i] += std::norm(spec[i]);
        ++n_segments;
    }
    PsdEstimate est;
    est.freq_hz.resize(segment_length);
    est.power.resize(segment_length);
    const std::size_t half = segment_length / 2;
    for (std::size_t i = 0; i < segment_length; ++i) {
        // fftshift: bins [half, n) map to negative frequencies.
        const std::size_t src = (i + half) % segment_length;
        const double f = (static_cast<double>(i) - static_cast<double>(half)) / segment_length * rate_hz;
        est.freq_hz[i] = f;
        est.power[i] = acc[src] / static_cast<double>(n_segments);
    }
    const double peak = *std::max_element(est.power.begin(), est.power.end());
    est.power_db.resize(segment_length);
    for (std::size_t i = 0; i < segment_length; ++i)
        est.power_db[i] = 10.0 * std::log10(std::max(est.power[i] / peak, 1e-300));
    return est;
}

// Width of the smallest symmetric band around DC holding `fraction` of the
// total estimated power.
inline double occupied_bandwidth(const PsdEstimate& est, double fraction = 0.99) {
    if (fraction <= 0.0 || fraction >= 1.0)
        throw std::invalid_argument("occupied_bandwidth: fraction in (0,1)");
    std::vector<std::size_t> order(est.freq_hz.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(est.freq_hz[a]) < std::abs(est.freq_hz[b]);
    });
    double total = 0.0;
    for (const double p : est.power) total += p;
    double cum = 0.0;
    for (const std::size_t idx : order) {
        cum += est.power[idx];
        if (cum >= fraction * total) return 2.0 * std::abs(est.freq_hz[idx]);
    }
    return 2.0 * std::abs(est.freq_hz[order.back()]);
}

}  // namespace goldenphy
