#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "goldenphy/analysis.hpp"
#include "goldenphy/channel.hpp"
#include "goldenphy/common.hpp"
#include "goldenphy/framing.hpp"
#include "goldenphy/modem.hpp"
#include "goldenphy/zc.hpp"

// Uncoordinated multi-link superposition experiments: same-SF and cross-SF
// interference sweeps and Monte Carlo multiuser error curves.
//
// Interferers are modeled as always-on streams: a frame boundary falls at the
// drawn delay and the observation window wraps cyclically, which keeps the
// interference load constant regardless of the delay draw.

namespace goldenphy {

struct InterfererSpec {
    LinkConfig link;
    double delay_chips = 0.0;
    double power_db = 0.0;  // relative to the target
    std::uint64_t seed = 0;
};

struct MultiuserScenario {
    FrameConfig target;
    std::vector<InterfererSpec> interferers;
    double snr_db = 10.0;
    std::uint64_t seed = 0;
};

namespace detail {

// Cyclic sub-chip shift (same windowed-sinc kernel as channel_dsp, wrapped
// indexing). frac in [0, 1).
inline cvec cyclic_fractional_shift(const cvec& x, double frac) {
    if (frac < 1e-12) return x;
    const std::vector<double> taps = fractional_taps(frac);
    const std::int64_t lead = static_cast<std::int64_t>(taps.size() / 2 - 1);
    const std::int64_t n = static_cast<std::int64_t>(x.size());
    cvec out(x.size());
    for (std::int64_t i = 0; i < n; ++i) {
        cplx acc{0.0, 0.0};
        for (std::size_t j = 0; j < taps.size(); ++j) {
            const std::int64_t idx = (i - (static_cast<std::int64_t>(j) - lead)) % n;
            acc += x[(idx + n) % n] * taps[j];
        }
        out[i] = acc;
    }
    return out;
}

// One interferer's contribution to a window of `window` chips: its own frame
// with random payload, wrapped cyclically so a frame boundary sits at
// delay_chips, then scaled.
inline cvec interferer_window(const InterfererSpec& spec, std::size_t window,
                              std::uint32_t preamble_len, std::uint32_t q0) {
    FrameConfig frame{spec.link, preamble_len, q0, 0};
    const std::size_t block = spec.link.block_length();
    const std::size_t preamble_chips = static_cast<std::size_t>(preamble_len) * block;
    const std::size_t payload_chips = window > preamble_chips ? window - preamble_chips : 0;
    frame.payload_len = static_cast<std::uint32_t>((payload_chips + block - 1) / block);
    Rng rng(spec.seed);
    std::vector<std::uint8_t> bits(frame.payload_bits());
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.uniform_int(2));
    cvec chips = frame_encode(bits, frame);
    chips.resize(std::max(window, chips.size()));

    const double d = spec.delay_chips;
    const double floor_d = std::floor(d);
    const std::int64_t int_d = static_cast<std::int64_t>(floor_d);
    const double frac = d - floor_d;
    cvec out(window);
    const std::int64_t w = static_cast<std::int64_t>(window);
    for (std::int64_t i = 0; i < w; ++i) out[i] = chips[((i - int_d) % w + w) % w];
    if (frac >= 1e-12) out = cyclic_fractional_shift(out, frac);
    const double scale = std::pow(10.0, spec.power_db / 20.0);
    if (scale != 1.0)
        for (auto& v : out) v *= scale;
    return out;
}

}  // namespace detail

struct SuperposeResult {
    cvec rx;                              // clean sum + AWGN
    cvec clean;                           // sum without noise
    std::vector<std::uint8_t> payload_bits;  // the target's transmitted bits
};

// Target frame plus delayed, power-scaled interferer streams; AWGN added last.
inline SuperposeResult superpose(const MultiuserScenario& scenario) {
    scenario.target.validate();
    for (const InterfererSpec& spec : scenario.interferers) {
        spec.link.validate();
        if (spec.link.bandwidth_hz != scenario.target.link.bandwidth_hz)
            throw std::invalid_argument("superpose: interferer bandwidth differs from the target's");
    }
    Rng rng(derive_seed(scenario.seed, 0));
    std::vector<std::uint8_t> bits(scenario.target.payload_bits());
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.uniform_int(2));
    cvec sum = frame_encode(bits, scenario.target);
    const std::size_t window = sum.size();
    for (const InterfererSpec& spec : scenario.interferers) {
        const cvec contribution =
            detail::interferer_window(spec, window, scenario.target.preamble_len, scenario.target.q0);
        for (std::size_t i = 0; i < window; ++i) sum[i] += contribution[i];
    }
    SuperposeResult result;
    result.clean = sum;
    result.payload_bits = std::move(bits);
    SampleBuffer buf{std::move(sum), scenario.target.link.bandwidth_hz, 1, 0};
    result.rx = add_awgn(buf, {scenario.snr_db, derive_seed(scenario.seed, 1)}).samples;
    return result;
}

// Max cyclic cross-correlation magnitude for every root pair. Truncated mode
// correlates the first 2^SF chips over parent-index shifts, which is what the
// truncated receiver's correlator bank sees.
inline std::vector<std::vector<double>> xcorr_matrix(std::uint32_t n, const std::vector<std::uint32_t>& roots,
                                                     bool truncated_mode = false) {
    if (!is_prime(n)) throw std::invalid_argument("xcorr_matrix: N must be prime");
    const std::size_t keep = truncated_mode
                                 ? (std::size_t{1} << static_cast<std::size_t>(std::lround(std::log2(double(n)))))
                                 : n;
    if (keep > n) throw std::invalid_argument("xcorr_matrix: truncation exceeds N");
    const DftPlan& plan = plan_for(n);
    // Spectra of the (zero-padded) truncated sequences and of the full parents.
    std::vector<cvec> spec_trunc(roots.size()), spec_full(roots.size());
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const cvec full = zc_generate(ZcParams::make(n, roots[i], 0)).chips;
        spec_full[i].resize(n);
        plan.forward(full.data(), spec_full[i].data());
        if (truncated_mode) {
            cvec padded(n, cplx{0.0, 0.0});
            std::copy(full.begin(), full.begin() + keep, padded.begin());
            spec_trunc[i].resize(n);
            plan.forward(padded.data(), spec_trunc[i].data());
        }
    }
    const std::vector<cvec>& a_side = truncated_mode ? spec_trunc : spec_full;
    std::vector<std::vector<double>> out(roots.size(), std::vector<double>(roots.size(), 0.0));
    cvec prod(n), corr(n);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        for (std::size_t j = i; j < roots.size(); ++j) {
            for (std::size_t k = 0; k < n; ++k) prod[k] = a_side[i][k] * std::conj(spec_full[j][k]);
            plan.forward(prod.data(), corr.data());
            double mx = 0.0;
            for (const cplx& v : corr) mx = std::max(mx, std::abs(v));
            mx /= static_cast<double>(n);
            out[i][j] = mx;
            out[j][i] = mx;
        }
    }
    return out;
}

struct DelaySweepPoint {
    std::uint32_t root_target = 0;
    std::uint32_t root_interferer = 0;
    double delay_chips = 0.0;
    double level_raw = 0.0;      // max |correlator output|
    double level_by_n = 0.0;     // /N
    double level_by_sqrt_n = 0.0;  // /sqrt(N)
};

// Max correlator output seen by a root_target receiver from a root_interferer
// symbol stream delayed by every multiple of Tc/subdivisions up to
// integer_delays chips.
//
// Integer-chip delays are exact cyclic shifts of the chip sequence. Sub-chip
// delays go through the cyclic shaped model: upsample, RRC, shift on the
// oversampled grid, matched filter, chip-rate sampling. Both the filter chain
// and the correlator are cyclic-shift invariant, so the level depends only on
// the sub-chip part; the integer part permutes the profile without changing
// its maximum.
inline std::vector<DelaySweepPoint> fractional_delay_sweep(std::uint32_t n,
                                                           const std::vector<std::pair<std::uint32_t, std::uint32_t>>& root_pairs,
                                                           std::uint32_t integer_delays,
                                                           std::uint32_t subdivisions = 4,
                                                           const ShapingConfig& shaping = {}) {
    shaping.validate();
    if (subdivisions < 1 || shaping.oversampling % subdivisions != 0)
        throw std::invalid_argument("fractional_delay_sweep: oversampling must be a multiple of subdivisions");
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const std::size_t os = shaping.oversampling;
    const std::size_t up_len = static_cast<std::size_t>(n) * os;
    const std::vector<double> taps = rrc_taps(shaping);
    // Cascade spectrum (RRC applied twice), centered cyclically on the
    // oversampled grid.
    cvec kernel(up_len, cplx{0.0, 0.0});
    const std::int64_t half = static_cast<std::int64_t>(taps.size() / 2);
    for (std::size_t j = 0; j < taps.size(); ++j) {
        const std::int64_t pos = (static_cast<std::int64_t>(j) - half) % static_cast<std::int64_t>(up_len);
        kernel[(pos + up_len) % up_len] += taps[j];
    }
    const DftPlan& up_plan = plan_for(up_len);
    cvec kernel_fft(up_len);
    up_plan.forward(kernel.data(), kernel_fft.data());

    const DftPlan& plan = plan_for(n);
    std::vector<DelaySweepPoint> points;
    points.reserve(static_cast<std::size_t>(root_pairs.size()) * integer_delays * subdivisions);
    cvec spec_t(n), spec_i(n), prod(n), corr(n);
    for (const auto& [rt, ri] : root_pairs) {
        const cvec target = zc_generate(ZcParams::make(n, rt, 0)).chips;
        const cvec interferer = zc_generate(ZcParams::make(n, ri, 0)).chips;
        plan.forward(target.data(), spec_t.data());

        std::vector<double> level_for_sub(subdivisions, 0.0);
        for (std::uint32_t sub = 0; sub < subdivisions; ++sub) {
            cvec delayed;
            if (sub == 0) {
                delayed = interferer;
            } else {
                // Cyclic shaped chain with an exact sample shift at the
                // oversampled rate.
                cvec up(up_len, cplx{0.0, 0.0});
                for (std::size_t k = 0; k < n; ++k) up[k * os] = interferer[k];
                cvec up_fft(up_len);
                up_plan.forward(up.data(), up_fft.data());
                const std::size_t shift = sub * (os / subdivisions);
                for (std::size_t k = 0; k < up_len; ++k) {
                    // Integer-sample cyclic shift plus both filters in one pass.
                    const double angle = -2.0 * std::numbers::pi *
                                         static_cast<double>((k * shift) % up_len) /
                                         static_cast<double>(up_len);
                    const cplx rot{std::cos(angle), std::sin(angle)};
                    up_fft[k] *= kernel_fft[k] * kernel_fft[k] * rot;
                }
                cvec shaped(up_len);
                up_plan.inverse(up_fft.data(), shaped.data());
                // Chip gain through the cascade is RC(0) = sum(taps^2) = 1,
                // so chip-rate sampling needs no rescale.
                delayed.resize(n);
                for (std::size_t k = 0; k < n; ++k) delayed[k] = shaped[k * os];
            }
            plan.forward(delayed.data(), spec_i.data());
            for (std::size_t k = 0; k < n; ++k) prod[k] = spec_t[k] * std::conj(spec_i[k]);
            plan.forward(prod.data(), corr.data());
            double mx = 0.0;
            for (const cplx& v : corr) mx = std::max(mx, std::abs(v));
            level_for_sub[sub] = mx / static_cast<double>(n);
        }
        for (std::uint32_t d = 0; d < integer_delays; ++d) {
            for (std::uint32_t sub = 0; sub < subdivisions; ++sub) {
                DelaySweepPoint p;
                p.root_target = rt;
                p.root_interferer = ri;
                p.delay_chips = d + static_cast<double>(sub) / subdivisions;
                p.level_raw = level_for_sub[sub];
                p.level_by_n = level_for_sub[sub] / static_cast<double>(n);
                p.level_by_sqrt_n = level_for_sub[sub] / sqrt_n;
                points.push_back(p);
            }
        }
    }
    return points;
}

struct CrossSfScenario {
    LinkConfig target;
    LinkConfig interferer;
    double target_delay_chips = 0.0;
    std::uint64_t seed = 0;
    std::size_t trace_length = 0;  // shifts to evaluate; default 2*N_target
    bool with_target = true;
    bool with_interferer = true;
};

// |correlator output| of the target-root reference against a window holding a
// (periodically extended) target symbol stream at its delay plus an
// uncoordinated interferer stream with a different spreading factor.
inline std::vector<double> cross_sf_correlator_trace(const CrossSfScenario& scenario) {
    scenario.target.validate();
    scenario.interferer.validate();
    const std::size_t nt = scenario.target.block_length();
    const std::size_t trace_len = scenario.trace_length ? scenario.trace_length : 2 * nt;
    const std::size_t sig_len = trace_len + nt;
    cvec sig(sig_len, cplx{0.0, 0.0});

    if (scenario.with_target) {
        // Repeated q=0 blocks, phased so a block boundary sits at the delay.
        const cvec block = modem_reference(scenario.target);
        const std::int64_t delay = static_cast<std::int64_t>(std::llround(scenario.target_delay_chips));
        for (std::size_t i = 0; i < sig_len; ++i) {
            const std::int64_t k = (static_cast<std::int64_t>(i) - delay) % static_cast<std::int64_t>(nt);
            sig[i] += block[(k + nt) % nt];
        }
    }
    if (scenario.with_interferer) {
        Rng rng(scenario.seed);
        const std::size_t ni = scenario.interferer.block_length();
        const std::size_t phase = rng.uniform_int(ni);
        cvec stream;
        stream.reserve(sig_len + ni);
        while (stream.size() < sig_len + phase) {
            const std::uint32_t q = static_cast<std::uint32_t>(rng.uniform_int(scenario.interferer.m));
            const cvec block = modulate({q}, scenario.interferer);
            stream.insert(stream.end(), block.begin(), block.end());
        }
        for (std::size_t i = 0; i < sig_len; ++i) sig[i] += stream[i + phase];
    }

    const cvec ref = modem_reference(scenario.target);
    const cvec corr = detail::sliding_correlation(sig, ref);
    std::vector<double> trace(trace_len);
    for (std::size_t i = 0; i < trace_len; ++i) trace[i] = std::abs(corr[i]);
    return trace;
}

struct MultiuserCurvePoint {
    std::uint32_t sf = 0;
    std::uint32_t n_interferers = 0;
    double snr_db = 0.0;
    double per = 0.0;
    double ser = 0.0;
    std::uint64_t packets = 0;
    std::uint64_t packet_errors = 0;
    std::uint64_t symbol_errors = 0;
    std::uint64_t seed = 0;
};

struct MultiuserCurveConfig {
    FrameConfig target;
    std::vector<std::uint32_t> interferer_counts;
    double snr_db = 10.0;
    std::uint64_t packets = 200;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

// Monte Carlo SER/PER of the target under equal-power, random-delay,
// distinct-root interferers. Interferer sets are nested across the requested
// counts and share the target payload and noise realization per packet
// (common random numbers), so the reported trend is not noise-dominated.
inline std::vector<MultiuserCurvePoint> multiuser_error_curve(const MultiuserCurveConfig& cfg) {
    cfg.target.validate();
    if (cfg.packets < 1) throw std::invalid_argument("multiuser_error_curve: need at least one packet");
    if (cfg.target.payload_len < 1)
        throw std::invalid_argument("multiuser_error_curve: target payload must be non-empty");
    std::uint32_t max_count = 0;
    for (const std::uint32_t c : cfg.interferer_counts) max_count = std::max(max_count, c);
    const std::uint32_t n = cfg.target.link.n;
    if (max_count + 1 >= n)
        throw std::invalid_argument("multiuser_error_curve: not enough distinct roots for the interferer count");

    const unsigned n_threads = detail::resolve_threads(cfg.threads);
    const std::size_t n_counts = cfg.interferer_counts.size();
    std::vector<std::vector<std::uint64_t>> sym_err(n_threads, std::vector<std::uint64_t>(n_counts, 0));
    std::vector<std::vector<std::uint64_t>> pkt_err(n_threads, std::vector<std::uint64_t>(n_counts, 0));

    std::vector<std::thread> workers;
    for (unsigned t = 0; t < n_threads; ++t) {
        workers.emplace_back([&, t]() {
            for (std::uint64_t p = t; p < cfg.packets; p += n_threads) {
                const std::uint64_t packet_seed = derive_seed(cfg.seed, p);
                Rng rng(packet_seed);
                // Target payload.
                SymbolStream tx(cfg.target.payload_len);
                for (auto& q : tx) q = static_cast<std::uint32_t>(rng.uniform_int(cfg.target.link.m));
                const cvec payload = modulate(tx, cfg.target.link);
                const cvec pre = preamble_block(cfg.target);
                cvec frame;
                frame.reserve(cfg.target.frame_chips());
                for (std::uint32_t i = 0; i < cfg.target.preamble_len; ++i)
                    frame.insert(frame.end(), pre.begin(), pre.end());
                frame.insert(frame.end(), payload.begin(), payload.end());
                const std::size_t window = frame.size();

                // Nested interferer pool: distinct roots, random delays on the
                // Tc/4 grid, equal power.
                std::vector<cvec> contributions;
                contributions.reserve(max_count);
                std::vector<std::uint32_t> used_roots{cfg.target.link.root};
                for (std::uint32_t i = 0; i < max_count; ++i) {
                    std::uint32_t root;
                    do {
                        root = 1 + static_cast<std::uint32_t>(rng.uniform_int(n - 1));
                    } while (std::find(used_roots.begin(), used_roots.end(), root) != used_roots.end());
                    used_roots.push_back(root);
                    InterfererSpec spec;
                    spec.link = cfg.target.link;
                    spec.link.root = root;
                    spec.delay_chips =
                        std::floor(rng.uniform() * static_cast<double>(4 * window)) / 4.0;
                    spec.power_db = 0.0;
                    spec.seed = derive_seed(packet_seed, 1000 + i);
                    contributions.push_back(
                        detail::interferer_window(spec, window, cfg.target.preamble_len, cfg.target.q0));
                }
                // Common noise realization across counts.
                const double gamma = std::pow(10.0, cfg.snr_db / 10.0);
                cvec noise(window);
                Rng noise_rng(derive_seed(packet_seed, 2));
                for (auto& v : noise) v = noise_rng.cgaussian(1.0 / gamma);

                cvec rx(window);
                for (std::size_t ci = 0; ci < n_counts; ++ci) {
                    const std::uint32_t count = cfg.interferer_counts[ci];
                    for (std::size_t i = 0; i < window; ++i) rx[i] = frame[i] + noise[i];
                    for (std::uint32_t ii = 0; ii < count; ++ii)
                        for (std::size_t i = 0; i < window; ++i) rx[i] += contributions[ii][i];
                    const std::size_t start =
                        static_cast<std::size_t>(cfg.target.preamble_len) * cfg.target.link.block_length();
                    const DemodOutput demod = demodulate_stream(
                        std::span<const cplx>(rx).subspan(start), cfg.target.link, cfg.target.payload_len);
                    std::uint64_t errors = 0;
                    for (std::size_t i = 0; i < tx.size(); ++i)
                        if (demod.hard_symbols[i] != tx[i]) ++errors;
                    sym_err[t][ci] += errors;
                    if (errors > 0) ++pkt_err[t][ci];
                }
            }
        });
    }
    for (auto& w : workers) w.join();

    std::vector<MultiuserCurvePoint> points;
    for (std::size_t ci = 0; ci < n_counts; ++ci) {
        MultiuserCurvePoint p;
        p.sf = cfg.target.link.sf();
        p.n_interferers = cfg.interferer_counts[ci];
        p.snr_db = cfg.snr_db;
        p.packets = cfg.packets;
        for (unsigned t = 0; t < n_threads; ++t) {
            p.symbol_errors += sym_err[t][ci];
            p.packet_errors += pkt_err[t][ci];
        }
        p.ser = static_cast<double>(p.symbol_errors) /
                static_cast<double>(cfg.packets * cfg.target.payload_len);
        p.per = static_cast<double>(p.packet_errors) / static_cast<double>(cfg.packets);
        p.seed = cfg.seed;
        points.push_back(p);
    }
    return points;
}

}  // namespace goldenphy
