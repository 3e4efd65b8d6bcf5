#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "goldenphy/channel.hpp"
#include "goldenphy/common.hpp"
#include "goldenphy/modem.hpp"
#include "goldenphy/primes.hpp"
#include "goldenphy/rng.hpp"
#include "goldenphy/special.hpp"

// Theoretical error-rate expressions and the Monte Carlo link simulator.

namespace goldenphy {

// Complementary standard normal CDF.
inline double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// Inverse of q_function on (0, 1). Acklam-style rational seed refined by two
// Newton steps; ~1e-14 relative over the usable range.
inline double q_function_inv(double p) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("q_function_inv: p in (0,1)");
    // Seed from the inverse-normal approximation for the lower tail of p.
    const double pl = std::min(p, 1.0 - p);
    const double t = std::sqrt(-2.0 * std::log(pl));
    double x = t - (2.515517 + 0.802853 * t + 0.010328 * t * t) /
                       (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t);
    if (p > 0.5) x = -x;
    for (int i = 0; i < 3; ++i) {
        const double err = q_function(x) - p;
        const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        x += err / pdf;  // dQ/dx = -pdf
    }
    return x;
}

// P_b ~= 0.5 Q( sqrt(Gamma 2^(SF+1)) - sqrt(1.386 SF + 1.154) ),
// Gamma = per-chip SNR (linear).
inline double ber_approx(double snr_linear, std::uint32_t sf) {
    if (snr_linear <= 0.0) throw std::invalid_argument("ber_approx: SNR must be positive");
    if (sf < 1) throw std::invalid_argument("ber_approx: SF must be >= 1");
    const double arg = std::sqrt(snr_linear * std::pow(2.0, static_cast<double>(sf) + 1.0)) -
                       std::sqrt(1.386 * sf + 1.154);
    return 0.5 * q_function(arg);
}

// Per-chip SNR at which ber_approx equals pb.
inline double snr_for_ber_approx(double pb, std::uint32_t sf) {
    if (pb <= 0.0 || pb >= 0.5) throw std::invalid_argument("snr_for_ber_approx: pb in (0, 0.5)");
    const double arg = q_function_inv(2.0 * pb);
    const double root = arg + std::sqrt(1.386 * sf + 1.154);
    return root * root / std::pow(2.0, static_cast<double>(sf) + 1.0);
}

// Detection statistics of the de-chirp + DFT receiver in the frequency
// domain: the correct bin is Rician(nu, sigma), every other bin is Rayleigh
// with the same sigma, all independent. For unit chips and chip-noise
// variance sigma_w^2: nu = N, sigma^2 = N sigma_w^2 / 2 per component.
struct RicianModel {
    double nu = 0.0;          // correct-bin mean magnitude
    double sigma = 1.0;       // per-component noise deviation (DFT domain)
    std::uint64_t n_bins = 2; // detection bins (2^SF); n_bins - 1 compete

    // n_chips = actual chips per symbol; 0 selects the idealized N = 2^SF
    // used when comparing against per-SF closed forms.
    static RicianModel from_link(double snr_linear, std::uint32_t sf, std::uint64_t n_chips = 0) {
        if (snr_linear <= 0.0) throw std::invalid_argument("RicianModel: SNR must be positive");
        const double n = n_chips ? static_cast<double>(n_chips) : std::pow(2.0, static_cast<double>(sf));
        return {n, std::sqrt(n / (2.0 * snr_linear)), std::uint64_t{1} << sf};
    }

    void validate() const {
        if (nu < 0.0 || sigma <= 0.0 || n_bins < 2)
            throw std::invalid_argument("RicianModel: need nu >= 0, sigma > 0, n_bins >= 2");
    }
};

namespace detail {

// Adaptive Simpson quadrature with absolute tolerance.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) return whole;  // no representable midpoint left
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (!std::isfinite(delta))
        throw std::runtime_error("ber_integral: non-finite integrand near [" + std::to_string(a) +
                                 ", " + std::to_string(b) + "]");
    if (depth <= 0)
        throw std::runtime_error("ber_integral: quadrature failed to converge (interval [" +
                                 std::to_string(a) + ", " + std::to_string(b) + "])");
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 60);
}

}  // namespace detail

// P(argmax lands outside the correct bin): expectation over the Rician
// correct-bin magnitude of the max-of-Rayleighs exceedance probability.
// Evaluated in noise-normalized coordinates with an absolute error target of
// 1e-10.
inline double orthogonal_ser_integral(const RicianModel& model) {
    model.validate();
    const double lambda = model.nu / model.sigma;
    const double competitors = static_cast<double>(model.n_bins - 1);
    const auto integrand = [&](double x) -> double {
        if (x <= 0.0) return 0.0;
        // 1 - (1 - exp(-x^2/2))^K, computed in log space for stability.
        const double e = std::exp(-0.5 * x * x);
        double bracket;
        if (e >= 1.0) {
            bracket = 1.0;
        } else {
            bracket = -std::expm1(competitors * std::log1p(-e));
        }
        // Rician pdf with sigma = 1: x exp(-(x-l)^2/2) [exp(-lx) I0(lx)]
        const double pdf = x * bessel_i0e(lambda * x) * std::exp(-0.5 * (x - lambda) * (x - lambda));
        return bracket * pdf;
    };
    const double lo = std::max(0.0, lambda - 14.0);
    const double hi = lambda + 14.0;
    return std::min(1.0, detail::integrate(integrand, lo, hi, 1e-12));
}

// Bit error probability from the symbol error integral: on a symbol error the
// wrong symbols are equiprobable, so a fraction (n/2)/(n-1) of them flip any
// given bit.
inline double ber_integral(const RicianModel& model) {
    model.validate();
    const double ser = orthogonal_ser_integral(model);
    const double n = static_cast<double>(model.n_bins);
    return (n / 2.0) / (n - 1.0) * ser;
}

inline double ber_integral_for(double snr_linear, std::uint32_t sf, std::uint64_t n_chips = 0) {
    return ber_integral(RicianModel::from_link(snr_linear, sf, n_chips));
}

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};

// 95% Wilson score interval for k successes out of n trials.
inline WilsonInterval wilson_interval(std::uint64_t k, std::uint64_t n, double z = 1.959963984540054) {
    if (n == 0) return {0.0, 1.0};
    const double p = static_cast<double>(k) / static_cast<double>(n);
    const double nn = static_cast<double>(n);
    const double denom = 1.0 + z * z / nn;
    const double center = (p + z * z / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

enum class BerSource { theory_approx, theory_integral, monte_carlo };

struct BerPoint {
    double snr_db = 0.0;
    std::uint32_t sf = 0;
    double ber = 0.0;
    BerSource source = BerSource::monte_carlo;
    std::uint64_t trials = 0;   // symbols simulated
    std::uint64_t bits = 0;
    std::uint64_t errors = 0;   // bit errors
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// One modulate -> AWGN -> demodulate trial; returns bit errors. The
// de-chirped DFT argmax is reported raw; bit errors are counted on the low b
// bits (out-of-alphabet decisions land on an effectively random label, a
// sub-percent effect when M < N).
inline std::uint32_t mc_trial(const LinkConfig& cfg, const cvec& conj_ref, double sigma2,
                              std::uint64_t seed, cvec& rx, cvec& padded, cvec& spec) {
    Rng rng(seed);
    const std::uint32_t q = static_cast<std::uint32_t>(rng.uniform_int(cfg.m));
    const std::uint32_t block = cfg.block_length();
    const std::uint64_t two_n = 2ull * cfg.n;
    rx.resize(block);
    // zc(N, r, q) chips, phase exponent reduced mod 2N.
    for (std::uint64_t k = 0; k < block; ++k) {
        const std::uint64_t base = (cfg.n % 2 == 1) ? (k + 1 + 2ull * q) : (k + 2ull * q);
        const std::uint64_t e = (base % two_n) * (k % two_n) % two_n * cfg.root % two_n;
        const double angle = std::numbers::pi * static_cast<double>(e) / static_cast<double>(cfg.n);
        rx[k] = cplx{std::cos(angle), std::sin(angle)} + rng.cgaussian(sigma2);
    }
    padded.assign(cfg.n, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < block; ++k) padded[k] = rx[k] * conj_ref[k];
    spec.resize(cfg.n);
    plan_for(cfg.n).forward(padded.data(), spec.data());
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t k = 0; k < cfg.n; ++k) {
        const double m2 = std::norm(spec[k]);
        if (m2 > best_mag) {
            best_mag = m2;
            best = k;
        }
    }
    const std::uint32_t q_hat =
        static_cast<std::uint32_t>((best * mod_inverse(cfg.root, cfg.n)) % cfg.n);
    const std::uint32_t diff = (q ^ q_hat) & (cfg.m - 1);
    return static_cast<std::uint32_t>(std::popcount(diff));
}

// One trial through the explicit shaped chain, for cross-validating the
// chip-domain default: modulate -> RRC -> AWGN at the oversampled rate ->
// matched filter -> demodulate.
inline std::uint32_t mc_trial_shaped(const LinkConfig& cfg, const ShapingConfig& shaping,
                                     double snr_db, std::uint64_t trial_seed) {
    Rng rng(trial_seed);
    const std::uint32_t q = static_cast<std::uint32_t>(rng.uniform_int(cfg.m));
    const cvec chips = modulate({q}, cfg);
    SampleBuffer shaped = pulse_shape(chips, shaping, cfg.bandwidth_hz);
    // Noise variance referenced to the chip-rate power (exactly 1 for unit
    // chips), not to the buffer average, which the filter transients dilute.
    const double sigma2 = std::pow(10.0, -snr_db / 10.0);
    for (auto& v : shaped.samples) v += rng.cgaussian(sigma2);
    const cvec rx_chips = matched_filter(shaped, shaping);
    const SymbolDemod d = demodulate_symbol(rx_chips, cfg, false);
    return static_cast<std::uint32_t>(std::popcount((q ^ d.q_hat) & (cfg.m - 1)));
}

}  // namespace detail

// Uncoded Monte Carlo BER. Default path is chip-domain (ideal Nyquist
// filtering); pass a ShapingConfig to run the full shaped chain instead.
// Per-trial seeds derived from (seed, point, trial) make the result
// independent of the thread partitioning.
inline std::vector<BerPoint> monte_carlo_ber(const LinkConfig& cfg, const std::vector<double>& snr_db_points,
                                             std::uint64_t symbols_per_point, std::uint64_t seed,
                                             unsigned threads = 0, const ShapingConfig* shaping = nullptr) {
    cfg.validate();
    if (symbols_per_point < 1) throw std::invalid_argument("monte_carlo_ber: need at least one trial");
    const unsigned n_threads = detail::resolve_threads(threads);
    const std::uint32_t b = cfg.bits_per_symbol();
    const cvec ref = modem_reference(cfg);
    cvec conj_ref(ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) conj_ref[k] = std::conj(ref[k]);

    std::vector<BerPoint> points;
    for (std::size_t pi = 0; pi < snr_db_points.size(); ++pi) {
        const double snr_db = snr_db_points[pi];
        const double gamma = std::pow(10.0, snr_db / 10.0);
        const double sigma2 = 1.0 / gamma;  // unit-power chips
        std::vector<std::uint64_t> sums(n_threads, 0);
        std::vector<std::thread> workers;
        for (unsigned t = 0; t < n_threads; ++t) {
            workers.emplace_back([&, t]() {
                cvec rx, padded, spec;
                std::uint64_t local = 0;
                for (std::uint64_t trial = t; trial < symbols_per_point; trial += n_threads) {
                    const std::uint64_t trial_seed = derive_seed(seed, (pi << 40) + trial);
                    local += shaping ? detail::mc_trial_shaped(cfg, *shaping, snr_db, trial_seed)
                                     : detail::mc_trial(cfg, conj_ref, sigma2, trial_seed, rx, padded, spec);
                }
                sums[t] = local;
            });
        }
        for (auto& w : workers) w.join();
        std::uint64_t errors = 0;
        for (const std::uint64_t s : sums) errors += s;

        BerPoint p;
        p.snr_db = snr_db;
        p.sf = cfg.sf();
        p.source = BerSource::monte_carlo;
        p.trials = symbols_per_point;
        p.bits = symbols_per_point * b;
        p.errors = errors;
        p.ber = static_cast<double>(errors) / static_cast<double>(p.bits);
        const WilsonInterval w = wilson_interval(errors, p.bits);
        p.wilson_lo = w.lo;
        p.wilson_hi = w.hi;
        p.seed = seed;
        points.push_back(p);
    }
    return points;
}

struct InterferenceRejection {
    std::uint32_t sf = 0;
    std::uint64_t n = 0;
    std::uint64_t set_size = 0;
    double rejection_db = 0.0;
    bool extrapolated = false;  // outside the tabulated SF range 7..16
};

// Worst-case normalized same-SF cross-correlation level, in dB, for the
// family built on the smallest prime >= 2^SF. The flat level sqrt(N)/N maps
// to -10 log10(sqrt(N)).
inline InterferenceRejection interference_rejection(std::uint32_t sf) {
    if (sf < 1 || sf > 30) throw std::invalid_argument("interference_rejection: SF out of range");
    InterferenceRejection r;
    r.sf = sf;
    r.n = smallest_prime_geq(1ull << sf);
    r.set_size = r.n - 1;
    r.rejection_db = -10.0 * std::log10(std::sqrt(static_cast<double>(r.n)));
    r.extrapolated = sf < 7 || sf > 16;
    return r;
}

}  // namespace goldenphy
