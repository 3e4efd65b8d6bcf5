// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Runs everything from a fixed master seed so results are reproducible.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "goldenphy/goldenphy.hpp"

using namespace goldenphy;

namespace {

constexpr std::uint64_t kSeed = 1;
constexpr unsigned kThreads = 2;

int g_failures = 0;

class Timer {
  public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

void report(int id, const std::string& name, bool pass, const std::string& detail, double seconds,
            double budget_s) {
    const bool in_budget = seconds <= budget_s;
    if (!pass || !in_budget) ++g_failures;
    std::printf("[%s] %2d. %-28s %s (%.1f s / budget %.0f s)\n",
                (pass && in_budget) ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(), seconds,
                budget_s);
    std::fflush(stdout);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --------------------------------------------------------------------------
// 1. Table reproduction: exact set sizes, rejection within +-0.05 dB.
void criterion_1() {
    Timer timer;
    const auto dir = std::filesystem::temp_directory_path() / "goldenphy_acceptance" / "table1";
    std::filesystem::create_directories(dir);
    const auto rows = run_table1({dir, kSeed, kThreads});
    const std::vector<std::uint64_t> sizes{130, 256, 520, 1030, 2052, 4098, 8208, 16410, 32770, 65536};
    const std::vector<double> rejection{-10.6, -12.0, -13.6, -15.1, -16.6,
                                        -18.1, -19.6, -21.1, -22.6, -24.1};
    bool pass = rows.size() == 10;
    double worst = 0.0;
    for (std::size_t i = 0; pass && i < rows.size(); ++i) {
        if (rows[i].set_size != sizes[i]) pass = false;
        worst = std::max(worst, std::abs(rows[i].rejection_db - rejection[i]));
    }
    pass = pass && worst <= 0.05;
    char detail[128];
    std::snprintf(detail, sizeof(detail), "10 rows, set sizes exact, max |dB err| = %.3f", worst);
    report(1, "Table I reproduction", pass, detail, timer.seconds(), 1.0);
}

// --------------------------------------------------------------------------
// 2. Flat cross-correlation: N=2053, 20 random pairs, every shift at sqrt(N).
void criterion_2() {
    Timer timer;
    const std::uint32_t n = 2053;
    const auto roots = root_set(n, 40, derive_seed(kSeed, 2));
    const double flat = std::sqrt(static_cast<double>(n));
    double worst_rel = 0.0, worst_diag = 0.0;
    for (int i = 0; i < 20; ++i) {
        const ChipSequence a = zc_generate(ZcParams::make(n, roots[2 * i], 0));
        const ChipSequence b = zc_generate(ZcParams::make(n, roots[2 * i + 1], 0));
        for (const cplx& v : cyclic_xcorr(a, b).values)
            worst_rel = std::max(worst_rel, std::abs(std::abs(v) - flat) / flat);
        const CorrelationProfile self = cyclic_xcorr(a, a);
        worst_diag = std::max(worst_diag, std::abs(std::abs(self.values[0]) - n) / n);
    }
    const bool pass = worst_rel <= 1e-6 && worst_diag <= 1e-9;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "max off-peak rel dev %.2e (tol 1e-6), diagonal rel dev %.2e", worst_rel, worst_diag);
    report(2, "Flat cross-correlation", pass, detail, timer.seconds(), 30.0);
}

// --------------------------------------------------------------------------
// 3. Monte Carlo BER vs the closed-form theory.
//
// Note: at the 1e-3 point the closed form is ~34% optimistic (it keeps only
// the mean of the max-of-Rayleighs statistic), so that sub-check fails its
// 25%/Wilson tolerance by construction; the simulation itself matches the
// exact integral. The equivalent horizontal offset is ~0.13 dB, printed for
// context. See README.
void criterion_3() {
    Timer timer;
    struct Point {
        std::uint32_t sf;
        double target_pb;
        std::uint64_t symbols;
    };
    const std::vector<Point> points{
        {8, 1e-1, 2000}, {8, 1e-2, 8000}, {8, 1e-3, 40000}, {12, 1e-2, 3000}, {16, 1e-2, 1200}};
    bool pass = true;
    std::string detail;
    for (const Point& pt : points) {
        LinkConfig link;
        link.n = static_cast<std::uint32_t>(smallest_prime_geq(1ull << pt.sf));
        link.root = 1;
        link.m = 1u << pt.sf;
        const double snr = snr_for_ber_approx(pt.target_pb, pt.sf);
        const auto mc =
            monte_carlo_ber(link, {10.0 * std::log10(snr)}, pt.symbols, derive_seed(kSeed, 3), kThreads);
        const double eq = ber_approx(snr, pt.sf);
        const bool enough = mc[0].errors >= 100;
        const bool in_interval = mc[0].wilson_lo <= eq && eq <= mc[0].wilson_hi;
        const bool close = std::abs(mc[0].ber - eq) / eq <= 0.25;
        const bool ok = enough && (in_interval || close);
        pass = pass && ok;
        // Equivalent horizontal (SNR) offset between the curves, for context.
        const double snr_matched = snr_for_ber_approx(std::min(0.49, mc[0].ber), pt.sf);
        const double db_offset = 10.0 * std::log10(snr_matched / snr);
        char buf[112];
        std::snprintf(buf, sizeof(buf), "%sSF%u@%.0e: mc=%.3e err=%llu dev=%+.0f%% (%.2f dB)",
                      ok ? "" : "**", pt.sf, pt.target_pb, mc[0].ber,
                      static_cast<unsigned long long>(mc[0].errors), 100.0 * (mc[0].ber - eq) / eq,
                      db_offset);
        if (!detail.empty()) detail += "  ";
        detail += buf;
    }
    report(3, "BER match vs theory", pass, detail, timer.seconds(), 600.0);
}

// --------------------------------------------------------------------------
// 4. Integral vs closed-form approximation across the stated band.
//
// Note: the 10% tolerance exceeds the closed form's tail accuracy below
// Pb ~ 1e-3 (the exact integral runs 30-84% above it at 1e-4), so this
// check fails at the band edges by construction; agreement in the
// waterfall (Pb ~ 5e-3..5e-2) is within a few percent. See README.
void criterion_4() {
    Timer timer;
    bool pass = true;
    double worst = 0.0;
    std::uint32_t worst_sf = 0;
    double worst_pb = 0.0;
    for (const std::uint32_t sf : {8u, 12u, 16u}) {
        for (const double pb : {1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1}) {
            const double snr = snr_for_ber_approx(pb, sf);
            const double integral = ber_integral_for(snr, sf);
            const double approx = ber_approx(snr, sf);
            const double dev = std::abs(integral - approx) / approx;
            if (dev > worst) {
                worst = dev;
                worst_sf = sf;
                worst_pb = pb;
            }
            if (dev > 0.10) pass = false;
        }
    }
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "max rel dev %.0f%% at SF%u, Pb=%.0e (tol 10%% over [1e-4,1e-1])", 100.0 * worst,
                  worst_sf, worst_pb);
    report(4, "Appendix-integral oracle", pass, detail, timer.seconds(), 10.0);
}

// --------------------------------------------------------------------------
// 5. Noiseless round-trips.
void criterion_5() {
    Timer timer;
    std::uint64_t errors = 0;

    LinkConfig l131;
    l131.n = 131;
    l131.root = 5;
    l131.m = 128;
    for (std::uint32_t q = 0; q < 131; ++q) {
        const cvec block = zc_generate(ZcParams::make(131, 5, q)).chips;
        if (demodulate_symbol(block, l131, false).q_hat != q) ++errors;
    }

    const auto stream_trip = [&errors](const LinkConfig& link, std::uint64_t seed) {
        Rng rng(seed);
        const std::size_t total = 10000, chunk = 200;
        for (std::size_t done = 0; done < total; done += chunk) {
            SymbolStream tx(chunk);
            for (auto& q : tx) q = static_cast<std::uint32_t>(rng.uniform_int(link.m));
            const DemodOutput out = demodulate_stream(modulate(tx, link), link, chunk);
            for (std::size_t i = 0; i < chunk; ++i)
                if (out.hard_symbols[i] != tx[i]) ++errors;
        }
    };
    LinkConfig l521;
    l521.n = 521;
    l521.root = 17;
    l521.m = 512;
    stream_trip(l521, derive_seed(kSeed, 51));
    LinkConfig l2053;
    l2053.n = 2053;
    l2053.root = 1234;
    l2053.m = 2048;
    stream_trip(l2053, derive_seed(kSeed, 52));
    LinkConfig trunc = l2053;
    trunc.mode = LinkMode::truncated;
    stream_trip(trunc, derive_seed(kSeed, 53));

    char detail[96];
    std::snprintf(detail, sizeof(detail),
                  "0 of 131 exhaustive + 3x10^4 random symbols wrong (errors=%llu)",
                  static_cast<unsigned long long>(errors));
    report(5, "Noiseless round-trips", errors == 0, detail, timer.seconds(), 60.0);
}

// --------------------------------------------------------------------------
// 6. Truncation robustness.
void criterion_6() {
    Timer timer;
    const std::uint32_t n = 2053;
    const std::size_t keep = 2048;
    const auto roots = root_set(n, 40, derive_seed(kSeed, 6));
    const double bound = 1.5 / std::sqrt(static_cast<double>(keep));
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const ChipSequence a = truncate_sequence(zc_generate(ZcParams::make(n, roots[2 * i], 0)), keep);
        const ChipSequence b = zc_generate(ZcParams::make(n, roots[2 * i + 1], 0));
        for (const cplx& v : cyclic_xcorr_parent(a, b).values)
            worst = std::max(worst, std::abs(v) / static_cast<double>(keep));
    }

    LinkConfig trunc;
    trunc.n = n;
    trunc.root = 901;
    trunc.m = 2048;
    trunc.mode = LinkMode::truncated;
    Rng rng(derive_seed(kSeed, 61));
    std::uint64_t errors = 0;
    for (int chunk = 0; chunk < 5; ++chunk) {
        SymbolStream tx(200);
        for (auto& q : tx) q = static_cast<std::uint32_t>(rng.uniform_int(trunc.m));
        const DemodOutput out = demodulate_stream(modulate(tx, trunc), trunc, tx.size());
        for (std::size_t i = 0; i < tx.size(); ++i)
            if (out.hard_symbols[i] != tx[i]) ++errors;
    }

    const bool pass = worst <= bound && errors == 0;
    char detail[128];
    std::snprintf(detail, sizeof(detail), "max by-N level %.4f (bound %.4f), round-trip errors %llu",
                  worst, bound, static_cast<unsigned long long>(errors));
    report(6, "Truncation robustness", pass, detail, timer.seconds(), 60.0);
}

// --------------------------------------------------------------------------
// 7. Fractional-delay behavior. Levels are normalized by N (the convention
// that puts the integer-delay flat level at 1/sqrt(N)); the by-sqrt(N)
// column is reported alongside.
void criterion_7() {
    Timer timer;
    const std::uint32_t n = 521;
    const auto roots = root_set(n, 40, derive_seed(kSeed, 7));
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (int i = 0; i < 20; ++i) pairs.emplace_back(roots[2 * i], roots[2 * i + 1]);
    const auto points = fractional_delay_sweep(n, pairs, n, 4);

    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    double worst_integer_dev = 0.0, worst_sub_by_n = 0.0, worst_sub_by_sqrt_n = 0.0;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<double, double>> extremes;
    for (const auto& p : points) {
        const double sub = p.delay_chips - std::floor(p.delay_chips);
        if (sub == 0.0) {
            worst_integer_dev = std::max(worst_integer_dev,
                                         std::abs(p.level_by_n - inv_sqrt_n) / inv_sqrt_n);
        } else {
            worst_sub_by_n = std::max(worst_sub_by_n, p.level_by_n);
            worst_sub_by_sqrt_n = std::max(worst_sub_by_sqrt_n, p.level_by_sqrt_n);
        }
        auto& e = extremes[{p.root_target, p.root_interferer}];
        if (e.first == 0.0) e = {p.level_raw, p.level_raw};
        e.first = std::min(e.first, p.level_raw);
        e.second = std::max(e.second, p.level_raw);
    }
    // Per-pair variation across the four sub-delays of an integer delay,
    // in dB with the level-as-power convention used throughout.
    double worst_var_db = 0.0;
    for (const auto& [pair, e] : extremes)
        worst_var_db = std::max(worst_var_db, 10.0 * std::log10(e.second / e.first));

    const bool pass = worst_integer_dev <= 1e-6 && worst_sub_by_n <= 0.65 && worst_var_db < 3.0;
    char detail[192];
    std::snprintf(detail, sizeof(detail),
                  "integer dev %.1e; sub-delay max by-N %.4f (<=0.65), by-sqrtN %.2f; var %.2f dB",
                  worst_integer_dev, worst_sub_by_n, worst_sub_by_sqrt_n, worst_var_db);
    report(7, "Fractional-delay behavior", pass, detail, timer.seconds(), 120.0);
}

// --------------------------------------------------------------------------
// 8. Cross-SF rejection.
void criterion_8() {
    Timer timer;
    CrossSfScenario s;
    s.target.n = 2053;
    s.target.root = 7;
    s.target.m = 2048;
    s.interferer.n = 1031;
    s.interferer.root = 13;
    s.interferer.m = 1024;
    s.target_delay_chips = 1000;
    s.seed = derive_seed(kSeed, 8);

    CrossSfScenario target_only = s;
    target_only.with_interferer = false;
    const auto trace_t = cross_sf_correlator_trace(target_only);
    const bool peak_exact = std::abs(trace_t[1000] - 2053.0) <= 1e-6 * 2053.0;

    CrossSfScenario interferer_only = s;
    interferer_only.with_target = false;
    const auto trace_i = cross_sf_correlator_trace(interferer_only);
    double mx = 0.0;
    for (const double v : trace_i) mx = std::max(mx, v);
    const double bound = 3.0 * std::sqrt(2053.0);

    const auto trace = cross_sf_correlator_trace(s);
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i] > trace[argmax]) argmax = i;

    const bool pass = peak_exact && mx <= bound && (argmax % 2053 == 1000);
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "target peak %.1f at 1000 (exact), interferer max %.1f (bound %.1f), argmax %zu",
                  trace_t[1000], mx, bound, argmax);
    report(8, "Cross-SF rejection", pass, detail, timer.seconds(), 60.0);
}

// --------------------------------------------------------------------------
// 9. Multiuser resilience.
void criterion_9() {
    Timer timer;
    MultiuserCurveConfig cfg;
    cfg.target.link.n = 521;
    cfg.target.link.root = 17;
    cfg.target.link.m = 512;
    cfg.target.preamble_len = 8;
    cfg.target.payload_len = 16;
    cfg.interferer_counts = {0, 5, 10, 20};
    cfg.snr_db = 10.0;
    cfg.packets = 200;
    cfg.seed = derive_seed(kSeed, 9);
    cfg.threads = kThreads;
    const auto points = multiuser_error_curve(cfg);
    bool monotone = true;
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].ser < points[i - 1].ser) monotone = false;
    const double ser_at_10 = points[2].ser;
    const bool pass = ser_at_10 < 1e-2 && monotone;
    char detail[160];
    std::snprintf(detail, sizeof(detail), "SER@{0,5,10,20} = {%.1e, %.1e, %.1e, %.1e}; monotone %s",
                  points[0].ser, points[1].ser, points[2].ser, points[3].ser, monotone ? "yes" : "no");
    report(9, "Multiuser resilience", pass, detail, timer.seconds(), 600.0);
}

// --------------------------------------------------------------------------
// 10. PSD envelope.
void criterion_10() {
    Timer timer;
    const auto dir = std::filesystem::temp_directory_path() / "goldenphy_acceptance" / "psd";
    std::filesystem::create_directories(dir);
    const auto r = run_psd({dir, kSeed, kThreads}, 12, 100e3, 0.25, 12, 4096);
    const bool pass = r.occupied_99_hz >= 100e3 && r.occupied_99_hz <= 137.5e3;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "99%% bandwidth %.1f kHz (window [100, 137.5])",
                  r.occupied_99_hz / 1e3);
    report(10, "PSD envelope", pass, detail, timer.seconds(), 30.0);
}

// --------------------------------------------------------------------------
// 11. Oracle suites.
void criterion_11() {
    Timer timer;
    bool pass = true;
    std::string why;

    // Prime-length DFT vs the naive transform.
    double worst_dft = 0.0;
    for (const std::size_t n : {std::size_t{7}, std::size_t{131}, std::size_t{521}}) {
        Rng rng(derive_seed(kSeed, 110 + n));
        cvec x(n);
        for (auto& v : x) v = {rng.gaussian(), rng.gaussian()};
        cvec naive(n, cplx{0.0, 0.0});
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j) {
                const double a = -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) /
                                 static_cast<double>(n);
                naive[k] += x[j] * cplx{std::cos(a), std::sin(a)};
            }
        const cvec fast = dft(x);
        double scale = 0.0;
        for (const auto& v : naive) scale = std::max(scale, std::abs(v));
        for (std::size_t k = 0; k < n; ++k)
            worst_dft = std::max(worst_dft, std::abs(fast[k] - naive[k]) / scale);
    }
    if (worst_dft > 1e-9) {
        pass = false;
        why += "dft oracle; ";
    }

    // Cyclic correlation vs the O(N^2) loop.
    double worst_corr = 0.0;
    Rng rng(derive_seed(kSeed, 112));
    for (std::uint32_t n = 2; n <= 31; ++n) {
        cvec a(n), b(n);
        for (std::size_t k = 0; k < n; ++k) {
            a[k] = {rng.gaussian(), rng.gaussian()};
            b[k] = {rng.gaussian(), rng.gaussian()};
        }
        cvec naive(n, cplx{0.0, 0.0});
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t k = 0; k < n; ++k) naive[s] += a[k] * std::conj(b[(k + s) % n]);
        const cvec got = cyclic_xcorr({a, std::nullopt}, {b, std::nullopt}).values;
        for (std::size_t s = 0; s < n; ++s) worst_corr = std::max(worst_corr, std::abs(got[s] - naive[s]));
    }
    if (worst_corr > 1e-12) {
        pass = false;
        why += "corr oracle; ";
    }

    // Seed determinism through the CSV-producing path.
    const auto base = std::filesystem::temp_directory_path() / "goldenphy_acceptance";
    std::filesystem::create_directories(base / "det_a");
    std::filesystem::create_directories(base / "det_b");
    run_ber_sweep({base / "det_a", 777, 2}, {8, -13.0, -12.0, 0.5, 500}, "det");
    run_ber_sweep({base / "det_b", 777, 1}, {8, -13.0, -12.0, 0.5, 500}, "det");
    run_gen_sequence({base / "det_a", 777, 2}, 521, 9, 3, 0, "csv", "seq");
    run_gen_sequence({base / "det_b", 777, 1}, 521, 9, 3, 0, "csv", "seq");
    if (slurp(base / "det_a" / "det.csv") != slurp(base / "det_b" / "det.csv") ||
        slurp(base / "det_a" / "seq.csv") != slurp(base / "det_b" / "seq.csv")) {
        pass = false;
        why += "determinism; ";
    }

    char detail[160];
    std::snprintf(detail, sizeof(detail), "dft dev %.1e (tol 1e-9), corr dev %.1e (tol 1e-12), CSVs identical%s%s",
                  worst_dft, worst_corr, why.empty() ? "" : " -- ", why.c_str());
    report(11, "Oracle suites", pass, detail, timer.seconds(), 60.0);
}

}  // namespace

int main() {
    std::printf("goldenphy acceptance suite (seed %llu, %u threads)\n",
                static_cast<unsigned long long>(kSeed), kThreads);
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    if (g_failures > 0) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
