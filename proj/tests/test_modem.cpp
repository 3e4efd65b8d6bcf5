#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "goldenphy/modem.hpp"
#include "goldenphy/rng.hpp"

using namespace goldenphy;

namespace {

LinkConfig link_131() {
    LinkConfig cfg;
    cfg.n = 131;
    cfg.root = 1;
    cfg.m = 128;
    return cfg;
}

}  // namespace

TEST_CASE("LinkConfig derived quantities") {
    LinkConfig cfg = link_131();
    cfg.bandwidth_hz = 125000.0;
    REQUIRE(cfg.sf() == 7);
    REQUIRE(cfg.bits_per_symbol() == 7);
    REQUIRE(cfg.block_length() == 131);
    REQUIRE(cfg.chip_period_s() == Catch::Approx(8e-6));
    REQUIRE(cfg.symbol_period_s() == Catch::Approx(131.0 / 125000.0));
    REQUIRE(cfg.bit_rate_hz() == Catch::Approx(7.0 * 125000.0 / 131.0));

    LinkConfig bad = cfg;
    bad.m = 100;  // not a power of two
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.m = 256;  // exceeds N
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("modulate produces concatenated Zadoff-Chu blocks") {
    const LinkConfig cfg = link_131();
    const cvec one = modulate({5}, cfg);
    const cvec direct = zc_generate(ZcParams::make(131, 1, 5)).chips;
    REQUIRE(one.size() == 131);
    for (std::size_t k = 0; k < 131; ++k) REQUIRE(one[k] == direct[k]);

    const cvec two = modulate({5, 9}, cfg);
    const cvec second = zc_generate(ZcParams::make(131, 1, 9)).chips;
    REQUIRE(two.size() == 2 * 131);
    for (std::size_t k = 0; k < 131; ++k) {
        REQUIRE(two[k] == one[k]);
        REQUIRE(two[131 + k] == second[k]);
    }

    REQUIRE(modulate({}, cfg).empty());
    REQUIRE_THROWS_AS(modulate({128}, cfg), std::invalid_argument);
}

TEST_CASE("dechirp cancels the reference and exposes the symbol tone") {
    const LinkConfig cfg = link_131();
    const cvec block0 = modulate({0}, cfg);
    for (const cplx& v : dechirp(block0, cfg)) REQUIRE(std::abs(v - cplx{1.0, 0.0}) < 1e-12);

    const cvec block7 = modulate({7}, cfg);
    const cvec tone = dechirp(block7, cfg);
    for (std::size_t k = 0; k < 131; ++k) {
        const double a = 2.0 * std::numbers::pi * 7.0 * static_cast<double>(k) / 131.0;
        REQUIRE(std::abs(tone[k] - cplx{std::cos(a), std::sin(a)}) < 1e-12);
    }

    cvec wrong(130);
    REQUIRE_THROWS_AS(dechirp(wrong, cfg), std::invalid_argument);
}

TEST_CASE("dechirp preserves noise statistics") {
    const LinkConfig cfg = link_131();
    Rng rng(11);
    const std::size_t blocks = 800;  // ~1e5 samples
    double var_in = 0.0, var_out = 0.0;
    for (std::size_t i = 0; i < blocks; ++i) {
        cvec noise(131);
        for (auto& v : noise) v = rng.cgaussian(1.0);
        for (const auto& v : noise) var_in += std::norm(v);
        for (const auto& v : dechirp(noise, cfg)) var_out += std::norm(v);
    }
    REQUIRE(var_out == Catch::Approx(var_in).epsilon(1e-9));  // unit-magnitude rotation, exact
}

TEST_CASE("noiseless demodulation recovers every symbol, including nontrivial roots") {
    for (const std::uint32_t root : {1u, 5u, 130u}) {
        LinkConfig cfg = link_131();
        cfg.root = root;
        for (std::uint32_t q = 0; q < 131; ++q) {
            const cvec block = zc_generate(ZcParams::make(131, root, q)).chips;
            const SymbolDemod d = demodulate_symbol(block, cfg, q == 0);
            REQUIRE(d.q_hat == q);
        }
    }
}

TEST_CASE("all-zero block resolves to q=0 by the tie-break") {
    const LinkConfig cfg = link_131();
    const cvec zeros(131, cplx{0.0, 0.0});
    const SymbolDemod d = demodulate_symbol(zeros, cfg);
    REQUIRE(d.q_hat == 0);
    for (const double m : d.bin_magnitudes) REQUIRE(m == 0.0);
}

TEST_CASE("argmax is invariant to positive scaling") {
    const LinkConfig cfg = link_131();
    Rng rng(5);
    cvec block = modulate({17}, cfg);
    for (auto& v : block) v += rng.cgaussian(0.5);
    const std::uint32_t base = demodulate_symbol(block, cfg, false).q_hat;
    for (auto& v : block) v *= 3.7;
    REQUIRE(demodulate_symbol(block, cfg, false).q_hat == base);
}

TEST_CASE("bin magnitudes are reported in raw DFT order") {
    LinkConfig cfg = link_131();
    cfg.root = 5;
    const cvec block = modulate({9}, cfg);
    const SymbolDemod d = demodulate_symbol(block, cfg);
    REQUIRE(d.bin_magnitudes.size() == 131);
    std::size_t peak = 0;
    for (std::size_t k = 1; k < d.bin_magnitudes.size(); ++k)
        if (d.bin_magnitudes[k] > d.bin_magnitudes[peak]) peak = k;
    REQUIRE(peak == (5 * 9) % 131);
}

TEST_CASE("noiseless stream round-trip") {
    const LinkConfig cfg = link_131();
    Rng rng(3);
    SymbolStream tx(1000);
    for (auto& q : tx) q = static_cast<std::uint32_t>(rng.uniform_int(cfg.m));
    const cvec signal = modulate(tx, cfg);
    const DemodOutput out = demodulate_stream(signal, cfg, tx.size());
    REQUIRE(out.hard_symbols == tx);
    for (const auto flag : out.out_of_alphabet) REQUIRE(flag == 0);
    REQUIRE_THROWS_AS(demodulate_stream(signal, cfg, tx.size() + 1), std::invalid_argument);
}

TEST_CASE("stream round-trip at +10 dB per-chip SNR is error-free at SF=8") {
    LinkConfig cfg;
    cfg.n = 257;
    cfg.root = 3;
    cfg.m = 256;
    Rng rng(77);
    SymbolStream tx(2000);
    for (auto& q : tx) q = static_cast<std::uint32_t>(rng.uniform_int(cfg.m));
    cvec signal = modulate(tx, cfg);
    const double sigma2 = std::pow(10.0, -10.0 / 10.0);
    for (auto& v : signal) v += rng.cgaussian(sigma2);
    const DemodOutput out = demodulate_stream(signal, cfg, tx.size());
    REQUIRE(out.hard_symbols == tx);
}

TEST_CASE("truncated mode round-trips noiselessly") {
    LinkConfig cfg;
    cfg.n = 2053;
    cfg.root = 1234;
    cfg.m = 2048;
    cfg.mode = LinkMode::truncated;
    cfg.validate();
    REQUIRE(cfg.block_length() == 2048);

    Rng rng(9);
    SymbolStream tx(200);
    for (auto& q : tx) q = static_cast<std::uint32_t>(rng.uniform_int(cfg.m));
    tx[0] = 0;
    tx[1] = 2047;
    const cvec signal = modulate(tx, cfg);
    REQUIRE(signal.size() == 200 * 2048);
    const DemodOutput out = demodulate_stream(signal, cfg, tx.size());
    REQUIRE(out.hard_symbols == tx);
}

TEST_CASE("even-length sequences modulate and demodulate") {
    LinkConfig cfg;
    cfg.n = 2048;  // power of two, Eq. (5)-style exact SF
    cfg.root = 3;
    cfg.m = 2048;
    cfg.validate();
    REQUIRE(cfg.sf() == 11);
    Rng rng(13);
    SymbolStream tx(50);
    for (auto& q : tx) q = static_cast<std::uint32_t>(rng.uniform_int(cfg.m));
    const DemodOutput out = demodulate_stream(modulate(tx, cfg), cfg, tx.size());
    REQUIRE(out.hard_symbols == tx);
}

TEST_CASE("truncated-mode config validation") {
    LinkConfig cfg;
    cfg.n = 2053;
    cfg.root = 5;
    cfg.m = 2048;
    cfg.mode = LinkMode::truncated;
    REQUIRE_NOTHROW(cfg.validate());
    cfg.n = 2039;  // prime but below 2^11
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("the normalized symbol waveforms form an orthonormal basis") {
    const LinkConfig cfg = link_131();
    const double n = 131.0;
    std::vector<cvec> basis;
    for (std::uint32_t q = 0; q < cfg.m; ++q)
        basis.push_back(zc_generate(ZcParams::make(cfg.n, cfg.root, q)).chips);
    // Gram matrix of {x_q / sqrt(N)} should be the identity.
    const auto gram = [&](std::uint32_t i, std::uint32_t j) {
        cplx dot{0.0, 0.0};
        for (std::size_t k = 0; k < cfg.n; ++k) dot += basis[i][k] * std::conj(basis[j][k]);
        return dot / n;
    };
    for (std::uint32_t q = 0; q < cfg.m; q += 11)
        REQUIRE(std::abs(gram(q, q) - cplx{1.0, 0.0}) < 1e-9);
    for (std::uint32_t i = 0; i < cfg.m; i += 17)
        for (std::uint32_t j = 0; j < cfg.m; j += 13)
            if (i != j) REQUIRE(std::abs(gram(i, j)) < 1e-9);
}

TEST_CASE("out-of-alphabet decisions are flagged, not clamped") {
    const LinkConfig cfg = link_131();  // M = 128 < N = 131
    const cvec block = zc_generate(ZcParams::make(131, 1, 130)).chips;
    const DemodOutput out = demodulate_stream(block, cfg, 1);
    REQUIRE(out.hard_symbols[0] == 130);
    REQUIRE(out.out_of_alphabet[0] == 1);
}

TEST_CASE("bit/symbol mapping is big-endian and exact") {
    REQUIRE(bits_to_symbols({0, 0, 0}, 3) == SymbolStream{0});
    REQUIRE(bits_to_symbols({1, 0, 1}, 3) == SymbolStream{5});
    REQUIRE(symbols_to_bits({5}, 3) == std::vector<std::uint8_t>{1, 0, 1});
    REQUIRE_THROWS_AS(bits_to_symbols({1, 0}, 3), std::invalid_argument);
    REQUIRE_THROWS_AS(symbols_to_bits({8}, 3), std::invalid_argument);

    Rng rng(21);
    std::vector<std::uint8_t> bits(3000);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.uniform_int(2));
    REQUIRE(symbols_to_bits(bits_to_symbols(bits, 5), 5) == bits);
}
