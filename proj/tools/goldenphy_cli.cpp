// goldenphy: link-level simulation CLI for the Zadoff-Chu spread-spectrum
// modulation implemented in include/goldenphy. Every subcommand writes CSV
// or I/Q data products plus a manifest sidecar and is deterministic for a
// fixed --seed.

#include <cstdlib>
#include <iostream>
#include <iterator>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "goldenphy/goldenphy.hpp"

namespace {

goldenphy::RunContext make_context(const std::string& out_dir, std::uint64_t seed, unsigned threads) {
    goldenphy::RunContext ctx;
    if (!out_dir.empty()) {
        ctx.out_dir = out_dir;
    } else if (const char* env = std::getenv("GOLDENPHY_OUT_DIR"); env && *env) {
        ctx.out_dir = env;
    } else {
        ctx.out_dir = ".";
    }
    ctx.seed = seed;
    ctx.threads = threads;
    return ctx;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Golden Modulation link-level simulator"};
    app.set_version_flag("--version", std::string(goldenphy::kToolName) + " " +
                                          std::string(goldenphy::kToolVersion));
    app.require_subcommand(1);
    app.fallthrough();  // global --seed/--threads/--out-dir may follow the subcommand

    std::string out_dir;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    app.add_option("--out-dir", out_dir, "Output directory (or env GOLDENPHY_OUT_DIR)");
    app.add_option("--seed", seed, "Master seed; all randomness derives from it");
    app.add_option("--threads", threads, "Worker threads for Monte Carlo commands (0 = all cores)");

    // gen-sequence
    auto* gen = app.add_subcommand("gen-sequence", "Generate a Zadoff-Chu sequence");
    std::uint32_t gs_n = 131, gs_root = 1;
    std::uint64_t gs_q = 0;
    std::size_t gs_trunc = 0;
    std::string gs_format = "csv", gs_out = "sequence";
    gen->add_option("--n", gs_n, "Sequence length N")->required();
    gen->add_option("--root", gs_root, "Root r, coprime with N")->required();
    gen->add_option("--q", gs_q, "Frequency offset q (reduced mod N)");
    gen->add_option("--truncate", gs_trunc, "Keep only the first K chips");
    gen->add_option("--format", gs_format, "csv or iq")->check(CLI::IsMember({"csv", "iq"}));
    gen->add_option("--out", gs_out, "Output file stem");

    // table1
    auto* table = app.add_subcommand("table1", "Waveform set sizes and interference rejection per SF");
    std::string t1_out = "table1";
    table->add_option("--out", t1_out, "Output file stem");

    // ber-sweep
    auto* ber = app.add_subcommand("ber-sweep", "Theoretical and Monte Carlo BER vs SNR");
    goldenphy::BerSweepArgs ber_args;
    std::string ber_out = "ber_sweep";
    bool ber_no_integral = false;
    ber->add_option("--sf", ber_args.sf, "Spreading factor")->required();
    ber->add_option("--snr-start", ber_args.snr_start_db, "First SNR point (dB)");
    ber->add_option("--snr-stop", ber_args.snr_stop_db, "Last SNR point (dB)");
    ber->add_option("--snr-step", ber_args.snr_step_db, "SNR step (dB)");
    ber->add_option("--trials", ber_args.trials, "Symbols per SNR point (0 = theory only)");
    ber->add_option("--root", ber_args.root, "Zadoff-Chu root");
    ber->add_flag("--no-integral", ber_no_integral, "Skip the numerical-integral theory column");
    ber->add_option("--out", ber_out, "Output file stem");

    // xcorr-matrix
    auto* xm = app.add_subcommand("xcorr-matrix", "Pairwise max cyclic cross-correlation peaks");
    std::uint32_t xm_n = 2053, xm_roots = 100;
    std::size_t xm_trunc = 0;
    bool xm_random = false;
    std::string xm_out = "xcorr_matrix";
    xm->add_option("--n", xm_n, "Prime sequence length")->required();
    xm->add_option("--roots", xm_roots, "Number of roots in the set");
    xm->add_option("--truncate", xm_trunc, "Truncate sequences to 2^SF chips (pass the length)");
    xm->add_flag("--random-roots", xm_random, "Select roots randomly (seeded) instead of ascending");
    xm->add_option("--out", xm_out, "Output file stem");

    // delay-sweep
    auto* ds = app.add_subcommand("delay-sweep", "Interference level vs delay in Tc/4 steps");
    std::uint32_t ds_n = 521, ds_pairs = 20, ds_delays = 0, ds_subdiv = 4;
    std::string ds_out = "delay_sweep";
    ds->add_option("--n", ds_n, "Prime sequence length");
    ds->add_option("--pairs", ds_pairs, "Number of random root pairs");
    ds->add_option("--max-delay", ds_delays, "Integer delays to list (0 = all of 0..N-1)");
    ds->add_option("--subdivisions", ds_subdiv, "Sub-chip steps per chip");
    ds->add_option("--out", ds_out, "Output file stem");

    // cross-sf
    auto* cs = app.add_subcommand("cross-sf", "Correlator trace with a different-SF interferer");
    std::uint32_t cs_tsf = 11, cs_isf = 10;
    double cs_delay = 1000.0;
    std::size_t cs_trace = 0;
    std::string cs_out = "cross_sf";
    cs->add_option("--target-sf", cs_tsf, "Target spreading factor");
    cs->add_option("--interferer-sf", cs_isf, "Interferer spreading factor");
    cs->add_option("--delay", cs_delay, "Target delay in chips");
    cs->add_option("--trace-length", cs_trace, "Shifts to evaluate (0 = 2*N_target)");
    cs->add_option("--out", cs_out, "Output file stem");

    // multiuser
    auto* mu = app.add_subcommand("multiuser", "SER/PER vs number of equal-power interferers");
    goldenphy::MultiuserArgs mu_args;
    std::string mu_out = "multiuser";
    mu->add_option("--sf", mu_args.sf, "Spreading factor");
    mu->add_option("--counts", mu_args.counts, "Interferer counts to evaluate")->delimiter(',');
    mu->add_option("--snr-db", mu_args.snr_db, "Per-chip SNR (dB)");
    mu->add_option("--packets", mu_args.packets, "Packets per count");
    mu->add_option("--payload-len", mu_args.payload_len, "Payload symbols per packet");
    mu->add_option("--preamble-len", mu_args.preamble_len, "Preamble symbols per packet");
    mu->add_option("--root", mu_args.root, "Target root");
    mu->add_option("--out", mu_out, "Output file stem");

    // psd
    auto* psd = app.add_subcommand("psd", "Welch PSD of a shaped transmission");
    std::uint32_t psd_sf = 12, psd_symbols = 12;
    double psd_bw = 100e3, psd_beta = 0.25;
    std::size_t psd_segment = 4096;
    std::string psd_out = "psd";
    psd->add_option("--sf", psd_sf, "Spreading factor");
    psd->add_option("--bandwidth", psd_bw, "Chip-rate bandwidth B (Hz)");
    psd->add_option("--beta", psd_beta, "RRC roll-off");
    psd->add_option("--symbols", psd_symbols, "Symbols to modulate");
    psd->add_option("--segment", psd_segment, "Welch segment length");
    psd->add_option("--out", psd_out, "Output file stem");

    // frame encode/decode
    auto* frame = app.add_subcommand("frame", "Frame encode/decode");
    frame->require_subcommand(1);
    auto* fe = frame->add_subcommand("encode", "Encode payload bits into a chip-rate I/Q frame");
    std::uint32_t fe_n = 257, fe_root = 1, fe_m = 0, fe_pre = 8, fe_q0 = 0;
    bool fe_truncated = false;
    double fe_bw = 125000.0;
    std::string fe_payload = "", fe_out = "frame";
    fe->add_option("--n", fe_n, "Chips per symbol (parent length)")->required();
    fe->add_option("--root", fe_root, "Root")->required();
    fe->add_option("--m", fe_m, "Alphabet size (default: largest power of two fitting the block)");
    fe->add_option("--preamble-len", fe_pre, "Preamble symbols");
    fe->add_option("--q0", fe_q0, "Preamble symbol value");
    fe->add_flag("--truncated", fe_truncated, "Truncate blocks to 2^SF chips");
    fe->add_option("--bandwidth", fe_bw, "Bandwidth B (Hz)");
    fe->add_option("--payload-hex", fe_payload, "Payload as hex digits")->required();
    fe->add_option("--out", fe_out, "Output file stem (writes .iq, .iq.json, .frame.json)");

    auto* fd = frame->add_subcommand("decode", "Detect and decode a frame from I/Q samples");
    std::string fd_in, fd_desc, fd_out = "frame_decode";
    double fd_threshold = 0.5;
    std::uint32_t fd_n = 0, fd_root = 0, fd_m = 0, fd_pre = 8, fd_q0 = 0, fd_payload = 0;
    bool fd_truncated = false;
    double fd_bw = 125000.0;
    fd->add_option("--in", fd_in, "Input .iq file, or - for stdin")->required();
    fd->add_option("--descriptor", fd_desc, "Frame descriptor JSON (default: <in stem>.frame.json)");
    fd->add_option("--threshold", fd_threshold, "Detection threshold");
    fd->add_option("--out", fd_out, "Output file stem");
    // Frame parameters for descriptor-less (piped) input.
    fd->add_option("--n", fd_n, "Chips per symbol when no descriptor file is used");
    fd->add_option("--root", fd_root, "Root when no descriptor file is used");
    fd->add_option("--m", fd_m, "Alphabet size (default: largest power of two fitting the block)");
    fd->add_option("--preamble-len", fd_pre, "Preamble symbols");
    fd->add_option("--q0", fd_q0, "Preamble symbol value");
    fd->add_option("--payload-len", fd_payload, "Payload symbols");
    fd->add_flag("--truncated", fd_truncated, "Blocks truncated to 2^SF chips");
    fd->add_option("--bandwidth", fd_bw, "Bandwidth B (Hz)");

    CLI11_PARSE(app, argc, argv);

    try {
        const goldenphy::RunContext ctx = make_context(out_dir, seed, threads);
        if (*gen) {
            const auto r = goldenphy::run_gen_sequence(ctx, gs_n, gs_root, gs_q, gs_trunc, gs_format, gs_out);
            std::cout << "wrote " << r.outputs.front() << " (" << r.length << " chips)\n";
        } else if (*table) {
            const auto rows = goldenphy::run_table1(ctx, t1_out);
            for (const auto& row : rows)
                std::cout << "SF " << row.sf << ": N=" << row.n << " set=" << row.set_size
                          << " rejection=" << row.rejection_db << " dB\n";
        } else if (*ber) {
            ber_args.with_integral = !ber_no_integral;
            const auto rows = goldenphy::run_ber_sweep(ctx, ber_args, ber_out);
            std::cout << "wrote " << rows.size() << " SNR points (sf=" << ber_args.sf << ")\n";
        } else if (*xm) {
            const bool truncated = xm_trunc > 0;
            if (truncated) {
                const std::size_t expect = std::size_t{1}
                                           << static_cast<std::size_t>(std::lround(std::log2(double(xm_n))));
                if (xm_trunc != expect)
                    throw std::invalid_argument("xcorr-matrix: --truncate must equal 2^SF = " +
                                                std::to_string(expect));
            }
            const auto r = goldenphy::run_xcorr_matrix(ctx, xm_n, xm_roots, truncated, xm_random, xm_out);
            std::cout << "wrote " << r.roots.size() << "x" << r.roots.size() << " peak matrix\n";
        } else if (*ds) {
            const auto points = goldenphy::run_delay_sweep(ctx, ds_n, ds_pairs, ds_delays, ds_subdiv, ds_out);
            std::cout << "wrote " << points.size() << " sweep points\n";
        } else if (*cs) {
            const auto r = goldenphy::run_cross_sf(ctx, cs_tsf, cs_isf, cs_delay, cs_trace, cs_out);
            double mx = 0.0;
            for (const double v : r.interferer_only) mx = std::max(mx, v);
            std::cout << "trace length " << r.combined.size() << ", interferer-only max " << mx << "\n";
        } else if (*mu) {
            const auto points = goldenphy::run_multiuser(ctx, mu_args, mu_out);
            for (const auto& p : points)
                std::cout << p.n_interferers << " interferers: SER=" << p.ser << " PER=" << p.per << "\n";
        } else if (*psd) {
            const auto r = goldenphy::run_psd(ctx, psd_sf, psd_bw, psd_beta, psd_symbols, psd_segment, psd_out);
            std::cout << "99% power bandwidth: " << r.occupied_99_hz / 1e3 << " kHz\n";
        } else if (*fe) {
            goldenphy::FrameConfig cfg;
            cfg.link.n = fe_n;
            cfg.link.root = fe_root;
            cfg.link.mode = fe_truncated ? goldenphy::LinkMode::truncated : goldenphy::LinkMode::full;
            cfg.link.bandwidth_hz = fe_bw;
            if (fe_m == 0) {
                std::uint32_t m = 2;
                while (2ull * m <= cfg.link.block_length()) m *= 2;
                cfg.link.m = m;
            } else {
                cfg.link.m = fe_m;
            }
            cfg.preamble_len = fe_pre;
            cfg.q0 = fe_q0;
            const auto bits = goldenphy::bits_from_hex(fe_payload);
            const std::uint32_t b = cfg.link.bits_per_symbol();
            if (bits.size() % b != 0)
                throw std::invalid_argument("frame encode: payload bit count " + std::to_string(bits.size()) +
                                            " is not a multiple of b=" + std::to_string(b));
            cfg.payload_len = static_cast<std::uint32_t>(bits.size() / b);
            if (fe_out == "-") {
                // Raw interleaved float32 I/Q to stdout for piping.
                const goldenphy::cvec chips = goldenphy::frame_encode(bits, cfg);
                std::vector<float> interleaved(chips.size() * 2);
                for (std::size_t i = 0; i < chips.size(); ++i) {
                    interleaved[2 * i] = static_cast<float>(chips[i].real());
                    interleaved[2 * i + 1] = static_cast<float>(chips[i].imag());
                }
                std::cout.write(reinterpret_cast<const char*>(interleaved.data()),
                                static_cast<std::streamsize>(interleaved.size() * sizeof(float)));
                std::cerr << "frame: " << cfg.frame_chips() << " chips to stdout\n";
            } else {
                const auto outputs = goldenphy::run_frame_encode(ctx, cfg, bits, fe_out);
                std::cout << "wrote " << outputs.front() << " (" << cfg.frame_chips() << " chips)\n";
            }
        } else if (*fd) {
            goldenphy::FrameConfig cfg;
            if (fd_n != 0 && fd_desc.empty()) {
                cfg.link.n = fd_n;
                cfg.link.root = fd_root;
                cfg.link.mode = fd_truncated ? goldenphy::LinkMode::truncated : goldenphy::LinkMode::full;
                cfg.link.bandwidth_hz = fd_bw;
                if (fd_m == 0) {
                    std::uint32_t m = 2;
                    while (2ull * m <= cfg.link.block_length()) m *= 2;
                    cfg.link.m = m;
                } else {
                    cfg.link.m = fd_m;
                }
                cfg.preamble_len = fd_pre;
                cfg.q0 = fd_q0;
                cfg.payload_len = fd_payload;
                cfg.validate();
            } else {
                std::filesystem::path desc = fd_desc.empty()
                    ? std::filesystem::path(fd_in).replace_extension(".frame.json")
                    : std::filesystem::path(fd_desc);
                std::ifstream in(desc);
                if (!in) throw std::runtime_error("frame decode: cannot open descriptor " + desc.string() +
                                                  " (pass --n/--root/--payload-len for descriptor-less input)");
                nlohmann::json j;
                in >> j;
                cfg = goldenphy::frame_from_descriptor(j);
            }
            if (fd_in == "-") {
                std::vector<char> raw((std::istreambuf_iterator<char>(std::cin)),
                                      std::istreambuf_iterator<char>());
                if (raw.size() % (2 * sizeof(float)) != 0)
                    throw std::runtime_error("frame decode: stdin is not whole float32 I/Q pairs");
                goldenphy::cvec samples(raw.size() / (2 * sizeof(float)));
                const float* f = reinterpret_cast<const float*>(raw.data());
                for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = {f[2 * i], f[2 * i + 1]};
                const auto r = goldenphy::frame_decode_samples(samples, cfg, fd_threshold);
                if (!r.found) {
                    std::cerr << "no frame detected (best metric " << r.metric << ")\n";
                    return 2;
                }
                std::cout << goldenphy::bits_to_hex(r.bits) << "\n";
            } else {
                const auto r = goldenphy::run_frame_decode(ctx, fd_in, cfg, fd_threshold, fd_out);
                if (!r.found) {
                    std::cerr << "no frame detected (best metric " << r.metric << ")\n";
                    return 2;
                }
                std::cout << goldenphy::bits_to_hex(r.bits) << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
