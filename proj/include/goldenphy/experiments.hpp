#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "goldenphy/analysis.hpp"
#include "goldenphy/channel.hpp"
#include "goldenphy/framing.hpp"
#include "goldenphy/io.hpp"
#include "goldenphy/modem.hpp"
#include "goldenphy/multiuser.hpp"
#include "goldenphy/zc.hpp"

// Experiment runners behind the CLI subcommands. Each writes its data
// product(s) plus a manifest sidecar and returns a small summary, so tests
// can drive exactly the code path the command line uses.

namespace goldenphy {

struct RunContext {
    std::filesystem::path out_dir = ".";
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

namespace detail {

class ManifestTimer {
  public:
    ManifestTimer() : start_(std::chrono::steady_clock::now()) {}
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

inline std::filesystem::path prepared(const RunContext& ctx, const std::string& name) {
    std::filesystem::create_directories(ctx.out_dir);
    return ctx.out_dir / name;
}

}  // namespace detail

// ---------------------------------------------------------------- sequences

struct GenSequenceResult {
    std::vector<std::string> outputs;
    std::size_t length = 0;
};

inline GenSequenceResult run_gen_sequence(const RunContext& ctx, std::uint32_t n, std::uint32_t root,
                                          std::uint64_t q, std::size_t truncate_to, const std::string& format,
                                          const std::string& stem = "sequence") {
    detail::ManifestTimer timer;
    ChipSequence seq = zc_generate(ZcParams::make(n, root, q));
    if (truncate_to > 0) seq = truncate_sequence(seq, truncate_to);
    GenSequenceResult result;
    result.length = seq.size();
    const nlohmann::json params{{"n", n},
                                {"root", root},
                                {"q", q},
                                {"truncate", truncate_to},
                                {"format", format}};
    if (format == "csv") {
        const auto path = detail::prepared(ctx, stem + ".csv");
        CsvWriter csv(path, {"k", "re", "im"});
        for (std::size_t k = 0; k < seq.size(); ++k)
            csv.write_row({std::to_string(k), fmt_double(seq.chips[k].real()), fmt_double(seq.chips[k].imag())});
        result.outputs.push_back(path.string());
    } else if (format == "iq") {
        const auto path = detail::prepared(ctx, stem + ".iq");
        write_iq_f32(path, seq.chips, 125000.0);
        result.outputs.push_back(path.string());
        result.outputs.push_back(path.string() + ".json");
    } else {
        throw std::invalid_argument("gen-sequence: format must be csv or iq");
    }
    write_manifest(detail::prepared(ctx, stem + ".manifest.json"), "gen-sequence", params, ctx.seed,
                   result.outputs, timer.elapsed_ms());
    return result;
}

// ------------------------------------------------------------------- table1

struct Table1Row {
    std::uint32_t sf;
    std::uint64_t n;
    double rejection_db;
    std::uint64_t set_size;
};

inline std::vector<Table1Row> run_table1(const RunContext& ctx, const std::string& stem = "table1") {
    detail::ManifestTimer timer;
    std::vector<Table1Row> rows;
    const auto path = detail::prepared(ctx, stem + ".csv");
    CsvWriter csv(path, {"sf", "n", "rejection_db", "set_size"});
    for (std::uint32_t sf = 7; sf <= 16; ++sf) {
        const InterferenceRejection r = interference_rejection(sf);
        rows.push_back({sf, r.n, r.rejection_db, r.set_size});
        csv.write_row({std::to_string(sf), std::to_string(r.n), fmt_double(r.rejection_db),
                       std::to_string(r.set_size)});
    }
    write_manifest(detail::prepared(ctx, stem + ".manifest.json"), "table1", nlohmann::json::object(),
                   ctx.seed, {path.string()}, timer.elapsed_ms());
    return rows;
}

// ---------------------------------------------------------------- BER sweep

struct BerSweepArgs {
    std::uint32_t sf = 8;
    double snr_start_db = -22.0;
    double snr_stop_db = -6.0;
    double snr_step_db = 1.0;
    std::uint64_t trials = 0;  // symbols per point; 0 = theory only
    bool with_integral = true;
    std::uint32_t root = 1;
};

struct BerSweepRow {
    double snr_db;
    double ber_theory;
    std::optional<double> ber_integral;
    std::optional<BerPoint> mc;
};

inline std::vector<BerSweepRow> run_ber_sweep(const RunContext& ctx, const BerSweepArgs& args,
                                              const std::string& stem = "ber_sweep") {
    detail::ManifestTimer timer;
    if (args.snr_step_db <= 0.0 || args.snr_stop_db < args.snr_start_db)
        throw std::invalid_argument("ber-sweep: need snr_start <= snr_stop and positive step");
    std::vector<double> snrs;
    for (double s = args.snr_start_db; s <= args.snr_stop_db + 1e-9; s += args.snr_step_db)
        snrs.push_back(s);

    LinkConfig link;
    link.n = static_cast<std::uint32_t>(smallest_prime_geq(1ull << args.sf));
    link.root = args.root;
    link.m = 1u << args.sf;
    link.validate();

    std::vector<BerPoint> mc_points;
    if (args.trials > 0) mc_points = monte_carlo_ber(link, snrs, args.trials, ctx.seed, ctx.threads);

    std::vector<BerSweepRow> rows;
    const auto path = detail::prepared(ctx, stem + ".csv");
    CsvWriter csv(path, {"sf", "snr_db", "ber_theory", "ber_integral", "ber_mc", "mc_lo", "mc_hi",
                         "trials", "errors", "seed"});
    for (std::size_t i = 0; i < snrs.size(); ++i) {
        BerSweepRow row;
        row.snr_db = snrs[i];
        const double gamma = std::pow(10.0, snrs[i] / 10.0);
        row.ber_theory = ber_approx(gamma, args.sf);
        if (args.with_integral) row.ber_integral = ber_integral_for(gamma, args.sf, link.n);
        if (!mc_points.empty()) row.mc = mc_points[i];
        csv.write_row({std::to_string(args.sf), fmt_double(snrs[i]), fmt_double(row.ber_theory),
                       row.ber_integral ? fmt_double(*row.ber_integral) : "",
                       row.mc ? fmt_double(row.mc->ber) : "", row.mc ? fmt_double(row.mc->wilson_lo) : "",
                       row.mc ? fmt_double(row.mc->wilson_hi) : "",
                       row.mc ? std::to_string(row.mc->trials) : "0",
                       row.mc ? std::to_string(row.mc->errors) : "",
                       std::to_string(ctx.seed)});
        rows.push_back(row);
    }
    const nlohmann::json params{{"sf", args.sf},          {"snr_start_db", args.snr_start_db},
                                {"snr_stop_db", args.snr_stop_db}, {"snr_step_db", args.snr_step_db},
                                {"trials", args.trials},  {"with_integral", args.with_integral},
                                {"root", args.root},      {"n", link.n}};
    write_manifest(detail::prepared(ctx, stem + ".manifest.json"), "ber-sweep", params, ctx.seed,
                   {path.string()}, timer.elapsed_ms());
    return rows;
}

// ------------------------------------------------------------- xcorr matrix

struct XcorrMatrixResult {
    std::vector<std::uint32_t> roots;
    std::vector<std::vector<double>> peaks;  // raw max |c|
};

inline XcorrMatrixResult run_xcorr_matrix(const RunContext& ctx, std::uint32_t n, std::uint32_t n_roots,
                                          bool truncated_mode, bool random_roots,
                                          const std::string& stem = "xcorr_matrix") {
    detail::ManifestTimer timer;
    XcorrMatrixResult result;
    result.roots = random_roots ? root_set(n, n_roots, ctx.seed) : root_set(n, n_roots);
    result.peaks = xcorr_matrix(n, result.roots, truncated_mode);
    const double norm = truncated_mode
                            ? static_cast<double>(std::size_t{1} << static_cast<std::size_t>(
                                                      std::lround(std::log2(static_cast<double>(n)))))
                            : static_cast<double>(n);

    std::vector<std::string> header{"root"};
    for (const std::uint32_t r : result.roots) header.push_back("r" + std::to_string(r));
    const auto raw_path = detail::prepared(ctx, stem + ".csv");
    const auto by_n_path = detail::prepared(ctx, stem + "_by_n.csv");
    CsvWriter raw(raw_path, header);
    CsvWriter by_n(by_n_path, header);
    for (std::size_t i = 0; i < result.roots.size(); ++i) {
        std::vector<std::string> raw_row{"r" + std::to_string(result.roots[i])};
        std::vector<std::string> by_n_row = raw_row;
        for (std::size_t j = 0; j < result.roots.size(); ++j) {
            raw_row.push_back(fmt_double(result.peaks[i][j]));
            by_n_row.push_back(fmt_double(result.peaks[i][j] / norm));
        }
        raw.write_row(raw_row);
        by_n.write_row(by_n_row);
    }
    const nlohmann::json params{{"n", n},
                                {"roots", n_roots},
                                {"truncated", truncated_mode},
                                {"random_roots", random_roots},
                                {"normalization_length", norm}};
    write_manifest(detail::prepared(ctx, stem + ".manifest.json"), "xcorr-matrix", params, ctx.seed,
                   {raw_path.string(), by_n_path.string()}, timer.elapsed_ms());
    return result;
}

// -------------------------------------------------------------- delay sweep

inline std::vector<DelaySweepPoint> run_delay_sweep(const RunContext& ctx, std::uint32_t n,
                                                    std::uint32_t n_pairs, std::uint32_t integer_delays,
                                                    std::uint32_t subdivisions = 4,
                                                    const std::string& stem = "delay_sweep") {
    detail::ManifestTimer timer;
    if (integer_delays == 0) integer_delays = n;
    const std::vector<std::uint32_t> roots = root_set(n, 2 * n_pairs, ctx.seed);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (std::uint32_t i = 0; i < n_pairs; ++i) pairs.emplace_back(roots[2 * i], roots[2 * i + 1]);
    const std::vector<DelaySweepPoint> points =
        fractional_delay_sweep(n, pairs, integer_delays, subdivisions);

    const auto path = detail::prepared(ctx, stem + ".csv");
    CsvWriter csv(path, {"n", "root_target", "root_interferer", "delay_chips", "level_raw", "level_by_n",
                         "level_by_sqrt_n"});
    for (const DelaySweepPoint& p : points)
        csv.write_row({std::to_string(n), std::to_string(p.root_target), std::to_string(p.root_interferer),
                       fmt_double(p.delay_chips), fmt_double(p.level_raw), fmt_double(p.level_by_n),
                       fmt_double(p.level_by_sqrt_n)});
    const nlohmann::json params{{"n", n},
                                {"pairs", n_pairs},
                                {"integer_delays", integer_delays},
                                {"subdivisions", subdivisions},
                                {"sub_chip_model", "cyclic RRC cascade, beta=0.25, span=16, oversampling=4"}};
    write_manifest(detail::prepared(ctx, stem + ".manifest.json"), "delay-sweep", params, ctx.seed,
                   {path.string()}, timer.elapsed_ms());
    return points;
}

// ----------------------------------------------------------------- cross-SF

struct CrossSfResult {
    std::vector<double> combined;
    std::vector<double> interferer_only;
    std::size_t target_n = 0;
};

inline CrossSfResult run_cross_sf(const RunContext& ctx, std::uint32_t target_sf, std::uint32_t interferer_sf,
                                  double delay_chips, std::size_t trace_length = 0,
                                  const std::string& stem = "cross_sf") {
    detail::ManifestTimer timer;
    const auto link_for = [](std::uint32_t sf) {
        LinkConfig link;
        link.n = static_cast<std::uint32_t>(smallest_prime_geq(1ull << sf));
        link.root = 1;
        link.m = 1u << sf;
        return link;
    };
    CrossSfScenario scenario;
    scenario.target = link_for(target_sf);
    scenario.target.root = 7;
    scenario.interferer = link_for(interferer_sf);
    scenario.interferer.root = 13;
    scenario.target_delay_chips = delay_chips;
    scenario.seed = ctx.seed;
    scenario.trace_length = trace_length;

    CrossSfResult result;
    result.target_n = scenario.target.n;
    result.combined = cross_sf_correlator_trace(scenario);
    CrossSfScenario interferer_only = scenario;
    interferer_only.with_target = false;
    result.interferer_only = cross_sf_correlator_trace(interferer_only);

    const auto path = detail::prepared(ctx, stem + ".csv");
    CsvWriter csv(path, {"shift", "magnitude", "magnitude_interferer_only", "magnitude_by_n"});
    for (std::size_t s = 0; s < result.combined.size(); ++s)
        csv.write_row({std::to_string(s), fmt_double(result.combined[s]),
                       fmt_double(result.interferer_only[s]),
                       fmt_double(result.combined[s] / static_cast<double>(scenario.target.n))});
    const nlohmann::json params{{"target_sf", target_sf},
                                {"interferer_sf", interferer_sf},
                                {"target_n", scenario.target.n},
                                {"interferer_n", scenario.interferer.n},
                                {"delay_chips", delay_chips}};
    write_manifest(detail::prepared(ctx, stem + ".manifest.json"), "cross-sf", params, ctx.seed,
                   {path.string()}, timer.elapsed_ms());
    return result;
}

// ---------------------------------------------------------------- multiuser

struct MultiuserArgs {
    std::uint32_t sf = 9;
    std::vector<std::uint32_t> counts{0, 5, 10, 20};
    double snr_db = 10.0;
    std::uint64_t packets = 200;
    std::uint32_t payload_len = 16;
    std::uint32_t preamble_len = 8;
    std::uint32_t root = 17;
};

inline std::vector<MultiuserCurvePoint> run_multiuser(const RunContext& ctx, const MultiuserArgs& args,
                                                      const std::string& stem = "multiuser") {
    detail::ManifestTimer timer;
    MultiuserCurveConfig cfg;
    cfg.target.link.n = static_cast<std::uint32_t>(smallest_prime_geq(1ull << args.sf));
    cfg.target.link.root = args.root;
    cfg.target.link.m = 1u << args.sf;
    cfg.target.preamble_len = args.preamble_len;
    cfg.target.q0 = 0;
    cfg.target.payload_len = args.payload_len;
    cfg.interferer_counts = args.counts;
    cfg.snr_db = args.snr_db;
    cfg.packets = args.packets;
    cfg.seed = ctx.seed;
    cfg.threads = ctx.threads;
    const std::vector<MultiuserCurvePoint> points = multiuser_error_curve(cfg);

    const auto path = detail::prepared(ctx, stem + ".csv");
    CsvWriter csv(path, {"sf", "n_interferers", "snr_db", "per", "ser", "trials", "seed"});
    for (const MultiuserCurvePoint& p : points)
        csv.write_row({std::to_string(p.sf), std::to_string(p.n_interferers), fmt_double(p.snr_db),
                       fmt_double(p.per), fmt_double(p.ser), std::to_string(p.packets),
                       std::to_string(p.seed)});
    const nlohmann::json params{{"sf", args.sf},
                                {"counts", args.counts},
                                {"snr_db", args.snr_db},
                                {"packets", args.packets},
                                {"payload_len", args.payload_len},
                                {"preamble_len", args.preamble_len},
                                {"root", args.root}};
    write_manifest(detail::prepared(ctx, stem + ".manifest.json"), "multiuser", params, ctx.seed,
                   {path.string()}, timer.elapsed_ms());
    return points;
}

// ---------------------------------------------------------------------- PSD

struct PsdRunResult {
    PsdEstimate estimate;
    double occupied_99_hz = 0.0;
};

inline PsdRunResult run_psd(const RunContext& ctx, std::uint32_t sf, double bandwidth_hz, double beta,
                            std::uint32_t n_symbols, std::size_t segment_length,
                            const std::string& stem = "psd") {
    detail::ManifestTimer timer;
    LinkConfig link;
    link.n = static_cast<std::uint32_t>(smallest_prime_geq(1ull << sf));
    link.root = 17;
    link.m = 1u << sf;
    link.bandwidth_hz = bandwidth_hz;
    link.validate();
    Rng rng(ctx.seed);
    SymbolStream symbols(n_symbols);
    for (auto& q : symbols) q = static_cast<std::uint32_t>(rng.uniform_int(link.m));
    const cvec chips = modulate(symbols, link);
    ShapingConfig shaping;
    shaping.beta = beta;
    const SampleBuffer shaped = pulse_shape(chips, shaping, bandwidth_hz);

    PsdRunResult result;
    result.estimate = psd_estimate(shaped.samples, shaped.rate_hz, segment_length);
    result.occupied_99_hz = occupied_bandwidth(result.estimate, 0.99);

    const auto path = detail::prepared(ctx, stem + ".csv");
    CsvWriter csv(path, {"freq_hz", "psd_db"});
    for (std::size_t i = 0; i < result.estimate.freq_hz.size(); ++i)
        csv.write_row({fmt_double(result.estimate.freq_hz[i]), fmt_double(result.estimate.power_db[i])});
    const nlohmann::json params{{"sf", sf},
                                {"bandwidth_hz", bandwidth_hz},
                                {"beta", beta},
                                {"symbols", n_symbols},
                                {"segment_length", segment_length},
                                {"window", "hann"},
                                {"overlap", 0.5},
                                {"occupied_99_hz", result.occupied_99_hz}};
    write_manifest(detail::prepared(ctx, stem + ".manifest.json"), "psd", params, ctx.seed, {path.string()},
                   timer.elapsed_ms());
    return result;
}

// ------------------------------------------------------------------- frames

inline nlohmann::json frame_descriptor(const FrameConfig& cfg) {
    return nlohmann::json{{"sf", cfg.link.sf()},
                          {"n", cfg.link.n},
                          {"root", cfg.link.root},
                          {"mode", cfg.link.mode == LinkMode::truncated ? "truncated" : "full"},
                          {"preamble_len", cfg.preamble_len},
                          {"q0", cfg.q0},
                          {"payload_len", cfg.payload_len},
                          {"bandwidth_hz", cfg.link.bandwidth_hz},
                          {"m", cfg.link.m}};
}

inline FrameConfig frame_from_descriptor(const nlohmann::json& j) {
    FrameConfig cfg;
    cfg.link.n = j.at("n").get<std::uint32_t>();
    cfg.link.root = j.at("root").get<std::uint32_t>();
    cfg.link.m = j.at("m").get<std::uint32_t>();
    cfg.link.bandwidth_hz = j.at("bandwidth_hz").get<double>();
    cfg.link.mode = j.at("mode").get<std::string>() == "truncated" ? LinkMode::truncated : LinkMode::full;
    cfg.preamble_len = j.at("preamble_len").get<std::uint32_t>();
    cfg.q0 = j.at("q0").get<std::uint32_t>();
    cfg.payload_len = j.at("payload_len").get<std::uint32_t>();
    cfg.validate();
    return cfg;
}

inline std::vector<std::uint8_t> bits_from_hex(const std::string& hex) {
    std::vector<std::uint8_t> bits;
    bits.reserve(hex.size() * 4);
    for (const char c : hex) {
        int v;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
        else throw std::invalid_argument("payload: invalid hex digit");
        for (int b = 3; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((v >> b) & 1));
    }
    return bits;
}

inline std::string bits_to_hex(const std::vector<std::uint8_t>& bits) {
    std::string hex;
    const std::size_t whole = bits.size() / 4;
    for (std::size_t i = 0; i < whole; ++i) {
        int v = 0;
        for (int b = 0; b < 4; ++b) v = (v << 1) | bits[i * 4 + b];
        hex.push_back("0123456789abcdef"[v]);
    }
    if (bits.size() % 4 != 0) {
        int v = 0;
        for (std::size_t j = whole * 4; j < bits.size(); ++j) v = (v << 1) | bits[j];
        v <<= 4 - (bits.size() % 4);
        hex.push_back("0123456789abcdef"[v]);
    }
    return hex;
}

inline std::vector<std::string> run_frame_encode(const RunContext& ctx, const FrameConfig& cfg,
                                                 const std::vector<std::uint8_t>& payload_bits,
                                                 const std::string& stem = "frame") {
    detail::ManifestTimer timer;
    const cvec chips = frame_encode(payload_bits, cfg);
    const auto iq_path = detail::prepared(ctx, stem + ".iq");
    write_iq_f32(iq_path, chips, cfg.link.bandwidth_hz);
    const auto desc_path = detail::prepared(ctx, stem + ".frame.json");
    {
        std::ofstream out(desc_path);
        out << frame_descriptor(cfg).dump(2) << '\n';
    }
    std::vector<std::string> outputs{iq_path.string(), iq_path.string() + ".json", desc_path.string()};
    write_manifest(detail::prepared(ctx, stem + ".manifest.json"), "frame-encode", frame_descriptor(cfg),
                   ctx.seed, outputs, timer.elapsed_ms());
    return outputs;
}

struct FrameDecodeResult {
    bool found = false;
    std::int64_t offset = 0;
    double metric = 0.0;
    std::vector<std::uint8_t> bits;
};

inline FrameDecodeResult frame_decode_samples(const cvec& samples, const FrameConfig& cfg,
                                              double threshold = 0.5) {
    FrameDecodeResult result;
    const DetectionResult det = preamble_detect(samples, cfg, threshold);
    result.found = det.found;
    result.offset = det.offset_samples;
    result.metric = det.metric;
    if (det.found) result.bits = frame_decode(samples, cfg, det);
    return result;
}

inline FrameDecodeResult run_frame_decode(const RunContext& ctx, const std::filesystem::path& iq_path,
                                          const FrameConfig& cfg, double threshold = 0.5,
                                          const std::string& stem = "frame_decode") {
    detail::ManifestTimer timer;
    const cvec samples = read_iq_f32(iq_path);
    FrameDecodeResult result = frame_decode_samples(samples, cfg, threshold);
    const auto path = detail::prepared(ctx, stem + ".json");
    {
        nlohmann::json j{{"found", result.found},
                         {"offset", result.offset},
                         {"metric", result.metric},
                         {"payload_hex", bits_to_hex(result.bits)},
                         {"payload_bits", result.bits.size()}};
        std::ofstream out(path);
        out << j.dump(2) << '\n';
    }
    const nlohmann::json params{{"input", iq_path.string()}, {"threshold", threshold}};
    write_manifest(detail::prepared(ctx, stem + ".manifest.json"), "frame-decode", params, ctx.seed,
                   {path.string()}, timer.elapsed_ms());
    return result;
}

}  // namespace goldenphy
