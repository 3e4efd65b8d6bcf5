#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "goldenphy/common.hpp"

// File outputs: CSV results, raw interleaved float32 I/Q with a JSON sidecar,
// and per-run manifests.

namespace goldenphy {

// Fixed-format double -> string so CSVs are byte-identical across runs.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path.string());
        write_row(header);
    }

    void write_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    void close() { out_.close(); }

  private:
    std::ofstream out_;
};

// Interleaved little-endian float32 (re, im), header-less; metadata goes in a
// JSON sidecar.
inline void write_iq_f32(const std::filesystem::path& path, const cvec& samples, double rate_hz) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_iq_f32: cannot open " + path.string());
    std::vector<float> interleaved(samples.size() * 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        interleaved[2 * i] = static_cast<float>(samples[i].real());
        interleaved[2 * i + 1] = static_cast<float>(samples[i].imag());
    }
    out.write(reinterpret_cast<const char*>(interleaved.data()),
              static_cast<std::streamsize>(interleaved.size() * sizeof(float)));
    nlohmann::json sidecar{
        {"format", "f32le_interleaved"}, {"rate_hz", rate_hz}, {"sample_count", samples.size()}};
    std::ofstream meta(path.string() + ".json");
    meta << sidecar.dump(2) << '\n';
}

inline cvec read_iq_f32(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_iq_f32: cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const std::streamsize bytes = in.tellg();
    in.seekg(0);
    if (bytes % (2 * sizeof(float)) != 0)
        throw std::runtime_error("read_iq_f32: file size is not a whole number of I/Q pairs");
    std::vector<float> interleaved(static_cast<std::size_t>(bytes) / sizeof(float));
    in.read(reinterpret_cast<char*>(interleaved.data()), bytes);
    cvec samples(interleaved.size() / 2);
    for (std::size_t i = 0; i < samples.size(); ++i)
        samples[i] = {interleaved[2 * i], interleaved[2 * i + 1]};
    return samples;
}

// Every CSV/IQ product gets a manifest sidecar recording the command, its
// full parameter set and the master seed. The duration field is informative
// only; determinism guarantees apply to the data products.
inline void write_manifest(const std::filesystem::path& path, const std::string& command,
                           const nlohmann::json& parameters, std::uint64_t master_seed,
                           const std::vector<std::string>& outputs, double duration_ms) {
    nlohmann::json manifest{
        {"command", command},
        {"parameters", parameters},
        {"master_seed", master_seed},
        {"tool", std::string(kToolName) + " " + std::string(kToolVersion)},
        {"outputs", outputs},
        {"duration_ms", duration_ms},
    };
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_manifest: cannot open " + path.string());
    out << manifest.dump(2) << '\n';
}

}  // namespace goldenphy
