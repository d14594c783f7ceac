#pragma once

// PCM I/O (headerless raw16le and 16-bit RIFF/WAVE) and the segmental SNR
// metric. The codec works on amplitudes normalized to [-1, 1]; 16-bit input
// is mapped by division by 32768 on load and scaled by 32767 on store.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "nadpcm/errors.hpp"

namespace nadpcm {

enum class PcmFormat { raw16le, wav };

struct SampleBuffer {
    std::vector<double> samples;
    int sample_rate_hz = 8000;
};

struct SegSnrReport {
    double segsnr_db = 0.0;
    std::vector<double> per_segment_db;
    int segment_len = 0;
    double std_db = 0.0;
};

inline double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

inline std::int16_t sample_to_int16(double x) {
    const double v = std::round(clamp_unit(x) * 32767.0);
    return static_cast<std::int16_t>(v);
}

inline double int16_to_sample(std::int16_t v) { return static_cast<double>(v) / 32768.0; }

namespace detail {

inline std::uint32_t rd_u32le(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t rd_u16le(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    in.seekg(0, std::ios::end);
    const auto len = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(len));
    if (len > 0) in.read(reinterpret_cast<char*>(bytes.data()), len);
    if (!in) throw IoError("cannot read file: " + path);
    return bytes;
}

inline void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing file: " + path);
}

}  // namespace detail

// Parses a RIFF/WAVE container. Accepts PCM (format tag 1), 16 bits/sample,
// any sample rate; takes the first channel of multichannel files.
inline SampleBuffer parse_wav(std::span<const std::uint8_t> bytes, const std::string& name) {
    using detail::rd_u16le;
    using detail::rd_u32le;
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw IoError("malformed wav header: " + name);

    int channels = 0;
    int sample_rate = 0;
    int bits_per_sample = 0;
    bool have_fmt = false;
    std::span<const std::uint8_t> data;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint8_t* hdr = bytes.data() + pos;
        const std::uint32_t chunk_len = rd_u32le(hdr + 4);
        const std::size_t body = pos + 8;
        if (body + chunk_len > bytes.size()) throw IoError("truncated wav chunk: " + name);
        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            if (chunk_len < 16) throw IoError("malformed wav fmt chunk: " + name);
            const std::uint16_t tag = rd_u16le(bytes.data() + body);
            if (tag != 1) throw IoError("unsupported wav format tag (want PCM): " + name);
            channels = rd_u16le(bytes.data() + body + 2);
            sample_rate = static_cast<int>(rd_u32le(bytes.data() + body + 4));
            bits_per_sample = rd_u16le(bytes.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            data = bytes.subspan(body, chunk_len);
        }
        pos = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
    }

    if (!have_fmt || channels <= 0 || sample_rate <= 0) throw IoError("malformed wav header: " + name);
    if (bits_per_sample != 16) throw IoError("unsupported wav bit depth (want 16): " + name);
    if (data.empty()) throw IoError("wav has no data chunk or zero-length signal: " + name);
    if (channels > 1)
        std::fprintf(stderr, "warning: %s has %d channels, taking the first\n", name.c_str(), channels);

    const std::size_t frame_bytes = static_cast<std::size_t>(channels) * 2;
    const std::size_t n = data.size() / frame_bytes;
    if (n == 0) throw IoError("zero-length signal: " + name);

    SampleBuffer buf;
    buf.sample_rate_hz = sample_rate;
    buf.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* p = data.data() + i * frame_bytes;
        const auto v = static_cast<std::int16_t>(rd_u16le(p));
        buf.samples[i] = int16_to_sample(v);
    }
    return buf;
}

inline SampleBuffer load_pcm(const std::string& path, PcmFormat format, int raw_sample_rate_hz = 8000) {
    const auto bytes = detail::read_file_bytes(path);
    if (format == PcmFormat::wav) return parse_wav(bytes, path);

    if (bytes.size() % 2 != 0) throw IoError("raw16le file has odd byte length: " + path);
    const std::size_t n = bytes.size() / 2;
    if (n == 0) throw IoError("zero-length signal: " + path);
    if (raw_sample_rate_hz <= 0) throw ConfigError("sample rate must be positive");
    SampleBuffer buf;
    buf.sample_rate_hz = raw_sample_rate_hz;
    buf.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = static_cast<std::int16_t>(detail::rd_u16le(bytes.data() + 2 * i));
        buf.samples[i] = int16_to_sample(v);
    }
    return buf;
}

inline std::vector<std::uint8_t> wav_bytes(const SampleBuffer& buffer) {
    const std::size_t n = buffer.samples.size();
    const std::uint32_t data_len = static_cast<std::uint32_t>(n * 2);
    std::vector<std::uint8_t> out;
    out.reserve(44 + data_len);
    auto u32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
    };
    auto u16 = [&](std::uint16_t v) {
        out.push_back(static_cast<std::uint8_t>(v & 0xff));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
    };
    auto tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };

    const auto rate = static_cast<std::uint32_t>(buffer.sample_rate_hz);
    tag("RIFF");
    u32(36 + data_len);
    tag("WAVE");
    tag("fmt ");
    u32(16);
    u16(1);   // PCM
    u16(1);   // mono
    u32(rate);
    u32(rate * 2);  // byte rate
    u16(2);   // block align
    u16(16);  // bits per sample
    tag("data");
    u32(data_len);
    for (double s : buffer.samples) {
        const auto v = static_cast<std::uint16_t>(sample_to_int16(s));
        out.push_back(static_cast<std::uint8_t>(v & 0xff));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    return out;
}

inline void store_pcm(const SampleBuffer& buffer, const std::string& path, PcmFormat format) {
    for (double s : buffer.samples)
        if (!std::isfinite(s)) throw ConfigError("store_pcm: non-finite sample");
    if (format == PcmFormat::wav) {
        detail::write_file_bytes(path, wav_bytes(buffer));
        return;
    }
    std::vector<std::uint8_t> out;
    out.reserve(buffer.samples.size() * 2);
    for (double s : buffer.samples) {
        const auto v = static_cast<std::uint16_t>(sample_to_int16(s));
        out.push_back(static_cast<std::uint8_t>(v & 0xff));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    detail::write_file_bytes(path, out);
}

// Per-segment SNR in dB, clamped so that bit-exact or silent segments do not
// dominate the average.
inline constexpr double kSegSnrFloorDb = -10.0;
inline constexpr double kSegSnrCeilDb = 80.0;

inline double segment_snr_db(double signal_energy, double error_energy) {
    if (error_energy <= 0.0) return kSegSnrCeilDb;  // includes the 0/0 (exact) case
    if (signal_energy <= 0.0) return kSegSnrFloorDb;
    const double db = 10.0 * std::log10(signal_energy / error_energy);
    return std::clamp(db, kSegSnrFloorDb, kSegSnrCeilDb);
}

// Splits into consecutive non-overlapping segments of segment_len (trailing
// partial segment dropped) and averages per-segment SNR.
inline SegSnrReport segsnr(const SampleBuffer& original, const SampleBuffer& decoded, int segment_len) {
    if (segment_len <= 0) throw ConfigError("segsnr: segment_len must be positive");
    if (original.samples.size() != decoded.samples.size())
        throw ConfigError("segsnr: buffer length mismatch");
    const std::size_t n = original.samples.size();
    const std::size_t seg = static_cast<std::size_t>(segment_len);
    const std::size_t n_segments = n / seg;
    if (n_segments == 0) throw ConfigError("segsnr: fewer than one full segment");

    SegSnrReport report;
    report.segment_len = segment_len;
    report.per_segment_db.reserve(n_segments);
    for (std::size_t s = 0; s < n_segments; ++s) {
        double sig = 0.0, err = 0.0;
        for (std::size_t i = s * seg; i < (s + 1) * seg; ++i) {
            const double x = original.samples[i];
            const double d = x - decoded.samples[i];
            sig += x * x;
            err += d * d;
        }
        report.per_segment_db.push_back(segment_snr_db(sig, err));
    }
    const double mean = std::accumulate(report.per_segment_db.begin(), report.per_segment_db.end(), 0.0) /
                        static_cast<double>(n_segments);
    double var = 0.0;
    for (double v : report.per_segment_db) var += (v - mean) * (v - mean);
    report.segsnr_db = mean;
    report.std_db = std::sqrt(var / static_cast<double>(n_segments));
    return report;
}

}  // namespace nadpcm
