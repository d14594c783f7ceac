#pragma once

// Encoded-stream container. Layout (all integers little-endian, reals IEEE
// 64-bit):
//
//   magic "NADP" | u8 version (=1)
//   u8 predictor | u8 adaptation | u16 lpc_order | u8 lpc_hamming
//   u32 frame_len | u32 training_window | u32 computing_window
//   u32 refit_cap | u8 hybrid_open_loop | u32 rng_seed | u32 sample_rate_hz
//   u8 bits | u8 multiplier_count | f64 multipliers[...]
//   f64 delta_min | f64 delta_max | f64 delta_init
//   u16 mlp_inputs | u16 mlp_hidden | u8 activation
//   u32 n_random | u32 epochs_random | u32 epochs_prev | u8 use_prev
//   u8 closed_loop_eval | f64 init_range
//   f64 lm_lambda_init | f64 lm_lambda_up | f64 lm_lambda_down | f64 lambda_max
//   u64 sample_count
//   hybrid only:  u32 hybrid_bit_count | packed bits (MSB-first)
//   forward only: u32 payload_block_count | per block: u16 len, f64 values[len]
//   codes: sample_count fields of `bits` bits each, value = code + 2^(bits-1),
//          packed MSB-first, final byte zero-padded
//
// Unknown versions and any size inconsistency with the echoed config are
// rejected.

#include <cstdint>
#include <string>
#include <vector>

#include "nadpcm/bitio.hpp"
#include "nadpcm/codec.hpp"
#include "nadpcm/errors.hpp"

namespace nadpcm {

inline constexpr std::uint8_t kStreamVersion = 1;

inline std::vector<std::uint8_t> serialize_stream(const EncodedStream& stream) {
    const CodecConfig& c = stream.config_echo;
    ByteWriter w;
    w.raw(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("NADP"), 4));
    w.u8(kStreamVersion);

    w.u8(static_cast<std::uint8_t>(c.predictor));
    w.u8(static_cast<std::uint8_t>(c.adaptation));
    w.u16(static_cast<std::uint16_t>(c.lpc_order));
    w.u8(c.lpc_hamming ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(c.frame_len));
    w.u32(static_cast<std::uint32_t>(c.training_window));
    w.u32(static_cast<std::uint32_t>(c.computing_window));
    w.u32(c.refit_cap);
    w.u8(c.hybrid_open_loop ? 1 : 0);
    w.u32(c.rng_seed);
    w.u32(static_cast<std::uint32_t>(stream.sample_rate_hz));

    w.u8(static_cast<std::uint8_t>(c.quantizer.bits));
    w.u8(static_cast<std::uint8_t>(c.quantizer.multipliers.size()));
    for (double m : c.quantizer.multipliers) w.f64(m);
    w.f64(c.quantizer.delta_min);
    w.f64(c.quantizer.delta_max);
    w.f64(c.quantizer.delta_init);

    const MlpTrainParams& t = c.mlp_train;
    w.u16(static_cast<std::uint16_t>(t.inputs));
    w.u16(static_cast<std::uint16_t>(t.hidden));
    w.u8(static_cast<std::uint8_t>(t.activation));
    w.u32(static_cast<std::uint32_t>(t.n_random));
    w.u32(static_cast<std::uint32_t>(t.epochs_random));
    w.u32(static_cast<std::uint32_t>(t.epochs_prev));
    w.u8(t.use_prev ? 1 : 0);
    w.u8(t.closed_loop_eval ? 1 : 0);
    w.f64(t.init_range);
    w.f64(t.lm.lm_lambda_init);
    w.f64(t.lm.lm_lambda_up);
    w.f64(t.lm.lm_lambda_down);
    w.f64(t.lm.lambda_max);

    w.u64(stream.codes.size());

    if (c.predictor == Predictor::hybrid) {
        w.u32(static_cast<std::uint32_t>(stream.hybrid_bits.size()));
        BitWriter bits;
        for (auto b : stream.hybrid_bits) bits.put_bits(b ? 1u : 0u, 1);
        const auto packed = bits.finish();
        w.raw(packed);
    }
    if (c.adaptation == Adaptation::forward) {
        w.u32(static_cast<std::uint32_t>(stream.forward_payload.size()));
        for (const auto& block : stream.forward_payload) {
            w.u16(static_cast<std::uint16_t>(block.size()));
            for (double v : block) w.f64(v);
        }
    }

    const int half = c.quantizer.levels() / 2;
    BitWriter codes;
    for (auto code : stream.codes)
        codes.put_bits(static_cast<std::uint32_t>(static_cast<int>(code) + half), c.quantizer.bits);
    w.raw(codes.finish());
    return w.take();
}

inline EncodedStream deserialize_stream(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    const auto magic = r.raw(4);
    if (std::memcmp(magic.data(), "NADP", 4) != 0) throw IoError("stream: bad magic");
    const auto version = r.u8();
    if (version != kStreamVersion)
        throw IoError("stream: unknown version " + std::to_string(static_cast<int>(version)));

    EncodedStream stream;
    CodecConfig& c = stream.config_echo;
    const auto predictor = r.u8();
    const auto adaptation = r.u8();
    if (predictor > 2) throw IoError("stream: bad predictor field");
    if (adaptation > 1) throw IoError("stream: bad adaptation field");
    c.predictor = static_cast<Predictor>(predictor);
    c.adaptation = static_cast<Adaptation>(adaptation);
    c.lpc_order = r.u16();
    c.lpc_hamming = r.u8() != 0;
    c.frame_len = static_cast<int>(r.u32());
    c.training_window = static_cast<int>(r.u32());
    c.computing_window = static_cast<int>(r.u32());
    c.refit_cap = r.u32();
    c.hybrid_open_loop = r.u8() != 0;
    c.rng_seed = r.u32();
    stream.sample_rate_hz = static_cast<int>(r.u32());

    c.quantizer.bits = r.u8();
    const int mult_count = r.u8();
    if (c.quantizer.bits < 2 || c.quantizer.bits > 5 || mult_count != (1 << (c.quantizer.bits - 1)))
        throw IoError("stream: inconsistent quantizer fields");
    c.quantizer.multipliers.resize(static_cast<std::size_t>(mult_count));
    for (auto& m : c.quantizer.multipliers) m = r.f64();
    c.quantizer.delta_min = r.f64();
    c.quantizer.delta_max = r.f64();
    c.quantizer.delta_init = r.f64();

    MlpTrainParams& t = c.mlp_train;
    t.inputs = r.u16();
    t.hidden = r.u16();
    const auto act = r.u8();
    if (act > 1) throw IoError("stream: bad activation field");
    t.activation = static_cast<Activation>(act);
    t.n_random = static_cast<int>(r.u32());
    t.epochs_random = static_cast<int>(r.u32());
    t.epochs_prev = static_cast<int>(r.u32());
    t.use_prev = r.u8() != 0;
    t.closed_loop_eval = r.u8() != 0;
    t.init_range = r.f64();
    t.lm.lm_lambda_init = r.f64();
    t.lm.lm_lambda_up = r.f64();
    t.lm.lm_lambda_down = r.f64();
    t.lm.lambda_max = r.f64();

    const std::uint64_t count = r.u64();
    if (count == 0) throw IoError("stream: zero-length signal");

    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw IoError(std::string("stream: invalid echoed config: ") + e.what());
    }

    if (c.predictor == Predictor::hybrid) {
        const std::uint64_t expect = (count + static_cast<std::uint64_t>(c.frame_len) - 1) /
                                     static_cast<std::uint64_t>(c.frame_len);
        const std::uint32_t n_bits = r.u32();
        if (n_bits != expect) throw IoError("stream: hybrid bit count inconsistent with sample count");
        const auto packed = r.raw((n_bits + 7) / 8);
        BitReader br(packed);
        stream.hybrid_bits.resize(n_bits);
        for (auto& b : stream.hybrid_bits) b = static_cast<std::uint8_t>(br.get_bits(1));
    }
    if (c.adaptation == Adaptation::forward) {
        const std::uint64_t expect = (count + static_cast<std::uint64_t>(c.computing_window) - 1) /
                                     static_cast<std::uint64_t>(c.computing_window);
        const std::uint32_t n_blocks = r.u32();
        if (n_blocks != expect) throw IoError("stream: payload block count inconsistent with sample count");
        const std::size_t expect_len = c.predictor == Predictor::lpc
                                           ? static_cast<std::size_t>(c.lpc_order)
                                           : static_cast<std::size_t>(
                                                 MlpWeights::zero(t.inputs, t.hidden).param_count());
        stream.forward_payload.resize(n_blocks);
        for (auto& block : stream.forward_payload) {
            const std::uint16_t len = r.u16();
            if (len != expect_len) throw IoError("stream: payload block size inconsistent with config");
            block.resize(len);
            for (auto& v : block) v = r.f64();
        }
    }

    const std::size_t code_bytes = (static_cast<std::size_t>(count) * static_cast<std::size_t>(c.quantizer.bits) + 7) / 8;
    const auto packed = r.raw(code_bytes);
    BitReader br(packed);
    const int half = c.quantizer.levels() / 2;
    stream.codes.resize(static_cast<std::size_t>(count));
    for (auto& code : stream.codes)
        code = static_cast<std::int8_t>(static_cast<int>(br.get_bits(c.quantizer.bits)) - half);

    if (r.remaining() != 0) throw IoError("stream: trailing bytes");
    return stream;
}

inline void write_stream_file(const EncodedStream& stream, const std::string& path) {
    const auto bytes = serialize_stream(stream);
    detail::write_file_bytes(path, bytes);
}

inline EncodedStream read_stream_file(const std::string& path) {
    const auto bytes = detail::read_file_bytes(path);
    return deserialize_stream(bytes);
}

}  // namespace nadpcm
