#pragma once

// MSB-first bit packing and little-endian scalar serialization used by the
// encoded-stream container.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "nadpcm/errors.hpp"

namespace nadpcm {

class BitWriter {
  public:
    void put_bits(std::uint32_t value, int nbits) {
        for (int i = nbits - 1; i >= 0; --i) {
            acc_ = (acc_ << 1) | ((value >> i) & 1u);
            if (++fill_ == 8) {
                bytes_.push_back(static_cast<std::uint8_t>(acc_));
                acc_ = 0;
                fill_ = 0;
            }
        }
    }

    // Pads the final partial byte with zero bits.
    std::vector<std::uint8_t> finish() {
        if (fill_ > 0) {
            bytes_.push_back(static_cast<std::uint8_t>(acc_ << (8 - fill_)));
            acc_ = 0;
            fill_ = 0;
        }
        return std::move(bytes_);
    }

  private:
    std::vector<std::uint8_t> bytes_;
    std::uint32_t acc_ = 0;
    int fill_ = 0;
};

class BitReader {
  public:
    explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint32_t get_bits(int nbits) {
        std::uint32_t v = 0;
        for (int i = 0; i < nbits; ++i) {
            const std::size_t byte = bit_pos_ >> 3;
            if (byte >= bytes_.size()) throw IoError("bit reader: truncated stream");
            const int shift = 7 - static_cast<int>(bit_pos_ & 7);
            v = (v << 1) | ((bytes_[byte] >> shift) & 1u);
            ++bit_pos_;
        }
        return v;
    }

  private:
    std::span<const std::uint8_t> bytes_;
    std::size_t bit_pos_ = 0;
};

// Byte-oriented little-endian writer.
class ByteWriter {
  public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) { le(v, 2); }
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void raw(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }

    const std::vector<std::uint8_t>& bytes() const { return out_; }
    std::vector<std::uint8_t> take() { return std::move(out_); }

  private:
    void le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
    }
    std::vector<std::uint8_t> out_;
};

class ByteReader {
  public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    double f64() { return std::bit_cast<double>(u64()); }

    std::span<const std::uint8_t> raw(std::size_t n) {
        need(n);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

  private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw IoError("byte reader: truncated stream");
    }
    std::uint64_t le(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += n;
        return v;
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace nadpcm
