#pragma once

#include <cstdint>
#include <vector>

#include "weightless/error.hpp"

namespace weightless {

// Packed bit sequence, LSB-first within each byte. Shared by the CSR payload,
// both entropy coders and the container format.
class Bitstream {
public:
    Bitstream() = default;

    void append_bit(bool bit) {
        size_t byte = bit_length_ >> 3;
        if (byte == bytes_.size()) bytes_.push_back(0);
        if (bit) bytes_[byte] |= uint8_t(1u << (bit_length_ & 7));
        ++bit_length_;
    }

    // Appends the low `width` bits of `value`, LSB first. width <= 64.
    void append_bits(uint64_t value, unsigned width) {
        for (unsigned i = 0; i < width; ++i) append_bit((value >> i) & 1u);
    }

    void append_byte(uint8_t b) { append_bits(b, 8); }

    bool bit_at(size_t pos) const {
        return (bytes_[pos >> 3] >> (pos & 7)) & 1u;
    }

    size_t bit_length() const { return bit_length_; }
    size_t byte_length() const { return bytes_.size(); }
    const std::vector<uint8_t>& bytes() const { return bytes_; }

    static Bitstream from_bytes(std::vector<uint8_t> bytes, size_t bit_length) {
        if (bit_length > bytes.size() * 8 || bytes.size() * 8 >= bit_length + 8)
            throw InvalidInput("bitstream: byte buffer inconsistent with bit length");
        Bitstream s;
        s.bytes_ = std::move(bytes);
        s.bit_length_ = bit_length;
        return s;
    }

private:
    std::vector<uint8_t> bytes_;
    size_t bit_length_ = 0;
};

// Sequential reader over a Bitstream. Reading past the end signals corrupt
// input rather than UB.
class BitReader {
public:
    explicit BitReader(const Bitstream& stream) : stream_(stream) {}

    bool read_bit() {
        if (pos_ >= stream_.bit_length())
            throw CorruptData("bitstream: read past end of stream");
        return stream_.bit_at(pos_++);
    }

    uint64_t read_bits(unsigned width) {
        uint64_t v = 0;
        for (unsigned i = 0; i < width; ++i)
            v |= uint64_t(read_bit()) << i;
        return v;
    }

    size_t position() const { return pos_; }
    bool exhausted() const { return pos_ >= stream_.bit_length(); }

private:
    const Bitstream& stream_;
    size_t pos_ = 0;
};

}  // namespace weightless
