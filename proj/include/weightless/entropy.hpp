#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "weightless/bitstream.hpp"
#include "weightless/error.hpp"

namespace weightless {

// Static symbol model shared by both coders: per-symbol occurrence counts
// over a dense alphabet [0, alphabet_size).
struct SymbolHistogram {
    std::vector<uint64_t> counts;

    size_t alphabet_size() const { return counts.size(); }
    uint64_t total() const;

    static SymbolHistogram from_symbols(std::span<const uint32_t> symbols,
                                        size_t alphabet_size);
};

// Shannon information content of the histogram: sum over symbols of
// count * log2(total / count). Zero-count symbols contribute nothing.
double entropy_bits(const SymbolHistogram& hist);

// --- Arithmetic coding -------------------------------------------------
//
// Static-model range coder: 32-bit range, 64-bit low with byte-wise
// carry-propagating renormalization. Output is within a few dozen bits of
// the histogram entropy (5 bytes of termination plus ~0.006 bits/symbol of
// renormalization slack). The alphabet is capped at 65535 symbols so the
// frequency total can be scaled below the renormalization margin.

Bitstream arithmetic_encode(std::span<const uint32_t> symbols,
                            const SymbolHistogram& hist);

std::vector<uint32_t> arithmetic_decode(const Bitstream& stream,
                                        const SymbolHistogram& hist,
                                        size_t symbol_count);

// --- Canonical Huffman --------------------------------------------------

struct HuffmanCodeTable {
    std::vector<uint8_t> lengths;  // 0 = symbol absent from the code
    std::vector<uint64_t> codes;   // canonical, MSB-first

    size_t alphabet_size() const { return lengths.size(); }
};

// Optimal code lengths (merge ties broken toward lower symbol ids), then
// canonical code assignment. A single-symbol alphabet gets a 1-bit code.
HuffmanCodeTable huffman_code(const SymbolHistogram& hist);

Bitstream huffman_encode(std::span<const uint32_t> symbols,
                         const HuffmanCodeTable& table);

std::vector<uint32_t> huffman_decode(const Bitstream& stream,
                                     const HuffmanCodeTable& table,
                                     size_t symbol_count);

// --- Histogram header ----------------------------------------------------
//
// 16-bit alphabet size followed by one LEB128 varint count per symbol.
// Zero-heavy histograms stay close to one byte per symbol.

void append_histogram(std::vector<uint8_t>& out, const SymbolHistogram& hist);

SymbolHistogram read_histogram(std::span<const uint8_t> bytes, size_t& offset);

}  // namespace weightless
