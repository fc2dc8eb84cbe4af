#pragma once

#include <cstdint>
#include <vector>

#include "weightless/bitstream.hpp"
#include "weightless/simplify.hpp"

namespace weightless {

// Compressed sparse row with fixed-width relative column indices, the
// lossless comparison baseline. Each record is (gap, label); gaps are
// measured from the previous nonzero's column within the row, starting from
// a virtual column -1. A gap too wide for the index field is bridged by
// padding records that consume 2^index_bits - 1 columns and carry the
// dedicated padding label (one past the largest cluster index).
struct CsrLayer {
    uint32_t rows = 0;
    uint32_t cols = 0;
    uint32_t index_bits = 4;
    uint32_t label_bits = 0;
    uint32_t cluster_count = 0;  // padding symbol == cluster_count
    ClusterModel model;
    Bitstream payload;                // interleaved (gap, label) records
    std::vector<uint32_t> row_records;  // record count per row, padding included
};

CsrLayer csr_encode(const SimplifiedLayer& layer, uint32_t index_bits = 4);

SimplifiedLayer csr_decode(const CsrLayer& csr);

// Payload + 32 bits of row pointer per row + fixed header.
uint64_t csr_size_bits(const CsrLayer& csr);

// Size after replacing the fixed-width payload with two canonical Huffman
// streams (gaps and labels coded over separate alphabets). Row pointers,
// code-length tables (8 bits per symbol) and the fixed header stay.
uint64_t csr_huffman_bits(const CsrLayer& csr);

struct IndexBitsSweepPoint {
    uint32_t index_bits;
    uint64_t csr_bits;
    uint64_t huffman_bits;
};

// Exhaustive sweep over index widths 1..16; the caller picks its minimum.
std::vector<IndexBitsSweepPoint> csr_index_bits_sweep(const SimplifiedLayer& layer);

// Width minimizing csr_size_bits over the sweep.
uint32_t csr_best_index_bits(const SimplifiedLayer& layer);

}  // namespace weightless
