#include "weightless/csr.hpp"

#include <bit>
#include <limits>
#include <string>

#include "weightless/entropy.hpp"

namespace weightless {

namespace {

constexpr uint64_t kHeaderBits = 128;  // shape, widths, k, record count

struct RecordStreams {
    std::vector<uint32_t> gaps;
    std::vector<uint32_t> labels;
};

// Re-read the interleaved payload as two symbol streams.
RecordStreams split_records(const CsrLayer& csr) {
    RecordStreams s;
    BitReader reader(csr.payload);
    uint64_t records = 0;
    for (uint32_t r : csr.row_records) records += r;
    s.gaps.reserve(records);
    s.labels.reserve(records);
    for (uint64_t i = 0; i < records; ++i) {
        s.gaps.push_back(uint32_t(reader.read_bits(csr.index_bits)));
        s.labels.push_back(uint32_t(reader.read_bits(csr.label_bits)));
    }
    return s;
}

}  // namespace

CsrLayer csr_encode(const SimplifiedLayer& layer, uint32_t index_bits) {
    if (index_bits < 1 || index_bits > 16)
        throw InvalidInput("csr: index bits must be in [1, 16]");
    const uint32_t k = layer.model.cluster_count();
    if (k == 0) throw InvalidInput("csr: layer has no clusters");

    CsrLayer csr;
    csr.rows = layer.rows;
    csr.cols = layer.cols;
    csr.index_bits = index_bits;
    csr.label_bits = std::bit_width(k);  // fits labels 0..k-1 plus padding k
    csr.cluster_count = k;
    csr.model = layer.model;
    csr.row_records.assign(layer.rows, 0);

    const uint32_t max_gap = (1u << index_bits) - 1;
    const uint32_t pad = k;

    size_t p = 0;
    for (uint32_t row = 0; row < layer.rows; ++row) {
        const uint64_t row_end = uint64_t(row + 1) * layer.cols;
        int64_t prev = -1;
        while (p < layer.positions.size() && layer.positions[p] < row_end) {
            int64_t col = int64_t(layer.positions[p] % layer.cols);
            uint64_t gap = uint64_t(col - prev);
            while (gap > max_gap) {
                csr.payload.append_bits(max_gap, index_bits);
                csr.payload.append_bits(pad, csr.label_bits);
                ++csr.row_records[row];
                gap -= max_gap;
            }
            csr.payload.append_bits(gap, index_bits);
            csr.payload.append_bits(layer.labels[p], csr.label_bits);
            ++csr.row_records[row];
            prev = col;
            ++p;
        }
    }
    return csr;
}

SimplifiedLayer csr_decode(const CsrLayer& csr) {
    SimplifiedLayer layer;
    layer.rows = csr.rows;
    layer.cols = csr.cols;
    layer.model = csr.model;

    const uint32_t k = csr.cluster_count;
    BitReader reader(csr.payload);
    if (csr.row_records.size() != csr.rows)
        throw CorruptData("csr decode: row pointer table length mismatch");

    for (uint32_t row = 0; row < csr.rows; ++row) {
        int64_t prev = -1;
        for (uint32_t rec = 0; rec < csr.row_records[row]; ++rec) {
            uint32_t gap = uint32_t(reader.read_bits(csr.index_bits));
            uint32_t label = uint32_t(reader.read_bits(csr.label_bits));
            if (label > k)
                throw CorruptData("csr decode: label out of range");
            prev += gap;
            if (prev >= int64_t(csr.cols))
                throw CorruptData("csr decode: record overruns row width");
            if (label == k) continue;  // padding, column advance only
            layer.positions.push_back(uint64_t(row) * csr.cols + uint64_t(prev));
            layer.labels.push_back(label);
        }
    }
    if (reader.position() != csr.payload.bit_length())
        throw CorruptData("csr decode: trailing bits after final record");
    return layer;
}

uint64_t csr_size_bits(const CsrLayer& csr) {
    return csr.payload.bit_length() + 32ull * csr.rows + kHeaderBits;
}

uint64_t csr_huffman_bits(const CsrLayer& csr) {
    RecordStreams s = split_records(csr);
    uint64_t payload = 0;
    uint64_t tables = 0;
    if (!s.gaps.empty()) {
        auto gap_hist = SymbolHistogram::from_symbols(s.gaps, 1ull << csr.index_bits);
        auto lab_hist =
            SymbolHistogram::from_symbols(s.labels, uint64_t(csr.cluster_count) + 1);
        payload += huffman_encode(s.gaps, huffman_code(gap_hist)).bit_length();
        payload += huffman_encode(s.labels, huffman_code(lab_hist)).bit_length();
        tables = 8ull * ((1ull << csr.index_bits) + csr.cluster_count + 1);
    }
    return payload + tables + 32ull * csr.rows + kHeaderBits;
}

std::vector<IndexBitsSweepPoint> csr_index_bits_sweep(const SimplifiedLayer& layer) {
    std::vector<IndexBitsSweepPoint> sweep;
    sweep.reserve(16);
    for (uint32_t w = 1; w <= 16; ++w) {
        CsrLayer csr = csr_encode(layer, w);
        sweep.push_back({w, csr_size_bits(csr), csr_huffman_bits(csr)});
    }
    return sweep;
}

uint32_t csr_best_index_bits(const SimplifiedLayer& layer) {
    uint32_t best = 1;
    uint64_t best_bits = std::numeric_limits<uint64_t>::max();
    for (const auto& point : csr_index_bits_sweep(layer)) {
        if (point.csr_bits < best_bits) {
            best_bits = point.csr_bits;
            best = point.index_bits;
        }
    }
    return best;
}

}  // namespace weightless
