#include "weightless/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

namespace weightless {

uint64_t SymbolHistogram::total() const {
    uint64_t sum = 0;
    for (uint64_t c : counts) sum += c;
    return sum;
}

SymbolHistogram SymbolHistogram::from_symbols(std::span<const uint32_t> symbols,
                                              size_t alphabet_size) {
    SymbolHistogram hist;
    hist.counts.assign(alphabet_size, 0);
    for (uint32_t s : symbols) {
        if (s >= alphabet_size)
            throw InvalidInput("histogram: symbol " + std::to_string(s) +
                               " outside alphabet of size " +
                               std::to_string(alphabet_size));
        ++hist.counts[s];
    }
    return hist;
}

double entropy_bits(const SymbolHistogram& hist) {
    const uint64_t total = hist.total();
    if (total == 0) throw InvalidInput("entropy_bits: empty histogram");
    double bits = 0.0;
    for (uint64_t c : hist.counts)
        if (c > 0) bits += double(c) * std::log2(double(total) / double(c));
    return bits;
}

namespace {

constexpr uint32_t kTopValue = 1u << 24;  // renormalization threshold
constexpr uint32_t kMaxTotal = 1u << 16;  // keeps range/total >= 2^8

// Cumulative-frequency model with the total scaled below kMaxTotal. Both
// sides derive it from the same histogram, so scaling is part of the format.
struct CodingModel {
    std::vector<uint32_t> cum;  // size alphabet+1, cum[A] == total
    uint32_t total = 0;

    explicit CodingModel(const SymbolHistogram& hist) {
        const size_t a = hist.alphabet_size();
        if (a == 0 || a > 65535)
            throw InvalidInput("arithmetic coder: alphabet size must be in [1, 65535]");
        std::vector<uint64_t> scaled(hist.counts.begin(), hist.counts.end());
        uint64_t sum = 0;
        for (uint64_t c : scaled) sum += c;
        if (sum == 0) throw InvalidInput("arithmetic coder: empty histogram");
        while (sum >= kMaxTotal) {
            sum = 0;
            for (uint64_t& c : scaled) {
                c = (c + 1) >> 1;  // halve, keeping nonzero counts alive
                sum += c;
            }
        }
        cum.resize(a + 1, 0);
        for (size_t s = 0; s < a; ++s) cum[s + 1] = cum[s] + uint32_t(scaled[s]);
        total = cum[a];
    }

    uint32_t freq(uint32_t s) const { return cum[s + 1] - cum[s]; }
};

class RangeEncoder {
public:
    void encode(uint32_t cum_lo, uint32_t cum_hi, uint32_t total) {
        uint32_t r = range_ / total;
        low_ += uint64_t(r) * cum_lo;
        // The last interval absorbs the division remainder.
        range_ = cum_hi == total ? range_ - r * cum_lo : r * (cum_hi - cum_lo);
        while (range_ < kTopValue) {
            shift_low();
            range_ <<= 8;
        }
    }

    std::vector<uint8_t> finish() {
        for (int i = 0; i < 5; ++i) shift_low();
        return std::move(out_);
    }

private:
    void shift_low() {
        if (uint32_t(low_ >> 32) != 0 || uint32_t(low_) < 0xFF000000u) {
            uint8_t carry = uint8_t(low_ >> 32);
            do {
                out_.push_back(uint8_t(cache_ + carry));
                cache_ = 0xFF;
            } while (--cache_size_ != 0);
            cache_ = uint8_t(low_ >> 24);
        }
        ++cache_size_;
        low_ = (low_ & 0x00FFFFFFull) << 8;
    }

    uint64_t low_ = 0;
    uint32_t range_ = 0xFFFFFFFFu;
    uint8_t cache_ = 0;
    uint64_t cache_size_ = 1;
    std::vector<uint8_t> out_;
};

class RangeDecoder {
public:
    RangeDecoder(const uint8_t* data, size_t size) : ptr_(data), end_(data + size) {
        for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next_byte();
    }

    uint32_t decode_target(uint32_t total) {
        r_ = range_ / total;
        return std::min(total - 1, code_ / r_);
    }

    void consume(uint32_t cum_lo, uint32_t cum_hi, uint32_t total) {
        code_ -= r_ * cum_lo;
        range_ = cum_hi == total ? range_ - r_ * cum_lo : r_ * (cum_hi - cum_lo);
        while (range_ < kTopValue) {
            code_ = (code_ << 8) | next_byte();
            range_ <<= 8;
        }
    }

private:
    uint8_t next_byte() {
        if (ptr_ >= end_) throw CorruptData("arithmetic decode: stream truncated");
        return *ptr_++;
    }

    const uint8_t* ptr_;
    const uint8_t* end_;
    uint32_t range_ = 0xFFFFFFFFu;
    uint32_t code_ = 0;
    uint32_t r_ = 0;
};

}  // namespace

Bitstream arithmetic_encode(std::span<const uint32_t> symbols,
                            const SymbolHistogram& hist) {
    CodingModel model(hist);
    RangeEncoder enc;
    for (uint32_t s : symbols) {
        if (s >= hist.alphabet_size() || model.freq(s) == 0)
            throw InvalidInput("arithmetic encode: symbol " + std::to_string(s) +
                               " has no probability mass");
        enc.encode(model.cum[s], model.cum[s + 1], model.total);
    }
    std::vector<uint8_t> bytes = enc.finish();
    size_t bits = bytes.size() * 8;
    return Bitstream::from_bytes(std::move(bytes), bits);
}

std::vector<uint32_t> arithmetic_decode(const Bitstream& stream,
                                        const SymbolHistogram& hist,
                                        size_t symbol_count) {
    std::vector<uint32_t> out;
    if (symbol_count == 0) return out;
    CodingModel model(hist);
    RangeDecoder dec(stream.bytes().data(), stream.byte_length());
    out.reserve(symbol_count);
    for (size_t i = 0; i < symbol_count; ++i) {
        uint32_t target = dec.decode_target(model.total);
        // cum is nondecreasing; find the symbol interval holding `target`.
        auto it = std::upper_bound(model.cum.begin(), model.cum.end(), target);
        uint32_t sym = uint32_t(it - model.cum.begin()) - 1;
        dec.consume(model.cum[sym], model.cum[sym + 1], model.total);
        out.push_back(sym);
    }
    return out;
}

namespace {

// Deterministic Huffman merge: ties on weight resolve toward the node
// created first (leaves in symbol order, then internal nodes in creation
// order), which pins the code lengths for reproducible tables.
std::vector<uint8_t> optimal_lengths(const SymbolHistogram& hist) {
    const size_t a = hist.alphabet_size();
    struct Node {
        uint64_t weight;
        uint32_t id;
        int32_t left = -1, right = -1;
    };
    std::vector<Node> nodes;
    using Item = std::pair<uint64_t, uint32_t>;  // (weight, node id)
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;

    for (size_t s = 0; s < a; ++s) {
        if (hist.counts[s] == 0) continue;
        nodes.push_back(Node{hist.counts[s], uint32_t(nodes.size())});
        heap.emplace(hist.counts[s], uint32_t(nodes.size() - 1));
    }
    // Map node id -> symbol for leaves.
    std::vector<uint32_t> leaf_symbol;
    for (size_t s = 0; s < a; ++s)
        if (hist.counts[s] > 0) leaf_symbol.push_back(uint32_t(s));

    std::vector<uint8_t> lengths(a, 0);
    if (nodes.empty()) throw InvalidInput("huffman: empty histogram");
    if (nodes.size() == 1) {
        lengths[leaf_symbol[0]] = 1;
        return lengths;
    }

    while (heap.size() > 1) {
        auto [wl, l] = heap.top();
        heap.pop();
        auto [wr, r] = heap.top();
        heap.pop();
        nodes.push_back(Node{wl + wr, uint32_t(nodes.size()), int32_t(l), int32_t(r)});
        heap.emplace(wl + wr, uint32_t(nodes.size() - 1));
    }

    // Depth-first from the root, depth = code length at each leaf.
    std::vector<std::pair<uint32_t, uint8_t>> stack{{uint32_t(nodes.size() - 1), 0}};
    while (!stack.empty()) {
        auto [id, depth] = stack.back();
        stack.pop_back();
        const Node& node = nodes[id];
        if (node.left < 0) {
            if (depth > 63) throw InvalidInput("huffman: code length exceeds 63 bits");
            lengths[leaf_symbol[id]] = depth;
            continue;
        }
        stack.push_back({uint32_t(node.left), uint8_t(depth + 1)});
        stack.push_back({uint32_t(node.right), uint8_t(depth + 1)});
    }
    return lengths;
}

struct CanonicalDecoder {
    // Per length: first canonical code and index of its first symbol in the
    // (length, symbol)-sorted order.
    uint64_t first_code[65] = {};
    uint32_t first_index[65] = {};
    uint32_t count[65] = {};
    std::vector<uint32_t> sorted_symbols;
    uint8_t max_len = 0;

    explicit CanonicalDecoder(const HuffmanCodeTable& table) {
        for (size_t s = 0; s < table.lengths.size(); ++s) {
            uint8_t len = table.lengths[s];
            if (len > 0) {
                ++count[len];
                max_len = std::max(max_len, len);
            }
        }
        uint64_t code = 0;
        uint32_t index = 0;
        for (unsigned len = 1; len <= max_len; ++len) {
            first_code[len] = code;
            first_index[len] = index;
            code = (code + count[len]) << 1;
            index += count[len];
        }
        sorted_symbols.resize(index);
        std::vector<uint32_t> next(65);
        for (unsigned len = 1; len <= max_len; ++len) next[len] = first_index[len];
        for (size_t s = 0; s < table.lengths.size(); ++s) {
            uint8_t len = table.lengths[s];
            if (len > 0) sorted_symbols[next[len]++] = uint32_t(s);
        }
    }
};

}  // namespace

HuffmanCodeTable huffman_code(const SymbolHistogram& hist) {
    if (hist.total() == 0) throw InvalidInput("huffman: empty histogram");

    HuffmanCodeTable table;
    table.lengths = optimal_lengths(hist);
    table.codes.assign(hist.alphabet_size(), 0);

    // Canonical assignment: symbols ordered by (length, symbol id) receive
    // consecutive codes, shifting left when the length grows.
    std::vector<uint32_t> order;
    for (size_t s = 0; s < table.lengths.size(); ++s)
        if (table.lengths[s] > 0) order.push_back(uint32_t(s));
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        if (table.lengths[a] != table.lengths[b])
            return table.lengths[a] < table.lengths[b];
        return a < b;
    });

    uint64_t code = 0;
    uint8_t prev_len = 0;
    for (uint32_t s : order) {
        code <<= (table.lengths[s] - prev_len);
        table.codes[s] = code;
        ++code;
        prev_len = table.lengths[s];
    }
    return table;
}

Bitstream huffman_encode(std::span<const uint32_t> symbols,
                         const HuffmanCodeTable& table) {
    Bitstream out;
    for (uint32_t s : symbols) {
        if (s >= table.alphabet_size() || table.lengths[s] == 0)
            throw InvalidInput("huffman encode: symbol " + std::to_string(s) +
                               " has no code");
        uint8_t len = table.lengths[s];
        uint64_t code = table.codes[s];
        for (int bit = len - 1; bit >= 0; --bit)
            out.append_bit((code >> bit) & 1u);
    }
    return out;
}

std::vector<uint32_t> huffman_decode(const Bitstream& stream,
                                     const HuffmanCodeTable& table,
                                     size_t symbol_count) {
    CanonicalDecoder dec(table);
    BitReader reader(stream);
    std::vector<uint32_t> out;
    out.reserve(symbol_count);
    for (size_t i = 0; i < symbol_count; ++i) {
        uint64_t code = 0;
        unsigned len = 0;
        for (;;) {
            code = (code << 1) | uint64_t(reader.read_bit());
            ++len;
            if (len > dec.max_len)
                throw CorruptData("huffman decode: invalid code in stream");
            uint64_t offset = code - dec.first_code[len];
            if (code >= dec.first_code[len] && offset < dec.count[len]) {
                out.push_back(dec.sorted_symbols[dec.first_index[len] + offset]);
                break;
            }
        }
    }
    return out;
}

void append_histogram(std::vector<uint8_t>& out, const SymbolHistogram& hist) {
    const size_t a = hist.alphabet_size();
    if (a == 0 || a > 65535)
        throw InvalidInput("histogram header: alphabet size must be in [1, 65535]");
    out.push_back(uint8_t(a & 0xFF));
    out.push_back(uint8_t(a >> 8));
    for (uint64_t c : hist.counts) {
        while (c >= 0x80) {
            out.push_back(uint8_t(c) | 0x80);
            c >>= 7;
        }
        out.push_back(uint8_t(c));
    }
}

SymbolHistogram read_histogram(std::span<const uint8_t> bytes, size_t& offset) {
    if (offset + 2 > bytes.size())
        throw CorruptData("histogram header: truncated alphabet size");
    size_t a = size_t(bytes[offset]) | (size_t(bytes[offset + 1]) << 8);
    offset += 2;
    SymbolHistogram hist;
    hist.counts.resize(a);
    for (size_t s = 0; s < a; ++s) {
        uint64_t value = 0;
        unsigned shift = 0;
        for (;;) {
            if (offset >= bytes.size())
                throw CorruptData("histogram header: truncated varint");
            uint8_t byte = bytes[offset++];
            if (shift >= 64)
                throw CorruptData("histogram header: varint overflow");
            value |= uint64_t(byte & 0x7F) << shift;
            if ((byte & 0x80) == 0) break;
            shift += 7;
        }
        hist.counts[s] = value;
    }
    return hist;
}

}  // namespace weightless
