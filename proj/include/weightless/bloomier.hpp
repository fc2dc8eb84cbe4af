#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "weightless/error.hpp"

namespace weightless {

// One (key -> value) pair of the partial function stored in a filter.
struct KeyValue {
    uint64_t key;
    uint32_t value;
};

// The partial function f: S -> [0, value_count) to be encoded.
// Keys must be pairwise distinct and every value < value_count.
struct KeyValueSet {
    std::vector<KeyValue> entries;
    uint32_t value_count = 1;  // number of representable values ("k")
};

// Exact ratio used for the table-size multiplier so that
// cell_count = ceil(c * n) is computed without floating point.
struct Ratio {
    uint32_t num = 5;
    uint32_t den = 4;

    uint64_t ceil_mul(uint64_t n) const {
        return (num * n + den - 1) / den;
    }
    double value() const { return double(num) / double(den); }
};

struct FilterParams {
    uint32_t bits_per_cell = 8;   // "t", 1..32
    Ratio table_multiplier{};     // "c", > 1, default 5/4
    uint64_t seed = 0;            // master seed; retries increment it
    uint32_t max_retries = 20;
};

// The three table indices and the t-bit mask derived for one key.
// h0, h1, h2 are pairwise distinct cell indices in [0, cell_count).
struct HashTuple {
    uint32_t h0, h1, h2;
    uint32_t mask;
};

// One step of the greedy singleton-elimination order: this key owns `slot`
// exclusively among all keys that appear later in the list.
struct PeelStep {
    uint64_t key;
    uint32_t slot;
};

// Derives (h0, h1, h2, mask) for a key. Deterministic in (key, seed, m, t);
// within-key index collisions are resolved by advancing the colliding lane.
HashTuple hash_tuple(uint64_t key, uint64_t seed, uint32_t cell_count,
                     uint32_t bits_per_cell);

// Greedy peeling. On success the returned order is such that walking it in
// reverse, every key's assigned slot is untouched by the keys already walked;
// that is exactly the property the XOR table assignment needs. Returns
// nullopt when no singleton cell exists among the remaining keys (the seed
// lost the coin flip; the caller retries with another seed).
std::optional<std::vector<PeelStep>> find_peeling_order(
    std::span<const uint64_t> keys, uint64_t seed, uint32_t cell_count);

// Static function table: query(key) == f(key) for every key it was built
// from; other keys decode to a uniform t-bit value, reported as a hit only
// when it lands below value_count. Immutable once built, so concurrent
// queries are safe without locks.
class BloomierFilter {
public:
    // Builds a filter for `set`. Retries params.seed+1, +2, ... when peeling
    // fails, up to params.max_retries extra attempts.
    static BloomierFilter construct(const KeyValueSet& set,
                                    const FilterParams& params);

    // XOR-decode: cells[h0] ^ cells[h1] ^ cells[h2] ^ mask, reported only if
    // it is a representable value. Total function, never throws.
    std::optional<uint32_t> query(uint64_t key) const {
        HashTuple h = hash_tuple(key, seed_, cell_count_, bits_per_cell_);
        uint32_t r = cells_[h.h0] ^ cells_[h.h1] ^ cells_[h.h2] ^ h.mask;
        if (r < value_count_) return r;
        return std::nullopt;
    }

    uint32_t cell_count() const { return cell_count_; }
    uint32_t bits_per_cell() const { return bits_per_cell_; }
    uint32_t value_count() const { return value_count_; }
    uint64_t seed() const { return seed_; }
    uint32_t key_count() const { return key_count_; }
    const std::vector<uint32_t>& cells() const { return cells_; }

    // Payload size of the table itself, excluding any metadata.
    uint64_t payload_bits() const {
        return uint64_t(cell_count_) * bits_per_cell_;
    }

    // Used by the container codecs; cells must already be < 2^t.
    static BloomierFilter from_parts(uint32_t cell_count, uint32_t bits_per_cell,
                                     uint32_t value_count, uint64_t seed,
                                     uint32_t key_count,
                                     std::vector<uint32_t> cells);

private:
    BloomierFilter() = default;

    uint32_t cell_count_ = 0;
    uint32_t bits_per_cell_ = 0;
    uint32_t value_count_ = 0;
    uint64_t seed_ = 0;
    uint32_t key_count_ = 0;
    std::vector<uint32_t> cells_;
};

struct FpSample {
    uint64_t false_positives = 0;
    double rate = 0.0;
};

// Counts non-null responses over a sample of keys that are known to be
// outside the filter's build set.
FpSample measure_fp_rate(const BloomierFilter& filter,
                         std::span<const uint64_t> non_keys);

}  // namespace weightless
