#include "weightless/bloomier.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "weightless/rng.hpp"

namespace weightless {

namespace {

// Lane layout: slots 0/1/2 draw from lane streams {0,4,8,...}, {1,5,9,...},
// {2,6,10,...} so a collision re-derivation never crosses into another
// slot's stream; the mask owns lane 3.
uint64_t lane_hash(uint64_t key, uint64_t seed, uint32_t lane) {
    return mix64(key ^ mix64(seed + uint64_t(lane) * 0x9e3779b97f4a7c15ULL));
}

constexpr uint32_t kMaskLane = 3;

uint64_t checked_cell_count(uint64_t n, const Ratio& c) {
    uint64_t m = c.ceil_mul(n);
    // Tiny sets need headroom beyond ceil(c*n): two keys sharing one triple
    // of cells already block peeling, and with fewer than n + 3 cells such
    // collisions are common or even unavoidable (n = 2 or 3 at c = 5/4 can
    // never peel). The floor only engages below n = 4 (den/(num-den)) and
    // never at the scales where the ceil(c*n)*t size law is measured.
    return std::max<uint64_t>({m, 3, n + 3});
}

}  // namespace

HashTuple hash_tuple(uint64_t key, uint64_t seed, uint32_t cell_count,
                     uint32_t bits_per_cell) {
    if (cell_count < 3)
        throw InvalidInput("hash_tuple: need at least 3 cells for distinct indices");
    if (bits_per_cell < 1 || bits_per_cell > 32)
        throw InvalidInput("hash_tuple: bits per cell must be in [1, 32]");

    uint32_t idx[3];
    for (uint32_t slot = 0; slot < 3; ++slot) {
        uint32_t lane = slot;
        for (;;) {
            uint32_t candidate = uint32_t(lane_hash(key, seed, lane) % cell_count);
            bool clash = false;
            for (uint32_t prev = 0; prev < slot; ++prev)
                if (idx[prev] == candidate) clash = true;
            if (!clash) {
                idx[slot] = candidate;
                break;
            }
            lane += 4;
        }
    }
    uint64_t mask_bits = lane_hash(key, seed, kMaskLane);
    uint32_t mask = bits_per_cell == 32
                        ? uint32_t(mask_bits)
                        : uint32_t(mask_bits & ((1ULL << bits_per_cell) - 1));
    return HashTuple{idx[0], idx[1], idx[2], mask};
}

std::optional<std::vector<PeelStep>> find_peeling_order(
    std::span<const uint64_t> keys, uint64_t seed, uint32_t cell_count) {
    const size_t n = keys.size();
    if (n == 0) return std::vector<PeelStep>{};

    // Incidence summary per cell: how many remaining keys touch it, and the
    // XOR of their indices. A count-1 cell identifies its key directly.
    struct Tuple3 {
        uint32_t c[3];
    };
    std::vector<Tuple3> touch(n);
    std::vector<uint32_t> count(cell_count, 0);
    std::vector<uint32_t> owner_xor(cell_count, 0);

    for (size_t i = 0; i < n; ++i) {
        HashTuple h = hash_tuple(keys[i], seed, cell_count, 1);
        touch[i] = {{h.h0, h.h1, h.h2}};
        for (uint32_t c : touch[i].c) {
            ++count[c];
            owner_xor[c] ^= uint32_t(i);
        }
    }

    // Min-heap on key value: among all keys currently owning a singleton
    // cell, the smallest key is peeled first. That pins the order fully.
    using Cand = std::pair<uint64_t, uint32_t>;  // (key value, key index)
    std::priority_queue<Cand, std::vector<Cand>, std::greater<Cand>> ready;
    for (uint32_t c = 0; c < cell_count; ++c)
        if (count[c] == 1) ready.emplace(keys[owner_xor[c]], owner_xor[c]);

    std::vector<PeelStep> order;
    order.reserve(n);
    std::vector<uint8_t> removed(n, 0);

    while (!ready.empty()) {
        auto [key, i] = ready.top();
        ready.pop();
        if (removed[i]) continue;

        // Pick the lowest-indexed cell this key still owns exclusively. A
        // singleton stays singleton until its key is removed, so one exists.
        uint32_t slot = UINT32_MAX;
        for (uint32_t c : touch[i].c)
            if (count[c] == 1 && c < slot) slot = c;

        removed[i] = 1;
        order.push_back(PeelStep{key, slot});
        for (uint32_t c : touch[i].c) {
            --count[c];
            owner_xor[c] ^= uint32_t(i);
            if (count[c] == 1 && !removed[owner_xor[c]])
                ready.emplace(keys[owner_xor[c]], owner_xor[c]);
        }
    }

    if (order.size() != n) return std::nullopt;  // stuck: 2-core is non-empty
    return order;
}

BloomierFilter BloomierFilter::construct(const KeyValueSet& set,
                                         const FilterParams& params) {
    const uint32_t t = params.bits_per_cell;
    if (t < 1 || t > 32)
        throw InvalidInput("construct: bits per cell must be in [1, 32]");
    if (params.table_multiplier.num <= params.table_multiplier.den)
        throw InvalidInput("construct: table multiplier must exceed 1");
    if (set.value_count == 0)
        throw InvalidInput("construct: value count must be at least 1");
    if (t < 32 && uint64_t(set.value_count) >= (1ULL << t))
        throw InvalidInput("construct: value count must be below 2^t");

    std::vector<KeyValue> entries(set.entries.begin(), set.entries.end());
    std::sort(entries.begin(), entries.end(),
              [](const KeyValue& a, const KeyValue& b) { return a.key < b.key; });
    for (size_t i = 0; i < entries.size(); ++i) {
        if (i > 0 && entries[i].key == entries[i - 1].key)
            throw InvalidInput("construct: duplicate key in build set");
        if (entries[i].value >= set.value_count)
            throw InvalidInput("construct: value " + std::to_string(entries[i].value) +
                               " out of range [0, " + std::to_string(set.value_count) + ")");
    }

    const uint64_t n = entries.size();
    const uint64_t m64 = checked_cell_count(n, params.table_multiplier);
    if (m64 > UINT32_MAX)
        throw InvalidInput("construct: table size exceeds 2^32 cells");
    const uint32_t m = uint32_t(m64);

    std::vector<uint64_t> keys(n);
    for (size_t i = 0; i < n; ++i) keys[i] = entries[i].key;

    for (uint32_t attempt = 0; attempt <= params.max_retries; ++attempt) {
        const uint64_t seed = params.seed + attempt;
        auto order = find_peeling_order(keys, seed, m);
        if (!order) continue;

        BloomierFilter filter;
        filter.cell_count_ = m;
        filter.bits_per_cell_ = t;
        filter.value_count_ = set.value_count;
        filter.seed_ = seed;
        filter.key_count_ = uint32_t(n);
        filter.cells_.assign(m, 0);

        // Reverse walk: the step's slot is untouched by everything written
        // so far, so solving for it preserves all earlier identities.
        for (auto it = order->rbegin(); it != order->rend(); ++it) {
            HashTuple h = hash_tuple(it->key, seed, m, t);
            auto pos = std::lower_bound(
                entries.begin(), entries.end(), it->key,
                [](const KeyValue& e, uint64_t k) { return e.key < k; });
            uint32_t acc = pos->value ^ h.mask;
            for (uint32_t c : {h.h0, h.h1, h.h2})
                if (c != it->slot) acc ^= filter.cells_[c];
            filter.cells_[it->slot] = acc;
        }
        return filter;
    }

    throw ConstructionFailed(
        "construct: peeling failed for seeds " + std::to_string(params.seed) +
            ".." + std::to_string(params.seed + params.max_retries) + " (" +
            std::to_string(params.max_retries) + " retries)",
        params.max_retries);
}

BloomierFilter BloomierFilter::from_parts(uint32_t cell_count,
                                          uint32_t bits_per_cell,
                                          uint32_t value_count, uint64_t seed,
                                          uint32_t key_count,
                                          std::vector<uint32_t> cells) {
    if (cells.size() != cell_count)
        throw InvalidInput("from_parts: cell array length mismatch");
    if (bits_per_cell < 1 || bits_per_cell > 32)
        throw InvalidInput("from_parts: bits per cell must be in [1, 32]");
    const uint64_t limit = bits_per_cell == 32 ? (1ULL << 32) : (1ULL << bits_per_cell);
    for (uint32_t c : cells)
        if (uint64_t(c) >= limit)
            throw InvalidInput("from_parts: cell value exceeds bits per cell");
    BloomierFilter f;
    f.cell_count_ = cell_count;
    f.bits_per_cell_ = bits_per_cell;
    f.value_count_ = value_count;
    f.seed_ = seed;
    f.key_count_ = key_count;
    f.cells_ = std::move(cells);
    return f;
}

FpSample measure_fp_rate(const BloomierFilter& filter,
                         std::span<const uint64_t> non_keys) {
    if (non_keys.empty())
        throw InvalidInput("measure_fp_rate: empty probe sample");
    uint64_t hits = 0;
    for (uint64_t key : non_keys)
        if (filter.query(key)) ++hits;
    return FpSample{hits, double(hits) / double(non_keys.size())};
}

}  // namespace weightless
