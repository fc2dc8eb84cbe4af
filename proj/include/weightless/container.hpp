#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "weightless/bloomier.hpp"
#include "weightless/csr.hpp"
#include "weightless/simplify.hpp"

namespace weightless {

// A simplified layer encoded as one or more Bloomier filter shards plus the
// centroid table. Shard for a key = key mod shard count; shard i is built
// with seed shard_seed_base + i.
struct EncodedLayer {
    uint32_t rows = 0;
    uint32_t cols = 0;
    uint32_t cluster_count = 0;   // "k"
    uint32_t bits_per_cell = 0;   // "t"
    uint64_t shard_seed_base = 0;
    std::vector<BloomierFilter> shards;
    ClusterModel centroids;

    uint64_t key_count() const;
    uint64_t filter_bits() const;  // sum of shard payload bits (m * t)
};

// Partitions (position, label) pairs by key mod num_shards. Shards are
// disjoint and exhaustive.
std::vector<KeyValueSet> shard_keys(std::span<const uint64_t> positions,
                                    std::span<const uint32_t> labels,
                                    uint32_t cluster_count, uint32_t num_shards);

struct EncodeOptions {
    uint32_t bits_per_cell = 8;
    Ratio table_multiplier{};
    uint32_t num_shards = 1;
    uint64_t seed = 0;
    uint32_t max_retries = 20;
    uint32_t jobs = 1;  // shards built concurrently when > 1
};

EncodedLayer encode_layer(const SimplifiedLayer& layer, const EncodeOptions& opts);

// Queries every position: null -> 0, value v -> centroids[v]. Original
// nonzeros are exact; a fraction ~ k/2^t of the original zeros come back as
// centroid values (the false positives).
WeightMatrix reconstruct(const EncodedLayer& enc);

// Exact false-positive count: probes every position outside `positions`
// (which must be the sorted build positions of `enc`).
uint64_t count_false_positives(const EncodedLayer& enc,
                               std::span<const uint64_t> positions);

struct FpEstimate {
    uint64_t sample_count = 0;
    uint64_t sample_hits = 0;
    double rate = 0.0;
    double extrapolated_total = 0.0;
};

// Sampled probing of non-key positions with extrapolation to the full zero
// population; for layers too large to scan exhaustively.
FpEstimate estimate_false_positives(const EncodedLayer& enc,
                                    std::span<const uint64_t> positions,
                                    uint64_t sample_count, uint64_t seed);

// --- Size accounting -----------------------------------------------------

struct SizeReport {
    uint64_t original_bits = 0;    // 32 bits per weight
    uint64_t simplified_nnz = 0;
    uint64_t filter_bits = 0;      // shard tables alone (m * t)
    uint64_t centroid_bits = 0;    // k * 32
    uint64_t metadata_bits = 0;    // shape/k/t/seed/shard headers
    uint64_t packed_bits = 0;      // entropy-coded cells + centroids + metadata
    uint64_t csr_bits = 0;         // 0 when no CSR baseline was computed
    uint64_t csr_huffman_bits = 0;
    double compression_factor = 0.0;         // original / (filter+centroids+metadata)
    double packed_compression_factor = 0.0;  // original / packed
};

// Entropy-coded size of one shard's cell array (termination bytes included,
// histogram excluded: the model is re-derivable from the decoded cells).
// Falls back to the raw table size when cells are too wide to model.
uint64_t packed_cell_bits(const BloomierFilter& filter);

SizeReport size_report(const SimplifiedLayer& layer, const EncodedLayer& enc,
                       const CsrLayer* csr = nullptr);

// Stats for an already-packed layer when the source layer is unavailable.
SizeReport size_report_from_encoded(const EncodedLayer& enc);

// --- Experiments -----------------------------------------------------------

struct TSweepPoint {
    uint32_t bits_per_cell;
    uint64_t fp_count;
    uint64_t filter_bits;
    uint64_t packed_bits;
};

// Re-encodes the layer at every t in [t_min, t_max] with the same seed and
// counts false positives exactly.
std::vector<TSweepPoint> sweep_t(const SimplifiedLayer& layer, uint32_t t_min,
                                 uint32_t t_max, const EncodeOptions& base);

struct ScalingPoint {
    double nnz_ratio;
    uint64_t nnz;
    uint64_t filter_bits;
    uint64_t weightless_packed_bits;
    uint64_t csr_bits;          // at the best index width for this point
    uint64_t csr_huffman_bits;
};

// Prunes one synthetic Gaussian matrix to each requested density, clusters,
// and sizes both encodings (CSR at its best index width per point).
std::vector<ScalingPoint> sparsity_scaling_experiment(
    uint32_t rows, uint32_t cols, std::span<const double> nnz_ratios,
    uint32_t cluster_count, uint32_t bits_per_cell, uint64_t seed);

// --- Synthetic inputs ------------------------------------------------------

WeightMatrix make_gaussian_matrix(uint32_t rows, uint32_t cols, uint64_t seed);

// Directly samples an exact-count position set (sequential sampling, no
// dense matrix materialized), uniform labels and a sorted random centroid
// table; stands in for pruned+clustered layers at sizes where the dense
// path would be wasteful.
SimplifiedLayer make_synthetic_layer(uint32_t rows, uint32_t cols,
                                     double nnz_ratio, uint32_t cluster_count,
                                     uint64_t seed);

// --- Files -----------------------------------------------------------------

// One layer inside a container file.
struct ContainerEntry {
    std::string name;
    uint8_t codec = 1;  // 0 = raw packed cells, 1 = arithmetic-coded
    EncodedLayer layer;
};

std::vector<uint8_t> pack(std::span<const ContainerEntry> entries);
std::vector<ContainerEntry> unpack(std::span<const uint8_t> bytes);

void write_container(const std::string& path, std::span<const ContainerEntry> entries);
std::vector<ContainerEntry> read_container(const std::string& path);

void write_weight_matrix(const std::string& path, const WeightMatrix& w);
WeightMatrix read_weight_matrix(const std::string& path);

// One matrix row per line, comma-separated. All rows must agree in length.
WeightMatrix read_csv_matrix(const std::string& path);

uint32_t crc32_ieee(std::span<const uint8_t> bytes);

}  // namespace weightless
