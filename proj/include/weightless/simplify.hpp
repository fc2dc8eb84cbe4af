#pragma once

#include <cstdint>
#include <vector>

#include "weightless/error.hpp"

namespace weightless {

// Dense 2-D weight array, row-major, 32-bit reals. The unit of compression.
struct WeightMatrix {
    uint32_t rows = 0;
    uint32_t cols = 0;
    std::vector<float> values;

    uint64_t size() const { return uint64_t(rows) * cols; }
    float at(uint32_t r, uint32_t c) const { return values[uint64_t(r) * cols + c]; }
    float& at(uint32_t r, uint32_t c) { return values[uint64_t(r) * cols + c]; }

    static WeightMatrix zeros(uint32_t rows, uint32_t cols) {
        return WeightMatrix{rows, cols, std::vector<float>(uint64_t(rows) * cols, 0.0f)};
    }
};

// Bit per position; 1 = weight retained after pruning.
struct PruneMask {
    uint32_t rows = 0;
    uint32_t cols = 0;
    std::vector<uint8_t> kept;  // one byte per position

    uint64_t kept_count() const;
};

// Sorted, distinct centroids of the retained weights.
struct ClusterModel {
    std::vector<float> centroids;

    uint32_t cluster_count() const { return uint32_t(centroids.size()); }
};

// Pruned + clustered layer: the exact input the Bloomier encoding expects.
// Reconstruction rule: positions[p] holds centroids[labels[p]], all other
// positions hold zero.
struct SimplifiedLayer {
    uint32_t rows = 0;
    uint32_t cols = 0;
    std::vector<uint64_t> positions;  // strictly increasing flattened indices
    std::vector<uint32_t> labels;     // cluster index per position
    ClusterModel model;

    uint64_t nonzero_count() const { return positions.size(); }
};

// Keeps the ceil(target_nnz_ratio * rows * cols) largest-magnitude entries,
// ties at the threshold resolved toward the lower flattened index. Entries
// that are exactly zero are never retained (a zero weight carries no
// information; the encoding represents it as a null).
PruneMask prune_to_sparsity(const WeightMatrix& w, double target_nnz_ratio);

struct KMeansResult {
    ClusterModel model;
    std::vector<uint32_t> labels;
};

struct KMeansOptions {
    uint32_t max_iters = 300;
    double tol = 1e-6;  // absolute centroid movement
};

// Lloyd's algorithm on scalars. Deterministic: initial centroids are k
// evenly spaced quantiles of the value distribution, label ties resolve to
// the lower cluster index, and an emptied cluster is reseeded to the value
// worst represented by its current centroid. Exact duplicate centroids are
// merged, so the result may have fewer than k clusters on degenerate data.
KMeansResult kmeans_1d(const std::vector<float>& values, uint32_t k,
                       const KMeansOptions& opts = {});

// Clusters only the retained weights and assembles the positions / labels /
// centroid table.
SimplifiedLayer simplify_layer(const WeightMatrix& w, const PruneMask& mask,
                               uint32_t k, const KMeansOptions& opts = {});

// Materializes the simplified matrix (centroid value at each retained
// position, zero elsewhere).
WeightMatrix to_dense(const SimplifiedLayer& layer);

}  // namespace weightless
