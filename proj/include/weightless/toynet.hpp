#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "weightless/container.hpp"
#include "weightless/simplify.hpp"

namespace weightless {

// Labeled vectors with a fixed train/test split: samples [0, train_count)
// train, the rest test. Classes are interleaved so both splits stay balanced.
struct Dataset {
    uint32_t feature_dim = 0;
    uint32_t class_count = 0;
    std::vector<double> inputs;  // sample-major
    std::vector<uint32_t> labels;
    size_t train_count = 0;

    size_t size() const { return labels.size(); }
    size_t test_count() const { return labels.size() - train_count; }
    std::span<const double> sample(size_t i) const {
        return {inputs.data() + i * feature_dim, feature_dim};
    }
};

// Gaussian clusters around fixed per-class means (norm = mean_radius, unit
// per-dimension noise). Deterministic in the seed.
Dataset make_synthetic_dataset(uint64_t seed, uint32_t classes = 10,
                               uint32_t dim = 64, size_t n = 10000,
                               double mean_radius = 3.5,
                               double train_fraction = 0.8);

// IDX-format loader (the MNIST file layout); pixel bytes scaled to [0, 1].
Dataset load_idx_dataset(const std::string& train_images,
                         const std::string& train_labels,
                         const std::string& test_images,
                         const std::string& test_labels);

struct DenseLayer {
    uint32_t in = 0;
    uint32_t out = 0;
    std::vector<double> weights;  // in x out, row-major
    std::vector<double> bias;     // out
    bool frozen = false;
    std::vector<uint8_t> mask;  // empty = dense; else 1 = trainable position
};

// Dense ReLU stack with a softmax cross-entropy head. Weights are doubles
// internally; the compression path moves through 32-bit WeightMatrix.
struct ToyNet {
    std::vector<DenseLayer> layers;

    // dims = {input, hidden..., classes}; scaled-normal init.
    static ToyNet create(std::span<const uint32_t> dims, uint64_t seed);

    WeightMatrix layer_weights(size_t i) const;
    void set_layer_weights(size_t i, const WeightMatrix& w);
};

struct TrainOptions {
    uint32_t epochs = 10;
    double lr = 0.05;
    uint32_t batch_size = 32;
    uint64_t seed = 1;
};

struct TrainStats {
    std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

// Minibatch SGD on the train split. Frozen layers and masked-out weights
// are left untouched (masked weights stay exactly zero).
TrainStats train(ToyNet& net, const Dataset& data, const TrainOptions& opts);

// Accuracy in percent over the chosen split.
double evaluate_accuracy(const ToyNet& net, const Dataset& data, bool test_split);

// Mean cross-entropy over the given samples; exposed for the gradient check.
double batch_loss(const ToyNet& net, std::span<const double> inputs,
                  std::span<const uint32_t> labels);

struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;
};

Gradients batch_gradients(const ToyNet& net, std::span<const double> inputs,
                          std::span<const uint32_t> labels);

// --- Optimization pipeline ---------------------------------------------------

struct LayerEncodeSpec {
    double nnz_ratio = 0.25;
    uint32_t cluster_count = 9;
    uint32_t bits_per_cell = 5;
    uint32_t num_shards = 1;
    Ratio table_multiplier{};
};

struct StageAccuracy {
    std::string stage;
    uint32_t layer;
    double accuracy_pct;
};

struct PipelineOptions {
    uint32_t retrain_epochs = 10;
    double lr = 0.05;
    uint32_t batch_size = 32;
    uint64_t seed = 1;
};

struct PipelineResult {
    std::vector<StageAccuracy> trace;
    std::vector<EncodedLayer> encoded;
};

// Layer-by-layer, front to back, for every layer with a spec:
// prune -> brief retrain -> cluster -> encode -> install the reconstruction
// (false positives included) and freeze -> retrain the subsequent layers.
// The filter's false positives are deterministic for a fixed seed, which is
// what lets the later layers learn around them.
PipelineResult weightless_pipeline(
    ToyNet& net, const Dataset& data,
    std::span<const std::optional<LayerEncodeSpec>> specs,
    const PipelineOptions& opts);

void write_trace_csv(const std::string& path, std::span<const StageAccuracy> trace);

}  // namespace weightless
