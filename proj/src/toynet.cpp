#include "weightless/toynet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "weightless/rng.hpp"

namespace weightless {

Dataset make_synthetic_dataset(uint64_t seed, uint32_t classes, uint32_t dim,
                               size_t n, double mean_radius,
                               double train_fraction) {
    if (classes < 2) throw InvalidInput("dataset: need at least two classes");
    if (dim == 0 || n == 0) throw InvalidInput("dataset: empty shape");

    Rng rng(seed);
    std::vector<double> means(size_t(classes) * dim);
    for (uint32_t c = 0; c < classes; ++c) {
        double norm = 0.0;
        for (uint32_t d = 0; d < dim; ++d) {
            double v = rng.next_gaussian();
            means[size_t(c) * dim + d] = v;
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (uint32_t d = 0; d < dim; ++d)
            means[size_t(c) * dim + d] *= mean_radius / norm;
    }

    Dataset data;
    data.feature_dim = dim;
    data.class_count = classes;
    data.inputs.resize(n * size_t(dim));
    data.labels.resize(n);
    data.train_count = size_t(double(n) * train_fraction);
    for (size_t i = 0; i < n; ++i) {
        uint32_t c = uint32_t(i % classes);
        data.labels[i] = c;
        for (uint32_t d = 0; d < dim; ++d)
            data.inputs[i * dim + d] =
                means[size_t(c) * dim + d] + rng.next_gaussian();
    }
    return data;
}

namespace {

uint32_t read_be32(std::ifstream& in, const std::string& path) {
    uint8_t b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw CorruptData("idx: truncated header in " + path);
    return uint32_t(b[0]) << 24 | uint32_t(b[1]) << 16 | uint32_t(b[2]) << 8 |
           uint32_t(b[3]);
}

void load_idx_pair(const std::string& images_path, const std::string& labels_path,
                   Dataset& data) {
    std::ifstream images(images_path, std::ios::binary);
    if (!images) throw IoError("cannot open: " + images_path);
    std::ifstream labels(labels_path, std::ios::binary);
    if (!labels) throw IoError("cannot open: " + labels_path);

    if (read_be32(images, images_path) != 0x00000803)
        throw CorruptData("idx: bad image magic in " + images_path);
    const uint32_t count = read_be32(images, images_path);
    const uint32_t rows = read_be32(images, images_path);
    const uint32_t cols = read_be32(images, images_path);
    if (read_be32(labels, labels_path) != 0x00000801)
        throw CorruptData("idx: bad label magic in " + labels_path);
    if (read_be32(labels, labels_path) != count)
        throw CorruptData("idx: image/label count mismatch");

    const uint32_t dim = rows * cols;
    if (data.feature_dim == 0)
        data.feature_dim = dim;
    else if (data.feature_dim != dim)
        throw CorruptData("idx: image dimensions differ between files");

    std::vector<uint8_t> pixels(dim);
    for (uint32_t i = 0; i < count; ++i) {
        if (!images.read(reinterpret_cast<char*>(pixels.data()), dim))
            throw CorruptData("idx: truncated image data in " + images_path);
        for (uint8_t p : pixels) data.inputs.push_back(double(p) / 255.0);
        char label;
        if (!labels.get(label))
            throw CorruptData("idx: truncated label data in " + labels_path);
        data.labels.push_back(uint8_t(label));
    }
}

}  // namespace

Dataset load_idx_dataset(const std::string& train_images,
                         const std::string& train_labels,
                         const std::string& test_images,
                         const std::string& test_labels) {
    Dataset data;
    load_idx_pair(train_images, train_labels, data);
    data.train_count = data.labels.size();
    load_idx_pair(test_images, test_labels, data);
    data.class_count = 0;
    for (uint32_t l : data.labels)
        data.class_count = std::max(data.class_count, l + 1);
    return data;
}

ToyNet ToyNet::create(std::span<const uint32_t> dims, uint64_t seed) {
    if (dims.size() < 2) throw InvalidInput("toynet: need at least two dims");
    Rng rng(seed);
    ToyNet net;
    for (size_t i = 0; i + 1 < dims.size(); ++i) {
        DenseLayer layer;
        layer.in = dims[i];
        layer.out = dims[i + 1];
        layer.weights.resize(size_t(layer.in) * layer.out);
        layer.bias.assign(layer.out, 0.0);
        const double scale = std::sqrt(2.0 / double(layer.in));
        for (auto& w : layer.weights) w = rng.next_gaussian() * scale;
        net.layers.push_back(std::move(layer));
    }
    return net;
}

WeightMatrix ToyNet::layer_weights(size_t i) const {
    const DenseLayer& l = layers.at(i);
    WeightMatrix w{l.in, l.out, std::vector<float>(l.weights.size())};
    for (size_t j = 0; j < l.weights.size(); ++j) w.values[j] = float(l.weights[j]);
    return w;
}

void ToyNet::set_layer_weights(size_t i, const WeightMatrix& w) {
    DenseLayer& l = layers.at(i);
    if (w.rows != l.in || w.cols != l.out)
        throw InvalidInput("toynet: weight matrix shape mismatch");
    for (size_t j = 0; j < l.weights.size(); ++j) l.weights[j] = double(w.values[j]);
}

namespace {

// y[b] = relu(x[b] W + bias) for hidden layers; the last layer returns raw
// logits. Buffers are batch-major.
void forward_layer(const DenseLayer& l, std::span<const double> x, size_t batch,
                   bool relu, std::vector<double>& y) {
    y.assign(batch * l.out, 0.0);
    for (size_t b = 0; b < batch; ++b) {
        const double* xb = x.data() + b * l.in;
        double* yb = y.data() + b * l.out;
        for (uint32_t o = 0; o < l.out; ++o) yb[o] = l.bias[o];
        for (uint32_t i = 0; i < l.in; ++i) {
            const double xi = xb[i];
            if (xi == 0.0) continue;
            const double* wrow = l.weights.data() + size_t(i) * l.out;
            for (uint32_t o = 0; o < l.out; ++o) yb[o] += xi * wrow[o];
        }
        if (relu)
            for (uint32_t o = 0; o < l.out; ++o) yb[o] = std::max(yb[o], 0.0);
    }
}

// Softmax cross-entropy; fills dlogits with (softmax - onehot) / batch and
// returns the mean loss.
double softmax_loss_grad(std::span<const double> logits,
                         std::span<const uint32_t> labels, size_t batch,
                         uint32_t classes, std::vector<double>& dlogits) {
    dlogits.assign(batch * classes, 0.0);
    double loss = 0.0;
    for (size_t b = 0; b < batch; ++b) {
        const double* z = logits.data() + b * classes;
        double zmax = *std::max_element(z, z + classes);
        double sum = 0.0;
        for (uint32_t c = 0; c < classes; ++c) sum += std::exp(z[c] - zmax);
        const double log_sum = std::log(sum) + zmax;
        loss += log_sum - z[labels[b]];
        double* d = dlogits.data() + b * classes;
        for (uint32_t c = 0; c < classes; ++c)
            d[c] = (std::exp(z[c] - log_sum) - (c == labels[b] ? 1.0 : 0.0)) /
                   double(batch);
    }
    return loss / double(batch);
}

struct BatchBackprop {
    double loss;
    Gradients grads;
};

BatchBackprop run_backprop(const ToyNet& net, std::span<const double> inputs,
                           std::span<const uint32_t> labels) {
    const size_t batch = labels.size();
    const size_t depth = net.layers.size();

    std::vector<std::vector<double>> acts(depth);  // post-activation per layer
    std::span<const double> x = inputs;
    for (size_t l = 0; l < depth; ++l) {
        forward_layer(net.layers[l], x, batch, l + 1 < depth, acts[l]);
        x = acts[l];
    }

    BatchBackprop result;
    std::vector<double> delta;
    result.loss = softmax_loss_grad(acts[depth - 1], labels, batch,
                                    net.layers[depth - 1].out, delta);

    result.grads.weights.resize(depth);
    result.grads.bias.resize(depth);
    for (size_t li = depth; li-- > 0;) {
        const DenseLayer& l = net.layers[li];
        std::span<const double> below =
            li == 0 ? inputs : std::span<const double>(acts[li - 1]);

        auto& dw = result.grads.weights[li];
        auto& db = result.grads.bias[li];
        dw.assign(l.weights.size(), 0.0);
        db.assign(l.out, 0.0);
        for (size_t b = 0; b < batch; ++b) {
            const double* d = delta.data() + b * l.out;
            const double* xb = below.data() + b * l.in;
            for (uint32_t o = 0; o < l.out; ++o) db[o] += d[o];
            for (uint32_t i = 0; i < l.in; ++i) {
                const double xi = xb[i];
                if (xi == 0.0) continue;
                double* dwrow = dw.data() + size_t(i) * l.out;
                for (uint32_t o = 0; o < l.out; ++o) dwrow[o] += xi * d[o];
            }
        }

        if (li == 0) break;
        // delta for the layer below: (delta W^T) gated by its ReLU.
        std::vector<double> next(batch * l.in, 0.0);
        for (size_t b = 0; b < batch; ++b) {
            const double* d = delta.data() + b * l.out;
            const double* xb = below.data() + b * l.in;
            double* nd = next.data() + b * l.in;
            for (uint32_t i = 0; i < l.in; ++i) {
                if (xb[i] <= 0.0) continue;  // ReLU gate (post-activation == 0)
                const double* wrow = l.weights.data() + size_t(i) * l.out;
                double acc = 0.0;
                for (uint32_t o = 0; o < l.out; ++o) acc += wrow[o] * d[o];
                nd[i] = acc;
            }
        }
        delta = std::move(next);
    }
    return result;
}

void apply_update(ToyNet& net, const Gradients& grads, double lr) {
    for (size_t li = 0; li < net.layers.size(); ++li) {
        DenseLayer& l = net.layers[li];
        if (l.frozen) continue;
        const bool masked = !l.mask.empty();
        for (size_t j = 0; j < l.weights.size(); ++j) {
            if (masked && !l.mask[j]) continue;  // pruned weights stay zero
            l.weights[j] -= lr * grads.weights[li][j];
        }
        for (uint32_t o = 0; o < l.out; ++o) l.bias[o] -= lr * grads.bias[li][o];
    }
}

}  // namespace

double batch_loss(const ToyNet& net, std::span<const double> inputs,
                  std::span<const uint32_t> labels) {
    const size_t batch = labels.size();
    const size_t depth = net.layers.size();
    std::vector<double> buf;
    std::span<const double> x = inputs;
    std::vector<double> next;
    for (size_t l = 0; l < depth; ++l) {
        forward_layer(net.layers[l], x, batch, l + 1 < depth, next);
        buf = std::move(next);
        x = buf;
        next = {};
    }
    std::vector<double> scratch;
    return softmax_loss_grad(buf, labels, batch, net.layers[depth - 1].out, scratch);
}

Gradients batch_gradients(const ToyNet& net, std::span<const double> inputs,
                          std::span<const uint32_t> labels) {
    return run_backprop(net, inputs, labels).grads;
}

TrainStats train(ToyNet& net, const Dataset& data, const TrainOptions& opts) {
    if (net.layers.empty() || net.layers.front().in != data.feature_dim ||
        net.layers.back().out != data.class_count)
        throw InvalidInput("train: network and dataset shapes disagree");

    TrainStats stats;
    Rng rng(opts.seed);
    std::vector<size_t> order(data.train_count);
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> batch_inputs;
    std::vector<uint32_t> batch_labels;

    for (uint32_t epoch = 0; epoch < opts.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        size_t seen = 0;
        for (size_t start = 0; start < order.size(); start += opts.batch_size) {
            const size_t batch =
                std::min<size_t>(opts.batch_size, order.size() - start);
            batch_inputs.assign(batch * data.feature_dim, 0.0);
            batch_labels.assign(batch, 0);
            for (size_t b = 0; b < batch; ++b) {
                auto s = data.sample(order[start + b]);
                std::copy(s.begin(), s.end(),
                          batch_inputs.begin() + b * data.feature_dim);
                batch_labels[b] = data.labels[order[start + b]];
            }
            BatchBackprop bp = run_backprop(net, batch_inputs, batch_labels);
            apply_update(net, bp.grads, opts.lr);
            loss_sum += bp.loss * double(batch);
            seen += batch;
        }
        stats.epoch_loss.push_back(loss_sum / double(seen));
    }
    return stats;
}

double evaluate_accuracy(const ToyNet& net, const Dataset& data, bool test_split) {
    const size_t begin = test_split ? data.train_count : 0;
    const size_t end = test_split ? data.size() : data.train_count;
    if (begin == end) throw InvalidInput("evaluate: empty split");

    const size_t depth = net.layers.size();
    size_t correct = 0;
    std::vector<double> buf, next;
    constexpr size_t kChunk = 256;
    for (size_t start = begin; start < end; start += kChunk) {
        const size_t batch = std::min(kChunk, end - start);
        std::span<const double> x{data.inputs.data() + start * data.feature_dim,
                                  batch * data.feature_dim};
        for (size_t l = 0; l < depth; ++l) {
            forward_layer(net.layers[l], x, batch, l + 1 < depth, next);
            buf = std::move(next);
            x = buf;
            next = {};
        }
        const uint32_t classes = net.layers.back().out;
        for (size_t b = 0; b < batch; ++b) {
            const double* z = buf.data() + b * classes;
            uint32_t best = uint32_t(std::max_element(z, z + classes) - z);
            if (best == data.labels[start + b]) ++correct;
        }
    }
    return 100.0 * double(correct) / double(end - begin);
}

PipelineResult weightless_pipeline(
    ToyNet& net, const Dataset& data,
    std::span<const std::optional<LayerEncodeSpec>> specs,
    const PipelineOptions& opts) {
    if (specs.size() != net.layers.size())
        throw InvalidInput("pipeline: one spec slot per layer required");

    PipelineResult result;
    uint64_t stage_seed = opts.seed;
    auto record = [&](const std::string& stage, uint32_t layer) {
        result.trace.push_back(
            StageAccuracy{stage, layer, evaluate_accuracy(net, data, true)});
    };
    auto retrain = [&] {
        TrainOptions t;
        t.epochs = opts.retrain_epochs;
        t.lr = opts.lr;
        t.batch_size = opts.batch_size;
        t.seed = ++stage_seed;
        train(net, data, t);
    };

    record("initial", 0);
    for (uint32_t li = 0; li < net.layers.size(); ++li) {
        if (!specs[li]) continue;
        const LayerEncodeSpec& spec = *specs[li];
        DenseLayer& layer = net.layers[li];

        // Simplification: prune, let the network settle, then quantize.
        WeightMatrix w = net.layer_weights(li);
        PruneMask mask = prune_to_sparsity(w, spec.nnz_ratio);
        layer.mask = mask.kept;
        for (size_t j = 0; j < layer.weights.size(); ++j)
            if (!mask.kept[j]) layer.weights[j] = 0.0;
        record("pruned", li);

        retrain();
        record("pruned_retrained", li);

        w = net.layer_weights(li);
        SimplifiedLayer simplified =
            simplify_layer(w, mask, spec.cluster_count);
        net.set_layer_weights(li, to_dense(simplified));
        record("clustered", li);

        EncodeOptions enc_opts;
        enc_opts.bits_per_cell = spec.bits_per_cell;
        enc_opts.table_multiplier = spec.table_multiplier;
        enc_opts.num_shards = spec.num_shards;
        enc_opts.seed = opts.seed * 0x10001 + li;
        EncodedLayer enc = encode_layer(simplified, enc_opts);
        net.set_layer_weights(li, reconstruct(enc));
        layer.frozen = true;  // false positives are now part of the layer
        record("encoded", li);
        result.encoded.push_back(std::move(enc));

        // Only the layers after the frozen one learn around its errors;
        // unprocessed earlier layers sit this retrain out.
        std::vector<uint8_t> was_frozen(li, 0);
        for (uint32_t j = 0; j < li; ++j) {
            was_frozen[j] = net.layers[j].frozen;
            net.layers[j].frozen = true;
        }
        retrain();
        for (uint32_t j = 0; j < li; ++j) net.layers[j].frozen = was_frozen[j];
        record("retrained", li);
    }
    return result;
}

void write_trace_csv(const std::string& path, std::span<const StageAccuracy> trace) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "stage,layer,accuracy\n";
    char line[96];
    for (const auto& row : trace) {
        std::snprintf(line, sizeof line, "%s,%u,%.4f\n", row.stage.c_str(),
                      row.layer, row.accuracy_pct);
        out << line;
    }
}

}  // namespace weightless
