#include "weightless/simplify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace weightless {

uint64_t PruneMask::kept_count() const {
    uint64_t n = 0;
    for (uint8_t b : kept) n += b;
    return n;
}

namespace {

// ceil() with a one-part-per-billion guard so that ratios like 0.05 of
// 235200, which lands at 11760.000000000002 in binary, round to the exact
// product instead of one past it.
uint64_t target_count(double ratio, uint64_t total) {
    double scaled = ratio * double(total);
    return uint64_t(std::ceil(scaled - 1e-9));
}

}  // namespace

PruneMask prune_to_sparsity(const WeightMatrix& w, double target_nnz_ratio) {
    const uint64_t total = w.size();
    if (total == 0) throw InvalidInput("prune: empty matrix");
    if (!(target_nnz_ratio > 0.0) || target_nnz_ratio > 1.0)
        throw InvalidInput("prune: nnz ratio must be in (0, 1]");

    uint64_t count = std::min(target_count(target_nnz_ratio, total), total);

    std::vector<uint64_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    auto larger = [&](uint64_t a, uint64_t b) {
        float ma = std::fabs(w.values[a]);
        float mb = std::fabs(w.values[b]);
        if (ma != mb) return ma > mb;
        return a < b;  // threshold ties: lower flattened index wins
    };
    if (count < total)
        std::nth_element(idx.begin(), idx.begin() + count, idx.end(), larger);

    PruneMask mask{w.rows, w.cols, std::vector<uint8_t>(total, 0)};
    for (uint64_t i = 0; i < count; ++i)
        if (w.values[idx[i]] != 0.0f) mask.kept[idx[i]] = 1;
    return mask;
}

KMeansResult kmeans_1d(const std::vector<float>& values, uint32_t k,
                       const KMeansOptions& opts) {
    const size_t n = values.size();
    if (k == 0) throw InvalidInput("kmeans: k must be at least 1");
    if (n < k)
        throw InvalidInput("kmeans: k = " + std::to_string(k) +
                           " exceeds sample count " + std::to_string(n));

    std::vector<float> sorted(values);
    std::sort(sorted.begin(), sorted.end());

    // Evenly spaced quantiles of the empirical distribution.
    std::vector<double> centroids(k);
    for (uint32_t c = 0; c < k; ++c) {
        size_t pos = size_t((double(c) + 0.5) / double(k) * double(n));
        centroids[c] = sorted[std::min(pos, n - 1)];
    }
    std::sort(centroids.begin(), centroids.end());

    std::vector<uint32_t> labels(n, 0);
    auto nearest = [&](double v) {
        // Sorted centroids: the best candidate brackets the insertion point;
        // ties resolve to the lower index.
        auto it = std::lower_bound(centroids.begin(), centroids.end(), v);
        uint32_t hi = uint32_t(it - centroids.begin());
        uint32_t best = hi < k ? hi : k - 1;
        if (hi > 0) {
            uint32_t lo = hi - 1;
            double dlo = std::fabs(v - centroids[lo]);
            double dhi = std::fabs(v - centroids[best]);
            if (dlo <= dhi) best = lo;
        }
        return best;
    };

    for (uint32_t iter = 0; iter < opts.max_iters; ++iter) {
        std::vector<double> sum(k, 0.0);
        std::vector<uint64_t> cnt(k, 0);
        for (size_t i = 0; i < n; ++i) {
            uint32_t c = nearest(values[i]);
            labels[i] = c;
            sum[c] += values[i];
            ++cnt[c];
        }
        for (uint32_t c = 0; c < k; ++c) {
            if (cnt[c] > 0) continue;
            // Reseed an empty cluster on the globally worst-represented
            // value. Deterministic: first maximizer wins.
            size_t worst = 0;
            double worst_dist = -1.0;
            for (size_t i = 0; i < n; ++i) {
                double d = std::fabs(double(values[i]) - centroids[labels[i]]);
                if (d > worst_dist) {
                    worst_dist = d;
                    worst = i;
                }
            }
            uint32_t old = labels[worst];
            sum[old] -= values[worst];
            --cnt[old];
            labels[worst] = c;
            sum[c] = values[worst];
            cnt[c] = 1;
        }
        double moved = 0.0;
        for (uint32_t c = 0; c < k; ++c) {
            double next = cnt[c] > 0 ? sum[c] / double(cnt[c]) : centroids[c];
            moved = std::max(moved, std::fabs(next - centroids[c]));
            centroids[c] = next;
        }
        std::sort(centroids.begin(), centroids.end());
        if (moved < opts.tol) break;
    }

    // Final model uses 32-bit centroids; merge exact duplicates so the
    // table stays strictly increasing.
    std::vector<float> final_centroids;
    final_centroids.reserve(k);
    for (uint32_t c = 0; c < k; ++c) {
        float f = float(centroids[c]);
        if (final_centroids.empty() || final_centroids.back() != f)
            final_centroids.push_back(f);
    }

    KMeansResult result;
    result.model.centroids = std::move(final_centroids);
    result.labels.resize(n);
    const auto& cs = result.model.centroids;
    for (size_t i = 0; i < n; ++i) {
        // Assign against the stored 32-bit table so labels and model agree.
        uint32_t best = 0;
        double best_d = std::fabs(double(values[i]) - double(cs[0]));
        for (uint32_t c = 1; c < cs.size(); ++c) {
            double d = std::fabs(double(values[i]) - double(cs[c]));
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        result.labels[i] = best;
    }
    return result;
}

SimplifiedLayer simplify_layer(const WeightMatrix& w, const PruneMask& mask,
                               uint32_t k, const KMeansOptions& opts) {
    if (mask.rows != w.rows || mask.cols != w.cols ||
        mask.kept.size() != w.values.size())
        throw InvalidInput("simplify: mask does not match matrix shape");

    SimplifiedLayer layer;
    layer.rows = w.rows;
    layer.cols = w.cols;

    std::vector<float> retained;
    for (uint64_t i = 0; i < w.size(); ++i) {
        if (!mask.kept[i]) continue;
        layer.positions.push_back(i);
        retained.push_back(w.values[i]);
    }
    if (retained.size() < k)
        throw InvalidInput("simplify: only " + std::to_string(retained.size()) +
                           " retained weights for k = " + std::to_string(k));

    KMeansResult km = kmeans_1d(retained, k, opts);
    layer.labels = std::move(km.labels);
    layer.model = std::move(km.model);
    return layer;
}

WeightMatrix to_dense(const SimplifiedLayer& layer) {
    WeightMatrix w = WeightMatrix::zeros(layer.rows, layer.cols);
    for (size_t p = 0; p < layer.positions.size(); ++p)
        w.values[layer.positions[p]] = layer.model.centroids[layer.labels[p]];
    return w;
}

}  // namespace weightless
