#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "weightless/rng.hpp"
#include "weightless/simplify.hpp"

using namespace weightless;

namespace {

double wcss(const std::vector<float>& values, const KMeansResult& result) {
    double sum = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        double d = double(values[i]) -
                   double(result.model.centroids[result.labels[i]]);
        sum += d * d;
    }
    return sum;
}

// Exact 1-D k-means on sorted values by dynamic programming over cluster
// boundaries: O(k n^2), independent of the Lloyd implementation.
double optimal_wcss(std::vector<float> values, uint32_t k) {
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    std::vector<double> prefix(n + 1, 0.0), prefix_sq(n + 1, 0.0);
    for (size_t i = 0; i < n; ++i) {
        prefix[i + 1] = prefix[i] + values[i];
        prefix_sq[i + 1] = prefix_sq[i] + double(values[i]) * values[i];
    }
    // Cost of one cluster covering [a, b).
    auto segment = [&](size_t a, size_t b) {
        double cnt = double(b - a);
        double sum = prefix[b] - prefix[a];
        return (prefix_sq[b] - prefix_sq[a]) - sum * sum / cnt;
    };

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(n + 1, kInf), cur(n + 1, kInf);
    prev[0] = 0.0;
    for (uint32_t c = 1; c <= k; ++c) {
        std::fill(cur.begin(), cur.end(), kInf);
        for (size_t b = 1; b <= n; ++b)
            for (size_t a = c - 1; a < b; ++a)
                if (prev[a] < kInf) cur[b] = std::min(cur[b], prev[a] + segment(a, b));
        std::swap(prev, cur);
    }
    return prev[n];
}

WeightMatrix matrix_from(std::initializer_list<float> vals, uint32_t rows,
                         uint32_t cols) {
    return WeightMatrix{rows, cols, std::vector<float>(vals)};
}

}  // namespace

TEST_CASE("prune keeps the largest magnitudes with exact count") {
    WeightMatrix w = matrix_from({1.0f, -3.0f, 2.0f, 0.5f}, 1, 4);
    PruneMask mask = prune_to_sparsity(w, 0.5);
    CHECK(mask.kept_count() == 2);
    CHECK(mask.kept[1] == 1);  // -3
    CHECK(mask.kept[2] == 1);  // 2
}

TEST_CASE("prune at ratio 1.0 keeps everything except exact zeros") {
    WeightMatrix w = matrix_from({0.0f, -0.25f, 0.0f, 4.0f, 1e-30f, 0.0f}, 2, 3);
    PruneMask mask = prune_to_sparsity(w, 1.0);
    CHECK(mask.kept_count() == 3);
    CHECK(mask.kept[0] == 0);
    CHECK(mask.kept[1] == 1);
    CHECK(mask.kept[4] == 1);
}

TEST_CASE("prune hits the exact paper-scale count") {
    // 784 x 300 at 5% must keep exactly 11760, despite 0.05 * 235200 being
    // slightly above the integer in binary floating point.
    WeightMatrix w = WeightMatrix::zeros(784, 300);
    Rng rng(3);
    for (auto& v : w.values) v = float(rng.next_gaussian());
    PruneMask mask = prune_to_sparsity(w, 0.05);
    CHECK(mask.kept_count() == 11760);

    // Every kept magnitude >= every dropped magnitude.
    float min_kept = 1e30f;
    float max_dropped = 0.0f;
    for (size_t i = 0; i < w.values.size(); ++i) {
        float m = std::fabs(w.values[i]);
        if (mask.kept[i])
            min_kept = std::min(min_kept, m);
        else
            max_dropped = std::max(max_dropped, m);
    }
    CHECK(min_kept >= max_dropped);
}

TEST_CASE("prune rejects bad input") {
    WeightMatrix empty;
    CHECK_THROWS_AS(prune_to_sparsity(empty, 0.5), InvalidInput);
    WeightMatrix w = matrix_from({1.0f}, 1, 1);
    CHECK_THROWS_AS(prune_to_sparsity(w, 0.0), InvalidInput);
    CHECK_THROWS_AS(prune_to_sparsity(w, 1.5), InvalidInput);
}

TEST_CASE("kmeans separates two obvious clusters") {
    std::vector<float> values{1, 1, 1, 5, 5, 5};
    KMeansResult r = kmeans_1d(values, 2);
    REQUIRE(r.model.cluster_count() == 2);
    CHECK(r.model.centroids[0] == doctest::Approx(1.0));
    CHECK(r.model.centroids[1] == doctest::Approx(5.0));
    CHECK(r.labels == std::vector<uint32_t>{0, 0, 0, 1, 1, 1});
}

TEST_CASE("kmeans saturation: k equal to distinct value count is lossless") {
    std::vector<float> values{-2.0f, -0.5f, 0.25f, 1.0f, 3.0f};
    KMeansResult r = kmeans_1d(values, 5);
    REQUIRE(r.model.cluster_count() == 5);
    for (size_t i = 0; i < values.size(); ++i)
        CHECK(r.model.centroids[r.labels[i]] == values[i]);
    CHECK(wcss(values, r) == doctest::Approx(0.0));
}

TEST_CASE("kmeans labels are nearest-centroid") {
    Rng rng(12);
    std::vector<float> values(3000);
    for (auto& v : values) v = float(rng.next_gaussian() * 2.0);
    KMeansResult r = kmeans_1d(values, 9);
    const auto& cs = r.model.centroids;
    for (size_t i = 0; i < values.size(); ++i) {
        double own = std::fabs(double(values[i]) - cs[r.labels[i]]);
        for (size_t c = 0; c < cs.size(); ++c)
            CHECK(own <= std::fabs(double(values[i]) - cs[c]) + 1e-12);
    }
    // Centroids strictly increasing.
    for (size_t c = 1; c < cs.size(); ++c) CHECK(cs[c] > cs[c - 1]);
}

TEST_CASE("kmeans objective is non-increasing across iterations") {
    Rng rng(13);
    std::vector<float> values(2000);
    for (auto& v : values)
        v = float(rng.next_gaussian() + (rng.next_below(2) ? 4.0 : -4.0));

    double last = 1e300;
    for (uint32_t iters = 1; iters <= 12; ++iters) {
        KMeansOptions opts;
        opts.max_iters = iters;
        opts.tol = 0.0;
        KMeansResult r = kmeans_1d(values, 6, opts);
        double cost = wcss(values, r);
        CHECK(cost <= last * (1.0 + 1e-9));
        last = cost;
    }
}

TEST_CASE("kmeans matches the DP optimum on a Gaussian mixture") {
    Rng rng(14);
    std::vector<float> big(10000);
    for (auto& v : big)
        v = float(rng.next_gaussian() * 0.7 + (rng.next_below(2) ? 3.0 : -3.0));
    // DP oracle is quadratic; run the comparison on a subsample.
    std::vector<float> sub(big.begin(), big.begin() + 200);
    KMeansResult r = kmeans_1d(sub, 2);
    double lloyd = wcss(sub, r);
    double optimal = optimal_wcss(sub, 2);
    CHECK(lloyd <= optimal * 1.01);
    CHECK(lloyd >= optimal * (1.0 - 1e-9));
}

TEST_CASE("kmeans rejects k larger than the sample") {
    std::vector<float> values{1.0f, 2.0f};
    CHECK_THROWS_AS(kmeans_1d(values, 3), InvalidInput);
    CHECK_THROWS_AS(kmeans_1d(values, 0), InvalidInput);
}

TEST_CASE("simplify_layer produces consistent positions, labels and model") {
    Rng rng(15);
    WeightMatrix w = WeightMatrix::zeros(784, 300);
    for (auto& v : w.values) v = float(rng.next_gaussian());
    PruneMask mask = prune_to_sparsity(w, 0.05);
    SimplifiedLayer layer = simplify_layer(w, mask, 9);

    CHECK(layer.nonzero_count() == 11760);
    CHECK(layer.labels.size() == layer.positions.size());
    for (uint32_t l : layer.labels) CHECK(l < layer.model.cluster_count());
    for (size_t p = 1; p < layer.positions.size(); ++p)
        CHECK(layer.positions[p] > layer.positions[p - 1]);
}

TEST_CASE("simplify_layer is exact when values already sit on k points") {
    WeightMatrix w = matrix_from({0.5f, 0, -1.0f, 0.5f, 2.0f, -1.0f}, 2, 3);
    PruneMask mask{2, 3, {1, 0, 1, 1, 1, 1}};
    SimplifiedLayer layer = simplify_layer(w, mask, 3);
    WeightMatrix dense = to_dense(layer);
    for (size_t i = 0; i < w.values.size(); ++i)
        CHECK(dense.values[i] == (mask.kept[i] ? w.values[i] : 0.0f));
}

TEST_CASE("simplify_layer round trip through the dense matrix") {
    Rng rng(16);
    WeightMatrix w = WeightMatrix::zeros(40, 25);
    for (auto& v : w.values) v = float(rng.next_gaussian());
    PruneMask mask = prune_to_sparsity(w, 0.2);
    SimplifiedLayer layer = simplify_layer(w, mask, 5);
    WeightMatrix dense = to_dense(layer);

    // Re-extract and compare against the original structures.
    std::vector<uint64_t> positions;
    std::vector<uint32_t> labels;
    for (uint64_t i = 0; i < dense.size(); ++i) {
        if (dense.values[i] == 0.0f) continue;
        positions.push_back(i);
        auto it = std::find(layer.model.centroids.begin(),
                            layer.model.centroids.end(), dense.values[i]);
        REQUIRE(it != layer.model.centroids.end());
        labels.push_back(uint32_t(it - layer.model.centroids.begin()));
    }
    CHECK(positions == layer.positions);
    CHECK(labels == layer.labels);
}

TEST_CASE("simplify_layer rejects degenerate masks") {
    WeightMatrix w = matrix_from({1.0f, 2.0f, 3.0f, 4.0f}, 2, 2);
    PruneMask none{2, 2, {0, 0, 0, 0}};
    CHECK_THROWS_AS(simplify_layer(w, none, 1), InvalidInput);

    PruneMask wrong{1, 4, {1, 1, 1, 1}};
    CHECK_THROWS_AS(simplify_layer(w, wrong, 1), InvalidInput);
}
