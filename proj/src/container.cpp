#include "weightless/container.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "weightless/entropy.hpp"
#include "weightless/rng.hpp"

namespace weightless {

uint64_t EncodedLayer::key_count() const {
    uint64_t n = 0;
    for (const auto& s : shards) n += s.key_count();
    return n;
}

uint64_t EncodedLayer::filter_bits() const {
    uint64_t bits = 0;
    for (const auto& s : shards) bits += s.payload_bits();
    return bits;
}

std::vector<KeyValueSet> shard_keys(std::span<const uint64_t> positions,
                                    std::span<const uint32_t> labels,
                                    uint32_t cluster_count, uint32_t num_shards) {
    if (num_shards == 0) throw InvalidInput("shard_keys: need at least one shard");
    if (positions.size() != labels.size())
        throw InvalidInput("shard_keys: positions/labels length mismatch");
    std::vector<KeyValueSet> shards(num_shards);
    for (auto& s : shards) s.value_count = cluster_count;
    for (size_t i = 0; i < positions.size(); ++i)
        shards[positions[i] % num_shards].entries.push_back(
            KeyValue{positions[i], labels[i]});
    return shards;
}

EncodedLayer encode_layer(const SimplifiedLayer& layer, const EncodeOptions& opts) {
    if (layer.positions.empty())
        throw InvalidInput("encode_layer: layer has no retained weights");
    const uint32_t k = layer.model.cluster_count();

    EncodedLayer enc;
    enc.rows = layer.rows;
    enc.cols = layer.cols;
    enc.cluster_count = k;
    enc.bits_per_cell = opts.bits_per_cell;
    enc.shard_seed_base = opts.seed;
    enc.centroids = layer.model;

    auto sets = shard_keys(layer.positions, layer.labels, k, opts.num_shards);
    enc.shards.resize(opts.num_shards, BloomierFilter::from_parts(
                                           3, opts.bits_per_cell, k, 0, 0,
                                           std::vector<uint32_t>(3, 0)));

    auto build = [&](uint32_t i) {
        FilterParams params;
        params.bits_per_cell = opts.bits_per_cell;
        params.table_multiplier = opts.table_multiplier;
        params.seed = opts.seed + i;
        params.max_retries = opts.max_retries;
        enc.shards[i] = BloomierFilter::construct(sets[i], params);
    };

    if (opts.jobs <= 1 || opts.num_shards == 1) {
        for (uint32_t i = 0; i < opts.num_shards; ++i) build(i);
    } else {
        std::vector<std::exception_ptr> errors(opts.num_shards);
        std::vector<std::thread> workers;
        const uint32_t jobs = std::min(opts.jobs, opts.num_shards);
        for (uint32_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&, w] {
                for (uint32_t i = w; i < opts.num_shards; i += jobs) {
                    try {
                        build(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : workers) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return enc;
}

WeightMatrix reconstruct(const EncodedLayer& enc) {
    WeightMatrix w = WeightMatrix::zeros(enc.rows, enc.cols);
    const uint64_t total = w.size();
    const uint32_t shards = uint32_t(enc.shards.size());
    for (uint64_t p = 0; p < total; ++p) {
        if (auto v = enc.shards[p % shards].query(p))
            w.values[p] = enc.centroids.centroids[*v];
    }
    return w;
}

uint64_t count_false_positives(const EncodedLayer& enc,
                               std::span<const uint64_t> positions) {
    const uint64_t total = uint64_t(enc.rows) * enc.cols;
    const uint32_t shards = uint32_t(enc.shards.size());
    uint64_t fp = 0;
    size_t next = 0;
    for (uint64_t p = 0; p < total; ++p) {
        if (next < positions.size() && positions[next] == p) {
            ++next;
            continue;
        }
        if (enc.shards[p % shards].query(p)) ++fp;
    }
    return fp;
}

FpEstimate estimate_false_positives(const EncodedLayer& enc,
                                    std::span<const uint64_t> positions,
                                    uint64_t sample_count, uint64_t seed) {
    if (sample_count == 0)
        throw InvalidInput("estimate_false_positives: empty sample");
    const uint64_t total = uint64_t(enc.rows) * enc.cols;
    const uint64_t zeros = total - positions.size();
    if (zeros == 0) return FpEstimate{0, 0, 0.0, 0.0};

    Rng rng(seed);
    const uint32_t shards = uint32_t(enc.shards.size());
    uint64_t hits = 0;
    for (uint64_t i = 0; i < sample_count; ++i) {
        uint64_t p;
        do {
            p = rng.next_below(total);
        } while (std::binary_search(positions.begin(), positions.end(), p));
        if (enc.shards[p % shards].query(p)) ++hits;
    }
    double rate = double(hits) / double(sample_count);
    return FpEstimate{sample_count, hits, rate, rate * double(zeros)};
}

// --- Size accounting -------------------------------------------------------

namespace {

uint64_t layer_metadata_bits(size_t name_len, size_t shard_count) {
    // name length + name + rows/cols/k/t/shards/seed/codec + per-shard n,m,len
    return 8ull * (2 + name_len + 4 + 4 + 2 + 1 + 1 + 8 + 1 + 12 * shard_count);
}

SizeReport report_common(uint64_t original_bits, uint64_t nnz,
                         const EncodedLayer& enc) {
    SizeReport r;
    r.original_bits = original_bits;
    r.simplified_nnz = nnz;
    r.filter_bits = enc.filter_bits();
    r.centroid_bits = 32ull * enc.centroids.centroids.size();
    r.metadata_bits = layer_metadata_bits(0, enc.shards.size());
    r.packed_bits = r.centroid_bits + r.metadata_bits;
    for (const auto& s : enc.shards) r.packed_bits += packed_cell_bits(s);
    r.compression_factor =
        double(original_bits) /
        double(r.filter_bits + r.centroid_bits + r.metadata_bits);
    r.packed_compression_factor = double(original_bits) / double(r.packed_bits);
    return r;
}

}  // namespace

uint64_t packed_cell_bits(const BloomierFilter& filter) {
    if (filter.bits_per_cell() > 15) return filter.payload_bits();
    auto hist = SymbolHistogram::from_symbols(filter.cells(),
                                              1ull << filter.bits_per_cell());
    return arithmetic_encode(filter.cells(), hist).bit_length();
}

SizeReport size_report(const SimplifiedLayer& layer, const EncodedLayer& enc,
                       const CsrLayer* csr) {
    SizeReport r = report_common(32ull * layer.rows * layer.cols,
                                 layer.nonzero_count(), enc);
    if (csr != nullptr) {
        r.csr_bits = csr_size_bits(*csr);
        r.csr_huffman_bits = csr_huffman_bits(*csr);
    }
    return r;
}

SizeReport size_report_from_encoded(const EncodedLayer& enc) {
    return report_common(32ull * enc.rows * enc.cols, enc.key_count(), enc);
}

// --- Experiments -------------------------------------------------------------

std::vector<TSweepPoint> sweep_t(const SimplifiedLayer& layer, uint32_t t_min,
                                 uint32_t t_max, const EncodeOptions& base) {
    if (t_min < 1 || t_min > t_max)
        throw InvalidInput("sweep_t: invalid t range");
    std::vector<TSweepPoint> points;
    for (uint32_t t = t_min; t <= t_max; ++t) {
        EncodeOptions opts = base;
        opts.bits_per_cell = t;
        EncodedLayer enc = encode_layer(layer, opts);
        SizeReport r = size_report(layer, enc);
        points.push_back(TSweepPoint{t, count_false_positives(enc, layer.positions),
                                     r.filter_bits, r.packed_bits});
    }
    return points;
}

std::vector<ScalingPoint> sparsity_scaling_experiment(
    uint32_t rows, uint32_t cols, std::span<const double> nnz_ratios,
    uint32_t cluster_count, uint32_t bits_per_cell, uint64_t seed) {
    WeightMatrix dense = make_gaussian_matrix(rows, cols, seed);
    std::vector<ScalingPoint> points;
    for (double ratio : nnz_ratios) {
        PruneMask mask = prune_to_sparsity(dense, ratio);
        SimplifiedLayer layer = simplify_layer(dense, mask, cluster_count);
        EncodeOptions opts;
        opts.bits_per_cell = bits_per_cell;
        opts.seed = seed;
        EncodedLayer enc = encode_layer(layer, opts);
        SizeReport r = size_report(layer, enc);

        // Give the baseline its best fixed width for each column separately.
        uint64_t best_csr = UINT64_MAX;
        uint64_t best_huff = UINT64_MAX;
        for (const auto& p : csr_index_bits_sweep(layer)) {
            best_csr = std::min(best_csr, p.csr_bits);
            best_huff = std::min(best_huff, p.huffman_bits);
        }
        points.push_back(ScalingPoint{ratio, layer.nonzero_count(), r.filter_bits,
                                      r.packed_bits, best_csr, best_huff});
    }
    return points;
}

// --- Synthetic inputs --------------------------------------------------------

WeightMatrix make_gaussian_matrix(uint32_t rows, uint32_t cols, uint64_t seed) {
    WeightMatrix w = WeightMatrix::zeros(rows, cols);
    Rng rng(seed);
    for (auto& v : w.values) v = float(rng.next_gaussian());
    return w;
}

SimplifiedLayer make_synthetic_layer(uint32_t rows, uint32_t cols,
                                     double nnz_ratio, uint32_t cluster_count,
                                     uint64_t seed) {
    const uint64_t total = uint64_t(rows) * cols;
    if (total == 0) throw InvalidInput("synthetic layer: empty shape");
    if (!(nnz_ratio > 0.0) || nnz_ratio > 1.0)
        throw InvalidInput("synthetic layer: nnz ratio must be in (0, 1]");
    if (cluster_count == 0)
        throw InvalidInput("synthetic layer: need at least one cluster");

    uint64_t target = std::min(
        uint64_t(std::ceil(nnz_ratio * double(total) - 1e-9)), total);

    SimplifiedLayer layer;
    layer.rows = rows;
    layer.cols = cols;
    layer.positions.reserve(target);
    layer.labels.reserve(target);

    Rng rng(seed);
    // Selection sampling: exact count, sorted output, single pass.
    uint64_t needed = target;
    for (uint64_t p = 0; p < total && needed > 0; ++p) {
        if (rng.next_double() * double(total - p) < double(needed)) {
            layer.positions.push_back(p);
            layer.labels.push_back(uint32_t(rng.next_below(cluster_count)));
            --needed;
        }
    }

    // Sorted distinct centroids, nonzero by construction.
    std::vector<float> centroids;
    while (centroids.size() < cluster_count) {
        float v = float(rng.next_gaussian() * 0.5);
        if (v != 0.0f &&
            std::find(centroids.begin(), centroids.end(), v) == centroids.end())
            centroids.push_back(v);
    }
    std::sort(centroids.begin(), centroids.end());
    layer.model.centroids = std::move(centroids);
    return layer;
}

// --- CRC32 (IEEE 802.3, reflected) ------------------------------------------

namespace {

std::array<uint32_t, 256> make_crc_table() {
    std::array<uint32_t, 256> table{};
    for (uint32_t i = 0; i < 256; ++i) {
        uint32_t c = i;
        for (int bit = 0; bit < 8; ++bit)
            c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        table[i] = c;
    }
    return table;
}

}  // namespace

uint32_t crc32_ieee(std::span<const uint8_t> bytes) {
    static const std::array<uint32_t, 256> table = make_crc_table();
    uint32_t crc = 0xFFFFFFFFu;
    for (uint8_t b : bytes) crc = table[(crc ^ b) & 0xFF] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

// --- Byte-level serialization -------------------------------------------------

namespace {

struct ByteWriter {
    std::vector<uint8_t> out;

    void u8(uint8_t v) { out.push_back(v); }
    void u16(uint16_t v) {
        out.push_back(uint8_t(v));
        out.push_back(uint8_t(v >> 8));
    }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(uint8_t(v >> (8 * i)));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(uint8_t(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }
    void bytes(std::span<const uint8_t> b) { out.insert(out.end(), b.begin(), b.end()); }
};

struct ByteReader {
    std::span<const uint8_t> data;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > data.size())
            throw CorruptData("container: truncated while reading");
    }
    uint8_t u8() {
        need(1);
        return data[pos++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = uint16_t(data[pos]) | uint16_t(data[pos + 1]) << 8;
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(data[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(data[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::span<const uint8_t> bytes(size_t n) {
        need(n);
        auto s = data.subspan(pos, n);
        pos += n;
        return s;
    }
};

std::vector<uint8_t> shard_payload(const BloomierFilter& filter, uint8_t codec) {
    if (codec == 0) {
        Bitstream bits;
        for (uint32_t c : filter.cells()) bits.append_bits(c, filter.bits_per_cell());
        return bits.bytes();
    }
    if (codec == 1) {
        if (filter.bits_per_cell() > 15)
            throw InvalidInput("pack: arithmetic codec supports at most 15 bits per cell");
        auto hist = SymbolHistogram::from_symbols(filter.cells(),
                                                  1ull << filter.bits_per_cell());
        std::vector<uint8_t> payload;
        append_histogram(payload, hist);
        Bitstream coded = arithmetic_encode(filter.cells(), hist);
        payload.insert(payload.end(), coded.bytes().begin(), coded.bytes().end());
        return payload;
    }
    throw InvalidInput("pack: unknown codec");
}

std::vector<uint32_t> decode_shard_payload(std::span<const uint8_t> payload,
                                           uint8_t codec, uint32_t cell_count,
                                           uint32_t bits_per_cell) {
    if (codec == 0) {
        const size_t expect = (uint64_t(cell_count) * bits_per_cell + 7) / 8;
        if (payload.size() != expect)
            throw CorruptData("container: raw shard payload length mismatch");
        Bitstream bits = Bitstream::from_bytes(
            std::vector<uint8_t>(payload.begin(), payload.end()),
            uint64_t(cell_count) * bits_per_cell);
        BitReader reader(bits);
        std::vector<uint32_t> cells(cell_count);
        for (auto& c : cells) c = uint32_t(reader.read_bits(bits_per_cell));
        return cells;
    }
    if (codec == 1) {
        size_t offset = 0;
        SymbolHistogram hist = read_histogram(payload, offset);
        if (hist.alphabet_size() != (1ull << bits_per_cell))
            throw CorruptData("container: histogram alphabet does not match cell width");
        std::vector<uint8_t> coded(payload.begin() + offset, payload.end());
        size_t coded_bits = coded.size() * 8;
        Bitstream stream = Bitstream::from_bytes(std::move(coded), coded_bits);
        return arithmetic_decode(stream, hist, cell_count);
    }
    throw CorruptData("container: unknown codec tag");
}

}  // namespace

std::vector<uint8_t> pack(std::span<const ContainerEntry> entries) {
    if (entries.size() > 65535)
        throw InvalidInput("pack: too many layers for a 16-bit count");
    ByteWriter w;
    w.u8('W');
    w.u8('T');
    w.u8('L');
    w.u8('S');
    w.u8(1);
    w.u16(uint16_t(entries.size()));

    for (const auto& entry : entries) {
        const EncodedLayer& layer = entry.layer;
        if (entry.name.size() > 65535)
            throw InvalidInput("pack: layer name too long");
        if (layer.centroids.centroids.size() > 65535)
            throw InvalidInput("pack: cluster count exceeds 16-bit field");
        if (layer.shards.empty() || layer.shards.size() > 255)
            throw InvalidInput("pack: shard count must be in [1, 255]");
        if (layer.bits_per_cell > 255)
            throw InvalidInput("pack: bits per cell exceeds 8-bit field");

        w.u16(uint16_t(entry.name.size()));
        w.bytes({reinterpret_cast<const uint8_t*>(entry.name.data()),
                 entry.name.size()});
        w.u32(layer.rows);
        w.u32(layer.cols);
        w.u16(uint16_t(layer.centroids.centroids.size()));
        w.u8(uint8_t(layer.bits_per_cell));
        w.u8(uint8_t(layer.shards.size()));
        w.u64(layer.shard_seed_base);
        w.u8(entry.codec);
        for (float c : layer.centroids.centroids) w.f32(c);
        for (const auto& shard : layer.shards) {
            std::vector<uint8_t> payload = shard_payload(shard, entry.codec);
            if (payload.size() > UINT32_MAX)
                throw InvalidInput("pack: shard payload exceeds 32-bit length");
            w.u32(shard.key_count());
            w.u32(shard.cell_count());
            w.u32(uint32_t(payload.size()));
            w.bytes(payload);
        }
    }
    w.u32(crc32_ieee(w.out));
    return std::move(w.out);
}

std::vector<ContainerEntry> unpack(std::span<const uint8_t> bytes) {
    if (bytes.size() < 11) throw CorruptData("container: file too short");

    // Verify the trailing CRC over everything before it, up front, so any
    // single corrupted byte is caught before structural parsing begins.
    uint32_t stored = 0;
    for (int i = 0; i < 4; ++i)
        stored |= uint32_t(bytes[bytes.size() - 4 + i]) << (8 * i);
    if (crc32_ieee(bytes.subspan(0, bytes.size() - 4)) != stored)
        throw CorruptData("container: CRC mismatch");

    ByteReader r{bytes.subspan(0, bytes.size() - 4)};
    if (r.u8() != 'W' || r.u8() != 'T' || r.u8() != 'L' || r.u8() != 'S')
        throw CorruptData("container: bad magic");
    if (r.u8() != 1) throw CorruptData("container: unsupported version");

    const uint16_t layer_count = r.u16();
    std::vector<ContainerEntry> entries;
    entries.reserve(layer_count);

    for (uint16_t li = 0; li < layer_count; ++li) {
        ContainerEntry entry;
        const uint16_t name_len = r.u16();
        auto name_bytes = r.bytes(name_len);
        entry.name.assign(name_bytes.begin(), name_bytes.end());

        EncodedLayer& layer = entry.layer;
        layer.rows = r.u32();
        layer.cols = r.u32();
        const uint16_t k = r.u16();
        layer.cluster_count = k;
        layer.bits_per_cell = r.u8();
        const uint8_t shard_count = r.u8();
        layer.shard_seed_base = r.u64();
        entry.codec = r.u8();
        if (layer.bits_per_cell < 1 || layer.bits_per_cell > 32)
            throw CorruptData("container: invalid cell width");
        if (shard_count == 0)
            throw CorruptData("container: zero shard count");

        layer.centroids.centroids.resize(k);
        for (auto& c : layer.centroids.centroids) c = r.f32();

        for (uint8_t si = 0; si < shard_count; ++si) {
            uint32_t n = r.u32();
            uint32_t m = r.u32();
            uint32_t len = r.u32();
            auto payload = r.bytes(len);
            std::vector<uint32_t> cells =
                decode_shard_payload(payload, entry.codec, m, layer.bits_per_cell);
            layer.shards.push_back(BloomierFilter::from_parts(
                m, layer.bits_per_cell, k, layer.shard_seed_base + si, n,
                std::move(cells)));
        }
        entries.push_back(std::move(entry));
    }
    if (r.pos != r.data.size())
        throw CorruptData("container: trailing bytes after last layer");
    return entries;
}

// --- Files ---------------------------------------------------------------------

void write_container(const std::string& path, std::span<const ContainerEntry> entries) {
    std::vector<uint8_t> bytes = pack(entries);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              std::streamsize(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

std::vector<ContainerEntry> read_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return unpack(bytes);
}

void write_weight_matrix(const std::string& path, const WeightMatrix& w) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    ByteWriter header;
    header.u8('W');
    header.u8('M');
    header.u8('A');
    header.u8('T');
    header.u8(1);
    header.u32(w.rows);
    header.u32(w.cols);
    out.write(reinterpret_cast<const char*>(header.out.data()),
              std::streamsize(header.out.size()));

    // Row-major 32-bit little-endian reals, buffered in chunks.
    std::vector<uint8_t> buf;
    buf.reserve(1 << 16);
    for (size_t i = 0; i < w.values.size(); ++i) {
        uint32_t bits = std::bit_cast<uint32_t>(w.values[i]);
        for (int b = 0; b < 4; ++b) buf.push_back(uint8_t(bits >> (8 * b)));
        if (buf.size() >= (1 << 16)) {
            out.write(reinterpret_cast<const char*>(buf.data()),
                      std::streamsize(buf.size()));
            buf.clear();
        }
    }
    out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
    if (!out) throw IoError("write failed: " + path);
}

WeightMatrix read_weight_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::array<uint8_t, 13> header;
    if (!in.read(reinterpret_cast<char*>(header.data()), header.size()))
        throw CorruptData("weight matrix: truncated header");
    if (header[0] != 'W' || header[1] != 'M' || header[2] != 'A' || header[3] != 'T')
        throw CorruptData("weight matrix: bad magic");
    if (header[4] != 1) throw CorruptData("weight matrix: unsupported version");

    auto le32 = [&](size_t off) {
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(header[off + i]) << (8 * i);
        return v;
    };
    WeightMatrix w;
    w.rows = le32(5);
    w.cols = le32(9);
    const uint64_t count = uint64_t(w.rows) * w.cols;
    w.values.resize(count);

    std::vector<uint8_t> buf(4 << 16);
    uint64_t read_values = 0;
    while (read_values < count) {
        uint64_t want = std::min<uint64_t>(count - read_values, buf.size() / 4);
        if (!in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(want * 4)))
            throw CorruptData("weight matrix: truncated payload");
        for (uint64_t i = 0; i < want; ++i) {
            uint32_t bits = 0;
            for (int b = 0; b < 4; ++b)
                bits |= uint32_t(buf[i * 4 + b]) << (8 * b);
            w.values[read_values + i] = std::bit_cast<float>(bits);
        }
        read_values += want;
    }
    return w;
}

WeightMatrix read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<float> values;
    uint32_t rows = 0;
    size_t cols = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        size_t row_cols = 0;
        const char* p = line.c_str();
        for (;;) {
            char* end = nullptr;
            double v = std::strtod(p, &end);
            if (end == p) throw CorruptData("csv: malformed number in " + path);
            values.push_back(float(v));
            ++row_cols;
            while (*end == ' ' || *end == '\t') ++end;
            if (*end == ',') {
                p = end + 1;
            } else if (*end == '\0' || *end == '\r') {
                break;
            } else {
                throw CorruptData("csv: unexpected character in " + path);
            }
        }
        if (rows == 0)
            cols = row_cols;
        else if (row_cols != cols)
            throw CorruptData("csv: ragged rows in " + path);
        ++rows;
    }
    if (rows == 0) throw InvalidInput("csv: empty file " + path);
    return WeightMatrix{rows, uint32_t(cols), std::move(values)};
}

}  // namespace weightless
