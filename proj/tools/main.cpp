// Command-line front end for the weightless library: one subcommand per
// pipeline action or experiment. All randomness is controlled by --seed and
// identical invocations produce identical bytes.

#include <cinttypes>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "weightless/container.hpp"
#include "weightless/entropy.hpp"
#include "weightless/toynet.hpp"

using namespace weightless;

namespace {

// --c accepts either a decimal ("1.25") or an explicit fraction ("5/4") and
// is kept exact so table sizes stay reproducible.
Ratio parse_ratio(const std::string& text) {
    uint64_t num = 0, den = 1;
    size_t slash = text.find('/');
    if (slash != std::string::npos) {
        num = std::stoull(text.substr(0, slash));
        den = std::stoull(text.substr(slash + 1));
    } else {
        size_t dot = text.find('.');
        if (dot == std::string::npos) {
            num = std::stoull(text);
        } else {
            std::string digits = text.substr(0, dot) + text.substr(dot + 1);
            num = std::stoull(digits);
            for (size_t i = 0; i < text.size() - dot - 1; ++i) den *= 10;
        }
    }
    if (num == 0 || den == 0 || num <= den)
        throw CLI::ValidationError("--c", "table multiplier must exceed 1");
    for (uint64_t d = 2; d <= den; ++d)
        while (num % d == 0 && den % d == 0) num /= d, den /= d;
    if (num > UINT32_MAX || den > UINT32_MAX)
        throw CLI::ValidationError("--c", "ratio out of range");
    return Ratio{uint32_t(num), uint32_t(den)};
}

std::vector<double> parse_ratio_list(const std::string& text) {
    std::vector<double> out;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        out.push_back(std::stod(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

FILE* open_output(const std::string& path) {
    if (path.empty() || path == "-") return stdout;
    FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open for writing: " + path);
    return f;
}

void close_output(FILE* f) {
    if (f != stdout) std::fclose(f);
}

void print_report(const SizeReport& r) {
    std::printf("original_bits            %" PRIu64 "  (%.2f KB)\n", r.original_bits,
                double(r.original_bits) / 8192.0);
    std::printf("simplified_nnz           %" PRIu64 "\n", r.simplified_nnz);
    std::printf("filter_bits              %" PRIu64 "  (%.3f KB)\n", r.filter_bits,
                double(r.filter_bits) / 8192.0);
    std::printf("centroid_bits            %" PRIu64 "\n", r.centroid_bits);
    std::printf("metadata_bits            %" PRIu64 "\n", r.metadata_bits);
    std::printf("packed_bits              %" PRIu64 "  (%.3f KB)\n", r.packed_bits,
                double(r.packed_bits) / 8192.0);
    if (r.csr_bits > 0) {
        std::printf("csr_bits                 %" PRIu64 "  (%.3f KB)\n", r.csr_bits,
                    double(r.csr_bits) / 8192.0);
        std::printf("csr_huffman_bits         %" PRIu64 "  (%.3f KB)\n",
                    r.csr_huffman_bits, double(r.csr_huffman_bits) / 8192.0);
    }
    std::printf("compression_factor       %.2fx\n", r.compression_factor);
    std::printf("packed_compression_factor %.2fx\n", r.packed_compression_factor);
}

struct CommonFlags {
    std::string in, out;
    double nnz = 0.05;
    uint32_t k = 9;
    uint32_t t = 8;
    std::string c = "1.25";
    uint32_t shards = 1;
    uint64_t seed = 0;
    uint32_t jobs = 1;
};

SimplifiedLayer load_and_simplify(const CommonFlags& f) {
    WeightMatrix w = read_weight_matrix(f.in);
    PruneMask mask = prune_to_sparsity(w, f.nnz);
    return simplify_layer(w, mask, f.k);
}

EncodeOptions encode_options(const CommonFlags& f) {
    EncodeOptions opts;
    opts.bits_per_cell = f.t;
    opts.table_multiplier = parse_ratio(f.c);
    opts.num_shards = f.shards;
    opts.seed = f.seed;
    opts.jobs = f.jobs;
    return opts;
}

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_out) {
    cmd->add_option("--in", f.in, "input file")->required();
    if (needs_out) cmd->add_option("--out", f.out, "output file")->required();
    cmd->add_option("--nnz", f.nnz, "target nonzero ratio (0, 1]");
    cmd->add_option("--k", f.k, "cluster count");
    cmd->add_option("--t", f.t, "bits per filter cell");
    cmd->add_option("--c", f.c, "table-size multiplier (default 1.25)");
    cmd->add_option("--shards", f.shards, "number of filter shards");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--jobs", f.jobs, "parallel shard construction");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bloomier-filter compression for sparse clustered weight matrices"};
    app.require_subcommand(1);

    // --- compress -----------------------------------------------------------
    CommonFlags cf;
    std::string layer_name;
    uint32_t codec = 1;
    auto* compress = app.add_subcommand(
        "compress", "prune + cluster + Bloomier-encode a weight matrix");
    add_common(compress, cf, true);
    compress->add_option("--name", layer_name, "layer name stored in the container");
    compress->add_option("--codec", codec, "0 = raw cells, 1 = arithmetic")
        ->check(CLI::Range(0u, 1u));

    // --- reconstruct ----------------------------------------------------------
    std::string rin, rout;
    uint32_t rlayer = 0;
    auto* reconstruct_cmd =
        app.add_subcommand("reconstruct", "rebuild the approximate matrix W'");
    reconstruct_cmd->add_option("--in", rin)->required();
    reconstruct_cmd->add_option("--out", rout)->required();
    reconstruct_cmd->add_option("--layer", rlayer, "layer index (default 0)");

    // --- stats ---------------------------------------------------------------
    std::string sin;
    auto* stats = app.add_subcommand("stats", "size report for a packed container");
    stats->add_option("--in", sin)->required();

    // --- sweep -----------------------------------------------------------------
    CommonFlags swf;
    uint32_t t_min = 4, t_max = 12;
    auto* sweep = app.add_subcommand(
        "sweep", "encode at every t in a range and count false positives");
    add_common(sweep, swf, false);
    sweep->add_option("--out", swf.out, "CSV output (default stdout)");
    sweep->add_option("--t-min", t_min);
    sweep->add_option("--t-max", t_max);

    // --- scale-exp ----------------------------------------------------------------
    uint32_t se_rows = 800, se_cols = 500;
    std::string se_list = "0.01,0.02,0.03,0.04,0.05";
    CommonFlags sef;
    auto* scale = app.add_subcommand(
        "scale-exp", "sparsity scaling: packed filter vs CSR+Huffman");
    scale->add_option("--rows", se_rows);
    scale->add_option("--cols", se_cols);
    scale->add_option("--nnz-list", se_list, "comma-separated nonzero ratios");
    scale->add_option("--k", sef.k);
    scale->add_option("--t", sef.t);
    scale->add_option("--seed", sef.seed);
    scale->add_option("--out", sef.out, "CSV output (default stdout)");

    // --- csr -------------------------------------------------------------------
    CommonFlags csf;
    int32_t index_bits = -1;
    auto* csr_cmd = app.add_subcommand(
        "csr", "CSR baseline sizes (sweep over index widths by default)");
    csr_cmd->add_option("--in", csf.in)->required();
    csr_cmd->add_option("--nnz", csf.nnz);
    csr_cmd->add_option("--k", csf.k);
    csr_cmd->add_option("--index-bits", index_bits, "fixed width 1..16");
    csr_cmd->add_option("--out", csf.out, "CSV output (default stdout)");

    // --- pack-compare ------------------------------------------------------------
    CommonFlags pcf;
    auto* pack_compare = app.add_subcommand(
        "pack-compare", "full size report: packed filter vs CSR+Huffman");
    add_common(pack_compare, pcf, false);

    // --- toy-train ------------------------------------------------------------------
    uint64_t tt_seed = 1;
    uint32_t tt_epochs = 14, tt_classes = 10, tt_dim = 64, tt_samples = 10000;
    double tt_lr = 0.05;
    std::string tt_init, tt_mnist;
    auto* toy_train =
        app.add_subcommand("toy-train", "train the reference dense classifier");
    toy_train->add_option("--seed", tt_seed);
    toy_train->add_option("--epochs", tt_epochs);
    toy_train->add_option("--lr", tt_lr);
    toy_train->add_option("--classes", tt_classes);
    toy_train->add_option("--dim", tt_dim);
    toy_train->add_option("--samples", tt_samples);
    toy_train->add_option("--init", tt_init,
                          "load initial weights from <prefix><i>.wmat");
    toy_train->add_option("--mnist", tt_mnist,
                          "directory with the four IDX files instead of the "
                          "synthetic task");

    // --- toy-pipeline ------------------------------------------------------------------
    uint64_t tp_seed = 1;
    uint32_t tp_epochs = 14, tp_retrain = 10, tp_layer = 0;
    double tp_lr = 0.05, tp_nnz = 0.25;
    uint32_t tp_k = 9, tp_t = 5;
    std::string tp_out;
    auto* toy_pipeline = app.add_subcommand(
        "toy-pipeline",
        "prune/cluster/encode one layer, freeze it, retrain the rest");
    toy_pipeline->add_option("--seed", tp_seed);
    toy_pipeline->add_option("--epochs", tp_epochs, "initial training epochs");
    toy_pipeline->add_option("--retrain-epochs", tp_retrain);
    toy_pipeline->add_option("--lr", tp_lr);
    toy_pipeline->add_option("--layer", tp_layer, "layer to encode");
    toy_pipeline->add_option("--nnz", tp_nnz);
    toy_pipeline->add_option("--k", tp_k);
    toy_pipeline->add_option("--t", tp_t);
    toy_pipeline->add_option("--out", tp_out, "accuracy trace CSV (default stdout)");

    // --- import-csv ------------------------------------------------------------------
    std::string icin, icout;
    auto* import_csv =
        app.add_subcommand("import-csv", "convert a CSV matrix to WMAT");
    import_csv->add_option("--in", icin)->required();
    import_csv->add_option("--out", icout)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*compress) {
            SimplifiedLayer layer = load_and_simplify(cf);
            EncodedLayer enc = encode_layer(layer, encode_options(cf));
            if (codec == 1 && cf.t > 15) {
                std::fprintf(stderr,
                             "note: cells wider than 15 bits store raw (codec 0)\n");
                codec = 0;
            }
            ContainerEntry entry{layer_name, uint8_t(codec), enc};
            write_container(cf.out, {&entry, 1});
            SizeReport r = size_report(layer, enc);
            std::printf("%s: %u x %u, nnz %" PRIu64 ", k %u, t %u, %zu shard(s)\n",
                        cf.out.c_str(), enc.rows, enc.cols, r.simplified_nnz, cf.k,
                        cf.t, enc.shards.size());
            print_report(r);
        } else if (*reconstruct_cmd) {
            auto entries = read_container(rin);
            if (rlayer >= entries.size())
                throw InvalidInput("layer index out of range");
            write_weight_matrix(rout, reconstruct(entries[rlayer].layer));
            std::printf("wrote %s (layer %u of %s)\n", rout.c_str(), rlayer,
                        rin.c_str());
        } else if (*stats) {
            auto entries = read_container(sin);
            std::printf("%s: %zu layer(s)\n", sin.c_str(), entries.size());
            for (size_t i = 0; i < entries.size(); ++i) {
                const auto& e = entries[i];
                std::printf("\nlayer %zu \"%s\": %u x %u, k %u, t %u, %zu shard(s), "
                            "codec %u\n",
                            i, e.name.c_str(), e.layer.rows, e.layer.cols,
                            e.layer.cluster_count, e.layer.bits_per_cell,
                            e.layer.shards.size(), e.codec);
                print_report(size_report_from_encoded(e.layer));
            }
        } else if (*sweep) {
            SimplifiedLayer layer = load_and_simplify(swf);
            auto points = sweep_t(layer, t_min, t_max, encode_options(swf));
            FILE* out = open_output(swf.out);
            std::fprintf(out, "t,fp_count,filter_bits,packed_bits\n");
            for (const auto& p : points)
                std::fprintf(out, "%u,%" PRIu64 ",%" PRIu64 ",%" PRIu64 "\n",
                             p.bits_per_cell, p.fp_count, p.filter_bits,
                             p.packed_bits);
            close_output(out);
        } else if (*scale) {
            auto ratios = parse_ratio_list(se_list);
            auto points = sparsity_scaling_experiment(se_rows, se_cols, ratios,
                                                      sef.k, sef.t, sef.seed);
            FILE* out = open_output(sef.out);
            std::fprintf(out,
                         "nnz_ratio,nnz,filter_bits,weightless_packed_bits,"
                         "csr_bits,csr_huffman_bits\n");
            for (const auto& p : points)
                std::fprintf(out,
                             "%.6f,%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%" PRIu64
                             ",%" PRIu64 "\n",
                             p.nnz_ratio, p.nnz, p.filter_bits,
                             p.weightless_packed_bits, p.csr_bits,
                             p.csr_huffman_bits);
            close_output(out);
        } else if (*csr_cmd) {
            SimplifiedLayer layer = load_and_simplify(csf);
            FILE* out = open_output(csf.out);
            if (index_bits > 0) {
                CsrLayer enc = csr_encode(layer, uint32_t(index_bits));
                std::fprintf(out, "index_bits,csr_bits,csr_huffman_bits\n");
                std::fprintf(out, "%d,%" PRIu64 ",%" PRIu64 "\n", index_bits,
                             csr_size_bits(enc), csr_huffman_bits(enc));
            } else {
                std::fprintf(out, "index_bits,csr_bits,csr_huffman_bits\n");
                for (const auto& p : csr_index_bits_sweep(layer))
                    std::fprintf(out, "%u,%" PRIu64 ",%" PRIu64 "\n", p.index_bits,
                                 p.csr_bits, p.huffman_bits);
                std::fprintf(out, "# best index_bits by csr_bits: %u\n",
                             csr_best_index_bits(layer));
            }
            close_output(out);
        } else if (*pack_compare) {
            SimplifiedLayer layer = load_and_simplify(pcf);
            EncodedLayer enc = encode_layer(layer, encode_options(pcf));
            CsrLayer best_csr = csr_encode(layer, csr_best_index_bits(layer));
            SizeReport r = size_report(layer, enc, &best_csr);
            print_report(r);
            std::printf("csr index_bits used     %u\n", best_csr.index_bits);
        } else if (*toy_train) {
            Dataset data;
            if (!tt_mnist.empty()) {
                data = load_idx_dataset(tt_mnist + "/train-images-idx3-ubyte",
                                        tt_mnist + "/train-labels-idx1-ubyte",
                                        tt_mnist + "/t10k-images-idx3-ubyte",
                                        tt_mnist + "/t10k-labels-idx1-ubyte");
            } else {
                data = make_synthetic_dataset(tt_seed, tt_classes, tt_dim,
                                              tt_samples);
            }
            std::vector<uint32_t> dims{data.feature_dim, 300, 100, data.class_count};
            ToyNet net = ToyNet::create(dims, tt_seed * 7 + 1);
            if (!tt_init.empty()) {
                for (size_t i = 0; i < net.layers.size(); ++i) {
                    std::string path = tt_init + std::to_string(i) + ".wmat";
                    FILE* probe = std::fopen(path.c_str(), "rb");
                    if (!probe) continue;
                    std::fclose(probe);
                    net.set_layer_weights(i, read_weight_matrix(path));
                    std::printf("loaded %s\n", path.c_str());
                }
            }
            TrainOptions opts;
            opts.epochs = tt_epochs;
            opts.lr = tt_lr;
            opts.seed = tt_seed * 13 + 2;
            TrainStats stats_out = train(net, data, opts);
            std::printf("epoch_loss");
            for (double l : stats_out.epoch_loss) std::printf(",%.4f", l);
            std::printf("\ntrain_accuracy %.2f%%\ntest_accuracy %.2f%%\n",
                        evaluate_accuracy(net, data, false),
                        evaluate_accuracy(net, data, true));
        } else if (*toy_pipeline) {
            Dataset data = make_synthetic_dataset(tp_seed, 10, 64, 10000);
            std::vector<uint32_t> dims{data.feature_dim, 300, 100, data.class_count};
            ToyNet net = ToyNet::create(dims, tp_seed * 7 + 1);
            TrainOptions warmup;
            warmup.epochs = tp_epochs;
            warmup.lr = tp_lr;
            warmup.seed = tp_seed * 13 + 2;
            train(net, data, warmup);

            std::vector<std::optional<LayerEncodeSpec>> specs(net.layers.size());
            if (tp_layer >= net.layers.size())
                throw InvalidInput("--layer out of range");
            LayerEncodeSpec spec;
            spec.nnz_ratio = tp_nnz;
            spec.cluster_count = tp_k;
            spec.bits_per_cell = tp_t;
            specs[tp_layer] = spec;
            PipelineOptions popts;
            popts.retrain_epochs = tp_retrain;
            popts.lr = tp_lr;
            popts.seed = tp_seed;
            PipelineResult result = weightless_pipeline(net, data, specs, popts);

            if (tp_out.empty()) {
                std::printf("stage,layer,accuracy\n");
                for (const auto& row : result.trace)
                    std::printf("%s,%u,%.4f\n", row.stage.c_str(), row.layer,
                                row.accuracy_pct);
            } else {
                write_trace_csv(tp_out, result.trace);
                std::printf("wrote %s\n", tp_out.c_str());
            }
        } else if (*import_csv) {
            write_weight_matrix(icout, read_csv_matrix(icin));
            std::printf("wrote %s\n", icout.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
