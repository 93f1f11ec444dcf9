#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "upw/attention.hpp"
#include "upw/checkpoint.hpp"
#include "upw/diagnostics.hpp"
#include "upw/error.hpp"
#include "upw/image.hpp"
#include "upw/mixed_format.hpp"
#include "upw/pix_tokenizer.hpp"
#include "upw/sampler.hpp"
#include "upw/trainer.hpp"
#include "upw/unified_vocab.hpp"
#include "upw/window_partitioner.hpp"

namespace upw::cli {
namespace {

namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument:
        case ErrorKind::Config: return kUsage;
        case ErrorKind::Numerical: return kNumerical;
        default: return kData;
    }
}

FoldingFactor parse_factor(const std::string& text) {
    int value = 0;
    try {
        std::size_t used = 0;
        value = std::stoi(text, &used);
        if (used != text.size()) value = 0;
    } catch (const std::exception&) {
        value = 0;
    }
    if (value == 0) throw Error(ErrorKind::InvalidArgument, "invalid folding factor '" + text + "'; valid factors are {2, 4, 8, 16, 32}");
    return FoldingFactor(value);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------- fold-viz

struct FoldVizArgs {
    std::string factor;
    fs::path in;
    fs::path out;
};

int fold_viz(const FoldVizArgs& a, std::ostream& out) {
    const RgbImage img = read_ppm(a.in);
    std::vector<std::pair<FoldingFactor, fs::path>> jobs;
    if (a.factor == "all") {
        for (const int f : FoldingFactor::kAllowed) {
            fs::path p = a.out;
            p.replace_filename(a.out.stem().string() + "_f" + std::to_string(f) + a.out.extension().string());
            jobs.emplace_back(FoldingFactor(f), p);
        }
    } else {
        jobs.emplace_back(parse_factor(a.factor), a.out);
    }
    for (const auto& [f, path] : jobs) {
        write_ppm(path, unfold_image(fold_image(img, f)));
        out << "factor " << f.value() << " (" << vocab_size(f) << " pix tokens) -> " << path.string() << '\n';
    }
    return kOk;
}

// ---------------------------------------------------------------- tokenize

struct TokenizeArgs {
    std::string factor;
    std::size_t window = 16;
    std::size_t sub = 0;
    fs::path in;
    fs::path out;
};

int tokenize(const TokenizeArgs& a, std::ostream& out) {
    const FoldingFactor f = parse_factor(a.factor);
    if (a.window == 0) throw Error(ErrorKind::InvalidArgument, "--window must be at least 1");
    if (a.sub != 0 && a.window % a.sub != 0) {
        throw Error(ErrorKind::InvalidArgument, "--sub " + std::to_string(a.sub) + " does not divide --window " +
                                                    std::to_string(a.window));
    }
    const FoldedImage folded = fold_image(read_ppm(a.in), f);
    const PaddedImage padded = pad_image(folded, make_pad_spec(a.window, f));
    const WindowGrid grid = partition(padded, a.window);

    nlohmann::json windows = nlohmann::json::array();
    for (const auto& w : grid.windows) {
        if (a.sub == 0) {
            windows.push_back(w);
        } else {
            nlohmann::json flat = nlohmann::json::array();
            for (const auto& s : sub_partition(w, a.window, a.sub)) {
                for (const std::uint32_t t : s) flat.push_back(t);
            }
            windows.push_back(std::move(flat));
        }
    }
    nlohmann::json doc{
        {"format", "upw-tokens"},
        {"version", 1},
        {"width", folded.width},
        {"height", folded.height},
        {"padded_width", padded.image.width},
        {"padded_height", padded.image.height},
        {"factor", f.value()},
        {"pix_vocab_size", vocab_size(f)},
        {"pad_token_id", vocab_size(f)},
        {"window_size", a.window},
        {"sub_size", a.sub == 0 ? nlohmann::json(nullptr) : nlohmann::json(a.sub)},
        {"windows_x", grid.windows_x},
        {"windows_y", grid.windows_y},
        {"window_order", "row-major"},
        {"token_order", a.sub == 0 ? "row-major" : "sub-window-major, row-major within each sub-window"},
        {"windows", std::move(windows)},
    };
    std::ofstream file(a.out);
    if (!file) throw Error(ErrorKind::Io, "cannot open " + a.out.string() + " for writing");
    file << doc.dump() << '\n';
    out << grid.window_count() << " windows of " << grid.window_len() << " tokens -> " << a.out.string() << '\n';
    return kOk;
}

// ---------------------------------------------------------------- inspect

int inspect_vocab(const std::string& factor, std::ostream& out) {
    const UnifiedVocab v(parse_factor(factor));
    out << "factor " << v.factor().value() << ": " << v.pix_count() << " pix tokens, " << v.total()
        << " unified ids\n";
    char line[96];
    std::snprintf(line, sizeof line, "%-10s %10s %10s %10s\n", "range", "first", "last", "count");
    out << line;
    auto row = [&](const char* name, std::uint32_t first, std::uint32_t count) {
        std::snprintf(line, sizeof line, "%-10s %10u %10u %10u\n", name, first, first + count - 1, count);
        out << line;
    };
    row("word", 0, UnifiedVocab::kWordCount);
    row("pix", v.pix_begin(), v.pix_count());
    row("pad_pix", v.pad_pix(), 1);
    row("bos", v.bos(), 1);
    row("eos", v.eos(), 1);
    row("img_start", v.img_start(), 1);
    row("img_end", v.img_end(), 1);
    return kOk;
}

int inspect_mask(std::size_t window, std::size_t sub, std::size_t condition, std::ostream& out) {
    if (window == 0) throw Error(ErrorKind::InvalidArgument, "--window must be at least 1");
    const std::size_t len = window * window;
    const AttentionMask mask =
        local_window_mask(len, condition, sub == 0 ? std::nullopt : std::optional<std::size_t>(sub));
    out << "local window mask: " << mask.rows << " queries x " << mask.cols << " keys (" << condition
        << " condition column" << (condition == 1 ? "" : "s") << ")\n";
    for (std::size_t i = 0; i < mask.rows; ++i) {
        for (std::size_t j = 0; j < mask.cols; ++j) {
            if (j == condition && condition != 0) out << "| ";
            out << (mask(i, j) ? '1' : '.') << (j + 1 < mask.cols ? " " : "");
        }
        out << '\n';
    }
    return kOk;
}

int inspect_mixed(const fs::path& path, std::ostream& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    MixedReader reader(in);
    out << path.string() << ": " << reader.declared_count() << " records\n";
    char line[128];
    std::snprintf(line, sizeof line, "%6s %8s %12s  %s\n", "index", "kind", "offset", "details");
    out << line;
    std::size_t index = 0;
    for (;;) {
        const std::uint64_t offset = reader.offset();
        auto rec = reader.next();
        if (!rec) break;
        std::string details;
        const char* kind = "text";
        if (const auto* text = std::get_if<TextRecord>(&*rec)) {
            details = std::to_string(text->utf8.size()) + " bytes";
        } else {
            const RgbImage& img = std::get<ImageRecord>(*rec).image;
            kind = "image";
            details = std::to_string(img.width) + "x" + std::to_string(img.height);
        }
        std::snprintf(line, sizeof line, "%6zu %8s %12llu  %s\n", index++, kind,
                      static_cast<unsigned long long>(offset), details.c_str());
        out << line;
    }
    return kOk;
}

// ---------------------------------------------------------------- pack

int pack(const std::vector<std::pair<bool, std::string>>& inputs, const fs::path& out_path, std::ostream& out) {
    std::vector<MixedRecord> records;
    for (const auto& [is_text, path] : inputs) {
        if (is_text) {
            records.emplace_back(TextRecord{read_file(path)});
        } else {
            records.emplace_back(ImageRecord{read_ppm(fs::path(path))});
        }
    }
    write_mixed(out_path, records);
    out << records.size() << " records -> " << out_path.string() << '\n';
    return kOk;
}

// ---------------------------------------------------------------- train / sample

std::vector<Sequence> load_training_data(const fs::path& data, const TrainConfig& tc) {
    std::vector<fs::path> files;
    if (fs::is_directory(data)) {
        for (const auto& entry : fs::directory_iterator(data)) {
            const auto ext = entry.path().extension();
            if (entry.is_regular_file() && (ext == ".ppm" || ext == ".pgm" || ext == ".upwmix")) {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
    } else if (fs::exists(data)) {
        files.push_back(data);
    } else {
        throw Error(ErrorKind::Io, "training data not found: " + data.string());
    }

    const ModelConfig& mc = tc.model;
    auto grid_of = [&](const RgbImage& img) { return to_window_grid(fold_image(img, mc.factor()), mc.window_size); };
    std::vector<Sequence> sequences;
    std::vector<RgbImage> images;
    for (const fs::path& file : files) {
        if (file.extension() != ".upwmix") {
            images.push_back(read_ppm(file));
            continue;
        }
        const std::vector<MixedRecord> records = read_mixed(file);
        if (tc.objective == "images") {
            for (const MixedRecord& rec : records) {
                if (const auto* img = std::get_if<ImageRecord>(&rec)) images.push_back(img->image);
            }
        } else {
            std::vector<Segment> segments;
            for (const MixedRecord& rec : records) {
                if (const auto* text = std::get_if<TextRecord>(&rec)) {
                    segments.emplace_back(text->utf8);
                } else {
                    segments.emplace_back(grid_of(std::get<ImageRecord>(rec).image));
                }
            }
            Sequence seq = mixed_sequence(segments, mc.factor());
            if (seq.size() > mc.global_context()) {
                throw Error(ErrorKind::Config, file.string() + " needs " + std::to_string(seq.size()) +
                                                   " global positions; raise max_seq_len");
            }
            if (!seq.items.empty()) sequences.push_back(std::move(seq));
        }
    }
    for (Sequence& seq : image_sequences(images, mc)) sequences.push_back(std::move(seq));
    if (sequences.empty()) throw Error(ErrorKind::Format, "no usable training data in " + data.string());
    return sequences;
}

int train(const fs::path& config_path, const fs::path& data, const fs::path& out_dir, std::ostream& out) {
    KeyValues kv;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw Error(ErrorKind::Io, "cannot open " + config_path.string());
        kv = parse_key_values(in);
    }
    TrainConfig tc = TrainConfig::from_key_values(std::move(kv));
    tc.out_dir = out_dir;
    const std::vector<Sequence> sequences = load_training_data(data, tc);
    const TrainResult result = train_sequences(sequences, tc);
    char line[160];
    std::snprintf(line, sizeof line, "trained %zu steps on %zu sequences: loss %.6f -> %.6f\n", tc.steps,
                  sequences.size(), result.curve.front().loss, result.curve.back().loss);
    out << line << "wrote " << (out_dir / "loss.csv").string() << " and " << (out_dir / "model.ckpt").string()
        << '\n';
    return kOk;
}

int sample(const fs::path& ckpt, std::uint64_t seed, double temperature, const fs::path& out_path, std::ostream& out) {
    Model model = load_checkpoint(ckpt);
    const FoldedImage folded = sample_image(model, SampleOptions{temperature, seed});
    write_ppm(out_path, unfold_image(folded));
    out << "sampled " << folded.width << "x" << folded.height << " image -> " << out_path.string() << '\n';
    return kOk;
}

int gradcheck(double eps, std::size_t coords, std::uint64_t seed, std::ostream& out) {
    GradCheckOptions options;
    options.eps = eps;
    options.max_coords_per_param = coords;
    options.seed = seed;
    bool ok = true;
    char line[192];
    for (const NamedGradCheck& c : standard_grad_checks(options, seed)) {
        std::snprintf(line, sizeof line, "%-16s max_rel_error %.3e  tol %.0e  %s  (worst %s[%zu], %zu coords)\n",
                      c.name.c_str(), c.report.max_rel_error, c.tolerance, c.passed() ? "PASS" : "FAIL",
                      c.report.worst_param.c_str(), c.report.worst_index, c.report.checked);
        out << line;
        ok = ok && c.passed();
    }
    return ok ? kOk : kNumerical;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"upw: pix-token / word-token modeling toolkit", "upw"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical failure.");

    FoldVizArgs fv;
    auto* fold_cmd = app.add_subcommand("fold-viz", "Fold an image's colors and write the reconstruction");
    fold_cmd->add_option("--factor", fv.factor, "Folding factor: 2, 4, 8, 16, 32 or 'all'")->required();
    fold_cmd->add_option("--in", fv.in, "Input PPM (P6) or PGM (P5)")->required();
    fold_cmd->add_option("--out", fv.out, "Output PPM; with 'all', _f<F> is appended to the stem")->required();

    TokenizeArgs tk;
    auto* tok_cmd = app.add_subcommand("tokenize", "Dump the window token sequences of an image as JSON");
    tok_cmd->add_option("--factor", tk.factor, "Folding factor (2, 4, 8, 16, 32)")->required();
    tok_cmd->add_option("--window", tk.window, "Local window size in pixels")->required();
    tok_cmd->add_option("--sub", tk.sub, "Sub-window size; reorders each window sub-window-major");
    tok_cmd->add_option("--in", tk.in, "Input PPM")->required();
    tok_cmd->add_option("--out", tk.out, "Output JSON")->required();

    std::vector<std::string> pack_text;
    std::vector<std::string> pack_image;
    fs::path pack_out;
    auto* pack_cmd = app.add_subcommand("pack", "Write text files and PPM images into a UPWMIX1 container");
    auto* text_opt = pack_cmd->add_option("--text", pack_text, "UTF-8 text file (repeatable)");
    auto* image_opt = pack_cmd->add_option("--image", pack_image, "PPM image (repeatable)");
    pack_cmd->add_option("--out", pack_out, "Output .upwmix")->required();

    auto* inspect_cmd = app.add_subcommand("inspect", "Print vocabulary, mask or container details");
    inspect_cmd->require_subcommand(1);
    std::string vocab_factor;
    auto* vocab_cmd = inspect_cmd->add_subcommand("vocab", "Unified vocabulary range table");
    vocab_cmd->add_option("--factor", vocab_factor, "Folding factor")->required();
    std::size_t mask_window = 4;
    std::size_t mask_sub = 0;
    std::size_t mask_condition = 0;
    auto* mask_cmd = inspect_cmd->add_subcommand("mask", "Local window attention mask");
    mask_cmd->add_option("--window", mask_window, "Window size in pixels")->required();
    mask_cmd->add_option("--sub", mask_sub, "Sub-window size (0: none)");
    mask_cmd->add_option("--condition", mask_condition, "Number of conditioning prefix positions");
    fs::path mixed_path;
    auto* mixed_cmd = inspect_cmd->add_subcommand("mixed", "Record table of a UPWMIX1 container");
    mixed_cmd->add_option("file", mixed_path, "Container file")->required();

    fs::path train_config;
    fs::path train_data;
    fs::path train_out;
    auto* train_cmd = app.add_subcommand("train", "Pretrain the model; writes loss.csv and model.ckpt");
    train_cmd->add_option("--config", train_config, "key=value config (model and training keys)");
    train_cmd->add_option("--data", train_data, "Directory of .ppm/.upwmix files, or a single file")->required();
    train_cmd->add_option("--out", train_out, "Run directory")->required();

    fs::path sample_ckpt;
    fs::path sample_out;
    std::uint64_t sample_seed = 0;
    double sample_temperature = 1.0;
    auto* sample_cmd = app.add_subcommand("sample", "Sample an image from a checkpoint");
    sample_cmd->add_option("--ckpt", sample_ckpt, "Checkpoint (UPWCKPT1)")->required();
    sample_cmd->add_option("--seed", sample_seed, "Sampling seed");
    sample_cmd->add_option("--temperature", sample_temperature, "Softmax temperature; <= 0 is greedy");
    sample_cmd->add_option("--out", sample_out, "Output PPM")->required();

    double gc_eps = 1e-4;
    std::size_t gc_coords = 0;
    std::uint64_t gc_seed = 1;
    auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient checks at the tiny configuration");
    gc_cmd->add_option("--eps", gc_eps, "Central-difference step, in [1e-6, 1e-3]");
    gc_cmd->add_option("--coords", gc_coords, "Coordinates per parameter (0: all for blocks, 16 for the full model)");
    gc_cmd->add_option("--seed", gc_seed, "Seed for inputs and coordinate sampling");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (fold_cmd->parsed()) return fold_viz(fv, out);
        if (tok_cmd->parsed()) return tokenize(tk, out);
        if (pack_cmd->parsed()) {
            std::vector<std::pair<bool, std::string>> inputs;
            std::size_t ti = 0;
            std::size_t ii = 0;
            for (const CLI::Option* opt : pack_cmd->parse_order()) {
                if (opt == text_opt) inputs.emplace_back(true, pack_text.at(ti++));
                if (opt == image_opt) inputs.emplace_back(false, pack_image.at(ii++));
            }
            return pack(inputs, pack_out, out);
        }
        if (vocab_cmd->parsed()) return inspect_vocab(vocab_factor, out);
        if (mask_cmd->parsed()) return inspect_mask(mask_window, mask_sub, mask_condition, out);
        if (mixed_cmd->parsed()) return inspect_mixed(mixed_path, out);
        if (train_cmd->parsed()) return train(train_config, train_data, train_out, out);
        if (sample_cmd->parsed()) return sample(sample_ckpt, sample_seed, sample_temperature, sample_out, out);
        if (gc_cmd->parsed()) return gradcheck(gc_eps, gc_coords, gc_seed, out);
    } catch (const Error& e) {
        err << "upw: " << to_string(e.kind()) << " error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "upw: io error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}

}  // namespace upw::cli
