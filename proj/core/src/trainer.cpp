#include "upw/trainer.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "upw/checkpoint.hpp"
#include "upw/error.hpp"
#include "upw/window_partitioner.hpp"

namespace upw {
namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct BatchLoss {
    Var mean;
    double value = 0.0;
};

BatchLoss batch_loss(Graph& g, Model& model, std::span<const Sequence* const> batch) {
    Var total;
    std::size_t count = 0;
    for (const Sequence* seq : batch) {
        const SequenceLoss l = model.sequence_loss(g, *seq);
        total = total.valid() ? add(g, total, l.total) : l.total;
        count += l.count;
    }
    if (count == 0) throw Error(ErrorKind::InvalidArgument, "batch has no predictable tokens");
    const Var mean = scale(g, total, 1.0 / static_cast<double>(count));
    return {mean, g.value(mean)(0, 0)};
}

}  // namespace

void TrainConfig::validate() const {
    model.validate();
    if (steps < 1) throw Error(ErrorKind::Config, "steps must be at least 1");
    if (batch_size < 1) throw Error(ErrorKind::Config, "batch_size must be at least 1");
    if (!(learning_rate > 0.0)) throw Error(ErrorKind::Config, "learning_rate must be positive");
    if (log_every < 1) throw Error(ErrorKind::Config, "log_every must be at least 1");
    if (!(init_std > 0.0)) throw Error(ErrorKind::Config, "init_std must be positive");
    if (objective != "images" && objective != "mixed") {
        throw Error(ErrorKind::Config, "objective must be 'images' or 'mixed'");
    }
}

std::string TrainConfig::to_key_values() const {
    std::ostringstream out;
    out << model.to_key_values() << "steps=" << steps << '\n'
        << "batch_size=" << batch_size << '\n'
        << "learning_rate=" << format_double(learning_rate) << '\n'
        << "seed=" << seed << '\n'
        << "optimizer=" << to_string(optimizer.kind) << '\n'
        << "beta1=" << format_double(optimizer.beta1) << '\n'
        << "beta2=" << format_double(optimizer.beta2) << '\n'
        << "epsilon=" << format_double(optimizer.epsilon) << '\n'
        << "log_every=" << log_every << '\n'
        << "init_std=" << format_double(init_std) << '\n'
        << "objective=" << objective << '\n';
    return out.str();
}

TrainConfig TrainConfig::from_key_values(KeyValues kv) {
    TrainConfig c;
    c.model = ModelConfig::take_from(kv, c.model);
    c.steps = take_size(kv, "steps", c.steps);
    c.batch_size = take_size(kv, "batch_size", c.batch_size);
    c.learning_rate = take_double(kv, "learning_rate", c.learning_rate);
    c.seed = take_u64(kv, "seed", c.seed);
    c.optimizer.kind = parse_optimizer_kind(take_string(kv, "optimizer", to_string(c.optimizer.kind)));
    c.optimizer.beta1 = take_double(kv, "beta1", c.optimizer.beta1);
    c.optimizer.beta2 = take_double(kv, "beta2", c.optimizer.beta2);
    c.optimizer.epsilon = take_double(kv, "epsilon", c.optimizer.epsilon);
    c.log_every = take_size(kv, "log_every", c.log_every);
    c.init_std = take_double(kv, "init_std", c.init_std);
    c.objective = take_string(kv, "objective", c.objective);
    reject_unknown_keys(kv);
    c.validate();
    return c;
}

std::vector<Sequence> image_sequences(std::span<const RgbImage> images, const ModelConfig& config) {
    std::vector<Sequence> out;
    out.reserve(images.size());
    for (const RgbImage& img : images) {
        const WindowGrid grid = to_window_grid(fold_image(img, config.factor()), config.window_size);
        if (grid.window_count() + 1 > config.global_context()) {
            throw Error(ErrorKind::Config, "image of " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                                               " needs " + std::to_string(grid.window_count() + 1) +
                                               " global positions; max_seq_len allows " +
                                               std::to_string(config.global_context()));
        }
        out.push_back(image_sequence(grid));
    }
    return out;
}

TrainResult train_sequences(std::span<const Sequence> data, const TrainConfig& config) {
    config.validate();
    if (data.empty()) throw Error(ErrorKind::InvalidArgument, "training data is empty");

    TrainResult result{Model(config.model, config.seed, config.init_std), {}};
    Model& model = result.model;
    Optimizer optimizer(config.optimizer, config.learning_rate);
    std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);

    for (std::size_t step = 0; step < config.steps; ++step) {
        std::vector<const Sequence*> batch;
        for (std::size_t b = 0; b < config.batch_size; ++b) {
            batch.push_back(data.size() == 1 ? &data[0] : &data[pick(rng)]);
        }
        Graph g;
        const BatchLoss loss = batch_loss(g, model, batch);
        if (!std::isfinite(loss.value)) {
            throw Error(ErrorKind::Numerical, "non-finite loss at step " + std::to_string(step));
        }
        if (step % config.log_every == 0 || step + 1 == config.steps) result.curve.push_back({step, loss.value});
        model.zero_grad();
        g.backward(loss.mean);
        optimizer.step(model.parameters());
    }

    if (!config.out_dir.empty()) {
        std::filesystem::create_directories(config.out_dir);
        write_loss_csv(config.out_dir / "loss.csv", result.curve);
        save_checkpoint(config.out_dir / "model.ckpt", model);
    }
    return result;
}

TrainResult pretrain_images(std::span<const RgbImage> images, const TrainConfig& config) {
    config.validate();
    const std::vector<Sequence> data = image_sequences(images, config.model);
    return train_sequences(data, config);
}

double evaluate_loss(Model& model, std::span<const Sequence> data) {
    Graph g(false);
    double total = 0.0;
    std::size_t count = 0;
    for (const Sequence& seq : data) {
        const SequenceLoss l = model.sequence_loss(g, seq);
        total += g.value(l.total)(0, 0);
        count += l.count;
    }
    if (count == 0) throw Error(ErrorKind::InvalidArgument, "no predictable tokens");
    return total / static_cast<double>(count);
}

void write_loss_csv(std::ostream& out, const LossCurve& curve) {
    out << "step,loss\n";
    for (const LossPoint& p : curve) out << p.step << ',' << format_double(p.loss) << '\n';
}

void write_loss_csv(const std::filesystem::path& path, const LossCurve& curve) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    write_loss_csv(out, curve);
}

LossCurve read_loss_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "step,loss") throw Error(ErrorKind::Format, "loss.csv: bad header");
    LossCurve curve;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error(ErrorKind::Format, "loss.csv: malformed row '" + line + "'");
        try {
            curve.push_back({std::stoull(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
        } catch (const std::exception&) {
            throw Error(ErrorKind::Format, "loss.csv: malformed row '" + line + "'");
        }
    }
    return curve;
}

std::vector<double> smooth_curve(const LossCurve& curve, std::size_t window) {
    if (window == 0) throw Error(ErrorKind::InvalidArgument, "smoothing window must be positive");
    std::vector<double> out(curve.size());
    double running = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        running += curve[i].loss;
        if (i >= window) running -= curve[i - window].loss;
        out[i] = running / static_cast<double>(std::min(i + 1, window));
    }
    return out;
}

StepEquivalenceReport training_step_equivalence(const TrainConfig& config) {
    config.validate();
    Model model(config.model, config.seed, config.init_std);

    std::mt19937_64 rng(config.seed + 1);
    RgbImage img(config.model.image_size, config.model.image_size);
    for (auto& px : img.pixels) px = static_cast<std::uint8_t>(rng() & 0xFF);
    const std::vector<RgbImage> images{img};
    const std::vector<Sequence> data = image_sequences(images, config.model);

    Graph g;
    const std::array<const Sequence*, 1> batch{&data[0]};
    const BatchLoss loss = batch_loss(g, model, batch);
    model.zero_grad();
    g.backward(loss.mean);

    std::vector<Parameter> before = model.parameters();
    Optimizer optimizer(config.optimizer, config.learning_rate);
    optimizer.step(model.parameters());

    // Reference: the first step of each rule written out from its definition.
    const double lr = config.learning_rate;
    const auto& oc = config.optimizer;
    StepEquivalenceReport report;
    for (std::size_t k = 0; k < before.size(); ++k) {
        const Parameter& old = before[k];
        const Parameter& now = model.parameters()[k];
        for (std::size_t i = 0; i < old.value.size(); ++i) {
            const double g0 = old.grad.data[i];
            double expected = 0.0;
            if (oc.kind == OptimizerConfig::Kind::Sgd) {
                expected = old.value.data[i] - lr * g0;
            } else {
                const double m = (1.0 - oc.beta1) * g0;
                const double v = (1.0 - oc.beta2) * g0 * g0;
                const double m_hat = m / (1.0 - oc.beta1);
                const double v_hat = v / (1.0 - oc.beta2);
                expected = old.value.data[i] - lr * m_hat / (std::sqrt(v_hat) + oc.epsilon);
            }
            ++report.compared;
            if (expected != now.value.data[i]) {
                report.ok = false;
                report.failing_parameter = old.name;
                report.failing_index = i;
                return report;
            }
        }
    }
    return report;
}

}  // namespace upw
