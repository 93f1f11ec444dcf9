#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "upw/image.hpp"
#include "upw/key_value.hpp"
#include "upw/model.hpp"
#include "upw/model_config.hpp"
#include "upw/optimizer.hpp"
#include "upw/pix_tokenizer.hpp"
#include "upw/sequence.hpp"

namespace upw {

struct TrainConfig {
    ModelConfig model = ModelConfig::tiny();
    std::size_t steps = 1000;
    std::size_t batch_size = 1;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    OptimizerConfig optimizer;
    std::size_t log_every = 1;
    double init_std = 0.02;
    // "images" trains on image records only; "mixed" keeps text and images
    // of a container together as one sequence.
    std::string objective = "images";
    // Empty: nothing is written.
    std::filesystem::path out_dir;

    void validate() const;
    std::string to_key_values() const;
    // Model keys and training keys share one flat namespace; unknown keys are rejected.
    static TrainConfig from_key_values(KeyValues kv);
};

struct LossPoint {
    std::size_t step = 0;
    double loss = 0.0;  // mean nats per counted token
};
using LossCurve = std::vector<LossPoint>;

struct TrainResult {
    Model model;
    LossCurve curve;
};

// Fold, pad and partition each image under the model config.
std::vector<Sequence> image_sequences(std::span<const RgbImage> images, const ModelConfig& config);

// Generic teacher-forced training over prebuilt sequences. Each step draws
// batch_size sequences (uniformly, with replacement, from the seeded RNG) and
// takes one optimizer step on their mean per-token loss. The recorded loss is
// the batch loss before the update. Writes loss.csv and model.ckpt into
// out_dir when it is set. Throws ErrorKind::Numerical on a non-finite loss.
TrainResult train_sequences(std::span<const Sequence> data, const TrainConfig& config);

// Image-only next-pix-token pretraining.
TrainResult pretrain_images(std::span<const RgbImage> images, const TrainConfig& config);

// Mean per-token loss over all sequences, no gradient.
double evaluate_loss(Model& model, std::span<const Sequence> data);

void write_loss_csv(std::ostream& out, const LossCurve& curve);
void write_loss_csv(const std::filesystem::path& path, const LossCurve& curve);
LossCurve read_loss_csv(const std::filesystem::path& path);

// Trailing moving average; entry i averages points max(0, i - window + 1) .. i.
std::vector<double> smooth_curve(const LossCurve& curve, std::size_t window);

struct StepEquivalenceReport {
    bool ok = true;
    std::string failing_parameter;
    std::size_t failing_index = 0;
    std::size_t compared = 0;
};

// One optimizer step on a synthetic image, compared bit-for-bit against an
// independently written update rule.
StepEquivalenceReport training_step_equivalence(const TrainConfig& config);

}  // namespace upw
