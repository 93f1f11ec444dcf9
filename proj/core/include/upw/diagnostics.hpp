#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "upw/grad_check.hpp"
#include "upw/model_config.hpp"

namespace upw {

// Finite-difference checks of individual building blocks and of the whole
// model. Each objective is a fixed random weighting of the block's output so
// that every output element contributes.

GradCheckReport grad_check_linear(const GradCheckOptions& options, std::uint64_t seed);
GradCheckReport grad_check_feed_forward(std::size_t width, std::size_t rows, const GradCheckOptions& options,
                                        std::uint64_t seed);
// Pre-norm attention block with grouped heads under a causal mask.
GradCheckReport grad_check_attention_block(std::size_t width, std::size_t rows, std::size_t heads,
                                           std::size_t kv_heads, const GradCheckOptions& options, std::uint64_t seed);
GradCheckReport grad_check_cross_entropy(std::size_t rows, std::size_t classes, const GradCheckOptions& options,
                                         std::uint64_t seed);
// Mean next-token loss of the full model on one random image.
GradCheckReport grad_check_full_model(const ModelConfig& config, double init_std, const GradCheckOptions& options,
                                      std::uint64_t seed);

struct NamedGradCheck {
    std::string name;
    double tolerance = 0.0;
    GradCheckReport report;
    bool passed() const { return report.max_rel_error < tolerance; }
};

// Standard suite at the tiny configuration: per-block checks with tolerance
// 1e-4 and the full model with tolerance 1e-3.
std::vector<NamedGradCheck> standard_grad_checks(const GradCheckOptions& options, std::uint64_t seed);

}  // namespace upw
