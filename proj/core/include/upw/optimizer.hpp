#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "upw/tensor.hpp"

namespace upw {

struct OptimizerConfig {
    enum class Kind { Sgd, Adam };
    Kind kind = Kind::Adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

const char* to_string(OptimizerConfig::Kind kind) noexcept;
OptimizerConfig::Kind parse_optimizer_kind(const std::string& name);

// sgd:  p -= lr * g
// adam: m = b1 m + (1 - b1) g; v = b2 v + (1 - b2) g^2;
//       p -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
class Optimizer {
public:
    Optimizer(const OptimizerConfig& config, double learning_rate);

    void step(std::vector<Parameter>& params);
    std::size_t steps_taken() const noexcept { return t_; }

private:
    OptimizerConfig config_;
    double lr_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace upw
