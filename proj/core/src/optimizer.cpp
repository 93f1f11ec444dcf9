#include "upw/optimizer.hpp"

#include <cmath>

#include "upw/error.hpp"

namespace upw {

const char* to_string(OptimizerConfig::Kind kind) noexcept {
    return kind == OptimizerConfig::Kind::Sgd ? "sgd" : "adam";
}

OptimizerConfig::Kind parse_optimizer_kind(const std::string& name) {
    if (name == "sgd") return OptimizerConfig::Kind::Sgd;
    if (name == "adam") return OptimizerConfig::Kind::Adam;
    throw Error(ErrorKind::Config, "unknown optimizer '" + name + "' (expected sgd or adam)");
}

Optimizer::Optimizer(const OptimizerConfig& config, double learning_rate) : config_(config), lr_(learning_rate) {
    if (!(learning_rate > 0.0)) throw Error(ErrorKind::Config, "learning rate must be positive");
}

void Optimizer::step(std::vector<Parameter>& params) {
    ++t_;
    if (config_.kind == OptimizerConfig::Kind::Sgd) {
        for (Parameter& p : params) {
            for (std::size_t i = 0; i < p.value.data.size(); ++i) p.value.data[i] -= lr_ * p.grad.data[i];
        }
        return;
    }
    if (m_.empty()) {
        for (const Parameter& p : params) {
            m_.emplace_back(p.value.size(), 0.0);
            v_.emplace_back(p.value.size(), 0.0);
        }
    }
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Parameter& p = params[k];
        auto& m = m_[k];
        auto& v = v_[k];
        for (std::size_t i = 0; i < p.value.data.size(); ++i) {
            const double g = p.grad.data[i];
            m[i] = b1 * m[i] + (1.0 - b1) * g;
            v[i] = b2 * v[i] + (1.0 - b2) * g * g;
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            p.value.data[i] -= lr_ * m_hat / (std::sqrt(v_hat) + config_.epsilon);
        }
    }
}

}  // namespace upw
