#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace upw {

// Dense row-major matrix of 64-bit reals. Vectors are 1 x n.
struct Tensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    Tensor(std::size_t r, std::size_t c, std::vector<double> values);

    std::array<std::size_t, 2> shape() const noexcept { return {rows, cols}; }
    std::size_t size() const noexcept { return data.size(); }
    bool empty() const noexcept { return data.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

// A learnable tensor with its accumulated gradient (same shape as value).
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.rows, value.cols) {}

    void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

}  // namespace upw
