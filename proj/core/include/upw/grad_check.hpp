#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "upw/tensor.hpp"

namespace upw {

struct GradCheckOptions {
    double eps = 1e-4;
    // Coordinates checked per parameter; 0 checks all of them. When sampling,
    // half are the largest analytic gradients and half are drawn at random.
    std::size_t max_coords_per_param = 0;
    std::uint64_t seed = 0;
    // Denominator floor for the relative error so that gradients that are zero
    // in both routes compare as equal.
    double abs_floor = 1e-6;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t checked = 0;
};

// |a - n| / max(|a|, |n|, floor)
double relative_error(double analytic, double numeric, double floor);

// Evaluates the scalar objective. With backprop = true it must also add the
// gradient into every Parameter::grad (the harness zeroes them first).
using ObjectiveFn = std::function<double(bool backprop)>;

// Compares analytic gradients with central finite differences
// (f(p + eps) - f(p - eps)) / 2 eps. Throws ErrorKind::Numerical when the
// objective or a gradient is not finite, ErrorKind::InvalidArgument when eps
// is outside [1e-6, 1e-3].
GradCheckReport grad_check(std::span<Parameter* const> params, const ObjectiveFn& objective,
                           const GradCheckOptions& options = {});

}  // namespace upw
