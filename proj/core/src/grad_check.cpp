#include "upw/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "upw/error.hpp"

namespace upw {
namespace {

double checked(double value, const std::string& what) {
    if (!std::isfinite(value)) throw Error(ErrorKind::Numerical, "grad_check: non-finite " + what);
    return value;
}

std::vector<std::size_t> pick_coordinates(const Tensor& grad, std::size_t limit, std::mt19937_64& rng) {
    std::vector<std::size_t> all(grad.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    if (limit == 0 || all.size() <= limit) return all;

    const std::size_t top = limit / 2;
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(top), all.end(),
                      [&](std::size_t a, std::size_t b) {
                          const double ga = std::abs(grad.data[a]);
                          const double gb = std::abs(grad.data[b]);
                          return ga != gb ? ga > gb : a < b;
                      });
    std::vector<std::size_t> chosen(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(top));
    std::vector<std::size_t> rest(all.begin() + static_cast<std::ptrdiff_t>(top), all.end());
    std::shuffle(rest.begin(), rest.end(), rng);
    chosen.insert(chosen.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(limit - top));
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(std::span<Parameter* const> params, const ObjectiveFn& objective,
                           const GradCheckOptions& options) {
    if (!(options.eps >= 1e-6 && options.eps <= 1e-3)) {
        throw Error(ErrorKind::InvalidArgument, "grad_check: eps must lie in [1e-6, 1e-3]");
    }
    for (Parameter* p : params) p->zero_grad();
    checked(objective(true), "objective");

    std::vector<Tensor> analytic;
    analytic.reserve(params.size());
    for (Parameter* p : params) {
        for (const double v : p->grad.data) checked(v, "analytic gradient in " + p->name);
        analytic.push_back(p->grad);
    }

    std::mt19937_64 rng(options.seed);
    GradCheckReport report;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Parameter& param = *params[pi];
        for (const std::size_t idx : pick_coordinates(analytic[pi], options.max_coords_per_param, rng)) {
            const double saved = param.value.data[idx];
            param.value.data[idx] = saved + options.eps;
            const double plus = checked(objective(false), "objective");
            param.value.data[idx] = saved - options.eps;
            const double minus = checked(objective(false), "objective");
            param.value.data[idx] = saved;

            const double numeric = (plus - minus) / (2.0 * options.eps);
            const double a = analytic[pi].data[idx];
            const double err = relative_error(a, numeric, options.abs_floor);
            ++report.checked;
            if (err > report.max_rel_error || report.worst_param.empty()) {
                report.max_rel_error = err;
                report.worst_param = param.name;
                report.worst_index = idx;
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    return report;
}

}  // namespace upw
