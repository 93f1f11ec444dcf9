#pragma once

#include <cstdint>

#include "upw/model.hpp"
#include "upw/pix_tokenizer.hpp"

namespace upw {

struct SampleOptions {
    // <= 0 selects greedy (argmax, lowest id on ties).
    double temperature = 1.0;
    std::uint64_t seed = 0;
};

// Generates an image_size x image_size folded image window by window. Each
// window is conditioned on the global state after all earlier windows, and
// its pixels are drawn one at a time from the pix range of the head. Margin
// positions outside the image are fixed to the pad token.
FoldedImage sample_image(Model& model, const SampleOptions& options);

}  // namespace upw
