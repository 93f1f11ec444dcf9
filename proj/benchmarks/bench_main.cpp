#include <benchmark/benchmark.h>

#include <random>

#include "upw/attention.hpp"
#include "upw/optimizer.hpp"
#include "upw/pix_tokenizer.hpp"
#include "upw/trainer.hpp"
#include "upw/window_partitioner.hpp"

using namespace upw;

namespace {

RgbImage noise_image(std::size_t side) {
    std::mt19937 rng(1);
    RgbImage img(side, side);
    for (auto& b : img.pixels) b = static_cast<std::uint8_t>(rng());
    return img;
}

Tensor noise(std::size_t r, std::size_t c, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Tensor t(r, c);
    for (double& x : t.data) x = n(rng);
    return t;
}

void BM_FoldImage(benchmark::State& state) {
    const RgbImage img = noise_image(static_cast<std::size_t>(state.range(0)));
    const FoldingFactor f(16);
    for (auto _ : state) benchmark::DoNotOptimize(fold_image(img, f));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_FoldImage)->Arg(224)->Arg(1024);

void BM_PadPartition(benchmark::State& state) {
    const FoldedImage folded = fold_image(noise_image(static_cast<std::size_t>(state.range(0))), FoldingFactor(16));
    for (auto _ : state) benchmark::DoNotOptimize(to_window_grid(folded, 16));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_PadPartition)->Arg(224)->Arg(230);

void BM_GqaAttention(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const std::size_t heads = 12, kv = 6, d = 16;
    const Tensor q = noise(n, heads * d, rng);
    const Tensor k = noise(n, kv * d, rng);
    const Tensor v = noise(n, kv * d, rng);
    const AttentionMask mask = causal_mask(n);
    for (auto _ : state) benchmark::DoNotOptimize(gqa_attention(q, k, v, mask, heads, kv));
}
BENCHMARK(BM_GqaAttention)->Arg(64)->Arg(256);

void BM_TinyTrainingStep(benchmark::State& state) {
    TrainConfig tc;
    tc.steps = 1;
    const std::vector<RgbImage> images{noise_image(8)};
    const std::vector<Sequence> data = image_sequences(images, tc.model);
    for (auto _ : state) benchmark::DoNotOptimize(train_sequences(data, tc));
}
BENCHMARK(BM_TinyTrainingStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
