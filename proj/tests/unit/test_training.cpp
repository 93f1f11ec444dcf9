#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "upw/checkpoint.hpp"
#include "upw/error.hpp"
#include "upw/key_value.hpp"
#include "upw/optimizer.hpp"
#include "upw/sampler.hpp"
#include "upw/trainer.hpp"

using namespace upw;

TEST_CASE("key=value parsing") {
    const KeyValues kv = parse_key_values("# comment\n  dim = 64\n\nseed=3\n");
    CHECK(kv.at("dim") == "64");
    CHECK(kv.at("seed") == "3");
    CHECK_THROWS_AS(parse_key_values("a=1\na=2\n"), Error);
    CHECK_THROWS_AS(parse_key_values("novalue\n"), Error);

    KeyValues t{{"steps", "12"}, {"lr", "x"}};
    CHECK(take_size(t, "steps", 1) == 12);
    CHECK(t.count("steps") == 0);
    CHECK_THROWS_AS(take_double(t, "lr", 0.1), Error);
    KeyValues left{{"bogus", "1"}};
    CHECK_THROWS_AS(reject_unknown_keys(left), Error);
}

TEST_CASE("train config keys") {
    TrainConfig tc;
    tc.steps = 17;
    tc.learning_rate = 0.25;
    tc.optimizer.kind = OptimizerConfig::Kind::Sgd;
    tc.model.sub_window = 2;
    const TrainConfig back = TrainConfig::from_key_values(parse_key_values(tc.to_key_values()));
    CHECK(back.steps == 17);
    CHECK(back.learning_rate == 0.25);
    CHECK(back.optimizer.kind == OptimizerConfig::Kind::Sgd);
    CHECK(back.model == tc.model);
    CHECK_THROWS_AS(TrainConfig::from_key_values(parse_key_values("stepz=3\n")), Error);
    CHECK_THROWS_AS(TrainConfig::from_key_values(parse_key_values("steps=0\n")), Error);
    CHECK_THROWS_AS(TrainConfig::from_key_values(parse_key_values("learning_rate=-1\n")), Error);
}

TEST_CASE("optimizer updates") {
    Parameter p("p", Tensor(1, 2, {1.0, -2.0}));
    std::vector<Parameter> ps{p};
    ps[0].grad.data = {1.0, 0.0};
    Optimizer sgd(OptimizerConfig{OptimizerConfig::Kind::Sgd}, 0.1);
    sgd.step(ps);
    CHECK(ps[0].value.data[0] - 1.0 == doctest::Approx(-0.1));
    CHECK(ps[0].value.data[1] == -2.0);

    // Adam first step, closed form: m = (1-b1) g, v = (1-b2) g^2, corrected by
    // 1 - b^1 each, so the update is lr * g / (|g| + eps).
    std::vector<Parameter> qs{Parameter("q", Tensor(1, 3, {0.5, 0.5, 0.5}))};
    qs[0].grad.data = {0.3, -4.0, 0.0};
    Optimizer adam(OptimizerConfig{}, 0.01);
    adam.step(qs);
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    for (std::size_t i = 0; i < 3; ++i) {
        const double g = std::vector<double>{0.3, -4.0, 0.0}[i];
        const double m = (1 - b1) * g / (1 - b1);
        const double v = (1 - b2) * g * g / (1 - b2);
        CHECK(qs[0].value.data[i] == doctest::Approx(0.5 - 0.01 * m / (std::sqrt(v) + eps)).epsilon(1e-14));
    }
}

TEST_CASE("single step matches the hand-written update") {
    TrainConfig tc;
    tc.steps = 1;
    tc.optimizer.kind = OptimizerConfig::Kind::Sgd;
    tc.learning_rate = 0.05;
    StepEquivalenceReport r = training_step_equivalence(tc);
    CHECK(r.ok);
    CHECK(r.compared > 0);
    tc.optimizer.kind = OptimizerConfig::Kind::Adam;
    r = training_step_equivalence(tc);
    CHECK(r.ok);
}

TEST_CASE("loss csv") {
    const LossCurve c{{0, 6.5}, {5, 1.0 / 3.0}, {10, 0.125}};
    std::ostringstream out;
    write_loss_csv(out, c);
    CHECK(out.str().rfind("step,loss\n", 0) == 0);
    const auto dir = std::filesystem::temp_directory_path() / "upw_unit_csv";
    std::filesystem::create_directories(dir);
    write_loss_csv(dir / "loss.csv", c);
    const LossCurve back = read_loss_csv(dir / "loss.csv");
    REQUIRE(back.size() == 3);
    CHECK(back[1].loss == 1.0 / 3.0);
    CHECK(back[2].step == 10);
    const auto s = smooth_curve(c, 2);
    CHECK(s[0] == 6.5);
    CHECK(s[1] == doctest::Approx((6.5 + 1.0 / 3.0) / 2));
}

TEST_CASE("short training run and sampling") {
    RgbImage img(8, 8);
    std::mt19937 rng(1);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng());
    TrainConfig tc;
    tc.steps = 20;
    tc.seed = 4;
    const std::vector<RgbImage> images{img};
    TrainResult a = pretrain_images(images, tc);
    REQUIRE(a.curve.size() == 20);
    CHECK(std::abs(a.curve.front().loss - std::log(773.0)) < 0.1);
    CHECK(a.curve.back().loss < a.curve.front().loss);
    TrainResult b = pretrain_images(images, tc);
    for (std::size_t i = 0; i < a.curve.size(); ++i) CHECK(a.curve[i].loss == b.curve[i].loss);

    const FoldedImage s1 = sample_image(a.model, SampleOptions{1.0, 9});
    const FoldedImage s2 = sample_image(a.model, SampleOptions{1.0, 9});
    CHECK(s1 == s2);
    CHECK(s1.width == 8);
    CHECK(s1.height == 8);
    for (std::uint32_t t : s1.tokens) CHECK(t < 512u);
}

TEST_CASE("non-finite loss aborts") {
    RgbImage img(8, 8);
    TrainConfig tc;
    tc.steps = 3;
    tc.learning_rate = 1e300;
    tc.optimizer.kind = OptimizerConfig::Kind::Sgd;
    tc.init_std = 1e150;
    const std::vector<RgbImage> images{img};
    try {
        pretrain_images(images, tc);
        FAIL("training did not abort");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Numerical);
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}

TEST_CASE("constant black dataset is learned within 200 steps") {
    const std::vector<RgbImage> images{RgbImage(8, 8)};
    TrainConfig tc;
    tc.steps = 200;
    tc.seed = 1;
    const TrainResult r = pretrain_images(images, tc);
    bool reached = false;
    for (const LossPoint& p : r.curve) reached = reached || p.loss < 0.05;
    CHECK(reached);
    MESSAGE("final loss " << r.curve.back().loss);
}
