#include "alrf/errors.hpp"
#include "alrf/linalg.hpp"
#include "alrf/netcore.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace alrf;

namespace {

Network identity_net() {
    Network net({2}, LossKind::mse);
    net.add(LayerSpec::dense(2, 2));
    net.weights(0) = Tensor::identity(2);
    return net;
}

Network small_mlp(Activation hidden, Activation out, LossKind loss) {
    Network net({3}, loss);
    net.add(LayerSpec::dense(3, 5, hidden)).add(LayerSpec::dense(5, 4, hidden)).add(LayerSpec::dense(4, 3, out));
    return net;
}

Network small_cnn() {
    // (6,6,2) -> conv 3x3x2x3 stride 1 -> (4,4,3) -> conv 2x2x3x2 stride 2 -> (2,2,2) -> flatten -> dense 8->3
    Network net({6, 6, 2}, LossKind::cross_entropy);
    net.add(LayerSpec::conv2d(3, 3, 2, 3, 1, Activation::tanh))
        .add(LayerSpec::conv2d(2, 2, 3, 2, 2, Activation::sigmoid))
        .add(LayerSpec::flatten())
        .add(LayerSpec::dense(8, 3, Activation::softmax));
    return net;
}

} // namespace

TEST(Forward, IdentityDense) {
    const Network net = identity_net();
    EXPECT_EQ(net.forward(Tensor::matrix(1, 2, {1, 0})), Tensor::matrix(1, 2, {1, 0}));
}

TEST(Forward, ZeroDropoutMatchesEval) {
    Network net = small_mlp(Activation::relu, Activation::softmax, LossKind::cross_entropy);
    net.initialize(3);
    Rng rng(1);
    const Tensor x = test::random_matrix(7, 3, rng);
    const std::vector<double> p(3, 0.0);
    EXPECT_EQ(net.forward_train(x, p, rng), net.forward(x));
    EXPECT_EQ(net.forward_train(x, {}, rng), net.forward(x));
}

TEST(Forward, EvalIsIndependentOfRngState) {
    Network net = small_mlp(Activation::tanh, Activation::softmax, LossKind::cross_entropy);
    net.initialize(3);
    Rng rng(2);
    const Tensor x = test::random_matrix(4, 3, rng);
    const Tensor first = net.forward(x);
    net.forward_train(x, std::vector<double>{0.0, 0.5, 0.5}, rng);
    EXPECT_EQ(net.forward(x), first);
}

TEST(Forward, DropoutZeroFractionFollowsBernoulli) {
    Network net({10000}, LossKind::mse);
    net.add(LayerSpec::dense(10000, 1));
    Rng rng(42);
    const Tensor x({1, 10000}, 1.0);
    net.forward_train(x, std::vector<double>{0.5}, rng);
    const Tensor& mask = net.state(0).dropout_mask;
    double zeros = 0.0;
    for (double m : mask.values()) {
        EXPECT_TRUE(m == 0.0 || m == 2.0);
        zeros += m == 0.0;
    }
    EXPECT_NEAR(zeros / 10000.0, 0.5, 0.02);
}

TEST(Forward, DropoutPreservesExpectation) {
    // Single linear unit summing its inputs; E[masked sum] equals the plain sum.
    Network net({200}, LossKind::mse);
    net.add(LayerSpec::dense(200, 1));
    net.weights(0).fill(1.0);
    const Tensor x({1, 200}, 0.5);
    const double plain = net.forward(x)[0];
    Rng rng(7);
    double mean = 0.0;
    const int trials = 2000;
    for (int i = 0; i < trials; ++i) mean += net.forward_train(x, std::vector<double>{0.3}, rng)[0] / trials;
    EXPECT_NEAR(mean / plain, 1.0, 0.02);
}

TEST(Forward, RejectsBadInput) {
    Network net = identity_net();
    EXPECT_THROW(net.forward(Tensor::matrix(1, 3, {1, 2, 3})), ShapeError);
    Rng rng(0);
    EXPECT_THROW(net.forward_train(Tensor::matrix(1, 2, {1, 2}), std::vector<double>{1.0}, rng), DomainError);
    EXPECT_THROW(net.forward_train(Tensor::matrix(1, 2, {1, 2}), std::vector<double>{0.1, 0.1}, rng), ShapeError);
}

TEST(Network, ShapeComposition) {
    Network net({4}, LossKind::mse);
    EXPECT_THROW(net.add(LayerSpec::dense(3, 2)), ShapeError);
    EXPECT_THROW(net.add(LayerSpec::conv2d(2, 2, 1, 1)), ShapeError);
    EXPECT_THROW(net.add(LayerSpec::dense(4, 0)), ShapeError);

    Network img({5, 5, 1}, LossKind::mse);
    EXPECT_THROW(img.add(LayerSpec::conv2d(6, 1, 1, 2)), ShapeError);
    img.add(LayerSpec::conv2d(3, 3, 1, 2, 2));
    EXPECT_EQ(img.output_shape(), (Tensor::Shape{2, 2, 2}));
    img.add(LayerSpec::flatten());
    EXPECT_EQ(img.output_shape(), (Tensor::Shape{8}));
    EXPECT_EQ(img.trainable_count(), 1u);
    EXPECT_EQ(img.parameter_count(), 3u * 3 * 1 * 2 + 2);
}

TEST(Network, HeUniformInitialization) {
    Network net({50}, LossKind::mse);
    net.add(LayerSpec::dense(50, 40));
    net.initialize(9);
    const double limit = std::sqrt(6.0 / 50.0);
    for (double w : net.weights(0).values()) EXPECT_LE(std::abs(w), limit);
    for (double b : net.bias(0).values()) EXPECT_EQ(b, 0.0);
    Network again({50}, LossKind::mse);
    again.add(LayerSpec::dense(50, 40));
    again.initialize(9);
    EXPECT_EQ(again.weights(0), net.weights(0));
}

TEST(Loss, Examples) {
    const Tensor t = Tensor::matrix(2, 2, {1, 0, 0, 1});
    EXPECT_EQ(loss(t, t, LossKind::mse), 0.0);

    Tensor uniform({1, 10}, 0.1);
    Tensor target({1, 10});
    target[3] = 1.0;
    EXPECT_NEAR(loss(uniform, target, LossKind::cross_entropy), 2.302585092994046, 1e-12);
}

TEST(Loss, MatchesScalarRecomputation) {
    Rng rng(17);
    const Tensor pred = test::random_matrix(6, 4, rng);
    const Tensor target = test::random_matrix(6, 4, rng);
    double oracle = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < 4; ++j) row += std::pow(pred(i, j) - target(i, j), 2);
        oracle += row;
    }
    oracle /= 6.0;
    EXPECT_NEAR(loss(pred, target, LossKind::mse), oracle, 1e-12);

    const Tensor probs = activate(Activation::softmax, pred);
    const Tensor labels = test::random_one_hot(6, 4, rng);
    double ce = 0.0;
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            if (labels(i, j) == 1.0) ce -= std::log(probs(i, j));
    EXPECT_NEAR(loss(probs, labels, LossKind::cross_entropy), ce / 6.0, 1e-12);
}

TEST(Loss, Errors) {
    const Tensor bad = Tensor::matrix(1, 2, {-0.5, 1.5});
    const Tensor target = Tensor::matrix(1, 2, {1, 0});
    EXPECT_THROW(loss(bad, target, LossKind::cross_entropy), DomainError);
    EXPECT_THROW(loss(target, Tensor::matrix(1, 3, {1, 0, 0}), LossKind::mse), ShapeError);
    // Zero probability on the true class is clamped to 1e-12, not an error.
    EXPECT_NEAR(loss(Tensor::matrix(1, 2, {0, 1}), target, LossKind::cross_entropy), -std::log(1e-12), 1e-9);
}

TEST(Penalty, Examples) {
    Network net({2}, LossKind::mse);
    net.add(LayerSpec::dense(2, 2));
    net.weights(0) = Tensor::identity(2);

    PenaltyConfig cfg{0.5, {Tensor({2, 2})}, {Tensor({2})}};
    EXPECT_DOUBLE_EQ(lrf_penalty_loss(net, 1.0, cfg), 2.0);

    cfg.gamma = 0.0;
    EXPECT_EQ(lrf_penalty_loss(net, 1.0, cfg), 1.0);

    PenaltyConfig same{3.0, {net.weights(0)}, {net.bias(0)}};
    EXPECT_EQ(lrf_penalty_loss(net, 1.0, same), 1.0);

    EXPECT_THROW(lrf_penalty_loss(net, 1.0, PenaltyConfig{1.0, {}, {}}), ShapeError);
}

TEST(Penalty, NeverBelowBaseLoss) {
    Rng rng(12);
    Network net = small_mlp(Activation::relu, Activation::softmax, LossKind::cross_entropy);
    for (int i = 0; i < 20; ++i) {
        test::randomize(net, rng);
        Network other = net;
        test::randomize(other, rng);
        const double gamma = uniform01(rng) * 2.0;
        PenaltyConfig cfg = make_lrf_anchor(other, gamma);
        EXPECT_GE(lrf_penalty_loss(net, 0.7, cfg), 0.7);
    }
}

TEST(Penalty, AnchorIsRankOneSnapshot) {
    Rng rng(31);
    Network net = small_mlp(Activation::relu, Activation::softmax, LossKind::cross_entropy);
    test::randomize(net, rng);
    const PenaltyConfig cfg = make_lrf_anchor(net, 0.25);
    ASSERT_EQ(cfg.anchor_weights.size(), 3u);
    for (std::size_t t = 0; t < 3; ++t) {
        const auto s = test::singular_values(cfg.anchor_weights[t]);
        EXPECT_LT(s[1], 1e-8 * s[0]);
        EXPECT_EQ(cfg.anchor_biases[t], net.bias(t));
    }
}

TEST(Backward, HandComputedLinearCase) {
    Network net({1}, LossKind::mse);
    net.add(LayerSpec::dense(1, 1));
    net.weights(0)[0] = 2.0;
    Rng rng(0);
    net.forward_train(Tensor::matrix(1, 1, {1.0}), {}, rng);
    const auto g = net.backward(Tensor::matrix(1, 1, {1.0}));
    EXPECT_DOUBLE_EQ(g[0].weights[0], 2.0);
    EXPECT_DOUBLE_EQ(g[0].bias[0], 2.0);
}

TEST(Backward, WeightDecayOnly) {
    Network net({2}, LossKind::mse);
    net.add(LayerSpec::dense(2, 2));
    net.weights(0) = Tensor::matrix(2, 2, {1, -2, 3, 4});
    Rng rng(0);
    // Zero input and zero target: the data term contributes nothing.
    net.forward_train(Tensor({1, 2}), {}, rng);
    const auto g = net.backward(Tensor({1, 2}), nullptr, 0.1);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(g[0].weights[k], 0.1 * net.weights(0)[k]);
}

TEST(Backward, RequiresFreshForward) {
    Network net = identity_net();
    EXPECT_THROW(net.backward(Tensor::matrix(1, 2, {0, 0})), StaleCache);
    Rng rng(0);
    net.forward_train(Tensor::matrix(1, 2, {1, 0}), {}, rng);
    net.backward(Tensor::matrix(1, 2, {0, 0}));
    EXPECT_THROW(net.backward(Tensor::matrix(1, 2, {0, 0})), StaleCache);
}

struct GradCase {
    Activation hidden;
    Activation out;
    LossKind loss;
};

class DenseGradients : public ::testing::TestWithParam<GradCase> {};

TEST_P(DenseGradients, MatchFiniteDifferences) {
    const auto c = GetParam();
    Rng rng(100 + int(c.hidden) * 7 + int(c.out));
    Network net = small_mlp(c.hidden, c.out, c.loss);
    ASSERT_LE(net.parameter_count(), 200u);
    test::randomize(net, rng);
    const Tensor x = test::random_matrix(5, 3, rng);
    const Tensor y = c.loss == LossKind::cross_entropy ? test::random_one_hot(5, 3, rng) : test::random_matrix(5, 3, rng);
    const auto r = test::check_gradients(net, x, y);
    EXPECT_EQ(r.checked, net.parameter_count());
    EXPECT_LT(r.max_relative_error, 1e-5);
}

INSTANTIATE_TEST_SUITE_P(
    AllActivations, DenseGradients,
    ::testing::Values(GradCase{Activation::relu, Activation::softmax, LossKind::cross_entropy},
                      GradCase{Activation::tanh, Activation::softmax, LossKind::cross_entropy},
                      GradCase{Activation::sigmoid, Activation::softmax, LossKind::cross_entropy},
                      GradCase{Activation::relu, Activation::none, LossKind::mse},
                      GradCase{Activation::tanh, Activation::sigmoid, LossKind::mse},
                      GradCase{Activation::none, Activation::tanh, LossKind::mse},
                      GradCase{Activation::sigmoid, Activation::softmax, LossKind::mse}));

TEST(Backward, ConvNetMatchesFiniteDifferences) {
    Rng rng(808);
    Network net = small_cnn();
    ASSERT_LE(net.parameter_count(), 200u);
    test::randomize(net, rng);
    const Tensor x = test::random_tensor({2, 6, 6, 2}, rng);
    const Tensor y = test::random_one_hot(2, 3, rng);
    EXPECT_LT(test::check_gradients(net, x, y).max_relative_error, 1e-5);
}

TEST(Backward, StandaloneActivationLayers) {
    Rng rng(5150);
    Network net({4}, LossKind::cross_entropy);
    net.add(LayerSpec::dense(4, 6))
        .add(LayerSpec::activation_layer(Activation::tanh))
        .add(LayerSpec::dense(6, 3))
        .add(LayerSpec::activation_layer(Activation::softmax));
    test::randomize(net, rng);
    const Tensor x = test::random_matrix(4, 4, rng);
    EXPECT_LT(test::check_gradients(net, x, test::random_one_hot(4, 3, rng)).max_relative_error, 1e-5);
}

TEST(Backward, PenaltyWeightDecayAndDropout) {
    Rng rng(64);
    Network net = small_mlp(Activation::tanh, Activation::softmax, LossKind::cross_entropy);
    test::randomize(net, rng);
    Network snapshot = net;
    test::randomize(snapshot, rng);
    const PenaltyConfig anchor = make_lrf_anchor(snapshot, 0.5);
    const Tensor x = test::random_matrix(6, 3, rng);
    const Tensor y = test::random_one_hot(6, 3, rng);
    EXPECT_LT(test::check_gradients(net, x, y, &anchor).max_relative_error, 1e-5);
    EXPECT_LT(test::check_gradients(net, x, y, nullptr, 0.05).max_relative_error, 1e-5);
    const std::vector<double> dropout{0.0, 0.3, 0.3};
    EXPECT_LT(test::check_gradients(net, x, y, &anchor, 0.01, dropout).max_relative_error, 1e-5);
}
