#include "alrf/conditioning.hpp"
#include "alrf/errors.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <string>

using namespace alrf;

namespace {

LayerState dense_state(std::size_t in, std::size_t out, Rng& rng) {
    return LayerState{test::random_matrix(in, out, rng), test::random_tensor({out}, rng)};
}

} // namespace

TEST(Kappa, IdentityDenseLayer) {
    const LayerSpec spec = LayerSpec::dense(2, 2);
    const LayerState st{Tensor::identity(2), Tensor({2})};
    const Tensor x = Tensor::matrix(1, 2, {1, 0});
    EXPECT_NEAR(jacobian_fro_norm(spec, st, x), 2.0, 1e-12);
    EXPECT_NEAR(jacobian_fro_norm_fd(spec, st, x), 2.0, 1e-6);
    EXPECT_NEAR(layer_condition_number(spec, st, x), 2.0 * std::sqrt(2.0), 1e-12);
}

TEST(Kappa, HomogeneousInInputForZeroBiasLinearLayer) {
    // The bias block of J is the constant batch * n_out; the weight block and f scale by c.
    Rng rng(3);
    const LayerSpec spec = LayerSpec::dense(5, 3);
    const LayerState st{test::random_matrix(5, 3, rng), Tensor({3})};
    const Tensor x = test::random_matrix(4, 5, rng);
    const double bias_block = 4.0 * 3.0;
    const double j0 = jacobian_fro_norm(spec, st, x);
    const double f0 = std::sqrt(squared_norm(linear_forward(spec, st, x)));
    for (double c : {0.1, 3.0, 250.0}) {
        const Tensor xc = c * x;
        const double jc = jacobian_fro_norm(spec, st, xc);
        const double fc = std::sqrt(squared_norm(linear_forward(spec, st, xc)));
        EXPECT_NEAR((jc * jc - bias_block) / (j0 * j0 - bias_block), c * c, 1e-9 * c * c);
        EXPECT_NEAR(fc / f0, c, 1e-12 * c);
        const double weight_only = std::sqrt(jc * jc - bias_block) / fc;
        EXPECT_NEAR(weight_only, std::sqrt(j0 * j0 - bias_block) / f0, 1e-10);
    }
}

TEST(Kappa, RandomDenseMatchesFiniteDifferences) {
    Rng rng(2024);
    for (Activation a : {Activation::none, Activation::tanh, Activation::sigmoid, Activation::softmax}) {
        const LayerSpec spec = LayerSpec::dense(8, 4, a);
        const LayerState st = dense_state(8, 4, rng);
        const Tensor x = test::random_matrix(16, 8, rng);
        const double analytic = layer_condition_number(spec, st, x);
        const double fd = layer_condition_number_fd(spec, st, x);
        EXPECT_LT(test::relative_error(analytic, fd), 1e-4) << to_string(a);
    }
}

TEST(Kappa, RandomConvMatchesFiniteDifferences) {
    Rng rng(77);
    for (std::size_t stride : {1u, 2u}) {
        const LayerSpec spec = LayerSpec::conv2d(2, 2, 1, 2, stride, Activation::tanh);
        const LayerState st{test::random_tensor({2, 2, 1, 2}, rng), test::random_tensor({2}, rng)};
        const Tensor x = test::random_tensor({1, 5, 5, 1}, rng);
        const double analytic = jacobian_fro_norm(spec, st, x);
        const double fd = jacobian_fro_norm_fd(spec, st, x);
        EXPECT_LT(test::relative_error(analytic, fd), 1e-4);
    }
}

TEST(Kappa, ZeroReluLayerUsesZeroSubgradient) {
    const LayerSpec spec = LayerSpec::dense(3, 2, Activation::relu);
    const LayerState st{Tensor({3, 2}), Tensor({2})};
    const Tensor x = Tensor::matrix(2, 3, {1, 2, 3, -1, 0, 4});
    EXPECT_EQ(jacobian_fro_norm(spec, st, x), 0.0);
    EXPECT_THROW(layer_condition_number(spec, st, x), DegenerateOutput);
}

TEST(Kappa, RejectsOversizedFiniteDifference) {
    const LayerSpec spec = LayerSpec::dense(200, 60);
    const LayerState st{Tensor({200, 60}), Tensor({60})};
    EXPECT_THROW(jacobian_fro_norm_fd(spec, st, Tensor({1, 200})), DomainError);
}

TEST(Kappa, RejectsNonTrainableLayers) {
    const LayerSpec spec = LayerSpec::flatten();
    EXPECT_THROW(jacobian_fro_norm(spec, LayerState{}, Tensor({1, 2})), Error);
}

TEST(Normalize, Examples) {
    EXPECT_EQ(normalize_condition_numbers(std::vector<double>{2, 4}), (std::vector<double>{0.5, 1.0}));
    EXPECT_EQ(normalize_condition_numbers(std::vector<double>{7}), (std::vector<double>{1.0}));
    EXPECT_EQ(normalize_condition_numbers(std::vector<double>{3, 3, 3}), (std::vector<double>{1, 1, 1}));
    EXPECT_THROW(normalize_condition_numbers(std::vector<double>{0, 0}), AllZero);
    EXPECT_THROW(normalize_condition_numbers(std::vector<double>{}), AllZero);
    EXPECT_THROW(normalize_condition_numbers(std::vector<double>{1, -1}), DomainError);
}

TEST(Normalize, ScaleInvariantAndBounded) {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> k(1 + trial % 6);
        for (auto& v : k) v = uniform01(rng) * 10.0;
        const auto g = normalize_condition_numbers(k);
        std::vector<double> scaled = k;
        for (auto& v : scaled) v *= 3.7;
        const auto gs = normalize_condition_numbers(scaled);
        double top = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            EXPECT_GE(g[i], 0.0);
            EXPECT_LE(g[i], 1.0);
            EXPECT_NEAR(g[i], gs[i], 1e-15);
            top = std::max(top, g[i]);
        }
        EXPECT_EQ(top, 1.0);
        const double s = sncn(g);
        EXPECT_GE(s, 1.0);
        EXPECT_LE(s, double(g.size()));
    }
}

TEST(Sncn, Examples) {
    EXPECT_EQ(sncn(std::vector<double>{0.5, 1.0}), 1.5);
    EXPECT_EQ(sncn(normalize_condition_numbers(std::vector<double>{4, 4, 4, 4})), 4.0);
    EXPECT_NEAR(sncn(normalize_condition_numbers(std::vector<double>{1e9, 1e-9, 1e-9})), 1.0, 1e-12);
}

TEST(Report, CoversTrainableLayers) {
    Rng rng(91);
    Network net({4}, LossKind::cross_entropy);
    net.add(LayerSpec::dense(4, 6, Activation::tanh))
        .add(LayerSpec::dense(6, 5, Activation::sigmoid))
        .add(LayerSpec::dense(5, 3, Activation::softmax));
    test::randomize(net, rng);
    const Tensor probe = test::random_matrix(10, 4, rng);
    const ConditionReport r = condition_report(net, probe, 4);
    ASSERT_EQ(r.kappa.size(), 3u);
    EXPECT_EQ(r.epoch, 4);
    const auto inputs = net.trainable_inputs(probe);
    for (std::size_t t = 0; t < 3; ++t)
        EXPECT_DOUBLE_EQ(r.kappa[t], layer_condition_number(net.trainable_spec(t), net.trainable_state(t), inputs[t]));
    EXPECT_EQ(r.gamma, normalize_condition_numbers(r.kappa));
    EXPECT_DOUBLE_EQ(r.sncn, sncn(r.gamma));
    EXPECT_GE(r.sncn, 1.0);
    EXPECT_LE(r.sncn, 3.0);
}

TEST(Report, DegenerateLayerTakesMaxOfOthers) {
    Rng rng(5);
    Network net({3}, LossKind::mse);
    net.add(LayerSpec::dense(3, 4, Activation::tanh)).add(LayerSpec::dense(4, 2, Activation::relu));
    test::randomize(net, rng);
    net.weights(1).fill(0.0);
    net.bias(1).fill(0.0);
    const ConditionReport r = condition_report(net, test::random_matrix(6, 3, rng), 1);
    EXPECT_EQ(r.kappa[1], r.kappa[0]);
    EXPECT_EQ(r.sncn, 2.0);
}

TEST(Report, AllDegenerateGivesZeroSncn) {
    Network net({3}, LossKind::mse);
    net.add(LayerSpec::dense(3, 2, Activation::relu));
    const ConditionReport r = condition_report(net, Tensor({4, 3}, 1.0), 1);
    EXPECT_EQ(r.gamma, (std::vector<double>{0.0}));
    EXPECT_EQ(r.sncn, 0.0);
}

TEST(Report, JsonLine) {
    ConditionReport r{{2.0, 4.0}, {0.5, 1.0}, 1.5, 3};
    const std::string line = to_json_line(r);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    EXPECT_NE(line.find("\"epoch\":3"), std::string::npos);
    EXPECT_NE(line.find("\"sncn\":1.5"), std::string::npos);
}
