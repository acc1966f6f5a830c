#include "alrf/errors.hpp"
#include "alrf/surface.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

using namespace alrf;

TEST(Surface, ZeroWeightSoftmaxIsFlat) {
    Network net({2}, LossKind::cross_entropy);
    net.add(LayerSpec::dense(2, 4, Activation::relu)).add(LayerSpec::dense(4, 2, Activation::softmax));
    const SurfaceGrid g = evaluate_surface(net, {}, 25);
    ASSERT_EQ(g.score.size(), 625u);
    for (double s : g.score) EXPECT_EQ(s, 0.5);
    EXPECT_EQ(total_variation(g), 0.0);
}

TEST(Surface, GridLayout) {
    Network net({2}, LossKind::mse);
    net.add(LayerSpec::dense(2, 1));
    net.weights(0) = Tensor::matrix(2, 1, {1.0, 10.0});
    const SurfaceGrid g = evaluate_surface(net, parse_bounds("0,1,-2,2"), 3);
    EXPECT_EQ(g.x1, (std::vector<double>{0, 0.5, 1, 0, 0.5, 1, 0, 0.5, 1}));
    EXPECT_EQ(g.x2, (std::vector<double>{-2, -2, -2, 0, 0, 0, 2, 2, 2}));
    for (std::size_t i = 0; i < 9; ++i) EXPECT_DOUBLE_EQ(g.score[i], g.x1[i] + 10.0 * g.x2[i]);
    // Rows contribute 3 * 2 * 0.5, columns 3 * 2 * 20.
    EXPECT_DOUBLE_EQ(total_variation(g), 3.0 + 120.0);
}

TEST(Surface, ExportWritesSquaredRowCount) {
    Rng rng(3);
    Network net({2}, LossKind::cross_entropy);
    net.add(LayerSpec::dense(2, 2, Activation::softmax));
    test::randomize(net, rng);
    const auto path = std::filesystem::temp_directory_path() / "alrf_surface_test.csv";
    export_surface_grid(net, {}, 17, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x1,x2,score");
    std::size_t rows = 0;
    while (std::getline(in, line)) rows += !line.empty();
    EXPECT_EQ(rows, 17u * 17u);
}

TEST(Surface, Errors) {
    Network wide({3}, LossKind::mse);
    wide.add(LayerSpec::dense(3, 1));
    EXPECT_THROW(evaluate_surface(wide, {}, 10), ShapeError);
    Network net({2}, LossKind::mse);
    net.add(LayerSpec::dense(2, 1));
    EXPECT_THROW(evaluate_surface(net, {}, 0), DomainError);
    EXPECT_THROW(parse_bounds("1,2,3"), DomainError);
    EXPECT_THROW(parse_bounds("1,0,0,1"), DomainError);
}
