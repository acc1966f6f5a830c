#include "alrf/surface.hpp"

#include "alrf/errors.hpp"
#include "alrf/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace alrf {

SurfaceBounds parse_bounds(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw DomainError("bounds: '" + item + "' is not a number");
        }
    }
    if (v.size() != 4) throw DomainError("bounds must be x1_min,x1_max,x2_min,x2_max");
    if (!(v[0] < v[1] && v[2] < v[3])) throw DomainError("bounds: each minimum must be below its maximum");
    return SurfaceBounds{v[0], v[1], v[2], v[3]};
}

SurfaceGrid evaluate_surface(const Network& net, const SurfaceBounds& bounds, std::size_t resolution) {
    if (net.input_shape() != Tensor::Shape{2})
        throw ShapeError("surface export needs a network with 2-D input, got " + shape_string(net.input_shape()));
    if (resolution == 0) throw DomainError("surface resolution must be positive");

    auto axis = [resolution](double lo, double hi, std::size_t i) {
        return resolution == 1 ? lo : lo + (hi - lo) * double(i) / double(resolution - 1);
    };

    SurfaceGrid grid;
    grid.bounds = bounds;
    grid.resolution = resolution;
    const std::size_t n = resolution * resolution;
    Tensor points({n, 2});
    for (std::size_t j = 0; j < resolution; ++j)
        for (std::size_t i = 0; i < resolution; ++i) {
            points(j * resolution + i, 0) = axis(bounds.x1_min, bounds.x1_max, i);
            points(j * resolution + i, 1) = axis(bounds.x2_min, bounds.x2_max, j);
        }
    const Tensor out = net.forward(points);
    const std::size_t column = out.cols() > 1 ? 1 : 0;
    grid.x1.resize(n);
    grid.x2.resize(n);
    grid.score.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        grid.x1[k] = points(k, 0);
        grid.x2[k] = points(k, 1);
        grid.score[k] = out(k, column);
    }
    return grid;
}

SurfaceGrid export_surface_grid(const Network& net, const SurfaceBounds& bounds, std::size_t resolution,
                                const std::filesystem::path& out) {
    SurfaceGrid grid = evaluate_surface(net, bounds, resolution);
    std::ofstream f(out, std::ios::binary);
    if (!f) throw Error("cannot write " + out.string());
    f << "x1,x2,score\n";
    for (std::size_t k = 0; k < grid.score.size(); ++k)
        f << format_number(grid.x1[k]) << ',' << format_number(grid.x2[k]) << ',' << format_number(grid.score[k])
          << '\n';
    return grid;
}

double total_variation(const SurfaceGrid& grid) {
    const std::size_t r = grid.resolution;
    double tv = 0.0;
    for (std::size_t j = 0; j < r; ++j)
        for (std::size_t i = 0; i < r; ++i) {
            const double s = grid.score[j * r + i];
            if (i + 1 < r) tv += std::abs(grid.score[j * r + i + 1] - s);
            if (j + 1 < r) tv += std::abs(grid.score[(j + 1) * r + i] - s);
        }
    return tv;
}

} // namespace alrf
