#pragma once

#include "alrf/netcore.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace alrf {

struct SurfaceBounds {
    double x1_min = -3.0, x1_max = 3.0;
    double x2_min = -3.0, x2_max = 3.0;
};

/// Parses "x1_min,x1_max,x2_min,x2_max".
SurfaceBounds parse_bounds(const std::string& text);

/// Scores on a uniform resolution x resolution grid; x1 varies fastest.
struct SurfaceGrid {
    SurfaceBounds bounds;
    std::size_t resolution = 0;
    std::vector<double> x1, x2, score;
};

inline constexpr std::size_t kDefaultSurfaceResolution = 200;

/// Class-1 score of a 2-input network over the grid (column 0 when the
/// network has a single output). Throws ShapeError if the input is not 2-D.
SurfaceGrid evaluate_surface(const Network& net, const SurfaceBounds& bounds,
                             std::size_t resolution = kDefaultSurfaceResolution);

/// Writes "x1,x2,score" rows (with header) and returns the grid.
SurfaceGrid export_surface_grid(const Network& net, const SurfaceBounds& bounds, std::size_t resolution,
                                const std::filesystem::path& out);

/// Anisotropic total variation: sum of absolute differences between
/// horizontally and vertically adjacent grid scores.
double total_variation(const SurfaceGrid& grid);

} // namespace alrf
