#pragma once

#include "alrf/tensor.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace alrf {

double frobenius_norm(const Tensor& t);

struct SingularTriplet {
    double sigma = 0.0;
    std::vector<double> u; // left, length rows
    std::vector<double> v; // right, length cols
};

inline constexpr double kPowerTolerance = 1e-10;
inline constexpr int kPowerMaxIterations = 1000;
inline constexpr std::uint64_t kPowerSeed = 0x5eed1e55ULL;

/// Dominant singular triplet by power iteration on the smaller Gram matrix.
/// Converged when the iterate moves by less than `tol` in 2-norm.
/// Throws NonConvergence after `max_iter` iterations.
SingularTriplet top_singular_triplet(const Tensor& a, double tol = kPowerTolerance,
                                     int max_iter = kPowerMaxIterations,
                                     std::uint64_t seed = kPowerSeed);

/// Dominant singular triplet via one-sided Jacobi SVD. Always converges;
/// used as the fallback when power iteration stalls on a small spectral gap.
SingularTriplet top_singular_triplet_dense(const Tensor& a);

/// Best rank-1 approximation w * h of a matrix A (n x m), w of length n and
/// h of length m. Canonical sign: the first nonzero entry of w is positive.
struct Rank1Pair {
    std::vector<double> w;
    std::vector<double> h;

    Tensor reconstruct() const;
};

Rank1Pair rank1_factorize(const Tensor& a);

enum class SliceLayout {
    // One (kh*kw, cout) matrix per input channel: rows walk the filter
    // window, columns walk the output filters.
    per_input_channel,
};

struct KernelSlices {
    std::vector<Tensor> slices;
    std::array<std::size_t, 4> original_shape{}; // kh, kw, cin, cout
    SliceLayout layout = SliceLayout::per_input_channel;
};

KernelSlices slice_conv_kernel(const Tensor& kernel);
Tensor unslice_conv_kernel(const KernelSlices& s);

/// Rank-1 simplification of a weight tensor. Matrices are replaced by their
/// best rank-1 approximation; 4-D kernels are sliced, each slice simplified,
/// and reassembled.
Tensor lrf_simplify(const Tensor& theta);

/// Rank-1 simplification of a 4-D kernel viewed as a single
/// (kh*kw*cin, cout) matrix.
Tensor lrf_simplify_flattened(const Tensor& kernel);

} // namespace alrf
