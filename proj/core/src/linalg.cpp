#include "alrf/linalg.hpp"

#include "alrf/errors.hpp"
#include "alrf/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace alrf {

namespace {

double norm2(const std::vector<double>& x) {
    return std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
}

void normalize_in_place(std::vector<double>& x) {
    const double n = norm2(x);
    if (n > 0.0)
        for (auto& v : x) v /= n;
}

// y = A x  (A is n x m, x length m)
std::vector<double> multiply(const Tensor& a, const std::vector<double>& x) {
    const std::size_t n = a.rows(), m = a.cols();
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

// y = A^T x  (x length n)
std::vector<double> multiply_transposed(const Tensor& a, const std::vector<double>& x) {
    const std::size_t n = a.rows(), m = a.cols();
    std::vector<double> y(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x[i];
        for (std::size_t j = 0; j < m; ++j) y[j] += a(i, j) * xi;
    }
    return y;
}

std::vector<double> unit_vector(std::size_t n, std::size_t k) {
    std::vector<double> e(n, 0.0);
    e[k] = 1.0;
    return e;
}

// Completes a triplet from the right vector: u = A v / sigma.
SingularTriplet from_right_vector(const Tensor& a, std::vector<double> v) {
    SingularTriplet t;
    t.u = multiply(a, v);
    t.sigma = norm2(t.u);
    if (t.sigma > 0.0) {
        for (auto& x : t.u) x /= t.sigma;
    } else {
        t.u = unit_vector(a.rows(), 0);
    }
    t.v = std::move(v);
    return t;
}

SingularTriplet from_left_vector(const Tensor& a, std::vector<double> u) {
    SingularTriplet t;
    t.v = multiply_transposed(a, u);
    t.sigma = norm2(t.v);
    if (t.sigma > 0.0) {
        for (auto& x : t.v) x /= t.sigma;
    } else {
        t.v = unit_vector(a.cols(), 0);
    }
    t.u = std::move(u);
    return t;
}

} // namespace

double frobenius_norm(const Tensor& t) {
    if (t.empty()) throw ShapeError("frobenius_norm: empty tensor");
    return std::sqrt(squared_norm(t));
}

SingularTriplet top_singular_triplet(const Tensor& a, double tol, int max_iter, std::uint64_t seed) {
    if (a.rank() != 2) throw ShapeError("top_singular_triplet: expected a matrix, got " + shape_string(a.shape()));
    if (max_iter < 1 || !(tol > 0.0)) throw DomainError("top_singular_triplet: need max_iter >= 1 and tol > 0");

    const std::size_t n = a.rows(), m = a.cols();
    // Iterate on whichever Gram matrix is smaller.
    const bool on_right = m <= n;
    const std::size_t dim = on_right ? m : n;

    if (squared_norm(a) == 0.0) {
        SingularTriplet t;
        t.u = unit_vector(n, 0);
        t.v = unit_vector(m, 0);
        return t;
    }

    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> x(dim);
    for (auto& v : x) v = gauss(rng);
    normalize_in_place(x);

    for (int it = 0; it < max_iter; ++it) {
        std::vector<double> y = on_right ? multiply_transposed(a, multiply(a, x)) : multiply(a, multiply_transposed(a, x));
        const double ny = norm2(y);
        if (ny == 0.0) {
            // Start vector orthogonal to the row space; restart along a fresh direction.
            for (auto& v : x) v = gauss(rng);
            normalize_in_place(x);
            continue;
        }
        for (auto& v : y) v /= ny;
        double delta = 0.0;
        for (std::size_t i = 0; i < dim; ++i) delta += (y[i] - x[i]) * (y[i] - x[i]);
        x = std::move(y);
        if (std::sqrt(delta) < tol) {
            return on_right ? from_right_vector(a, std::move(x)) : from_left_vector(a, std::move(x));
        }
    }
    throw NonConvergence("top_singular_triplet: no convergence within " + std::to_string(max_iter) +
                         " iterations");
}

SingularTriplet top_singular_triplet_dense(const Tensor& a) {
    if (a.rank() != 2) throw ShapeError("top_singular_triplet_dense: expected a matrix");
    // Work on the orientation with at most as many columns as rows.
    const bool transposed = a.cols() > a.rows();
    Tensor u = transposed ? transpose(a) : a;
    const std::size_t n = u.rows(), m = u.cols();
    Tensor v = Tensor::identity(m);

    // Hestenes one-sided Jacobi: rotate column pairs until mutually orthogonal.
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    alpha += u(i, p) * u(i, p);
                    beta += u(i, q) * u(i, q);
                    gamma += u(i, p) * u(i, q);
                }
                if (gamma == 0.0) continue;
                const double scale = std::sqrt(alpha * beta);
                if (scale == 0.0) continue;
                off = std::max(off, std::abs(gamma) / scale);
                if (std::abs(gamma) <= 1e-15 * scale) continue;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < n; ++i) {
                    const double up = u(i, p), uq = u(i, q);
                    u(i, p) = c * up - s * uq;
                    u(i, q) = s * up + c * uq;
                }
                for (std::size_t i = 0; i < m; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (off <= 1e-15) break;
    }

    std::size_t best = 0;
    double best_norm = -1.0;
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += u(i, j) * u(i, j);
        if (s > best_norm) {
            best_norm = s;
            best = j;
        }
    }
    std::vector<double> right(m);
    for (std::size_t i = 0; i < m; ++i) right[i] = v(i, best);
    // Refresh the pair from the original matrix so u and sigma are consistent with a.
    return transposed ? from_left_vector(a, std::move(right)) : from_right_vector(a, std::move(right));
}

Tensor Rank1Pair::reconstruct() const {
    Tensor out({w.size(), h.size()});
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = 0; j < h.size(); ++j) out(i, j) = w[i] * h[j];
    return out;
}

Rank1Pair rank1_factorize(const Tensor& a) {
    if (a.rank() != 2) throw ShapeError("rank1_factorize: expected a matrix, got " + shape_string(a.shape()));

    Rank1Pair pair;
    if (squared_norm(a) == 0.0) {
        pair.w.assign(a.rows(), 0.0);
        pair.h.assign(a.cols(), 0.0);
        return pair;
    }

    SingularTriplet t;
    if (std::min(a.rows(), a.cols()) <= 2) {
        t = top_singular_triplet_dense(a);
    } else {
        try {
            t = top_singular_triplet(a);
        } catch (const NonConvergence&) {
            t = top_singular_triplet_dense(a);
        }
    }

    pair.w = std::move(t.u);
    for (auto& x : pair.w) x *= t.sigma;
    pair.h = std::move(t.v);

    auto first = std::find_if(pair.w.begin(), pair.w.end(), [](double x) { return x != 0.0; });
    if (first != pair.w.end() && *first < 0.0) {
        for (auto& x : pair.w) x = -x;
        for (auto& x : pair.h) x = -x;
    }
    return pair;
}

KernelSlices slice_conv_kernel(const Tensor& kernel) {
    if (kernel.rank() != 4) {
        throw ShapeError("slice_conv_kernel: expected (kh,kw,cin,cout), got " + shape_string(kernel.shape()));
    }
    const auto& s = kernel.shape();
    const std::size_t window = s[0] * s[1], cin = s[2], cout = s[3];

    KernelSlices out;
    out.original_shape = {s[0], s[1], s[2], s[3]};
    out.slices.reserve(cin);
    for (std::size_t c = 0; c < cin; ++c) {
        Tensor m({window, cout});
        for (std::size_t p = 0; p < window; ++p)
            for (std::size_t o = 0; o < cout; ++o) m(p, o) = kernel[(p * cin + c) * cout + o];
        out.slices.push_back(std::move(m));
    }
    return out;
}

Tensor unslice_conv_kernel(const KernelSlices& s) {
    const auto [kh, kw, cin, cout] = s.original_shape;
    const std::size_t window = kh * kw;
    if (s.slices.size() != cin) {
        throw ShapeError("unslice_conv_kernel: expected " + std::to_string(cin) + " slices, got " +
                         std::to_string(s.slices.size()));
    }
    Tensor kernel({kh, kw, cin, cout});
    for (std::size_t c = 0; c < cin; ++c) {
        const Tensor& m = s.slices[c];
        if (m.shape() != Tensor::Shape{window, cout}) {
            throw ShapeError("unslice_conv_kernel: slice " + std::to_string(c) + " has shape " +
                             shape_string(m.shape()));
        }
        for (std::size_t p = 0; p < window; ++p)
            for (std::size_t o = 0; o < cout; ++o) kernel[(p * cin + c) * cout + o] = m(p, o);
    }
    return kernel;
}

Tensor lrf_simplify(const Tensor& theta) {
    if (theta.rank() == 2) return rank1_factorize(theta).reconstruct();
    if (theta.rank() == 4) {
        KernelSlices s = slice_conv_kernel(theta);
        for (auto& m : s.slices) m = rank1_factorize(m).reconstruct();
        return unslice_conv_kernel(s);
    }
    throw ShapeError("lrf_simplify: expected a 2-D or 4-D weight tensor, got " + shape_string(theta.shape()));
}

Tensor lrf_simplify_flattened(const Tensor& kernel) {
    if (kernel.rank() != 4) throw ShapeError("lrf_simplify_flattened: expected a 4-D kernel");
    const auto& s = kernel.shape();
    const Tensor m = kernel.reshaped({s[0] * s[1] * s[2], s[3]});
    return rank1_factorize(m).reconstruct().reshaped(s);
}

} // namespace alrf
