#include "alrf/tensor.hpp"

#include "alrf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace alrf {

namespace {

std::size_t checked_volume(const Tensor::Shape& shape) {
    if (shape.empty() || shape.size() > 4) {
        throw ShapeError("tensor rank must be 1..4, got " + std::to_string(shape.size()));
    }
    std::size_t n = 1;
    for (auto d : shape) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive: " + shape_string(shape));
        n *= d;
    }
    return n;
}

} // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    data_.assign(checked_volume(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    if (checked_volume(shape_) != data_.size()) {
        throw ShapeError("value count " + std::to_string(data_.size()) + " does not match shape " +
                         shape_string(shape_));
    }
    if (!all_finite()) throw DomainError("tensor values must be finite");
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
    return Tensor({rows, cols}, std::vector<double>(values));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
    return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) throw ShapeError("axis out of range");
    return shape_[axis];
}

std::size_t Tensor::rows() const {
    if (rank() != 2) throw ShapeError("expected a matrix, got shape " + shape_string(shape_));
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2) throw ShapeError("expected a matrix, got shape " + shape_string(shape_));
    return shape_[1];
}

Tensor Tensor::reshaped(Shape shape) const {
    if (checked_volume(shape) != data_.size()) {
        throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    }
    Tensor out;
    out.shape_ = std::move(shape);
    out.data_ = data_;
    return out;
}

void Tensor::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_string(const Tensor::Shape& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* context) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(context) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
    }
}

Tensor operator+(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out = a;
    std::transform(a.values().begin(), a.values().end(), b.values().begin(), out.values().begin(),
                   std::plus<>());
    return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "subtract");
    Tensor out = a;
    std::transform(a.values().begin(), a.values().end(), b.values().begin(), out.values().begin(),
                   std::minus<>());
    return out;
}

Tensor operator*(double s, const Tensor& a) {
    Tensor out = a;
    for (auto& v : out.values()) v *= s;
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    if (b.rows() != k) {
        throw ShapeError("matmul: inner dimensions differ " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
    }
    Tensor out({n, m});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a(i, p);
            if (aip == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) out(i, j) += aip * b(p, j);
        }
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    Tensor out({a.cols(), a.rows()});
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

double squared_norm(const Tensor& t) {
    return std::inner_product(t.values().begin(), t.values().end(), t.values().begin(), 0.0);
}

} // namespace alrf
