#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "splitconv/errors.hpp"

namespace splitconv {

// Dense row-major N-d array of doubles. Shape is fixed at construction and
// every value must be finite; all layer math flows through these.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);            // zero-filled
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor zeros(std::vector<std::size_t> shape);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t ndim() const { return shape_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_[axis]; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<const double> values() const { return {data_.data(), data_.size()}; }
    std::span<double> values() { return {data_.data(), data_.size()}; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at3(std::size_t c, std::size_t h, std::size_t w) {
        return data_[(c * shape_[1] + h) * shape_[2] + w];
    }
    double at3(std::size_t c, std::size_t h, std::size_t w) const {
        return data_[(c * shape_[1] + h) * shape_[2] + w];
    }
    double& at2(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
    double at2(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
    double& at4(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
        return data_[((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
    }
    double at4(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
        return data_[((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
    }

    // same data, new extents (product must match)
    Tensor reshaped(std::vector<std::size_t> shape) const;

    double frobenius_norm() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// Convolution layer geometry, tied to a concrete input size. Output extents
// follow H' = floor((H + 2p - k)/s) + 1 and must be >= 1.
struct ConvGeometry {
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel = 1;
    std::size_t stride = 1;
    std::size_t pad = 0;
    std::size_t in_h = 0;
    std::size_t in_w = 0;

    static ConvGeometry make(std::size_t in_channels, std::size_t out_channels,
                             std::size_t kernel, std::size_t stride, std::size_t pad,
                             std::size_t in_h, std::size_t in_w);

    std::size_t out_h() const;
    std::size_t out_w() const;
};

// Y_i = sum_j X_j (*) W_ij, direct cross-correlation with zero padding.
// Per-output accumulation order is fixed: channel-major, then kernel row,
// then kernel column.
Tensor conv2d_forward(const Tensor& x, const Tensor& w, const ConvGeometry& g);

// dW_ij = X_j (*) dY_i over valid positions
Tensor conv2d_backward_weight(const Tensor& x, const Tensor& dy, const ConvGeometry& g);

// dX = full (transposed) convolution of dY with W
Tensor conv2d_backward_input(const Tensor& dy, const Tensor& w, const ConvGeometry& g);

Tensor relu_forward(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& dy);

enum class PoolMode { max, avg };

// Non-overlapping k x k windows; spatial extents must divide by k.
// Max-pool ties break on the first (row-major) maximal index.
Tensor pool_forward(const Tensor& x, std::size_t k, PoolMode mode);
Tensor pool_backward(const Tensor& x, const Tensor& dy, std::size_t k, PoolMode mode);

// N x H x W -> N x (H*W); row j is channel j in row-major spatial order
Tensor flatten_channels(const Tensor& x);
Tensor unflatten_channels(const Tensor& xf, std::size_t h, std::size_t w);

} // namespace splitconv
