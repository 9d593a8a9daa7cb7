#include "splitconv/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "splitconv/kernels.hpp"

namespace splitconv {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

void check_finite(const std::vector<double>& data) {
    for (double v : data) {
        if (!std::isfinite(v)) throw InputError("tensor value is not finite");
    }
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw InputError(msg);
}

} // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    require(data_.size() == shape_product(shape_),
            "tensor data length " + std::to_string(data_.size()) +
                " does not match shape " + shape_str(shape_));
    check_finite(data_);
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
    require(shape_product(shape) == data_.size(),
            "reshape " + shape_str(shape_) + " -> " + shape_str(shape) + " changes element count");
    Tensor out;
    out.shape_ = std::move(shape);
    out.data_ = data_;
    return out;
}

double Tensor::frobenius_norm() const {
    return std::sqrt(kernels::active().sumsq(data_.data(), data_.size()));
}

namespace {

std::size_t conv_out_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                            std::size_t pad) {
    std::size_t padded = in + 2 * pad;
    require(kernel >= 1 && stride >= 1, "conv kernel and stride must be >= 1");
    require(padded >= kernel, "conv input extent " + std::to_string(in) +
                                  " too small for kernel " + std::to_string(kernel));
    return (padded - kernel) / stride + 1;
}

} // namespace

ConvGeometry ConvGeometry::make(std::size_t in_channels, std::size_t out_channels,
                                std::size_t kernel, std::size_t stride, std::size_t pad,
                                std::size_t in_h, std::size_t in_w) {
    ConvGeometry g{in_channels, out_channels, kernel, stride, pad, in_h, in_w};
    conv_out_extent(in_h, kernel, stride, pad);
    conv_out_extent(in_w, kernel, stride, pad);
    return g;
}

std::size_t ConvGeometry::out_h() const { return conv_out_extent(in_h, kernel, stride, pad); }
std::size_t ConvGeometry::out_w() const { return conv_out_extent(in_w, kernel, stride, pad); }

namespace {

void check_conv_shapes(const Tensor& x, const Tensor& w, const ConvGeometry& g) {
    require(x.ndim() == 3, "conv input must be 3-d (channels x H x W), got " +
                               std::to_string(x.ndim()) + "-d");
    require(w.ndim() == 4, "conv kernels must be 4-d (out x in x k x k), got " +
                               std::to_string(w.ndim()) + "-d");
    require(x.extent(0) == g.in_channels,
            "conv input channels " + std::to_string(x.extent(0)) + " != geometry in_channels " +
                std::to_string(g.in_channels));
    require(x.extent(1) == g.in_h && x.extent(2) == g.in_w,
            "conv input extents " + std::to_string(x.extent(1)) + "x" +
                std::to_string(x.extent(2)) + " != geometry " + std::to_string(g.in_h) + "x" +
                std::to_string(g.in_w));
    require(w.extent(0) == g.out_channels,
            "kernel out channels " + std::to_string(w.extent(0)) + " != geometry out_channels " +
                std::to_string(g.out_channels));
    require(w.extent(1) == g.in_channels,
            "kernel in channels " + std::to_string(w.extent(1)) + " != geometry in_channels " +
                std::to_string(g.in_channels));
    require(w.extent(2) == g.kernel && w.extent(3) == g.kernel,
            "kernel spatial extents " + std::to_string(w.extent(2)) + "x" +
                std::to_string(w.extent(3)) + " != geometry kernel " + std::to_string(g.kernel));
}

} // namespace

Tensor conv2d_forward(const Tensor& x, const Tensor& w, const ConvGeometry& g) {
    check_conv_shapes(x, w, g);
    const std::size_t h = x.extent(1), wid = x.extent(2);
    const std::size_t oh = g.out_h(), ow = g.out_w();
    const std::size_t k = g.kernel;
    Tensor y({g.out_channels, oh, ow});
    const auto& ops = kernels::active();

    for (std::size_t i = 0; i < g.out_channels; ++i) {
        for (std::size_t r = 0; r < oh; ++r) {
            double* yrow = y.data() + (i * oh + r) * ow;
            for (std::size_t j = 0; j < g.in_channels; ++j) {
                for (std::size_t kh = 0; kh < k; ++kh) {
                    std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(r * g.stride + kh) -
                                        static_cast<std::ptrdiff_t>(g.pad);
                    if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h)) continue;
                    const double* xrow = x.data() + (j * h + ih) * wid;
                    for (std::size_t kw = 0; kw < k; ++kw) {
                        double tap = w.at4(i, j, kh, kw);
                        std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(kw) -
                                               static_cast<std::ptrdiff_t>(g.pad);
                        if (g.stride == 1) {
                            // in-bounds output column range for this tap
                            std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
                            std::ptrdiff_t hi = std::min<std::ptrdiff_t>(
                                ow, static_cast<std::ptrdiff_t>(wid) - shift);
                            if (lo < hi)
                                ops.axpy(yrow + lo, xrow + lo + shift, tap, hi - lo);
                        } else {
                            for (std::size_t c = 0; c < ow; ++c) {
                                std::ptrdiff_t iw =
                                    static_cast<std::ptrdiff_t>(c * g.stride) + shift;
                                if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(wid)) continue;
                                yrow[c] += tap * xrow[iw];
                            }
                        }
                    }
                }
            }
        }
    }
    return y;
}

Tensor conv2d_backward_weight(const Tensor& x, const Tensor& dy, const ConvGeometry& g) {
    require(x.ndim() == 3 && dy.ndim() == 3, "conv backward expects 3-d activations");
    const std::size_t h = x.extent(1), wid = x.extent(2);
    const std::size_t oh = g.out_h(), ow = g.out_w();
    require(x.extent(0) == g.in_channels && h == g.in_h && wid == g.in_w,
            "conv input shape does not match geometry");
    require(dy.extent(0) == g.out_channels && dy.extent(1) == oh && dy.extent(2) == ow,
            "conv output gradient shape mismatch");
    const std::size_t k = g.kernel;
    Tensor dw({g.out_channels, g.in_channels, k, k});
    const auto& ops = kernels::active();

    for (std::size_t i = 0; i < g.out_channels; ++i) {
        for (std::size_t j = 0; j < g.in_channels; ++j) {
            for (std::size_t kh = 0; kh < k; ++kh) {
                for (std::size_t kw = 0; kw < k; ++kw) {
                    double acc = 0.0;
                    std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(kw) -
                                           static_cast<std::ptrdiff_t>(g.pad);
                    for (std::size_t r = 0; r < oh; ++r) {
                        std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(r * g.stride + kh) -
                                            static_cast<std::ptrdiff_t>(g.pad);
                        if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h)) continue;
                        const double* xrow = x.data() + (j * h + ih) * wid;
                        const double* dyrow = dy.data() + (i * oh + r) * ow;
                        if (g.stride == 1) {
                            std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
                            std::ptrdiff_t hi = std::min<std::ptrdiff_t>(
                                ow, static_cast<std::ptrdiff_t>(wid) - shift);
                            if (lo < hi) acc += ops.dot(xrow + lo + shift, dyrow + lo, hi - lo);
                        } else {
                            for (std::size_t c = 0; c < ow; ++c) {
                                std::ptrdiff_t iw =
                                    static_cast<std::ptrdiff_t>(c * g.stride) + shift;
                                if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(wid)) continue;
                                acc += xrow[iw] * dyrow[c];
                            }
                        }
                    }
                    dw.at4(i, j, kh, kw) = acc;
                }
            }
        }
    }
    return dw;
}

Tensor conv2d_backward_input(const Tensor& dy, const Tensor& w, const ConvGeometry& g) {
    require(dy.ndim() == 3, "conv backward expects 3-d gradient");
    require(w.ndim() == 4, "conv kernels must be 4-d");
    const std::size_t oh = g.out_h(), ow = g.out_w();
    require(dy.extent(0) == g.out_channels && dy.extent(1) == oh && dy.extent(2) == ow,
            "conv output gradient shape mismatch");
    require(w.extent(0) == g.out_channels && w.extent(1) == g.in_channels &&
                w.extent(2) == g.kernel && w.extent(3) == g.kernel,
            "conv kernel shape does not match geometry");
    const std::size_t k = g.kernel;
    const std::size_t h = g.in_h, wid = g.in_w;
    Tensor dx({g.in_channels, h, wid});
    const auto& ops = kernels::active();

    for (std::size_t i = 0; i < g.out_channels; ++i) {
        for (std::size_t j = 0; j < g.in_channels; ++j) {
            for (std::size_t kh = 0; kh < k; ++kh) {
                for (std::size_t kw = 0; kw < k; ++kw) {
                    double tap = w.at4(i, j, kh, kw);
                    std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(kw) -
                                           static_cast<std::ptrdiff_t>(g.pad);
                    for (std::size_t r = 0; r < oh; ++r) {
                        std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(r * g.stride + kh) -
                                            static_cast<std::ptrdiff_t>(g.pad);
                        if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h)) continue;
                        double* dxrow = dx.data() + (j * h + ih) * wid;
                        const double* dyrow = dy.data() + (i * oh + r) * ow;
                        if (g.stride == 1) {
                            std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
                            std::ptrdiff_t hi = std::min<std::ptrdiff_t>(
                                ow, static_cast<std::ptrdiff_t>(wid) - shift);
                            if (lo < hi) ops.axpy(dxrow + lo + shift, dyrow + lo, tap, hi - lo);
                        } else {
                            for (std::size_t c = 0; c < ow; ++c) {
                                std::ptrdiff_t iw =
                                    static_cast<std::ptrdiff_t>(c * g.stride) + shift;
                                if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(wid)) continue;
                                dxrow[iw] += tap * dyrow[c];
                            }
                        }
                    }
                }
            }
        }
    }
    return dx;
}

Tensor relu_forward(const Tensor& x) {
    Tensor y(x.shape());
    kernels::active().relu(y.data(), x.data(), x.size());
    return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& dy) {
    require(x.shape() == dy.shape(), "relu backward shape mismatch");
    Tensor dx(x.shape());
    kernels::active().relu_mask(dx.data(), x.data(), dy.data(), x.size());
    return dx;
}

Tensor pool_forward(const Tensor& x, std::size_t k, PoolMode mode) {
    require(x.ndim() == 3, "pool input must be 3-d");
    require(k >= 1, "pool window must be >= 1");
    const std::size_t n = x.extent(0), h = x.extent(1), w = x.extent(2);
    require(h % k == 0 && w % k == 0,
            "pool window " + std::to_string(k) + " does not divide spatial extents " +
                std::to_string(h) + "x" + std::to_string(w));
    const std::size_t oh = h / k, ow = w / k;
    Tensor y({n, oh, ow});
    const double inv = 1.0 / static_cast<double>(k * k);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t r = 0; r < oh; ++r) {
            for (std::size_t q = 0; q < ow; ++q) {
                if (mode == PoolMode::avg) {
                    double acc = 0.0;
                    for (std::size_t dh = 0; dh < k; ++dh)
                        for (std::size_t dw = 0; dw < k; ++dw)
                            acc += x.at3(c, r * k + dh, q * k + dw);
                    y.at3(c, r, q) = acc * inv;
                } else {
                    double best = x.at3(c, r * k, q * k);
                    for (std::size_t dh = 0; dh < k; ++dh)
                        for (std::size_t dw = 0; dw < k; ++dw) {
                            double v = x.at3(c, r * k + dh, q * k + dw);
                            if (v > best) best = v;
                        }
                    y.at3(c, r, q) = best;
                }
            }
        }
    }
    return y;
}

Tensor pool_backward(const Tensor& x, const Tensor& dy, std::size_t k, PoolMode mode) {
    require(x.ndim() == 3 && dy.ndim() == 3, "pool backward expects 3-d tensors");
    const std::size_t n = x.extent(0), h = x.extent(1), w = x.extent(2);
    require(h % k == 0 && w % k == 0, "pool window does not divide spatial extents");
    const std::size_t oh = h / k, ow = w / k;
    require(dy.extent(0) == n && dy.extent(1) == oh && dy.extent(2) == ow,
            "pool output gradient shape mismatch");
    Tensor dx({n, h, w});
    const double inv = 1.0 / static_cast<double>(k * k);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t r = 0; r < oh; ++r) {
            for (std::size_t q = 0; q < ow; ++q) {
                double grad = dy.at3(c, r, q);
                if (mode == PoolMode::avg) {
                    for (std::size_t dh = 0; dh < k; ++dh)
                        for (std::size_t dw = 0; dw < k; ++dw)
                            dx.at3(c, r * k + dh, q * k + dw) += grad * inv;
                } else {
                    // first row-major maximum gets the gradient
                    std::size_t bh = 0, bw = 0;
                    double best = x.at3(c, r * k, q * k);
                    for (std::size_t dh = 0; dh < k; ++dh)
                        for (std::size_t dw = 0; dw < k; ++dw) {
                            double v = x.at3(c, r * k + dh, q * k + dw);
                            if (v > best) {
                                best = v;
                                bh = dh;
                                bw = dw;
                            }
                        }
                    dx.at3(c, r * k + bh, q * k + bw) += grad;
                }
            }
        }
    }
    return dx;
}

Tensor flatten_channels(const Tensor& x) {
    require(x.ndim() == 3, "flatten_channels expects a 3-d tensor");
    return x.reshaped({x.extent(0), x.extent(1) * x.extent(2)});
}

Tensor unflatten_channels(const Tensor& xf, std::size_t h, std::size_t w) {
    require(xf.ndim() == 2, "unflatten_channels expects a 2-d matrix");
    require(xf.extent(1) == h * w, "unflatten extents do not match column count");
    return xf.reshaped({xf.extent(0), h, w});
}

} // namespace splitconv
