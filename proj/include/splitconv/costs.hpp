#pragma once

#include <cstddef>

#include "splitconv/tensor.hpp"

namespace splitconv::costs {

// Shared accounting formulas. The planner predicts with these and the
// simulator charges with the same ones, so trace-vs-plan equality is a check
// on which tensors each context actually touched, not on arithmetic details.

constexpr std::size_t value_bytes = 8; // IEEE-754 double

inline std::size_t conv_dense_macs(const ConvGeometry& g) {
    return g.in_channels * g.out_channels * g.out_h() * g.out_w() * g.kernel * g.kernel;
}

// spatial term of the trusted convolution: r basis channels instead of N
inline std::size_t conv_trusted_spatial_macs(const ConvGeometry& g, std::size_t r) {
    return r * g.out_channels * g.out_h() * g.out_w() * g.kernel * g.kernel;
}

inline std::size_t kernel_transform_macs(const ConvGeometry& g, std::size_t r) {
    return g.out_channels * g.in_channels * r * g.kernel * g.kernel;
}

inline std::size_t light_svd_macs(std::size_t r, std::size_t channels, std::size_t h,
                                  std::size_t w, std::size_t max_iter) {
    return 2 * max_iter * r * channels * h * w;
}

// factored trusted input plus trusted output
inline std::size_t conv_mem_trusted(const ConvGeometry& g, std::size_t r) {
    return r * (g.in_channels + g.in_h * g.in_w) + g.out_channels * g.out_h() * g.out_w();
}

// dense residual input plus untrusted output
inline std::size_t conv_mem_untrusted(const ConvGeometry& g) {
    return g.in_channels * g.in_h * g.in_w + g.out_channels * g.out_h() * g.out_w();
}

// forward boundary traffic: Y^(U) crosses untrusted -> trusted at merge
inline std::size_t conv_xfer_fwd_bytes(const ConvGeometry& g) {
    return value_bytes * g.out_channels * g.out_h() * g.out_w();
}

// backward boundary traffic: dY out to the untrusted context, dX back for the
// preceding elementwise block (absent for the first conv), and the trusted
// weight-gradient share out for accumulation
inline std::size_t conv_xfer_bwd_bytes(const ConvGeometry& g, bool first_conv) {
    std::size_t bytes = g.out_channels * g.out_h() * g.out_w();
    if (!first_conv) bytes += g.in_channels * g.in_h * g.in_w;
    bytes += g.out_channels * g.in_channels * g.kernel * g.kernel;
    return value_bytes * bytes;
}

// trusted backward compute: r*M correlations then the coefficient expansion
inline std::size_t conv_trusted_bwd_macs(const ConvGeometry& g, std::size_t r) {
    return conv_trusted_spatial_macs(g, r) + kernel_transform_macs(g, r);
}

} // namespace splitconv::costs
