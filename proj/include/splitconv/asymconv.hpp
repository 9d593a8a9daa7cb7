#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "splitconv/spectral.hpp"
#include "splitconv/tensor.hpp"

namespace splitconv {

// activation split for one layer: low-rank trusted part plus dense residual;
// reconstruct(trusted) + untrusted equals the original activation
struct DecomposedActivation {
    FactoredActivation trusted;
    Tensor untrusted;
};

// Kernels pre-mixed by the factor coefficients: W'[i,i'] = sum_j u_i'[j] W[i,j].
// The trusted convolution then touches only the r basis channels.
struct TransformedKernels {
    Tensor w; // out_channels x rank x k x k
};

// MAC cost M*N*r*k^2; recomputed whenever the factors change
TransformedKernels transform_kernels(const Tensor& w, const FactoredActivation& f);

// Convolve the r basis channels v_i with the transformed kernels. Equals
// conv2d_forward(reconstruct(f), w) without ever touching N input channels;
// spatial MAC cost r*M*H'*W'*k^2.
Tensor trusted_forward(const FactoredActivation& f, const TransformedKernels& wt,
                       const ConvGeometry& g);

// dense path on the residual; plain convolution with a different input
Tensor untrusted_forward(const Tensor& xu, const Tensor& w, const ConvGeometry& g);

// elementwise sum, trusted addend first, plus optional per-output-channel bias
Tensor merge_outputs(const Tensor& yt, const Tensor& yu,
                     const std::vector<double>* bias = nullptr);

// Trusted weight gradient in factored form: correlate each basis channel v_i'
// with dY once (r*M correlations), then expand through the u coefficients.
// trusted_weight_grad + untrusted_weight_grad equals the dense weight gradient.
Tensor trusted_weight_grad(const FactoredActivation& f, const Tensor& dy,
                           const ConvGeometry& g);
Tensor untrusted_weight_grad(const Tensor& xu, const Tensor& dy, const ConvGeometry& g);

} // namespace splitconv
