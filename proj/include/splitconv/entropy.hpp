#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "splitconv/spectral.hpp"
#include "splitconv/tensor.hpp"

namespace splitconv {

// SVD-channel entropy in bits of a descending nonnegative spectrum:
//   mu = -log2( sum_j (s_j / sum s)^2 )
// An all-zero spectrum maps to 0 by convention.
double svd_channel_entropy(std::span<const double> s);

// N' = ceil(2^mu), with values within 1e-9 of an integer snapped to it so
// exact-entropy cases (all singular values equal) do not round up.
std::size_t principal_count(double mu);

// fraction of spectral energy held by the leading n values
double energy_fraction(std::span<const double> s, std::size_t n);

// s_i = scale * decay^(i-1), the spectrum family behind the 97%-energy
// guarantee of the principal-channel count.
struct GeometricSpectrum {
    double scale = 1.0;   // > 0
    double decay = 0.5;   // in (0,1)
    std::size_t length = 1;

    std::vector<double> values() const;
};

// Rewrites each channel as k^2 shifted copies ("patches"): patch (q,r) of
// channel j is X_j shifted by (q - ceil(k/2), r - ceil(k/2)) with vacated
// rows/columns zero-filled. Output is (N*k^2) x H x W, patch-major within
// each channel. Shifting then 1x1-convolving with W[i,j,q,r] reproduces the
// k x k same-padding convolution exactly. k must be odd.
Tensor extract_patches(const Tensor& x, std::size_t k);

// Per-channel entropy over the k^2 patches of that channel, plus the output
// bound log2( sum over the N' smallest patch entropies of ceil(2^mu_hat) ).
struct PatchEntropyReport {
    std::size_t kernel = 1;
    std::vector<double> patch_entropy; // mu_hat_j, one per channel
    double mean_entropy = 0.0;         // mean of the N' smallest mu_hat
    double output_bound = 0.0;
};

PatchEntropyReport make_patch_report(const Tensor& x, std::size_t k);

// Output-entropy bound after convolution: 1x1 kernels use log2(ceil(2^mu));
// k x k kernels use the patch report per the theorem's ascending ordering.
double conv_output_entropy_bound(const SpectralProfile& input,
                                 const PatchEntropyReport* patches = nullptr);

// average-pooling output bound: log2(ceil(2^mu))
double pooling_entropy_bound(const SpectralProfile& input);

enum class ElementwiseOp { relu, maxpool, avgpool };

struct EntropyDelta {
    double before = 0.0;
    double after = 0.0;
};

// measured entropy before/after an elementwise layer (pool windows are 2x2);
// reported only, no bound asserted for the non-linear ops
EntropyDelta entropy_delta_study(const Tensor& x, ElementwiseOp op);

struct KernelEntropyStat {
    std::size_t kernel = 1;
    double mean_mu = 0.0;
    double q10 = 0.0;
    double q50 = 0.0;
    double q90 = 0.0;
    std::size_t n_samples = 0;
};

// Distribution of per-channel patch entropy across a dataset for each kernel
// size. One sample per (image, channel).
std::vector<KernelEntropyStat> kernel_size_entropy_study(const std::vector<Tensor>& dataset,
                                                         const std::vector<std::size_t>& k_list);

} // namespace splitconv
