#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "splitconv/planner.hpp"
#include "splitconv/tensor.hpp"

namespace splitconv {

// i.i.d. zero-mean Gaussian mask with variance nsr * mean(x^2),
// deterministic for a given seed
Tensor add_noise(const Tensor& x, double nsr, std::uint64_t seed);

// Plug-in mutual information (bits) from a joint 2-d histogram with
// equal-width bins over each marginal's observed range. Paired scalar
// samples; a constant stream on either side gives 0.
double estimate_mi(std::span<const double> a, std::span<const double> b,
                   std::size_t bins = 64);

// -sum p log2 p under the same binning; equals estimate_mi(a, a)
double binned_entropy(std::span<const double> a, std::size_t bins = 64);

struct LeakageReport {
    double nsr = 0.0;
    double mi_bits = 0.0;        // I(X; X^(U))
    double self_info_bits = 0.0; // I(X; X)
    double relative_leakage = 0.0;
    std::size_t n_samples = 0;
    std::size_t bins = 64;
};

struct LeakageOptions {
    std::size_t bins = 64;
    std::size_t max_iter = 2;
};

// Decompose every sample at rank r, optionally mask the residual at each
// nsr, and estimate I(X; X^(U)) over position-wise paired scalars pooled
// across the dataset.
std::vector<LeakageReport> leakage_sweep(const std::vector<Tensor>& samples, std::size_t r,
                                         const std::vector<double>& nsr_list,
                                         std::uint64_t seed, const LeakageOptions& opts = {});

struct GradientLeakagePoint {
    std::size_t epoch = 0;
    double mi_bits = 0.0;
    double self_info_bits = 0.0;
    double relative_leakage = 0.0;
};

// Train the model briefly and probe I(X; dX) at the first conv layer every
// probe_every epochs (and once before training), with the same estimator.
std::vector<GradientLeakagePoint> gradient_leakage_check(
    const ModelSpec& model, const PartitionPlan& plan,
    const std::vector<std::pair<Tensor, int>>& dataset, std::size_t epochs,
    std::size_t probe_every, double lr, std::uint64_t seed, const LeakageOptions& opts = {});

} // namespace splitconv
