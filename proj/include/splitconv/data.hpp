#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "splitconv/tensor.hpp"

namespace splitconv {

// Two linearly separable classes of 1 x 8 x 8 images: opposite halves lit,
// plus Gaussian noise. The toy training workload.
std::vector<std::pair<Tensor, int>> make_blob_dataset(std::size_t n, std::uint64_t seed);

struct LowRankDatasetOptions {
    std::size_t channels = 16;
    std::size_t height = 16;
    std::size_t width = 16;
    std::size_t rank = 4;           // shared smooth spatial components per sample
    double texture_density = 0.08;  // fraction of positions carrying an impulse
    double texture_amplitude = 0.25;// impulse scale relative to the structure
    double length_scale = 3.0;      // smoothing of the spatial components
};

// Channel-rank-limited images with a small sparse impulse texture on top;
// the privacy sweep's synthetic subject.
std::vector<Tensor> make_lowrank_dataset(std::size_t n, std::uint64_t seed,
                                         const LowRankDatasetOptions& opts = {});

// single-channel Gaussian random field: white noise smoothed at the given
// length scale, normalized to zero mean / unit variance
Tensor make_correlated_gaussian_image(std::size_t h, std::size_t w, double length_scale,
                                      std::uint64_t seed);

// Dataset directory format: one sample_NNNNN.npy per sample plus labels.npy.
void write_dataset(const std::string& dir, const std::vector<std::pair<Tensor, int>>& samples);
std::vector<std::pair<Tensor, int>> load_dataset(const std::string& dir);

} // namespace splitconv
