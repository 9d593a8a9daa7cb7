#include "splitconv/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "splitconv/npy.hpp"
#include "splitconv/rng.hpp"

namespace splitconv {

namespace {

// separable Gaussian blur, zero-padded borders
Tensor gaussian_blur(const Tensor& img, double sigma) {
    const std::size_t h = img.extent(1), w = img.extent(2);
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        total += kernel[i + radius];
    }
    for (double& v : kernel) v /= total;

    Tensor tmp({1, h, w}), out({1, h, w});
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                int cc = static_cast<int>(c) + i;
                if (cc < 0 || cc >= static_cast<int>(w)) continue;
                acc += kernel[i + radius] * img.at3(0, r, cc);
            }
            tmp.at3(0, r, c) = acc;
        }
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                int rr = static_cast<int>(r) + i;
                if (rr < 0 || rr >= static_cast<int>(h)) continue;
                acc += kernel[i + radius] * tmp.at3(0, rr, c);
            }
            out.at3(0, r, c) = acc;
        }
    return out;
}

Tensor normalized_field(std::size_t h, std::size_t w, double length_scale, Rng& rng) {
    Tensor noise({1, h, w});
    for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = rng.normal();
    Tensor smooth = gaussian_blur(noise, length_scale);
    double mean = 0.0;
    for (std::size_t i = 0; i < smooth.size(); ++i) mean += smooth[i];
    mean /= static_cast<double>(smooth.size());
    double var = 0.0;
    for (std::size_t i = 0; i < smooth.size(); ++i) {
        smooth[i] -= mean;
        var += smooth[i] * smooth[i];
    }
    var /= static_cast<double>(smooth.size());
    const double inv = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    for (std::size_t i = 0; i < smooth.size(); ++i) smooth[i] *= inv;
    return smooth;
}

} // namespace

std::vector<std::pair<Tensor, int>> make_blob_dataset(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::pair<Tensor, int>> data;
    data.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        int label = static_cast<int>(i % 2);
        Tensor x({1, 8, 8});
        for (std::size_t r = 0; r < 8; ++r)
            for (std::size_t c = 0; c < 8; ++c) {
                double base = (label == 0) == (r < 4) ? 1.0 : -1.0;
                x.at3(0, r, c) = base + 0.3 * rng.normal();
            }
        data.emplace_back(std::move(x), label);
    }
    return data;
}

std::vector<Tensor> make_lowrank_dataset(std::size_t n, std::uint64_t seed,
                                         const LowRankDatasetOptions& opts) {
    Rng rng(seed);
    std::vector<Tensor> data;
    data.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        // shared smooth components
        std::vector<Tensor> fields;
        for (std::size_t c = 0; c < opts.rank; ++c)
            fields.push_back(normalized_field(opts.height, opts.width, opts.length_scale, rng));

        Tensor x({opts.channels, opts.height, opts.width});
        const std::size_t plane = opts.height * opts.width;
        for (std::size_t j = 0; j < opts.channels; ++j) {
            for (std::size_t c = 0; c < opts.rank; ++c) {
                double coeff = rng.normal();
                for (std::size_t p = 0; p < plane; ++p)
                    x.data()[j * plane + p] += coeff * fields[c].data()[p];
            }
            // sparse impulse texture
            for (std::size_t p = 0; p < plane; ++p) {
                if (rng.uniform() < opts.texture_density) {
                    double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
                    x.data()[j * plane + p] += sign * opts.texture_amplitude *
                                               (0.5 + rng.uniform());
                }
            }
        }
        data.push_back(std::move(x));
    }
    return data;
}

Tensor make_correlated_gaussian_image(std::size_t h, std::size_t w, double length_scale,
                                      std::uint64_t seed) {
    Rng rng(seed);
    return normalized_field(h, w, length_scale, rng);
}

void write_dataset(const std::string& dir, const std::vector<std::pair<Tensor, int>>& samples) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    Tensor labels({samples.size()});
    char name[32];
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::snprintf(name, sizeof(name), "sample_%05zu.npy", i);
        save_array((fs::path(dir) / name).string(), samples[i].first);
        labels[i] = static_cast<double>(samples[i].second);
    }
    save_array((fs::path(dir) / "labels.npy").string(), labels);
}

std::vector<std::pair<Tensor, int>> load_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw InputError(dir + ": not a directory");

    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::string name = e.path().filename().string();
        if (name == "labels.npy") continue;
        if (name.size() > 4 && name.substr(name.size() - 4) == ".npy")
            files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InputError(dir + ": no .npy samples found");

    Tensor labels = load_array((fs::path(dir) / "labels.npy").string());
    if (labels.size() != files.size())
        throw InputError(dir + ": labels.npy has " + std::to_string(labels.size()) +
                         " entries for " + std::to_string(files.size()) + " samples");

    std::vector<std::pair<Tensor, int>> data;
    data.reserve(files.size());
    for (std::size_t i = 0; i < files.size(); ++i)
        data.emplace_back(load_array(files[i]), static_cast<int>(labels[i]));
    return data;
}

} // namespace splitconv
