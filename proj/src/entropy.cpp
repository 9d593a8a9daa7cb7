#include "splitconv/entropy.hpp"

#include <algorithm>
#include <cmath>

namespace splitconv {

double svd_channel_entropy(std::span<const double> s) {
    double total = 0.0;
    for (double v : s) {
        if (v < 0.0) throw InputError("singular values must be nonnegative");
        total += v;
    }
    if (total == 0.0) return 0.0;
    double sumsq = 0.0;
    for (double v : s) {
        double norm = v / total;
        sumsq += norm * norm;
    }
    double mu = -std::log2(sumsq);
    return mu < 0.0 ? 0.0 : mu;
}

std::size_t principal_count(double mu) {
    double p = std::exp2(mu);
    double nearest = std::round(p);
    if (std::abs(p - nearest) < 1e-9)
        return static_cast<std::size_t>(std::max(1.0, nearest));
    return static_cast<std::size_t>(std::ceil(p));
}

double energy_fraction(std::span<const double> s, std::size_t n) {
    double total = 0.0;
    for (double v : s) total += v * v;
    if (total == 0.0) return 1.0;
    double partial = 0.0;
    for (std::size_t i = 0; i < std::min(n, s.size()); ++i) partial += s[i] * s[i];
    return partial / total;
}

std::vector<double> GeometricSpectrum::values() const {
    if (scale <= 0.0 || decay <= 0.0 || decay >= 1.0 || length == 0)
        throw InputError("geometric spectrum needs scale > 0, decay in (0,1), length >= 1");
    std::vector<double> s(length);
    for (std::size_t i = 0; i < length; ++i)
        s[i] = scale * std::pow(decay, static_cast<double>(i));
    return s;
}

Tensor extract_patches(const Tensor& x, std::size_t k) {
    if (x.ndim() != 3) throw InputError("extract_patches expects a 3-d activation");
    if (k % 2 == 0)
        throw InputError("even patch kernel " + std::to_string(k) +
                         " rejected: patches are centered");
    const std::size_t n = x.extent(0), h = x.extent(1), w = x.extent(2);
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k / 2);
    Tensor out({n * k * k, h, w});
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t kh = 0; kh < k; ++kh) {
            for (std::size_t kw = 0; kw < k; ++kw) {
                const std::size_t channel = (j * k + kh) * k + kw;
                const std::ptrdiff_t dh = static_cast<std::ptrdiff_t>(kh) - half;
                const std::ptrdiff_t dw = static_cast<std::ptrdiff_t>(kw) - half;
                for (std::size_t r = 0; r < h; ++r) {
                    std::ptrdiff_t src_r = static_cast<std::ptrdiff_t>(r) + dh;
                    if (src_r < 0 || src_r >= static_cast<std::ptrdiff_t>(h)) continue;
                    for (std::size_t c = 0; c < w; ++c) {
                        std::ptrdiff_t src_c = static_cast<std::ptrdiff_t>(c) + dw;
                        if (src_c < 0 || src_c >= static_cast<std::ptrdiff_t>(w)) continue;
                        out.at3(channel, r, c) = x.at3(j, src_r, src_c);
                    }
                }
            }
        }
    }
    return out;
}

namespace {

// entropy over the k^2 patches of one channel
double single_channel_patch_entropy(const Tensor& x, std::size_t j, std::size_t k) {
    const std::size_t h = x.extent(1), w = x.extent(2);
    Tensor channel({1, h, w});
    std::copy(x.data() + j * h * w, x.data() + (j + 1) * h * w, channel.data());
    Tensor patches = extract_patches(channel, k);
    return channel_spectrum(flatten_channels(patches)).entropy_bits;
}

} // namespace

PatchEntropyReport make_patch_report(const Tensor& x, std::size_t k) {
    if (x.ndim() != 3) throw InputError("patch report expects a 3-d activation");
    const std::size_t n = x.extent(0);
    PatchEntropyReport report;
    report.kernel = k;
    report.patch_entropy.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        report.patch_entropy[j] = single_channel_patch_entropy(x, j, k);

    SpectralProfile profile = channel_spectrum(flatten_channels(x));
    const std::size_t n_prime = std::min<std::size_t>(profile.principal_count, n);

    std::vector<double> sorted = report.patch_entropy;
    std::sort(sorted.begin(), sorted.end());
    double sum_counts = 0.0;
    double sum_mu = 0.0;
    for (std::size_t j = 0; j < n_prime; ++j) {
        sum_counts += static_cast<double>(principal_count(sorted[j]));
        sum_mu += sorted[j];
    }
    report.mean_entropy = n_prime ? sum_mu / static_cast<double>(n_prime) : 0.0;
    report.output_bound = std::log2(sum_counts);
    return report;
}

double conv_output_entropy_bound(const SpectralProfile& input, const PatchEntropyReport* patches) {
    if (!patches)
        return std::log2(static_cast<double>(principal_count(input.entropy_bits)));

    std::vector<double> sorted = patches->patch_entropy;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n_prime = std::min<std::size_t>(input.principal_count, sorted.size());
    double sum_counts = 0.0;
    for (std::size_t j = 0; j < n_prime; ++j)
        sum_counts += static_cast<double>(principal_count(sorted[j]));
    return std::log2(sum_counts);
}

double pooling_entropy_bound(const SpectralProfile& input) {
    return std::log2(static_cast<double>(principal_count(input.entropy_bits)));
}

EntropyDelta entropy_delta_study(const Tensor& x, ElementwiseOp op) {
    EntropyDelta delta;
    delta.before = channel_spectrum(flatten_channels(x)).entropy_bits;
    Tensor after;
    switch (op) {
    case ElementwiseOp::relu: after = relu_forward(x); break;
    case ElementwiseOp::maxpool: after = pool_forward(x, 2, PoolMode::max); break;
    case ElementwiseOp::avgpool: after = pool_forward(x, 2, PoolMode::avg); break;
    }
    delta.after = channel_spectrum(flatten_channels(after)).entropy_bits;
    return delta;
}

namespace {

double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    double pos = q * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

} // namespace

std::vector<KernelEntropyStat> kernel_size_entropy_study(const std::vector<Tensor>& dataset,
                                                         const std::vector<std::size_t>& k_list) {
    std::vector<KernelEntropyStat> stats;
    for (std::size_t k : k_list) {
        std::vector<double> samples;
        for (const Tensor& image : dataset) {
            if (image.ndim() != 3) throw InputError("study images must be 3-d tensors");
            for (std::size_t j = 0; j < image.extent(0); ++j)
                samples.push_back(single_channel_patch_entropy(image, j, k));
        }
        std::sort(samples.begin(), samples.end());
        double mean = 0.0;
        for (double v : samples) mean += v;
        if (!samples.empty()) mean /= static_cast<double>(samples.size());

        KernelEntropyStat stat;
        stat.kernel = k;
        stat.mean_mu = mean;
        stat.q10 = quantile(samples, 0.10);
        stat.q50 = quantile(samples, 0.50);
        stat.q90 = quantile(samples, 0.90);
        stat.n_samples = samples.size();
        stats.push_back(stat);
    }
    return stats;
}

} // namespace splitconv
