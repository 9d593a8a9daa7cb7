#include "splitconv/privacy.hpp"

#include <algorithm>
#include <cmath>

#include "splitconv/kernels.hpp"
#include "splitconv/rng.hpp"
#include "splitconv/simulator.hpp"
#include "splitconv/spectral.hpp"

namespace splitconv {

Tensor add_noise(const Tensor& x, double nsr, std::uint64_t seed) {
    if (nsr < 0.0) throw InputError("nsr must be nonnegative");
    if (nsr == 0.0) return x;
    double mean_sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) mean_sq += x[i] * x[i];
    mean_sq /= static_cast<double>(std::max<std::size_t>(1, x.size()));
    const double sigma = std::sqrt(nsr * mean_sq);

    Rng rng(seed);
    Tensor out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += sigma * rng.normal();
    return out;
}

namespace {

struct Binning {
    double lo = 0.0;
    double width = 0.0; // zero for a constant stream
    std::size_t bins = 1;

    std::size_t index(double v) const {
        if (width == 0.0) return 0;
        auto idx = static_cast<std::ptrdiff_t>((v - lo) / width);
        if (idx < 0) idx = 0;
        if (idx >= static_cast<std::ptrdiff_t>(bins)) idx = static_cast<std::ptrdiff_t>(bins) - 1;
        return static_cast<std::size_t>(idx);
    }
};

Binning make_binning(std::span<const double> a, std::size_t bins) {
    double lo = a[0], hi = a[0];
    for (double v : a) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Binning b;
    b.bins = bins;
    b.lo = lo;
    b.width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 0.0;
    return b;
}

} // namespace

double estimate_mi(std::span<const double> a, std::span<const double> b, std::size_t bins) {
    if (a.size() != b.size()) throw InputError("mutual information needs paired samples");
    if (a.empty()) return 0.0;
    if (bins < 2) throw InputError("mutual information needs at least 2 bins");

    const Binning ba = make_binning(a, bins);
    const Binning bb = make_binning(b, bins);
    if (ba.width == 0.0 || bb.width == 0.0) return 0.0; // constant stream

    std::vector<std::size_t> joint(bins * bins, 0);
    std::vector<std::size_t> ma(bins, 0), mb(bins, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::size_t ia = ba.index(a[i]);
        std::size_t ib = bb.index(b[i]);
        ++joint[ia * bins + ib];
        ++ma[ia];
        ++mb[ib];
    }

    const double n = static_cast<double>(a.size());
    double mi = 0.0;
    for (std::size_t ia = 0; ia < bins; ++ia) {
        if (ma[ia] == 0) continue;
        for (std::size_t ib = 0; ib < bins; ++ib) {
            std::size_t c = joint[ia * bins + ib];
            if (c == 0) continue;
            double pij = static_cast<double>(c) / n;
            double pa = static_cast<double>(ma[ia]) / n;
            double pb = static_cast<double>(mb[ib]) / n;
            mi += pij * std::log2(pij / (pa * pb));
        }
    }
    return mi;
}

double binned_entropy(std::span<const double> a, std::size_t bins) {
    if (a.empty()) return 0.0;
    const Binning ba = make_binning(a, bins);
    if (ba.width == 0.0) return 0.0;
    std::vector<std::size_t> counts(bins, 0);
    for (double v : a) ++counts[ba.index(v)];
    const double n = static_cast<double>(a.size());
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

std::vector<LeakageReport> leakage_sweep(const std::vector<Tensor>& samples, std::size_t r,
                                         const std::vector<double>& nsr_list, std::uint64_t seed,
                                         const LeakageOptions& opts) {
    if (samples.empty()) throw InputError("leakage sweep needs at least one sample");

    // decompose each sample once; the sweep only re-masks the residual
    std::vector<double> x_stream;
    std::vector<Tensor> residuals;
    residuals.reserve(samples.size());
    for (const Tensor& x : samples) {
        if (x.ndim() != 3) throw InputError("leakage samples must be 3-d activations");
        DecomposeResult dec = decompose_activation(x, std::min(r, x.extent(0)), nullptr,
                                                   opts.max_iter);
        residuals.push_back(std::move(dec.untrusted));
        x_stream.insert(x_stream.end(), x.data(), x.data() + x.size());
    }

    const double self_info = binned_entropy(x_stream, opts.bins);
    std::vector<LeakageReport> reports;
    for (std::size_t ni = 0; ni < nsr_list.size(); ++ni) {
        const double nsr = nsr_list[ni];
        std::vector<double> u_stream;
        u_stream.reserve(x_stream.size());
        for (std::size_t si = 0; si < residuals.size(); ++si) {
            Tensor masked = nsr > 0.0
                                ? add_noise(residuals[si], nsr,
                                            seed + 0x9e3779b97f4a7c15ull * (si * 131 + ni))
                                : residuals[si];
            u_stream.insert(u_stream.end(), masked.data(), masked.data() + masked.size());
        }

        LeakageReport rep;
        rep.nsr = nsr;
        rep.bins = opts.bins;
        rep.n_samples = u_stream.size();
        rep.mi_bits = estimate_mi(x_stream, u_stream, opts.bins);
        rep.self_info_bits = self_info;
        rep.relative_leakage = self_info > 0.0 ? rep.mi_bits / self_info : 0.0;
        reports.push_back(rep);
    }
    return reports;
}

std::vector<GradientLeakagePoint> gradient_leakage_check(
    const ModelSpec& model, const PartitionPlan& plan,
    const std::vector<std::pair<Tensor, int>>& dataset, std::size_t epochs,
    std::size_t probe_every, double lr, std::uint64_t seed, const LeakageOptions& opts) {
    if (dataset.empty()) throw InputError("gradient leakage check needs data");
    if (probe_every == 0) probe_every = 1;

    ModelParams params = init_params(model, seed);
    Rng shuffle_rng(seed ^ 0x5851f42d4c957f2dull);
    SimOptions sim;
    sim.mode = ExecMode::decomposed;
    sim.max_iter = opts.max_iter;

    auto probe = [&](std::size_t epoch) {
        std::vector<double> x_stream, g_stream;
        for (const auto& [x, label] : dataset) {
            ForwardResult fwd = run_forward(model, params, plan, x, sim);
            Tensor dlogits;
            softmax_cross_entropy(fwd.output, label, &dlogits);
            BackwardResult bwd = run_backward(model, params, plan, fwd.tape, dlogits, sim);
            x_stream.insert(x_stream.end(), x.data(), x.data() + x.size());
            const Tensor& dx = bwd.grads.input_grad;
            g_stream.insert(g_stream.end(), dx.data(), dx.data() + dx.size());
        }
        GradientLeakagePoint point;
        point.epoch = epoch;
        point.mi_bits = estimate_mi(x_stream, g_stream, opts.bins);
        point.self_info_bits = binned_entropy(x_stream, opts.bins);
        point.relative_leakage =
            point.self_info_bits > 0.0 ? point.mi_bits / point.self_info_bits : 0.0;
        return point;
    };

    std::vector<GradientLeakagePoint> points;
    points.push_back(probe(0));

    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t pick : order) {
            ForwardResult fwd = run_forward(model, params, plan, dataset[pick].first, sim);
            Tensor dlogits;
            softmax_cross_entropy(fwd.output, dataset[pick].second, &dlogits);
            BackwardResult bwd = run_backward(model, params, plan, fwd.tape, dlogits, sim);
            for (std::size_t idx = 0; idx < params.layers.size(); ++idx) {
                LayerParams& p = params.layers[idx];
                const LayerParams& g = bwd.grads.layers[idx];
                if (!p.present || !g.present) continue;
                kernels::active().axpy(p.w.data(), g.w.data(), -lr, p.w.size());
                for (std::size_t b = 0; b < p.bias.size(); ++b) p.bias[b] -= lr * g.bias[b];
            }
        }
        if (epoch % probe_every == 0 || epoch == epochs) points.push_back(probe(epoch));
    }
    return points;
}

} // namespace splitconv
