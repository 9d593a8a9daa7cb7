#include "splitconv/simulator.hpp"

#include <cmath>
#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <thread>

#include "splitconv/costs.hpp"
#include "splitconv/kernels.hpp"
#include "splitconv/privacy.hpp"
#include "splitconv/rng.hpp"
#include "splitconv/spectral.hpp"

namespace splitconv {

std::size_t LayerTrace::xfer_bytes(TransferEvent::Phase phase) const {
    std::size_t total = 0;
    for (const auto& e : transfers)
        if (e.phase == phase) total += e.bytes;
    return total;
}

namespace {

// The untrusted context: an in-order task queue, optionally serviced by its
// own thread. Tasks are pure functions of immutable inputs, so the threaded
// and inline schedules produce bitwise-identical values.
class UntrustedContext {
public:
    explicit UntrustedContext(bool threaded) : threaded_(threaded) {
        if (threaded_) worker_ = std::thread([this] { run(); });
    }

    ~UntrustedContext() {
        if (threaded_) {
            {
                std::lock_guard<std::mutex> lock(mu_);
                done_ = true;
            }
            cv_.notify_all();
            worker_.join();
        }
    }

    template <typename F>
    auto submit(F&& fn) -> std::future<decltype(fn())> {
        using R = decltype(fn());
        auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(fn));
        std::future<R> fut = task->get_future();
        if (!threaded_) {
            (*task)();
            return fut;
        }
        {
            std::lock_guard<std::mutex> lock(mu_);
            queue_.push_back([task] { (*task)(); });
        }
        cv_.notify_one();
        return fut;
    }

private:
    void run() {
        for (;;) {
            std::function<void()> job;
            {
                std::unique_lock<std::mutex> lock(mu_);
                cv_.wait(lock, [this] { return done_ || !queue_.empty(); });
                if (queue_.empty()) return;
                job = std::move(queue_.front());
                queue_.pop_front();
            }
            job();
        }
    }

    bool threaded_;
    std::thread worker_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::function<void()>> queue_;
    bool done_ = false;
};

bool all_zero(const Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] != 0.0) return false;
    return true;
}

// All-zero payloads collapse to a zero-byte control message; real data
// crosses at 8 bytes per value.
TransferEvent transfer(TransferEvent::Direction dir, const Tensor& payload,
                       TransferEvent::Phase phase) {
    std::size_t bytes = all_zero(payload) ? 0 : costs::value_bytes * payload.size();
    return {dir, bytes, phase};
}

void add_bias(Tensor& y, const std::vector<double>& bias) {
    const std::size_t plane = y.extent(1) * y.extent(2);
    for (std::size_t i = 0; i < bias.size(); ++i) {
        double* row = y.data() + i * plane;
        for (std::size_t p = 0; p < plane; ++p) row[p] += bias[i];
    }
}

std::uint64_t layer_noise_seed(std::uint64_t base, std::size_t layer) {
    return base ^ (0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(layer) + 1));
}

Tensor linear_forward(const Tensor& x, const LayerParams& p) {
    const std::size_t out = p.w.extent(0), in = p.w.extent(1);
    Tensor y({out});
    const auto& ops = kernels::active();
    for (std::size_t o = 0; o < out; ++o)
        y[o] = ops.dot(p.w.data() + o * in, x.data(), in) + p.bias[o];
    return y;
}

} // namespace

ModelParams init_params(const ModelSpec& model, std::uint64_t seed) {
    Rng rng(seed);
    ModelParams params;
    params.layers.resize(model.layers.size());
    for (std::size_t idx = 0; idx < model.layers.size(); ++idx) {
        const LayerSpec& l = model.layers[idx];
        LayerParams& p = params.layers[idx];
        if (l.kind == LayerKind::conv) {
            p.present = true;
            p.w = Tensor({l.out_channels, l.in_channels, l.kernel, l.kernel});
            double scale = std::sqrt(2.0 / static_cast<double>(l.in_channels * l.kernel * l.kernel));
            for (std::size_t i = 0; i < p.w.size(); ++i) p.w[i] = scale * rng.normal();
            p.bias.assign(l.out_channels, 0.0);
        } else if (l.kind == LayerKind::linear) {
            p.present = true;
            p.w = Tensor({l.out_units, l.in_units});
            double scale = std::sqrt(2.0 / static_cast<double>(l.in_units));
            for (std::size_t i = 0; i < p.w.size(); ++i) p.w[i] = scale * rng.normal();
            p.bias.assign(l.out_units, 0.0);
        }
    }
    return params;
}

ForwardResult run_forward(const ModelSpec& model, const ModelParams& params,
                          const PartitionPlan& plan, const Tensor& x, const SimOptions& opts) {
    if (params.layers.size() != model.layers.size())
        throw InputError("parameter set does not match the model layer count");
    if (opts.mode == ExecMode::decomposed && plan.r.size() != model.layers.size())
        throw InputError("partition plan does not match the model layer count");
    std::vector<LayerIO> shapes = model_shapes(model);

    ForwardResult result;
    result.trace.mode = opts.mode;
    result.trace.layers.resize(model.layers.size());
    result.tape.entries.resize(model.layers.size());

    UntrustedContext untrusted(opts.concurrent);
    Tensor cur = x;
    const FactoredActivation* warm = nullptr;

    for (std::size_t idx = 0; idx < model.layers.size(); ++idx) {
        const LayerSpec& l = model.layers[idx];
        LayerTrace& lt = result.trace.layers[idx];
        TapeEntry& entry = result.tape.entries[idx];
        lt.layer = idx;
        lt.kind = layer_kind_name(l.kind);
        const bool split_mode = opts.mode == ExecMode::decomposed;

        switch (l.kind) {
        case LayerKind::input: {
            if (cur.ndim() != 3 || cur.extent(0) != l.in_channels || cur.extent(1) != l.in_h ||
                cur.extent(2) != l.in_w)
                throw InputError("input tensor does not match declared model input");
            break;
        }
        case LayerKind::conv: {
            ConvGeometry g = conv_geometry(l, shapes[idx].in);
            const LayerParams& p = params.layers[idx];
            if (!split_mode) {
                entry.input = cur;
                Tensor y = conv2d_forward(cur, p.w, g);
                add_bias(y, p.bias);
                cur = std::move(y);
                lt.fwd_macs_untrusted += costs::conv_dense_macs(g);
                lt.mem_untrusted += costs::conv_mem_untrusted(g);
                break;
            }
            const std::size_t r = plan.r[idx];
            lt.r = r;
            DecomposeResult dec = decompose_activation(cur, r, warm, opts.max_iter);
            if (!dec.warning.empty()) result.trace.warnings.push_back(dec.warning);
            lt.fwd_macs_trusted +=
                costs::light_svd_macs(dec.trusted.rank, g.in_channels, g.in_h, g.in_w,
                                      opts.max_iter);
            if (opts.nsr > 0.0)
                dec.untrusted =
                    add_noise(dec.untrusted, opts.nsr, layer_noise_seed(opts.noise_seed, idx));

            // residual placed in the shared region; the merge below is the
            // counted boundary crossing
            entry.split = {std::move(dec.trusted), std::move(dec.untrusted)};
            entry.has_split = true;
            const DecomposedActivation& split = entry.split;

            auto yu_future = untrusted.submit(
                [&split, &p, g] { return untrusted_forward(split.untrusted, p.w, g); });

            TransformedKernels wt = transform_kernels(p.w, split.trusted);
            Tensor yt = trusted_forward(split.trusted, wt, g);
            lt.fwd_macs_trusted += costs::kernel_transform_macs(g, split.trusted.rank) +
                                   costs::conv_trusted_spatial_macs(g, split.trusted.rank);

            Tensor yu = yu_future.get();
            lt.fwd_macs_untrusted += costs::conv_dense_macs(g);
            lt.transfers.push_back(transfer(TransferEvent::Direction::untrusted_to_trusted, yu,
                                            TransferEvent::Phase::forward));

            cur = merge_outputs(yt, yu, &p.bias);
            lt.mem_trusted += costs::conv_mem_trusted(g, split.trusted.rank);
            lt.mem_untrusted += costs::conv_mem_untrusted(g);
            warm = &split.trusted;
            break;
        }
        case LayerKind::relu: {
            entry.input = cur;
            cur = relu_forward(cur);
            auto& macs = split_mode ? lt.fwd_macs_trusted : lt.fwd_macs_untrusted;
            auto& mem = split_mode ? lt.mem_trusted : lt.mem_untrusted;
            macs += entry.input.size();
            mem += entry.input.size() + cur.size();
            break;
        }
        case LayerKind::maxpool:
        case LayerKind::avgpool: {
            entry.input = cur;
            cur = pool_forward(cur, l.pool_k,
                               l.kind == LayerKind::maxpool ? PoolMode::max : PoolMode::avg);
            auto& macs = split_mode ? lt.fwd_macs_trusted : lt.fwd_macs_untrusted;
            auto& mem = split_mode ? lt.mem_trusted : lt.mem_untrusted;
            macs += entry.input.size();
            mem += entry.input.size() + cur.size();
            break;
        }
        case LayerKind::flatten: {
            entry.input = cur;
            cur = cur.reshaped({cur.size()});
            break;
        }
        case LayerKind::linear: {
            entry.input = cur;
            const LayerParams& p = params.layers[idx];
            cur = linear_forward(cur, p);
            auto& macs = split_mode ? lt.fwd_macs_trusted : lt.fwd_macs_untrusted;
            auto& mem = split_mode ? lt.mem_trusted : lt.mem_untrusted;
            macs += l.in_units * l.out_units;
            mem += l.in_units + l.out_units;
            break;
        }
        }
    }

    result.output = std::move(cur);
    return result;
}

BackwardResult run_backward(const ModelSpec& model, const ModelParams& params,
                            const PartitionPlan& plan, const Tape& tape, const Tensor& dloss,
                            const SimOptions& opts) {
    (void)plan;
    if (tape.entries.size() != model.layers.size())
        throw InputError("tape does not match the model layer count");
    std::vector<LayerIO> shapes = model_shapes(model);

    BackwardResult result;
    result.trace.mode = opts.mode;
    result.trace.layers.resize(model.layers.size());
    result.grads.layers.resize(model.layers.size());

    // layer index of the first conv: its dX stays untrusted (nothing upstream
    // consumes it in the trusted context)
    std::size_t first_conv = model.layers.size();
    for (std::size_t idx = 0; idx < model.layers.size(); ++idx)
        if (model.layers[idx].kind == LayerKind::conv) {
            first_conv = idx;
            break;
        }

    UntrustedContext untrusted(opts.concurrent);
    Tensor d = dloss;
    const bool split_mode = opts.mode == ExecMode::decomposed;

    for (std::size_t i = model.layers.size(); i-- > 0;) {
        const LayerSpec& l = model.layers[i];
        const TapeEntry& entry = tape.entries[i];
        LayerTrace& lt = result.trace.layers[i];
        lt.layer = i;
        lt.kind = layer_kind_name(l.kind);

        switch (l.kind) {
        case LayerKind::input:
            break;
        case LayerKind::conv: {
            ConvGeometry g = conv_geometry(l, shapes[i].in);
            const LayerParams& p = params.layers[i];
            LayerParams& grad = result.grads.layers[i];
            grad.present = true;

            // bias gradient: per-channel sum of dY, stays with the bias
            grad.bias.assign(l.out_channels, 0.0);
            const std::size_t plane = d.extent(1) * d.extent(2);
            for (std::size_t c = 0; c < l.out_channels; ++c)
                for (std::size_t q = 0; q < plane; ++q)
                    grad.bias[c] += d[c * plane + q];

            if (!split_mode) {
                grad.w = conv2d_backward_weight(entry.input, d, g);
                lt.bwd_macs_untrusted += costs::conv_dense_macs(g);
                if (i != first_conv) {
                    d = conv2d_backward_input(d, p.w, g);
                    lt.bwd_macs_untrusted += costs::conv_dense_macs(g);
                } else {
                    result.grads.input_grad = conv2d_backward_input(d, p.w, g);
                    lt.bwd_macs_untrusted += costs::conv_dense_macs(g);
                }
                break;
            }

            if (!entry.has_split) throw InputError("tape entry missing decomposition");
            const Tensor dy = std::move(d);
            lt.r = entry.split.trusted.rank;
            lt.transfers.push_back(transfer(TransferEvent::Direction::trusted_to_untrusted, dy,
                                            TransferEvent::Phase::backward));

            Tensor dwt = trusted_weight_grad(entry.split.trusted, dy, g);
            lt.bwd_macs_trusted += costs::conv_trusted_bwd_macs(g, entry.split.trusted.rank);
            lt.transfers.push_back(transfer(TransferEvent::Direction::trusted_to_untrusted, dwt,
                                            TransferEvent::Phase::backward));

            struct UntrustedBwd {
                Tensor dw;
                Tensor dx;
            };
            const Tensor& xu = entry.split.untrusted;
            auto bwd_future = untrusted.submit([&xu, &dy, &dwt, &p, g] {
                UntrustedBwd out;
                Tensor dwu = untrusted_weight_grad(xu, dy, g);
                // dW^(T) + dW^(U) accumulated in the untrusted context
                out.dw = Tensor(dwu.shape());
                kernels::active().add(out.dw.data(), dwt.data(), dwu.data(), dwu.size());
                out.dx = conv2d_backward_input(dy, p.w, g);
                return out;
            });
            UntrustedBwd bwd = bwd_future.get();
            lt.bwd_macs_untrusted += 2 * costs::conv_dense_macs(g);
            grad.w = std::move(bwd.dw);

            if (i != first_conv) {
                lt.transfers.push_back(transfer(TransferEvent::Direction::untrusted_to_trusted,
                                                bwd.dx, TransferEvent::Phase::backward));
                d = std::move(bwd.dx);
            } else {
                result.grads.input_grad = std::move(bwd.dx);
            }
            break;
        }
        case LayerKind::relu: {
            d = relu_backward(entry.input, d);
            (split_mode ? lt.bwd_macs_trusted : lt.bwd_macs_untrusted) += entry.input.size();
            break;
        }
        case LayerKind::maxpool:
        case LayerKind::avgpool: {
            d = pool_backward(entry.input, d, l.pool_k,
                              l.kind == LayerKind::maxpool ? PoolMode::max : PoolMode::avg);
            (split_mode ? lt.bwd_macs_trusted : lt.bwd_macs_untrusted) += entry.input.size();
            break;
        }
        case LayerKind::flatten: {
            d = d.reshaped(entry.input.shape());
            break;
        }
        case LayerKind::linear: {
            const LayerParams& p = params.layers[i];
            LayerParams& grad = result.grads.layers[i];
            grad.present = true;
            const std::size_t out = p.w.extent(0), in = p.w.extent(1);

            grad.bias.assign(d.data(), d.data() + out);
            grad.w = Tensor({out, in});
            const auto& ops = kernels::active();
            for (std::size_t o = 0; o < out; ++o)
                ops.axpy(grad.w.data() + o * in, entry.input.data(), d[o], in);

            Tensor dx({in});
            for (std::size_t o = 0; o < out; ++o)
                ops.axpy(dx.data(), p.w.data() + o * in, d[o], in);
            d = std::move(dx);
            (split_mode ? lt.bwd_macs_trusted : lt.bwd_macs_untrusted) += 2 * out * in;
            break;
        }
        }
    }
    return result;
}

double softmax_cross_entropy(const Tensor& logits, int label, Tensor* dlogits) {
    if (logits.ndim() != 1) throw InputError("softmax expects a flat logit vector");
    const std::size_t n = logits.size();
    if (label < 0 || static_cast<std::size_t>(label) >= n)
        throw InputError("label out of range");

    double max_logit = logits[0];
    for (std::size_t i = 1; i < n; ++i) max_logit = std::max(max_logit, logits[i]);
    double total = 0.0;
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = std::exp(logits[i] - max_logit);
        total += p[i];
    }
    for (std::size_t i = 0; i < n; ++i) p[i] /= total;

    if (dlogits) {
        *dlogits = Tensor({n});
        for (std::size_t i = 0; i < n; ++i)
            (*dlogits)[i] = p[i] - (static_cast<std::size_t>(label) == i ? 1.0 : 0.0);
    }
    return -std::log(std::max(p[static_cast<std::size_t>(label)], 1e-300));
}

TrainReport train(const ModelSpec& model, const PartitionPlan& plan,
                  const std::vector<std::pair<Tensor, int>>& dataset, const TrainOptions& opts) {
    if (dataset.empty()) throw InputError("empty training dataset");
    if (model.layers.empty() || model.layers.back().kind != LayerKind::linear)
        throw InputError("training requires a linear output layer");

    TrainReport report;
    report.params = init_params(model, opts.seed);
    Rng shuffle_rng(opts.seed ^ 0x5851f42d4c957f2dull);

    SimOptions sim;
    sim.mode = opts.mode;
    sim.concurrent = opts.concurrent;
    sim.max_iter = opts.max_iter;
    sim.nsr = opts.nsr;

    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t pick : order) {
            sim.noise_seed = opts.seed + 0x9e3779b97f4a7c15ull * step;
            ForwardResult fwd =
                run_forward(model, report.params, plan, dataset[pick].first, sim);
            Tensor dlogits;
            double loss = softmax_cross_entropy(fwd.output, dataset[pick].second, &dlogits);
            report.step_losses.push_back(loss);

            BackwardResult bwd =
                run_backward(model, report.params, plan, fwd.tape, dlogits, sim);
            for (std::size_t idx = 0; idx < report.params.layers.size(); ++idx) {
                LayerParams& p = report.params.layers[idx];
                const LayerParams& g = bwd.grads.layers[idx];
                if (!p.present || !g.present) continue;
                kernels::active().axpy(p.w.data(), g.w.data(), -opts.lr, p.w.size());
                for (std::size_t b = 0; b < p.bias.size(); ++b)
                    p.bias[b] -= opts.lr * g.bias[b];
            }
            ++step;
        }
    }

    std::size_t correct = 0;
    SimOptions eval = sim;
    eval.nsr = opts.nsr; // evaluate under the same masking regime
    std::size_t eval_step = 0;
    for (const auto& [x, label] : dataset) {
        eval.noise_seed = opts.seed + 0xc2b2ae3d27d4eb4full * (++eval_step);
        ForwardResult fwd = run_forward(model, report.params, plan, x, eval);
        std::size_t best = 0;
        for (std::size_t i = 1; i < fwd.output.size(); ++i)
            if (fwd.output[i] > fwd.output[best]) best = i;
        if (static_cast<int>(best) == label) ++correct;
    }
    report.final_accuracy = static_cast<double>(correct) / static_cast<double>(dataset.size());
    return report;
}

} // namespace splitconv
