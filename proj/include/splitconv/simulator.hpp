#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "splitconv/asymconv.hpp"
#include "splitconv/model.hpp"
#include "splitconv/planner.hpp"

namespace splitconv {

enum class ExecMode { monolithic, decomposed };

struct TransferEvent {
    enum class Direction { trusted_to_untrusted, untrusted_to_trusted };
    enum class Phase { forward, backward };
    Direction direction;
    std::size_t bytes;
    Phase phase;
};

struct LayerTrace {
    std::size_t layer = 0;
    std::string kind;
    std::size_t r = 0;
    std::size_t fwd_macs_trusted = 0;
    std::size_t fwd_macs_untrusted = 0;
    std::size_t bwd_macs_trusted = 0;
    std::size_t bwd_macs_untrusted = 0;
    std::size_t mem_trusted = 0;
    std::size_t mem_untrusted = 0;
    std::vector<TransferEvent> transfers;

    std::size_t xfer_bytes(TransferEvent::Phase phase) const;
};

// Per-layer accounting recorded while the pipeline runs. Event slots are
// filled at fixed points by the coordinating (trusted) thread, so concurrent
// and interleaved schedules produce identical traces.
struct ExecutionTrace {
    ExecMode mode = ExecMode::monolithic;
    std::vector<LayerTrace> layers;
    std::vector<std::string> warnings;
};

// Weights live with the coordinator; both contexts read them, the optimizer
// writes them between steps.
struct LayerParams {
    bool present = false;
    Tensor w;                 // conv: M x N x k x k, linear: out x in
    std::vector<double> bias; // per output channel / unit
};

struct ModelParams {
    std::vector<LayerParams> layers;
};

ModelParams init_params(const ModelSpec& model, std::uint64_t seed);

struct ModelGrads {
    std::vector<LayerParams> layers; // same layout as params
    Tensor input_grad;               // dX at the first conv, untrusted-computed
};

struct SimOptions {
    ExecMode mode = ExecMode::monolithic;
    bool concurrent = false; // run the untrusted context on its own thread
    std::size_t max_iter = 2;
    double nsr = 0.0;        // Gaussian mask applied to X^(U) before publishing
    std::uint64_t noise_seed = 0;
};

// cached per-layer state the backward pass needs
struct TapeEntry {
    Tensor input;                // dense input (monolithic conv, elementwise, linear)
    DecomposedActivation split;  // decomposed conv input
    bool has_split = false;
};

struct Tape {
    std::vector<TapeEntry> entries;
};

struct ForwardResult {
    Tensor output;
    ExecutionTrace trace;
    Tape tape;
};

// Replays the split pipeline per layer: decompose (warm-started), publish the
// residual, run trusted and untrusted convolutions, merge in the trusted
// context, elementwise ops trusted, repeat. Monolithic mode runs dense ops
// only; the two agree within 1e-8 relative.
ForwardResult run_forward(const ModelSpec& model, const ModelParams& params,
                          const PartitionPlan& plan, const Tensor& x, const SimOptions& opts);

struct BackwardResult {
    ModelGrads grads;
    ExecutionTrace trace; // backward-phase accounting, same layer layout
};

// dX for ReLU/pool runs trusted; dX and dW^(U) for conv run untrusted; the
// trusted dW^(T) share is transferred out and merged in the untrusted context.
BackwardResult run_backward(const ModelSpec& model, const ModelParams& params,
                            const PartitionPlan& plan, const Tape& tape, const Tensor& dloss,
                            const SimOptions& opts);

struct TrainOptions {
    std::size_t epochs = 1;
    double lr = 0.01;
    std::uint64_t seed = 1;
    ExecMode mode = ExecMode::monolithic;
    bool concurrent = false;
    std::size_t max_iter = 2;
    double nsr = 0.0;
};

struct TrainReport {
    std::vector<double> step_losses;
    double final_accuracy = 0.0;
    ModelParams params;
};

// plain SGD with softmax cross-entropy, one sample per step, seeded shuffle
TrainReport train(const ModelSpec& model, const PartitionPlan& plan,
                  const std::vector<std::pair<Tensor, int>>& dataset, const TrainOptions& opts);

// softmax cross-entropy against an integer label; dlogits = softmax - onehot
double softmax_cross_entropy(const Tensor& logits, int label, Tensor* dlogits);

} // namespace splitconv
