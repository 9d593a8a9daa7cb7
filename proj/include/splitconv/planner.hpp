#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "splitconv/model.hpp"

namespace splitconv {

// Per-layer trusted rank assignment. r[i] is the rank used to decompose the
// input of layer i; zero for non-conv layers.
struct PartitionPlan {
    std::vector<std::size_t> r;
    std::size_t r_cap = 32;
    std::vector<std::string> warnings;

    bool empty() const;
};

// r = 1 at the first conv; doubled per subsequent conv layer, or per
// residual block when block tags are present; unchanged across ReLU/pool;
// clamped at min(r_cap, input channels).
PartitionPlan plan_r_schedule(const ModelSpec& model, std::size_t r_cap = 32);

struct CostReport {
    std::size_t layer = 0;
    std::string kind;
    std::size_t r = 0;
    std::size_t macs_trusted = 0;
    std::size_t macs_untrusted = 0;
    std::size_t mem_trusted = 0;
    std::size_t mem_untrusted = 0;
    std::size_t xfer_fwd_bytes = 0;
    std::size_t xfer_bwd_bytes = 0;
};

struct CostOptions {
    std::size_t batch = 1;
    std::size_t max_iter = 2; // light-SVD iterations charged per decomposition
};

// Forward-pass cost accounting per layer: MAC counts, resident values per
// context, and boundary-transfer bytes. Elementwise layers are charged to the
// trusted context at one op per value; linear layers run fully trusted.
std::vector<CostReport> cost_model(const ModelSpec& model, const PartitionPlan& plan,
                                   const CostOptions& opts = {});

} // namespace splitconv
