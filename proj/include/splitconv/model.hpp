#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "splitconv/tensor.hpp"

namespace splitconv {

enum class LayerKind { input, conv, relu, maxpool, avgpool, flatten, linear };

const char* layer_kind_name(LayerKind kind);

struct LayerSpec {
    LayerKind kind = LayerKind::input;
    // conv
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel = 0;
    std::size_t stride = 1;
    std::size_t pad = 0;
    // pool
    std::size_t pool_k = 0;
    // linear
    std::size_t in_units = 0;
    std::size_t out_units = 0;
    // input declaration
    std::size_t in_h = 0;
    std::size_t in_w = 0;
    // residual-block grouping tag, -1 when untagged
    int block = -1;
    std::size_t line = 0; // source line, for diagnostics
};

// shape flowing between layers: spatial (C x H x W) until flatten, then a
// flat vector of `units`
struct LayerShape {
    bool flat = false;
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t units = 0;

    std::size_t element_count() const { return flat ? units : channels * height * width; }
};

struct ModelSpec {
    std::vector<LayerSpec> layers; // layers[0] is the input declaration

    std::size_t conv_count() const;
};

// One directive per line, '#' comments:
//   input C H W | conv IN OUT K STRIDE PAD | relu | maxpool K | avgpool K |
//   flatten | linear IN OUT | block-begin | block-end
// Errors carry the offending line number; the shape chain is validated so the
// first inconsistent layer is reported.
ModelSpec parse_model(const std::string& text);

// canonical text form; parse(print(m)) == m
std::string print_model(const ModelSpec& model);

// per-layer input/output shapes (index 0 = the input layer, whose output is
// the declared input shape)
struct LayerIO {
    LayerShape in;
    LayerShape out;
};
std::vector<LayerIO> model_shapes(const ModelSpec& model);

ConvGeometry conv_geometry(const LayerSpec& layer, const LayerShape& in);

bool operator==(const LayerSpec& a, const LayerSpec& b);
bool operator==(const ModelSpec& a, const ModelSpec& b);

} // namespace splitconv
