#include "splitconv/model.hpp"

#include <sstream>

namespace splitconv {

const char* layer_kind_name(LayerKind kind) {
    switch (kind) {
    case LayerKind::input: return "input";
    case LayerKind::conv: return "conv";
    case LayerKind::relu: return "relu";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::avgpool: return "avgpool";
    case LayerKind::flatten: return "flatten";
    case LayerKind::linear: return "linear";
    }
    return "?";
}

std::size_t ModelSpec::conv_count() const {
    std::size_t n = 0;
    for (const auto& l : layers)
        if (l.kind == LayerKind::conv) ++n;
    return n;
}

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw InputError("line " + std::to_string(line) + ": " + msg);
}

std::size_t parse_count(const std::string& tok, std::size_t line, const char* what) {
    try {
        long long v = std::stoll(tok);
        if (v < 0) fail(line, std::string(what) + " must be nonnegative, got " + tok);
        return static_cast<std::size_t>(v);
    } catch (const InputError&) {
        throw;
    } catch (...) {
        fail(line, std::string("expected a number for ") + what + ", got '" + tok + "'");
    }
}

} // namespace

ModelSpec parse_model(const std::string& text) {
    ModelSpec model;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    bool have_input = false;
    int block_counter = 0;
    int open_block = -1;

    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;

        const std::string& op = tok[0];
        auto expect_args = [&](std::size_t n) {
            if (tok.size() != n + 1)
                fail(line_no, op + " expects " + std::to_string(n) + " arguments, got " +
                                  std::to_string(tok.size() - 1));
        };

        LayerSpec layer;
        layer.line = line_no;
        layer.block = open_block;

        if (op == "input") {
            if (have_input) fail(line_no, "duplicate input declaration");
            if (!model.layers.empty()) fail(line_no, "input must be the first directive");
            expect_args(3);
            layer.kind = LayerKind::input;
            layer.in_channels = parse_count(tok[1], line_no, "input channels");
            layer.out_channels = layer.in_channels;
            layer.in_h = parse_count(tok[2], line_no, "input height");
            layer.in_w = parse_count(tok[3], line_no, "input width");
            if (layer.in_channels == 0 || layer.in_h == 0 || layer.in_w == 0)
                fail(line_no, "input extents must be positive");
            have_input = true;
            model.layers.push_back(layer);
            continue;
        }
        if (!have_input) fail(line_no, "no input declared");

        if (op == "block-begin") {
            expect_args(0);
            if (open_block >= 0) fail(line_no, "block-begin inside an open block");
            open_block = block_counter++;
            continue;
        }
        if (op == "block-end") {
            expect_args(0);
            if (open_block < 0) fail(line_no, "block-end without block-begin");
            open_block = -1;
            continue;
        }

        if (op == "conv") {
            expect_args(5);
            layer.kind = LayerKind::conv;
            layer.in_channels = parse_count(tok[1], line_no, "conv in channels");
            layer.out_channels = parse_count(tok[2], line_no, "conv out channels");
            layer.kernel = parse_count(tok[3], line_no, "conv kernel");
            layer.stride = parse_count(tok[4], line_no, "conv stride");
            layer.pad = parse_count(tok[5], line_no, "conv padding");
            if (layer.in_channels == 0 || layer.out_channels == 0 || layer.kernel == 0)
                fail(line_no, "conv channels and kernel must be positive");
            if (layer.stride == 0) fail(line_no, "conv stride must be >= 1");
        } else if (op == "relu") {
            expect_args(0);
            layer.kind = LayerKind::relu;
        } else if (op == "maxpool" || op == "avgpool") {
            expect_args(1);
            layer.kind = op == "maxpool" ? LayerKind::maxpool : LayerKind::avgpool;
            layer.pool_k = parse_count(tok[1], line_no, "pool window");
            if (layer.pool_k == 0) fail(line_no, "pool window must be >= 1");
        } else if (op == "flatten") {
            expect_args(0);
            layer.kind = LayerKind::flatten;
        } else if (op == "linear") {
            expect_args(2);
            layer.kind = LayerKind::linear;
            layer.in_units = parse_count(tok[1], line_no, "linear in units");
            layer.out_units = parse_count(tok[2], line_no, "linear out units");
            if (layer.in_units == 0 || layer.out_units == 0)
                fail(line_no, "linear units must be positive");
        } else {
            fail(line_no, "unknown directive '" + op + "'");
        }
        model.layers.push_back(layer);
    }

    if (!have_input) throw InputError("no input declared");
    if (open_block >= 0) throw InputError("unterminated block-begin");
    model_shapes(model); // validate the chain
    return model;
}

std::string print_model(const ModelSpec& model) {
    std::ostringstream out;
    int open_block = -1;
    for (const auto& l : model.layers) {
        if (l.kind != LayerKind::input) {
            if (l.block != open_block) {
                if (open_block >= 0) out << "block-end\n";
                if (l.block >= 0) out << "block-begin\n";
                open_block = l.block;
            }
        }
        switch (l.kind) {
        case LayerKind::input:
            out << "input " << l.in_channels << ' ' << l.in_h << ' ' << l.in_w << '\n';
            break;
        case LayerKind::conv:
            out << "conv " << l.in_channels << ' ' << l.out_channels << ' ' << l.kernel << ' '
                << l.stride << ' ' << l.pad << '\n';
            break;
        case LayerKind::relu: out << "relu\n"; break;
        case LayerKind::maxpool: out << "maxpool " << l.pool_k << '\n'; break;
        case LayerKind::avgpool: out << "avgpool " << l.pool_k << '\n'; break;
        case LayerKind::flatten: out << "flatten\n"; break;
        case LayerKind::linear:
            out << "linear " << l.in_units << ' ' << l.out_units << '\n';
            break;
        }
    }
    if (open_block >= 0) out << "block-end\n";
    return out.str();
}

std::vector<LayerIO> model_shapes(const ModelSpec& model) {
    std::vector<LayerIO> io(model.layers.size());
    LayerShape cur;
    for (std::size_t idx = 0; idx < model.layers.size(); ++idx) {
        const LayerSpec& l = model.layers[idx];
        io[idx].in = cur;
        switch (l.kind) {
        case LayerKind::input:
            cur.flat = false;
            cur.channels = l.in_channels;
            cur.height = l.in_h;
            cur.width = l.in_w;
            break;
        case LayerKind::conv: {
            if (cur.flat) fail(l.line, "conv requires a spatial input, got a flat vector");
            if (cur.channels != l.in_channels)
                fail(l.line, "conv expects " + std::to_string(l.in_channels) +
                                 " in-channels, got " + std::to_string(cur.channels));
            ConvGeometry g = conv_geometry(l, cur);
            cur.channels = l.out_channels;
            cur.height = g.out_h();
            cur.width = g.out_w();
            break;
        }
        case LayerKind::relu:
            break;
        case LayerKind::maxpool:
        case LayerKind::avgpool:
            if (cur.flat) fail(l.line, "pool requires a spatial input, got a flat vector");
            if (cur.height % l.pool_k != 0 || cur.width % l.pool_k != 0)
                fail(l.line, "pool window " + std::to_string(l.pool_k) +
                                 " does not divide spatial extents " +
                                 std::to_string(cur.height) + "x" + std::to_string(cur.width));
            cur.height /= l.pool_k;
            cur.width /= l.pool_k;
            break;
        case LayerKind::flatten:
            if (cur.flat) fail(l.line, "flatten applied twice");
            cur.flat = true;
            cur.units = cur.channels * cur.height * cur.width;
            cur.channels = cur.height = cur.width = 0;
            break;
        case LayerKind::linear:
            if (!cur.flat) fail(l.line, "linear requires flatten first");
            if (cur.units != l.in_units)
                fail(l.line, "linear expects " + std::to_string(l.in_units) + " inputs, got " +
                                 std::to_string(cur.units));
            cur.units = l.out_units;
            break;
        }
        io[idx].out = cur;
    }
    return io;
}

ConvGeometry conv_geometry(const LayerSpec& layer, const LayerShape& in) {
    return ConvGeometry::make(layer.in_channels, layer.out_channels, layer.kernel, layer.stride,
                              layer.pad, in.height, in.width);
}

bool operator==(const LayerSpec& a, const LayerSpec& b) {
    return a.kind == b.kind && a.in_channels == b.in_channels &&
           a.out_channels == b.out_channels && a.kernel == b.kernel && a.stride == b.stride &&
           a.pad == b.pad && a.pool_k == b.pool_k && a.in_units == b.in_units &&
           a.out_units == b.out_units && a.in_h == b.in_h && a.in_w == b.in_w &&
           a.block == b.block;
}

bool operator==(const ModelSpec& a, const ModelSpec& b) { return a.layers == b.layers; }

} // namespace splitconv
