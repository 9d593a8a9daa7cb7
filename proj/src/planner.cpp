#include "splitconv/planner.hpp"

#include <algorithm>

#include "splitconv/costs.hpp"

namespace splitconv {

bool PartitionPlan::empty() const {
    return std::all_of(r.begin(), r.end(), [](std::size_t v) { return v == 0; });
}

PartitionPlan plan_r_schedule(const ModelSpec& model, std::size_t r_cap) {
    PartitionPlan plan;
    plan.r_cap = r_cap;
    plan.r.assign(model.layers.size(), 0);

    std::size_t schedule = 0; // the doubling counter, before per-layer clamps
    bool seen_conv = false;
    int prev_conv_block = -1;

    for (std::size_t idx = 0; idx < model.layers.size(); ++idx) {
        const LayerSpec& l = model.layers[idx];
        if (l.kind != LayerKind::conv) continue;
        if (!seen_conv) {
            schedule = 1;
            seen_conv = true;
        } else if (l.block >= 0 && l.block == prev_conv_block) {
            // stays flat inside a residual block
        } else {
            schedule = std::min(schedule * 2, r_cap);
        }
        prev_conv_block = l.block;
        plan.r[idx] = std::min({schedule, r_cap, l.in_channels});
    }

    if (!seen_conv) plan.warnings.push_back("model has no convolutional layer; plan is empty");
    return plan;
}

std::vector<CostReport> cost_model(const ModelSpec& model, const PartitionPlan& plan,
                                   const CostOptions& opts) {
    if (plan.r.size() != model.layers.size())
        throw InputError("partition plan does not match the model layer count");
    std::vector<LayerIO> shapes = model_shapes(model);
    std::vector<CostReport> reports;
    reports.reserve(model.layers.size());

    const std::size_t batch = opts.batch == 0 ? 1 : opts.batch;
    bool first_conv = true;

    for (std::size_t idx = 0; idx < model.layers.size(); ++idx) {
        const LayerSpec& l = model.layers[idx];
        const LayerIO& io = shapes[idx];
        CostReport rep;
        rep.layer = idx;
        rep.kind = layer_kind_name(l.kind);
        rep.r = plan.r[idx];

        switch (l.kind) {
        case LayerKind::input:
            break;
        case LayerKind::conv: {
            ConvGeometry g = conv_geometry(l, io.in);
            const std::size_t r = plan.r[idx];
            rep.macs_untrusted = costs::conv_dense_macs(g);
            rep.macs_trusted = costs::conv_trusted_spatial_macs(g, r) +
                               costs::kernel_transform_macs(g, r) +
                               costs::light_svd_macs(r, g.in_channels, g.in_h, g.in_w,
                                                     opts.max_iter);
            rep.mem_trusted = costs::conv_mem_trusted(g, r);
            rep.mem_untrusted = costs::conv_mem_untrusted(g);
            rep.xfer_fwd_bytes = costs::conv_xfer_fwd_bytes(g);
            rep.xfer_bwd_bytes = costs::conv_xfer_bwd_bytes(g, first_conv);
            first_conv = false;
            break;
        }
        case LayerKind::relu:
            rep.macs_trusted = io.in.element_count();
            rep.mem_trusted = io.in.element_count() + io.out.element_count();
            break;
        case LayerKind::maxpool:
        case LayerKind::avgpool:
            rep.macs_trusted = io.in.element_count();
            rep.mem_trusted = io.in.element_count() + io.out.element_count();
            break;
        case LayerKind::flatten:
            break;
        case LayerKind::linear:
            rep.macs_trusted = l.in_units * l.out_units;
            rep.mem_trusted = l.in_units + l.out_units;
            break;
        }

        rep.macs_trusted *= batch;
        rep.macs_untrusted *= batch;
        rep.mem_trusted *= batch;
        rep.mem_untrusted *= batch;
        rep.xfer_fwd_bytes *= batch;
        rep.xfer_bwd_bytes *= batch;
        reports.push_back(std::move(rep));
    }
    return reports;
}

} // namespace splitconv
