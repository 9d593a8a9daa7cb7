#include "splitconv/asymconv.hpp"

#include <string>

#include "splitconv/kernels.hpp"

namespace splitconv {

namespace {

void check_factor_geometry(const FactoredActivation& f, const ConvGeometry& g) {
    if (f.channels != g.in_channels)
        throw InputError("factored activation has " + std::to_string(f.channels) +
                         " channels, geometry expects " + std::to_string(g.in_channels));
    if (f.height != g.in_h || f.width != g.in_w)
        throw InputError("factored activation extents do not match geometry");
}

} // namespace

TransformedKernels transform_kernels(const Tensor& w, const FactoredActivation& f) {
    if (w.ndim() != 4) throw InputError("conv kernels must be 4-d");
    const std::size_t m = w.extent(0), n = w.extent(1), k = w.extent(2);
    if (w.extent(3) != k) throw InputError("conv kernels must be square");
    if (f.channels != n)
        throw InputError("factor channel count " + std::to_string(f.channels) +
                         " != kernel in channels " + std::to_string(n));

    TransformedKernels wt{Tensor({m, f.rank, k, k})};
    if (f.rank == 0) return wt;
    const std::size_t taps = k * k;
    const auto& ops = kernels::active();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t ip = 0; ip < f.rank; ++ip) {
            double* dst = wt.w.data() + (i * f.rank + ip) * taps;
            for (std::size_t j = 0; j < n; ++j) {
                double coeff = f.u[ip][j]; // a_{j,j'} = u_{j'}[j]
                if (coeff == 0.0) continue;
                ops.axpy(dst, w.data() + (i * n + j) * taps, coeff, taps);
            }
        }
    }
    return wt;
}

Tensor trusted_forward(const FactoredActivation& f, const TransformedKernels& wt,
                       const ConvGeometry& g) {
    check_factor_geometry(f, g);
    if (wt.w.extent(1) != f.rank)
        throw InputError("transformed kernels rank mismatch");
    if (f.rank == 0) return Tensor({g.out_channels, g.out_h(), g.out_w()});

    // basis channels as an r x H x W activation
    Tensor basis({f.rank, f.height, f.width});
    for (std::size_t i = 0; i < f.rank; ++i)
        std::copy(f.v[i].begin(), f.v[i].end(), basis.data() + i * f.spatial());

    ConvGeometry gt = g;
    gt.in_channels = f.rank;
    return conv2d_forward(basis, wt.w, gt);
}

Tensor untrusted_forward(const Tensor& xu, const Tensor& w, const ConvGeometry& g) {
    return conv2d_forward(xu, w, g);
}

Tensor merge_outputs(const Tensor& yt, const Tensor& yu, const std::vector<double>* bias) {
    if (yt.shape() != yu.shape()) throw InputError("merge_outputs shape mismatch");
    Tensor y(yt.shape());
    kernels::active().add(y.data(), yt.data(), yu.data(), y.size());
    if (bias) {
        if (yt.ndim() != 3 || bias->size() != yt.extent(0))
            throw InputError("merge bias length does not match output channels");
        const std::size_t plane = yt.extent(1) * yt.extent(2);
        for (std::size_t i = 0; i < bias->size(); ++i) {
            double b = (*bias)[i];
            double* row = y.data() + i * plane;
            for (std::size_t p = 0; p < plane; ++p) row[p] += b;
        }
    }
    return y;
}

Tensor trusted_weight_grad(const FactoredActivation& f, const Tensor& dy,
                           const ConvGeometry& g) {
    check_factor_geometry(f, g);
    const std::size_t m = g.out_channels, n = g.in_channels, k = g.kernel;
    Tensor dw({m, n, k, k});
    if (f.rank == 0) return dw;

    const std::size_t taps = k * k;
    const auto& ops = kernels::active();
    ConvGeometry g1 = g;
    g1.in_channels = 1;

    for (std::size_t ip = 0; ip < f.rank; ++ip) {
        // correlations of one basis channel with every output-gradient channel
        Tensor basis({1, f.height, f.width});
        std::copy(f.v[ip].begin(), f.v[ip].end(), basis.data());
        Tensor corr = conv2d_backward_weight(basis, dy, g1); // m x 1 x k x k
        for (std::size_t j = 0; j < n; ++j) {
            double coeff = f.u[ip][j];
            if (coeff == 0.0) continue;
            for (std::size_t i = 0; i < m; ++i)
                ops.axpy(dw.data() + (i * n + j) * taps, corr.data() + i * taps, coeff, taps);
        }
    }
    return dw;
}

Tensor untrusted_weight_grad(const Tensor& xu, const Tensor& dy, const ConvGeometry& g) {
    return conv2d_backward_weight(xu, dy, g);
}

} // namespace splitconv
