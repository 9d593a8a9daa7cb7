#include "splitconv/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "splitconv/entropy.hpp"
#include "splitconv/kernels.hpp"

namespace splitconv {

namespace {

double off_diagonal_norm(const std::vector<double>& a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q)
            if (p != q) acc += a[p * n + q] * a[p * n + q];
    return std::sqrt(acc);
}

} // namespace

std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n, double tol_rel) {
    if (n == 0) return {};
    double norm = 0.0;
    for (double v : a) norm += v * v;
    norm = std::sqrt(norm);
    const double tol = tol_rel * norm;

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps && off_diagonal_norm(a, n) > tol; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = a[p * n + q];
                if (apq == 0.0) continue;
                double app = a[p * n + p];
                double aqq = a[q * n + q];
                double tau = (aqq - app) / (2.0 * apq);
                double t = (tau >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    double aip = a[i * n + p];
                    double aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    double api = a[p * n + i];
                    double aqi = a[q * n + i];
                    a[p * n + i] = c * api - s * aqi;
                    a[q * n + i] = s * api + c * aqi;
                }
            }
        }
    }

    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a[i * n + i];
    std::sort(eig.begin(), eig.end(), std::greater<>());
    return eig;
}

SpectralProfile channel_spectrum(const Tensor& xf) {
    if (xf.ndim() != 2) throw InputError("channel_spectrum expects a 2-d matrix");
    const std::size_t n = xf.extent(0);
    const std::size_t cols = xf.extent(1);
    if (n == 0 || cols == 0) throw InputError("channel_spectrum needs at least one row/column");
    const auto& ops = kernels::active();

    // Gram matrix X X^T; n is small (channel count), cols is H*W
    std::vector<double> gram(n * n);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p; q < n; ++q) {
            double g = ops.dot(xf.data() + p * cols, xf.data() + q * cols, cols);
            gram[p * n + q] = g;
            gram[q * n + p] = g;
        }
    }

    std::vector<double> eig = symmetric_eigenvalues(std::move(gram), n);
    const std::size_t count = std::min(n, cols);
    SpectralProfile profile;
    profile.singular_values.resize(count);
    for (std::size_t i = 0; i < count; ++i)
        profile.singular_values[i] = std::sqrt(std::max(0.0, eig[i]));

    double total = 0.0;
    for (double s : profile.singular_values) total += s;
    profile.normalized.assign(count, 0.0);
    if (total > 0.0)
        for (std::size_t i = 0; i < count; ++i)
            profile.normalized[i] = profile.singular_values[i] / total;

    profile.entropy_bits = svd_channel_entropy(profile.singular_values);
    profile.principal_count = principal_count(profile.entropy_bits);
    return profile;
}

namespace {

struct SvdWork {
    std::size_t rows, cols;
    std::vector<double>& a; // rows x cols, deflated in place
    std::size_t macs = 0;

    // u = A.v / |v|^2. Returns false when |v|^2 == 0.
    bool update_u(const std::vector<double>& v, std::vector<double>& u) {
        const auto& ops = kernels::active();
        double vn = ops.sumsq(v.data(), cols);
        macs += cols;
        if (vn == 0.0) return false;
        for (std::size_t j = 0; j < rows; ++j)
            u[j] = ops.dot(a.data() + j * cols, v.data(), cols) / vn;
        macs += rows * cols;
        return true;
    }

    // v = A^T.u / |u|^2. Returns false when |u|^2 == 0.
    bool update_v(const std::vector<double>& u, std::vector<double>& v) {
        const auto& ops = kernels::active();
        double un = ops.sumsq(u.data(), rows);
        macs += rows;
        if (un == 0.0) return false;
        std::fill(v.begin(), v.end(), 0.0);
        for (std::size_t j = 0; j < rows; ++j)
            ops.axpy(v.data(), a.data() + j * cols, u[j], cols);
        for (std::size_t c = 0; c < cols; ++c) v[c] /= un;
        macs += rows * cols;
        return true;
    }

    void deflate(const std::vector<double>& u, const std::vector<double>& v) {
        const auto& ops = kernels::active();
        for (std::size_t j = 0; j < rows; ++j) {
            if (u[j] == 0.0) continue;
            ops.axpy(a.data() + j * cols, v.data(), -u[j], cols);
        }
        macs += rows * cols;
    }

    // cold start: first row with nonzero norm at or after `from`, normalized
    std::vector<double> cold_init(std::size_t from) {
        const auto& ops = kernels::active();
        for (std::size_t step = 0; step < rows; ++step) {
            std::size_t j = (from + step) % rows;
            double norm = std::sqrt(ops.sumsq(a.data() + j * cols, cols));
            if (norm > 0.0) {
                std::vector<double> v(cols);
                kernels::active().scale(v.data(), a.data() + j * cols, 1.0 / norm, cols);
                return v;
            }
        }
        return std::vector<double>(cols, 0.0); // fully deflated input
    }
};

} // namespace

LightSvdResult light_svd(const Tensor& xf, std::size_t r,
                         const std::vector<std::vector<double>>* init_v,
                         std::size_t max_iter) {
    if (xf.ndim() != 2) throw InputError("light_svd expects a 2-d matrix");
    const std::size_t rows = xf.extent(0);
    const std::size_t cols = xf.extent(1);
    if (r > std::min(rows, cols))
        throw InputError("light_svd rank " + std::to_string(r) + " exceeds min(" +
                         std::to_string(rows) + ", " + std::to_string(cols) + ")");
    if (max_iter < 1 && r > 0) throw InputError("light_svd max_iter must be >= 1");

    Tensor residual = xf;
    std::vector<double> work(residual.data(), residual.data() + residual.size());
    SvdWork svd{rows, cols, work};

    FactoredActivation factors;
    factors.rank = r;
    factors.channels = rows;
    factors.height = 1;
    factors.width = cols;

    for (std::size_t i = 0; i < r; ++i) {
        std::vector<double> v;
        if (init_v && i < init_v->size() && (*init_v)[i].size() == cols)
            v = (*init_v)[i];
        else
            v = svd.cold_init(i);

        std::vector<double> u(rows, 0.0);
        bool live = true;
        for (std::size_t iter = 0; iter < max_iter && live; ++iter) {
            if (!svd.update_u(v, u)) {
                std::fill(u.begin(), u.end(), 0.0);
                live = false;
                break;
            }
            if (!svd.update_v(u, v)) {
                std::fill(u.begin(), u.end(), 0.0);
                live = false;
                break;
            }
        }
        if (live) svd.deflate(u, v);
        factors.u.push_back(std::move(u));
        factors.v.push_back(std::move(v));
    }

    std::copy(work.begin(), work.end(), residual.data());
    return {std::move(factors), std::move(residual), svd.macs};
}

Tensor reconstruct_matrix(const FactoredActivation& f) {
    Tensor out({f.channels, f.spatial()});
    const auto& ops = kernels::active();
    for (std::size_t i = 0; i < f.rank; ++i) {
        for (std::size_t j = 0; j < f.channels; ++j) {
            if (f.u[i][j] == 0.0) continue;
            ops.axpy(out.data() + j * f.spatial(), f.v[i].data(), f.u[i][j], f.spatial());
        }
    }
    return out;
}

Tensor reconstruct(const FactoredActivation& f) {
    return reconstruct_matrix(f).reshaped({f.channels, f.height, f.width});
}

DecomposeResult decompose_activation(const Tensor& x, std::size_t r,
                                     const FactoredActivation* warm_start,
                                     std::size_t max_iter) {
    if (x.ndim() != 3) throw InputError("decompose_activation expects a 3-d activation");
    const std::size_t n = x.extent(0), h = x.extent(1), w = x.extent(2);

    DecomposeResult result;
    if (r > n) {
        result.warning = "requested rank " + std::to_string(r) + " clamped to channel count " +
                         std::to_string(n);
        r = n;
    }
    if (r > h * w) r = h * w; // factor pairs beyond min(N, HW) add nothing

    std::vector<std::vector<double>> init;
    const std::vector<std::vector<double>>* init_ptr = nullptr;
    if (warm_start && warm_start->spatial() == h * w && warm_start->rank > 0) {
        for (std::size_t i = 0; i < std::min(r, warm_start->rank); ++i)
            init.push_back(warm_start->v[i]);
        init_ptr = &init;
    }

    LightSvdResult svd = light_svd(flatten_channels(x), r, init_ptr, max_iter);
    svd.factors.height = h;
    svd.factors.width = w;
    result.trusted = std::move(svd.factors);
    result.untrusted = svd.residual.reshaped({n, h, w});
    result.mac_count = svd.mac_count;
    return result;
}

} // namespace splitconv
