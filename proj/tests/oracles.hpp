// Test-only reference implementations, kept independent of the library's
// compute paths: plain quadruple-loop convolution, central finite
// differences, and closed-form symmetric eigenvalues for n <= 3.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "splitconv/rng.hpp"
#include "splitconv/tensor.hpp"

namespace oracle {

using splitconv::ConvGeometry;
using splitconv::Rng;
using splitconv::Tensor;

// direct cross-correlation, accumulation order (channel, kernel row, kernel
// column) per output scalar
inline Tensor conv_quadruple_loop(const Tensor& x, const Tensor& w, const ConvGeometry& g) {
    const std::size_t h = x.extent(1), wid = x.extent(2);
    const std::size_t oh = g.out_h(), ow = g.out_w();
    Tensor y({g.out_channels, oh, ow});
    for (std::size_t i = 0; i < g.out_channels; ++i)
        for (std::size_t r = 0; r < oh; ++r)
            for (std::size_t c = 0; c < ow; ++c) {
                double acc = 0.0;
                for (std::size_t j = 0; j < g.in_channels; ++j)
                    for (std::size_t kh = 0; kh < g.kernel; ++kh)
                        for (std::size_t kw = 0; kw < g.kernel; ++kw) {
                            std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(r * g.stride + kh) -
                                                static_cast<std::ptrdiff_t>(g.pad);
                            std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(c * g.stride + kw) -
                                                static_cast<std::ptrdiff_t>(g.pad);
                            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h) || iw < 0 ||
                                iw >= static_cast<std::ptrdiff_t>(wid))
                                continue;
                            acc += x.at3(j, ih, iw) * w.at4(i, j, kh, kw);
                        }
                y.at3(i, r, c) = acc;
            }
    return y;
}

inline Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = scale * rng.normal();
    return t;
}

inline double rel_error(const Tensor& got, const Tensor& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        double d = got[i] - want[i];
        num += d * d;
        den += want[i] * want[i];
    }
    if (den == 0.0) return std::sqrt(num);
    return std::sqrt(num / den);
}

inline bool bitwise_equal(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

// central finite difference of a scalar function with respect to entry i of
// a parameter vector owned by the caller
inline double central_difference(std::function<double()> f, double* param, double step) {
    const double saved = *param;
    *param = saved + step;
    double up = f();
    *param = saved - step;
    double down = f();
    *param = saved;
    return (up - down) / (2.0 * step);
}

// eigenvalues of a symmetric n x n (n <= 3) via characteristic polynomial,
// descending
inline std::vector<double> symmetric_eigs_closed_form(const std::vector<double>& a,
                                                      std::size_t n) {
    if (n == 1) return {a[0]};
    if (n == 2) {
        double tr = a[0] + a[3];
        double det = a[0] * a[3] - a[1] * a[1];
        double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
        return {tr / 2.0 + disc, tr / 2.0 - disc};
    }
    // trigonometric solution for the symmetric 3x3 case
    double p1 = a[1] * a[1] + a[2] * a[2] + a[5] * a[5];
    if (p1 == 0.0) {
        std::vector<double> d = {a[0], a[4], a[8]};
        std::sort(d.begin(), d.end(), std::greater<>());
        return d;
    }
    double q = (a[0] + a[4] + a[8]) / 3.0;
    double p2 = (a[0] - q) * (a[0] - q) + (a[4] - q) * (a[4] - q) + (a[8] - q) * (a[8] - q) +
                2.0 * p1;
    double p = std::sqrt(p2 / 6.0);
    // B = (A - qI)/p
    double b[9];
    for (int i = 0; i < 9; ++i) b[i] = a[i] / p;
    b[0] -= q / p;
    b[4] -= q / p;
    b[8] -= q / p;
    double detb = b[0] * (b[4] * b[8] - b[5] * b[5]) - b[1] * (b[1] * b[8] - b[5] * b[2]) +
                  b[2] * (b[1] * b[5] - b[4] * b[2]);
    double r = detb / 2.0;
    r = std::max(-1.0, std::min(1.0, r));
    double phi = std::acos(r) / 3.0;
    double e1 = q + 2.0 * p * std::cos(phi);
    double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    double e2 = 3.0 * q - e1 - e3;
    std::vector<double> d = {e1, e2, e3};
    std::sort(d.begin(), d.end(), std::greater<>());
    return d;
}

} // namespace oracle
