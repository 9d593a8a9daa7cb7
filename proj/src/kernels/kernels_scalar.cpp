#include "splitconv/kernels.hpp"

namespace splitconv::kernels {
namespace {

void axpy_scalar(double* y, const double* x, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

// 4-lane blocking mirrors the AVX2 reduction exactly; see Ops contract.
double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t main = n - n % 4;
    for (std::size_t i = 0; i < main; i += 4) {
        acc0 += a[i] * b[i];
        acc1 += a[i + 1] * b[i + 1];
        acc2 += a[i + 2] * b[i + 2];
        acc3 += a[i + 3] * b[i + 3];
    }
    double sum = (acc0 + acc2) + (acc1 + acc3);
    for (std::size_t i = main; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

double sumsq_scalar(const double* x, std::size_t n) { return dot_scalar(x, x, n); }

void scale_scalar(double* y, const double* x, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

void add_scalar(double* out, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_scalar(double* out, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

// x > 0 keeps the value, else exact +0.0 (so -0.0 inputs normalize the same
// way in both backends)
void relu_scalar(double* y, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask_scalar(double* dx, const double* x, const double* dy, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

constexpr Ops kScalarOps = {
    "scalar",   axpy_scalar, dot_scalar,  sumsq_scalar,
    scale_scalar, add_scalar, sub_scalar, relu_scalar,
    relu_mask_scalar,
};

} // namespace

const Ops& scalar_ops() { return kScalarOps; }

} // namespace splitconv::kernels
