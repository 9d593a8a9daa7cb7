#pragma once

#include <cstddef>

namespace splitconv::kernels {

enum class Backend { scalar, avx2 };

// Data-parallel inner loops behind the tensor and factorization code.
// Every entry point has a scalar reference and (on x86) an AVX2 variant;
// the two must agree bit-for-bit:
//   - elementwise ops (axpy, scale, add, sub, relu, relu_mask) are
//     lane-independent, so any vectorization is exact;
//   - dot/sumsq use a fixed 4-lane blocking in BOTH backends: partial sums
//     acc[l] over indices 4t+l, combined as (acc0+acc2)+(acc1+acc3), then
//     tail elements appended one at a time.
struct Ops {
    const char* name;
    void (*axpy)(double* y, const double* x, double a, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sumsq)(const double* x, std::size_t n);
    void (*scale)(double* y, const double* x, double a, std::size_t n);
    void (*add)(double* out, const double* a, const double* b, std::size_t n);
    void (*sub)(double* out, const double* a, const double* b, std::size_t n);
    void (*relu)(double* y, const double* x, std::size_t n);
    void (*relu_mask)(double* dx, const double* x, const double* dy, std::size_t n);
};

const Ops& scalar_ops();
const Ops* avx2_ops(); // nullptr when this build or CPU lacks AVX2

// Runtime-selected backend. Default is the best available; override with
// env SPLITCONV_KERNELS=scalar|avx2|auto or set_backend().
const Ops& active();
Backend active_backend();
void set_backend(Backend backend); // throws std::runtime_error if unavailable
bool avx2_supported();

} // namespace splitconv::kernels
