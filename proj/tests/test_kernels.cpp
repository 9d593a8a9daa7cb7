#include "doctest.h"

#include <cstring>
#include <vector>

#include "splitconv/kernels.hpp"
#include "splitconv/rng.hpp"

using namespace splitconv;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

} // namespace

TEST_CASE("scalar and AVX2 backends agree bit-for-bit") {
    const kernels::Ops* simd = kernels::avx2_ops();
    if (!simd) {
        MESSAGE("AVX2 unavailable; equivalence suite skipped");
        return;
    }
    const kernels::Ops& ref = kernels::scalar_ops();
    Rng rng(20240521);

    // sizes cover empty, sub-lane, lane-aligned and ragged tails
    for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 33, 64, 257, 1024}) {
        auto x = random_vec(n, rng);
        auto y0 = random_vec(n, rng);
        auto dy = random_vec(n, rng);
        double a = rng.normal();

        auto y1 = y0, y2 = y0;
        ref.axpy(y1.data(), x.data(), a, n);
        simd->axpy(y2.data(), x.data(), a, n);
        CHECK(same_bits(y1, y2));

        CHECK(ref.dot(x.data(), y0.data(), n) == simd->dot(x.data(), y0.data(), n));
        CHECK(ref.sumsq(x.data(), n) == simd->sumsq(x.data(), n));

        std::vector<double> s1(n), s2(n);
        ref.scale(s1.data(), x.data(), a, n);
        simd->scale(s2.data(), x.data(), a, n);
        CHECK(same_bits(s1, s2));

        ref.add(s1.data(), x.data(), y0.data(), n);
        simd->add(s2.data(), x.data(), y0.data(), n);
        CHECK(same_bits(s1, s2));

        ref.sub(s1.data(), x.data(), y0.data(), n);
        simd->sub(s2.data(), x.data(), y0.data(), n);
        CHECK(same_bits(s1, s2));

        ref.relu(s1.data(), x.data(), n);
        simd->relu(s2.data(), x.data(), n);
        CHECK(same_bits(s1, s2));

        ref.relu_mask(s1.data(), x.data(), dy.data(), n);
        simd->relu_mask(s2.data(), x.data(), dy.data(), n);
        CHECK(same_bits(s1, s2));
    }
}

TEST_CASE("relu backends normalize negative zero identically") {
    const kernels::Ops& ref = kernels::scalar_ops();
    std::vector<double> x = {-0.0, 0.0, -1.0, 1.0, -0.0, 0.5, -0.5, -0.0};
    std::vector<double> out(x.size());
    ref.relu(out.data(), x.data(), x.size());
    for (double v : out) CHECK(!std::signbit(v));

    if (const kernels::Ops* simd = kernels::avx2_ops()) {
        std::vector<double> out2(x.size());
        simd->relu(out2.data(), x.data(), x.size());
        CHECK(same_bits(out, out2));
    }
}

TEST_CASE("backend selection is overridable") {
    kernels::Backend original = kernels::active_backend();
    kernels::set_backend(kernels::Backend::scalar);
    CHECK(kernels::active_backend() == kernels::Backend::scalar);
    CHECK(std::string(kernels::active().name) == "scalar");
    if (kernels::avx2_supported()) {
        kernels::set_backend(kernels::Backend::avx2);
        CHECK(std::string(kernels::active().name) == "avx2");
    }
    kernels::set_backend(original);
}

TEST_CASE("dot reduction contract: blocked lanes, sequential tail") {
    // the documented order: (acc0+acc2)+(acc1+acc3) then tail appends
    const kernels::Ops& ref = kernels::scalar_ops();
    std::vector<double> a = {1e16, 1.0, -1e16, 1.0, 3.0, 4.0, 5.0};
    std::vector<double> b = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    double acc0 = a[0] * b[0], acc1 = a[1] * b[1], acc2 = a[2] * b[2], acc3 = a[3] * b[3];
    double want = (acc0 + acc2) + (acc1 + acc3);
    want += a[4] * b[4];
    want += a[5] * b[5];
    want += a[6] * b[6];
    CHECK(ref.dot(a.data(), b.data(), a.size()) == want);
}
