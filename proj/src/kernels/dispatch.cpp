#include "splitconv/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace splitconv::kernels {

const Ops* avx2_ops_build(); // defined in kernels_avx2.cpp

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const Ops* detect_avx2() {
    const Ops* ops = avx2_ops_build();
    if (ops == nullptr || !cpu_has_avx2()) return nullptr;
    return ops;
}

struct Dispatch {
    const Ops* avx2;
    const Ops* current;
    Backend backend;

    Dispatch() : avx2(detect_avx2()) {
        backend = avx2 ? Backend::avx2 : Backend::scalar;
        if (const char* env = std::getenv("SPLITCONV_KERNELS")) {
            if (std::strcmp(env, "scalar") == 0) backend = Backend::scalar;
            else if (std::strcmp(env, "avx2") == 0 && avx2) backend = Backend::avx2;
        }
        current = backend == Backend::avx2 ? avx2 : &scalar_ops();
    }
};

Dispatch& dispatch() {
    static Dispatch d;
    return d;
}

} // namespace

const Ops* avx2_ops() { return dispatch().avx2; }

const Ops& active() { return *dispatch().current; }

Backend active_backend() { return dispatch().backend; }

bool avx2_supported() { return dispatch().avx2 != nullptr; }

void set_backend(Backend backend) {
    Dispatch& d = dispatch();
    if (backend == Backend::avx2) {
        if (!d.avx2) throw std::runtime_error("AVX2 kernels unavailable on this CPU/build");
        d.current = d.avx2;
    } else {
        d.current = &scalar_ops();
    }
    d.backend = backend;
}

} // namespace splitconv::kernels
