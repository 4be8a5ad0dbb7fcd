#include "gibbsflow/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace gibbsflow {

namespace {

double scalar_sum_abs2(const cplx* u, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::norm(u[i]);
    return acc;
}

double scalar_sum_abs2_weighted(const cplx* u, const double* w, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * std::norm(u[i]);
    return acc;
}

double scalar_sum_abs4_weighted(const cplx* u, const double* w, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::norm(u[i]);
        acc += w[i] * a * a;
    }
    return acc;
}

void scalar_mix(double a, const cplx* u, double b, const cplx* v, cplx* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * u[i] + b * v[i];
}

void scalar_abs2(const cplx* u, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::norm(u[i]);
}

const KernelTableImpl* g_active = nullptr;

const KernelTableImpl* resolve() {
    const char* force = std::getenv("GIBBSFLOW_SIMD");
    if (force && std::strcmp(force, "scalar") == 0) return &kScalarKernels;
#if defined(__x86_64__) && defined(GIBBSFLOW_HAVE_AVX2_TU)
    if (force && std::strcmp(force, "avx2") == 0) return &kAvx2Kernels;
    if (__builtin_cpu_supports("avx2")) return &kAvx2Kernels;
#endif
    return &kScalarKernels;
}

}  // namespace

const KernelTableImpl kScalarKernels = {
    "scalar", scalar_sum_abs2, scalar_sum_abs2_weighted,
    scalar_sum_abs4_weighted, scalar_mix, scalar_abs2,
};

const KernelTableImpl& kernels() {
    if (!g_active) g_active = resolve();
    return *g_active;
}

void set_kernel_impl(const char* name) {
    if (!name || !*name) {
        g_active = resolve();
        return;
    }
    if (std::strcmp(name, "scalar") == 0) {
        g_active = &kScalarKernels;
        return;
    }
#if defined(__x86_64__) && defined(GIBBSFLOW_HAVE_AVX2_TU)
    if (std::strcmp(name, "avx2") == 0) {
        g_active = &kAvx2Kernels;
        return;
    }
#endif
    throw std::invalid_argument("unknown kernel impl: " + std::string(name));
}

}  // namespace gibbsflow
