// Data-parallel inner loops used by the samplers and the split-step flow.
//
// Scalar reference implementations live in kernels.cpp; AVX2 variants in
// kernels_avx2.cpp (compiled with -mavx2 -mfma). The active implementation is
// chosen once at startup from cpuid, overridable with GIBBSFLOW_SIMD=scalar
// or GIBBSFLOW_SIMD=avx2. The two paths are equivalence-tested; they may
// differ by floating-point reassociation only.

#pragma once

#include <complex>
#include <cstddef>

namespace gibbsflow {

using cplx = std::complex<double>;

struct KernelTableImpl {
    const char* name;
    // sum_i |u_i|^2
    double (*sum_abs2)(const cplx* u, std::size_t n);
    // sum_i w_i |u_i|^2
    double (*sum_abs2_weighted)(const cplx* u, const double* w, std::size_t n);
    // sum_i w_i |u_i|^4
    double (*sum_abs4_weighted)(const cplx* u, const double* w, std::size_t n);
    // out_i = a*u_i + b*v_i  (real scalars, complex arrays); aliasing out==u allowed
    void (*mix)(double a, const cplx* u, double b, const cplx* v, cplx* out, std::size_t n);
    // out_i = |u_i|^2
    void (*abs2)(const cplx* u, double* out, std::size_t n);
};

extern const KernelTableImpl kScalarKernels;
#ifdef __x86_64__
extern const KernelTableImpl kAvx2Kernels;
#endif

// Active implementation (resolved on first call).
const KernelTableImpl& kernels();

// For tests: force a specific implementation ("scalar", "avx2", or "" = auto).
void set_kernel_impl(const char* name);

}  // namespace gibbsflow
