// AVX2/FMA variants of the inner-loop kernels. Complex arrays are treated as
// interleaved (re,im) doubles; loads are unaligned since std::vector gives no
// 32-byte guarantee.

#include "gibbsflow/kernels.hpp"

#include <immintrin.h>

namespace gibbsflow {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// |u|^2 for two complex numbers packed in one 256-bit lane: returns
// (a0, a0, a1, a1) where a_k = re_k^2 + im_k^2
inline __m256d abs2_pair(__m256d z) {
    __m256d sq = _mm256_mul_pd(z, z);
    __m256d sw = _mm256_permute_pd(sq, 0x5);  // swap re/im within pairs
    return _mm256_add_pd(sq, sw);
}

double avx2_sum_abs2(const cplx* u, std::size_t n) {
    const double* p = reinterpret_cast<const double*>(u);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d z = _mm256_loadu_pd(p + 2 * i);
        acc = _mm256_fmadd_pd(z, z, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += std::norm(u[i]);
    return s;
}

double avx2_sum_abs2_weighted(const cplx* u, const double* w, std::size_t n) {
    const double* p = reinterpret_cast<const double*>(u);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d z = _mm256_loadu_pd(p + 2 * i);
        __m256d a = abs2_pair(z);  // (a0,a0,a1,a1)
        __m128d wp = _mm_loadu_pd(w + i);
        __m256d wv = _mm256_permute4x64_pd(_mm256_castpd128_pd256(wp), 0x50);  // (w0,w0,w1,w1)
        acc = _mm256_fmadd_pd(a, wv, acc);
    }
    double s = 0.5 * hsum(acc);  // each |u|^2 counted twice in the pair layout
    for (; i < n; ++i) s += w[i] * std::norm(u[i]);
    return s;
}

double avx2_sum_abs4_weighted(const cplx* u, const double* w, std::size_t n) {
    const double* p = reinterpret_cast<const double*>(u);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d z = _mm256_loadu_pd(p + 2 * i);
        __m256d a = abs2_pair(z);
        __m128d wp = _mm_loadu_pd(w + i);
        __m256d wv = _mm256_permute4x64_pd(_mm256_castpd128_pd256(wp), 0x50);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(a, a), wv, acc);
    }
    double s = 0.5 * hsum(acc);
    for (; i < n; ++i) {
        const double a = std::norm(u[i]);
        s += w[i] * a * a;
    }
    return s;
}

void avx2_mix(double a, const cplx* u, double b, const cplx* v, cplx* out, std::size_t n) {
    const double* pu = reinterpret_cast<const double*>(u);
    const double* pv = reinterpret_cast<const double*>(v);
    double* po = reinterpret_cast<double*>(out);
    const __m256d av = _mm256_set1_pd(a);
    const __m256d bv = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d x = _mm256_loadu_pd(pu + 2 * i);
        __m256d y = _mm256_loadu_pd(pv + 2 * i);
        _mm256_storeu_pd(po + 2 * i, _mm256_fmadd_pd(av, x, _mm256_mul_pd(bv, y)));
    }
    for (; i < n; ++i) out[i] = a * u[i] + b * v[i];
}

void avx2_abs2(const cplx* u, double* out, std::size_t n) {
    const double* p = reinterpret_cast<const double*>(u);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d a = abs2_pair(_mm256_loadu_pd(p + 2 * i));  // (a0,a0,a1,a1)
        __m128d packed = _mm_unpacklo_pd(_mm256_castpd256_pd128(a),
                                         _mm256_extractf128_pd(a, 1));
        _mm_storeu_pd(out + i, packed);
    }
    for (; i < n; ++i) out[i] = std::norm(u[i]);
}

}  // namespace

const KernelTableImpl kAvx2Kernels = {
    "avx2", avx2_sum_abs2, avx2_sum_abs2_weighted,
    avx2_sum_abs4_weighted, avx2_mix, avx2_abs2,
};

}  // namespace gibbsflow
