#include "mia/simd.hpp"

#include <cmath>
#include <stdexcept>

#if defined(__x86_64__) || defined(_M_X64)
#define MIA_X86 1
#include <immintrin.h>
#else
#define MIA_X86 0
#endif

namespace mia::simd {

namespace ref {

double squared_l2(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double l1(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
    return acc;
}

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

void axpy(double* dst, const double* src, double s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] += s * src[i];
}

}  // namespace ref

#if MIA_X86

namespace avx2 {

// 4-lane horizontal add of a __m256d.
__attribute__((target("avx2"))) static inline double hadd(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

__attribute__((target("avx2,fma")))
double squared_l2(const double* a, const double* b, std::size_t n) {
    const std::size_t nv = n / 4 * 4;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    return hadd(acc) + ref::squared_l2(a + nv, b + nv, n - nv);
}

__attribute__((target("avx2,fma")))
double l1(const double* a, const double* b, std::size_t n) {
    const std::size_t nv = n / 4 * 4;
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, d));
    }
    return hadd(acc) + ref::l1(a + nv, b + nv, n - nv);
}

__attribute__((target("avx2,fma")))
double dot(const double* a, const double* b, std::size_t n) {
    const std::size_t nv = n / 4 * 4;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    return hadd(acc) + ref::dot(a + nv, b + nv, n - nv);
}

__attribute__((target("avx2,fma")))
double sum(const double* a, std::size_t n) {
    const std::size_t nv = n / 4 * 4;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4)
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    return hadd(acc) + ref::sum(a + nv, n - nv);
}

__attribute__((target("avx2,fma")))
void axpy(double* dst, const double* src, double s, std::size_t n) {
    const std::size_t nv = n / 4 * 4;
    const __m256d vs = _mm256_set1_pd(s);
    for (std::size_t i = 0; i < nv; i += 4) {
        __m256d d = _mm256_fmadd_pd(vs, _mm256_loadu_pd(src + i), _mm256_loadu_pd(dst + i));
        _mm256_storeu_pd(dst + i, d);
    }
    ref::axpy(dst + nv, src + nv, s, n - nv);
}

}  // namespace avx2

static bool cpu_has_avx2() { return __builtin_cpu_supports("avx2") != 0; }

#else

static bool cpu_has_avx2() { return false; }

#endif  // MIA_X86

namespace {

struct Backend {
    std::string name;
    double (*squared_l2)(const double*, const double*, std::size_t);
    double (*l1)(const double*, const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    void (*axpy)(double*, const double*, double, std::size_t);
};

const Backend kScalar = {"scalar", ref::squared_l2, ref::l1, ref::dot, ref::sum, ref::axpy};

#if MIA_X86
const Backend kAvx2 = {"avx2", avx2::squared_l2, avx2::l1, avx2::dot, avx2::sum, avx2::axpy};
#endif

const Backend& auto_backend() {
#if MIA_X86
    if (cpu_has_avx2()) return kAvx2;
#endif
    return kScalar;
}

const Backend* g_active = nullptr;

const Backend& active() {
    if (g_active == nullptr) g_active = &auto_backend();
    return *g_active;
}

}  // namespace

double squared_l2(const double* a, const double* b, std::size_t n) { return active().squared_l2(a, b, n); }
double l1(const double* a, const double* b, std::size_t n) { return active().l1(a, b, n); }
double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
double sum(const double* a, std::size_t n) { return active().sum(a, n); }
void axpy(double* dst, const double* src, double s, std::size_t n) { active().axpy(dst, src, s, n); }

const std::string& active_backend() { return active().name; }

void set_backend(const std::string& name) {
    if (name == "auto") {
        g_active = &auto_backend();
    } else if (name == "scalar") {
        g_active = &kScalar;
    } else if (name == "avx2") {
#if MIA_X86
        if (!cpu_has_avx2()) throw std::runtime_error("avx2 backend not supported on this CPU");
        g_active = &kAvx2;
#else
        throw std::runtime_error("avx2 backend not available in this build");
#endif
    } else {
        throw std::runtime_error("unknown simd backend: " + name);
    }
}

}  // namespace mia::simd
