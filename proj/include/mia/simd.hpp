#pragma once

#include <cstddef>
#include <string>

// Low-level vector kernels used by the MMD machinery: distance reductions
// between probability vectors and elementwise updates of kernel row-sum
// caches. Scalar reference versions always exist; an AVX2 variant is
// selected at runtime when the CPU supports it.

namespace mia::simd {

// Scalar reference kernels. These define the semantics; vectorized
// variants must agree with them to within reassociation round-off.
namespace ref {

double squared_l2(const double* a, const double* b, std::size_t n);
double l1(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);

// dst[i] += s * src[i]
void axpy(double* dst, const double* src, double s, std::size_t n);

}  // namespace ref

// Dispatched entry points. Same contracts as ref::*.
double squared_l2(const double* a, const double* b, std::size_t n);
double l1(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
void axpy(double* dst, const double* src, double s, std::size_t n);

// Name of the active backend ("scalar" or "avx2").
const std::string& active_backend();

// Force a backend for testing; pass "scalar", "avx2", or "auto".
// Throws if the requested backend is unavailable on this CPU.
void set_backend(const std::string& name);

}  // namespace mia::simd
