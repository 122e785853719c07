#include "lvtopo/kernels.hpp"

#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <string>

#if defined(__x86_64__) || defined(_M_X64)
#define LVTOPO_X86 1
#include <immintrin.h>
#else
#define LVTOPO_X86 0
#endif

namespace lvtopo::kernels {

namespace scalar {

double sum(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void shift_scale(std::span<const double> x, double shift, double scale,
                 std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = (x[i] - shift) * scale;
}

void add_axpy(std::span<double> acc, std::span<const double> x, double r,
              std::span<const double> v) {
  assert(acc.size() == x.size() && acc.size() == v.size());
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += x[i] + r * v[i];
}

void add(std::span<double> acc, std::span<const double> x) {
  assert(acc.size() == x.size());
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += x[i];
}

void scale_inplace(std::span<double> y, double s) {
  for (double& v : y) v *= s;
}

void first_diff(std::span<const double> x, std::span<double> d) {
  assert(x.size() == d.size() + 1);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = x[i + 1] - x[i];
}

}  // namespace scalar

#if LVTOPO_X86

namespace avx2 {

__attribute__((target("avx2"))) static double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

__attribute__((target("avx2"))) double sum(std::span<const double> x) {
  std::size_t n = x.size();
  std::size_t i = 0;
  __m256d acc = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(&x[i]));
  double total = hsum(acc);
  for (; i < n; ++i) total += x[i];
  return total;
}

__attribute__((target("avx2"))) double dot(std::span<const double> a,
                                           std::span<const double> b) {
  assert(a.size() == b.size());
  std::size_t n = a.size();
  std::size_t i = 0;
  __m256d acc = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(&a[i]), _mm256_loadu_pd(&b[i]));
    acc = _mm256_add_pd(acc, prod);
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

__attribute__((target("avx2"))) void shift_scale(std::span<const double> x,
                                                 double shift, double scale,
                                                 std::span<double> y) {
  assert(x.size() == y.size());
  std::size_t n = x.size();
  std::size_t i = 0;
  __m256d vshift = _mm256_set1_pd(shift);
  __m256d vscale = _mm256_set1_pd(scale);
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_sub_pd(_mm256_loadu_pd(&x[i]), vshift);
    _mm256_storeu_pd(&y[i], _mm256_mul_pd(v, vscale));
  }
  for (; i < n; ++i) y[i] = (x[i] - shift) * scale;
}

__attribute__((target("avx2"))) void add_axpy(std::span<double> acc,
                                              std::span<const double> x, double r,
                                              std::span<const double> v) {
  assert(acc.size() == x.size() && acc.size() == v.size());
  std::size_t n = acc.size();
  std::size_t i = 0;
  __m256d vr = _mm256_set1_pd(r);
  for (; i + 4 <= n; i += 4) {
    __m256d term = _mm256_add_pd(_mm256_loadu_pd(&x[i]),
                                 _mm256_mul_pd(vr, _mm256_loadu_pd(&v[i])));
    _mm256_storeu_pd(&acc[i], _mm256_add_pd(_mm256_loadu_pd(&acc[i]), term));
  }
  for (; i < n; ++i) acc[i] += x[i] + r * v[i];
}

__attribute__((target("avx2"))) void add(std::span<double> acc,
                                         std::span<const double> x) {
  assert(acc.size() == x.size());
  std::size_t n = acc.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(&acc[i],
                     _mm256_add_pd(_mm256_loadu_pd(&acc[i]), _mm256_loadu_pd(&x[i])));
  }
  for (; i < n; ++i) acc[i] += x[i];
}

__attribute__((target("avx2"))) void scale_inplace(std::span<double> y, double s) {
  std::size_t n = y.size();
  std::size_t i = 0;
  __m256d vs = _mm256_set1_pd(s);
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(&y[i], _mm256_mul_pd(_mm256_loadu_pd(&y[i]), vs));
  for (; i < n; ++i) y[i] *= s;
}

__attribute__((target("avx2"))) void first_diff(std::span<const double> x,
                                                std::span<double> d) {
  assert(x.size() == d.size() + 1);
  std::size_t n = d.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d next = _mm256_loadu_pd(&x[i + 1]);
    _mm256_storeu_pd(&d[i], _mm256_sub_pd(next, _mm256_loadu_pd(&x[i])));
  }
  for (; i < n; ++i) d[i] = x[i + 1] - x[i];
}

}  // namespace avx2

#endif  // LVTOPO_X86

namespace {

struct Backend {
  double (*sum)(std::span<const double>);
  double (*dot)(std::span<const double>, std::span<const double>);
  void (*shift_scale)(std::span<const double>, double, double, std::span<double>);
  void (*add_axpy)(std::span<double>, std::span<const double>, double,
                   std::span<const double>);
  void (*add)(std::span<double>, std::span<const double>);
  void (*scale_inplace)(std::span<double>, double);
  void (*first_diff)(std::span<const double>, std::span<double>);
  std::string_view name;
};

constexpr Backend kScalar{scalar::sum,       scalar::dot,
                          scalar::shift_scale, scalar::add_axpy,
                          scalar::add,       scalar::scale_inplace,
                          scalar::first_diff, "scalar"};

#if LVTOPO_X86
constexpr Backend kAvx2{avx2::sum,        avx2::dot,
                        avx2::shift_scale, avx2::add_axpy,
                        avx2::add,        avx2::scale_inplace,
                        avx2::first_diff, "avx2"};
#endif

Backend pick_backend() {
#if LVTOPO_X86
  if (__builtin_cpu_supports("avx2")) return kAvx2;
#endif
  return kScalar;
}

Backend g_backend = pick_backend();

}  // namespace

double sum(std::span<const double> x) { return g_backend.sum(x); }
double dot(std::span<const double> a, std::span<const double> b) {
  return g_backend.dot(a, b);
}
void shift_scale(std::span<const double> x, double shift, double scale,
                 std::span<double> y) {
  g_backend.shift_scale(x, shift, scale, y);
}
void add_axpy(std::span<double> acc, std::span<const double> x, double r,
              std::span<const double> v) {
  g_backend.add_axpy(acc, x, r, v);
}
void add(std::span<double> acc, std::span<const double> x) { g_backend.add(acc, x); }
void scale_inplace(std::span<double> y, double s) { g_backend.scale_inplace(y, s); }
void first_diff(std::span<const double> x, std::span<double> d) {
  g_backend.first_diff(x, d);
}

std::string_view active_backend() { return g_backend.name; }

void force_backend(std::string_view name) {
  if (name == "scalar") {
    g_backend = kScalar;
    return;
  }
#if LVTOPO_X86
  if (name == "avx2") {
    if (!__builtin_cpu_supports("avx2"))
      throw std::invalid_argument("avx2 not supported on this CPU");
    g_backend = kAvx2;
    return;
  }
#endif
  throw std::invalid_argument("unknown kernel backend: " + std::string(name));
}

}  // namespace lvtopo::kernels
