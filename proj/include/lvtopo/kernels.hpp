#pragma once

#include <span>
#include <string_view>

namespace lvtopo::kernels {

// Series primitives used by the statistics and diffusion paths. Every
// operation has a scalar reference implementation; on x86-64 an AVX2
// variant is selected once at startup when the CPU supports it.
//
// SIMD reductions accumulate in a different order than the scalar loop,
// so results may differ from the reference by a few ulp. The equivalence
// tests bound that difference.

double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);

// y[i] = (x[i] - shift) * scale
void shift_scale(std::span<const double> x, double shift, double scale,
                 std::span<double> y);

// acc[i] += x[i] + r * v[i]   (one child's contribution to a parent dV)
void add_axpy(std::span<double> acc, std::span<const double> x, double r,
              std::span<const double> v);

// acc[i] += x[i]
void add(std::span<double> acc, std::span<const double> x);

// y[i] *= s
void scale_inplace(std::span<double> y, double s);

// d[i] = x[i+1] - x[i]; d must have size x.size() - 1
void first_diff(std::span<const double> x, std::span<double> d);

// Active backend name: "scalar" or "avx2".
std::string_view active_backend();

// Test hook; throws std::invalid_argument on an unknown or unsupported name.
void force_backend(std::string_view name);

}  // namespace lvtopo::kernels
