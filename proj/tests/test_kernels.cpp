#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lvtopo/kernels.hpp"

namespace k = lvtopo::kernels;

namespace {

std::vector<double> random_series(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 3.0);
  std::vector<double> out(n);
  for (double& v : out) v = dist(rng);
  return out;
}

struct BackendGuard {
  std::string initial{k::active_backend()};
  ~BackendGuard() { k::force_backend(initial); }
};

}  // namespace

TEST_CASE("scalar kernels on small exact inputs") {
  k::force_backend("scalar");
  BackendGuard guard;

  std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(k::sum(x) == 15.0);
  CHECK(k::dot(x, x) == 55.0);

  std::vector<double> y(5);
  k::shift_scale(x, 3.0, 2.0, y);
  CHECK(y == std::vector<double>{-4.0, -2.0, 0.0, 2.0, 4.0});

  std::vector<double> acc(5, 1.0);
  k::add_axpy(acc, x, 0.5, x);
  CHECK(acc == std::vector<double>{2.5, 4.0, 5.5, 7.0, 8.5});

  std::vector<double> d(4);
  k::first_diff(x, d);
  CHECK(d == std::vector<double>{1.0, 1.0, 1.0, 1.0});

  k::scale_inplace(d, 3.0);
  CHECK(d == std::vector<double>{3.0, 3.0, 3.0, 3.0});
}

TEST_CASE("simd backend matches scalar reference") {
  BackendGuard guard;
  bool have_simd = true;
  try {
    k::force_backend("avx2");
  } catch (const std::invalid_argument&) {
    have_simd = false;  // non-x86 or no AVX2; nothing to compare
  }
  if (!have_simd) return;

  // lengths straddling the vector width, including remainders
  for (std::size_t n : {1u, 3u, 4u, 5u, 8u, 15u, 64u, 1001u}) {
    auto a = random_series(n, 100 + n);
    auto b = random_series(n, 200 + n);

    k::force_backend("scalar");
    double sum_ref = k::sum(a);
    double dot_ref = k::dot(a, b);
    std::vector<double> ss_ref(n), axpy_ref = a, add_ref = a, si_ref = a;
    k::shift_scale(a, 0.25, 1.75, ss_ref);
    k::add_axpy(axpy_ref, b, 9e-3, a);
    k::add(add_ref, b);
    k::scale_inplace(si_ref, 1.0 / 3.0);
    std::vector<double> diff_ref(n - 1 > 0 ? n - 1 : 0);
    if (n > 1) k::first_diff(a, diff_ref);

    k::force_backend("avx2");
    CHECK(k::sum(a) == doctest::Approx(sum_ref).epsilon(1e-13));
    CHECK(k::dot(a, b) == doctest::Approx(dot_ref).epsilon(1e-13));
    std::vector<double> ss(n), axpy = a, add = a, si = a;
    k::shift_scale(a, 0.25, 1.75, ss);
    k::add_axpy(axpy, b, 9e-3, a);
    k::add(add, b);
    k::scale_inplace(si, 1.0 / 3.0);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(ss[i] == ss_ref[i]);  // elementwise ops have no reduction order
      CHECK(axpy[i] == axpy_ref[i]);
      CHECK(add[i] == add_ref[i]);
      CHECK(si[i] == si_ref[i]);
    }
    if (n > 1) {
      std::vector<double> diff(n - 1);
      k::first_diff(a, diff);
      CHECK(diff == diff_ref);
    }
  }
}

TEST_CASE("unknown backend is rejected") {
  CHECK_THROWS_AS(k::force_backend("sse9"), std::invalid_argument);
}
