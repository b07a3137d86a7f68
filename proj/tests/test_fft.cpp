/*
 * Copyright 2026 The PVAD Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pvad/fft.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "pvad/errors.hpp"
#include "pvad/rng.hpp"

using namespace pvad;
using cd = std::complex<double>;

namespace {

// O(n^2) reference DFT, the oracle for the fast transform.
std::vector<cd> naive_dft(const std::vector<cd>& x) {
  const std::size_t n = x.size();
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd acc{0.0, 0.0};
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * std::numbers::pi * double(k * t) / double(n);
      acc += x[t] * cd{std::cos(ang), std::sin(ang)};
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace

TEST_CASE("fft: helpers") {
  CHECK(is_power_of_two(1));
  CHECK(is_power_of_two(2));
  CHECK(is_power_of_two(512));
  CHECK_FALSE(is_power_of_two(0));
  CHECK_FALSE(is_power_of_two(3));
  CHECK_FALSE(is_power_of_two(400));
  CHECK(next_power_of_two(1) == 1);
  CHECK(next_power_of_two(2) == 2);
  CHECK(next_power_of_two(3) == 4);
  CHECK(next_power_of_two(400) == 512);
  CHECK(next_power_of_two(512) == 512);
}

TEST_CASE("fft: delta function transforms to all ones") {
  std::vector<cd> x(16, cd{0, 0});
  x[0] = cd{1, 0};
  fft_inplace(x);
  for (const auto& v : x) {
    CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.imag() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("fft: constant transforms to scaled delta") {
  std::vector<cd> x(8, cd{1, 0});
  fft_inplace(x);
  CHECK(x[0].real() == doctest::Approx(8.0).epsilon(1e-12));
  for (std::size_t k = 1; k < 8; ++k) CHECK(std::abs(x[k]) < 1e-12);
}

TEST_CASE("fft: matches naive DFT on random input") {
  Rng rng(31);
  for (int n : {2, 8, 64, 256}) {
    std::vector<cd> x(n);
    for (auto& v : x) v = cd{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    std::vector<cd> fast = x;
    fft_inplace(fast);
    const auto slow = naive_dft(x);
    for (int k = 0; k < n; ++k) {
      CHECK(std::abs(fast[k] - slow[k]) < 1e-9 * n);
    }
  }
}

TEST_CASE("fft: ifft inverts fft") {
  Rng rng(33);
  std::vector<cd> x(128);
  for (auto& v : x) v = cd{rng.uniform(-1, 1), rng.uniform(-1, 1)};
  auto y = x;
  fft_inplace(y);
  ifft_inplace(y);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y[i] - x[i]) < 1e-12);
}

TEST_CASE("fft: rejects non-power-of-two sizes") {
  std::vector<cd> x(6, cd{1, 0});
  CHECK_THROWS_AS(fft_inplace(x), ShapeError);
  std::vector<cd> y(0);
  CHECK_THROWS_AS(fft_inplace(y), ShapeError);
}

TEST_CASE("power_spectrum: parseval-style sanity on a pure tone") {
  const int n = 512;
  std::vector<double> frame(n);
  // Bin-centered tone: k = 8 cycles over the frame.
  for (int t = 0; t < n; ++t)
    frame[t] = std::cos(2.0 * std::numbers::pi * 8.0 * t / n);
  const auto ps = power_spectrum(frame, n);
  REQUIRE(ps.size() == std::size_t(n / 2 + 1));
  // All energy at bin 8: |X_8| = n/2.
  CHECK(ps[8] == doctest::Approx(double(n) * n / 4.0).epsilon(1e-9));
  for (int k = 0; k < n / 2 + 1; ++k) {
    if (k != 8) CHECK(ps[k] < 1e-6);
  }
}

TEST_CASE("power_spectrum: zero-pads shorter frames") {
  std::vector<double> frame(400, 1.0);
  const auto ps = power_spectrum(frame, 512);
  REQUIRE(ps.size() == 257);
  CHECK(ps[0] == doctest::Approx(400.0 * 400.0).epsilon(1e-12));
}

TEST_CASE("power_spectrum: frame longer than fft_size is rejected") {
  std::vector<double> frame(600, 1.0);
  CHECK_THROWS_AS(power_spectrum(frame, 512), ShapeError);
}

TEST_CASE("fft_convolve: matches direct convolution") {
  Rng rng(37);
  std::vector<float> sig(333), ker(45);
  for (auto& v : sig) v = float(rng.uniform(-1, 1));
  for (auto& v : ker) v = float(rng.uniform(-1, 1));
  const auto fast = fft_convolve(sig, ker);
  REQUIRE(fast.size() == sig.size() + ker.size() - 1);
  for (std::size_t i = 0; i < fast.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < ker.size(); ++j) {
      if (i >= j && i - j < sig.size()) acc += double(sig[i - j]) * ker[j];
    }
    CHECK(fast[i] == doctest::Approx(acc).epsilon(1e-4));
  }
}

TEST_CASE("fft_convolve: identity kernel") {
  std::vector<float> sig = {1.0f, -2.0f, 3.0f, 0.5f};
  std::vector<float> ker = {1.0f};
  const auto out = fft_convolve(sig, ker);
  REQUIRE(out.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(out[i] == doctest::Approx(sig[i]).epsilon(1e-6));
}
