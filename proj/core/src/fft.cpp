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

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pvad/errors.hpp"

namespace pvad {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_power_of_two(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace {

void fft_core(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  if (!is_power_of_two(static_cast<int>(n))) {
    throw ShapeError("fft: size must be a power of two, got " +
                     std::to_string(n));
  }

  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang =
        (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }

  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv_n;
  }
}

}  // namespace

void fft_inplace(std::vector<std::complex<double>>& data) {
  fft_core(data, /*inverse=*/false);
}

void ifft_inplace(std::vector<std::complex<double>>& data) {
  fft_core(data, /*inverse=*/true);
}

std::vector<double> power_spectrum(std::span<const double> frame,
                                   int fft_size) {
  if (!is_power_of_two(fft_size)) {
    throw ShapeError("power_spectrum: fft_size must be a power of two");
  }
  if (static_cast<int>(frame.size()) > fft_size) {
    throw ShapeError("power_spectrum: frame longer than fft_size");
  }
  std::vector<std::complex<double>> buf(static_cast<size_t>(fft_size));
  for (size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i];
  fft_inplace(buf);
  std::vector<double> out(static_cast<size_t>(fft_size / 2 + 1));
  for (size_t k = 0; k < out.size(); ++k) out[k] = std::norm(buf[k]);
  return out;
}

std::vector<float> fft_convolve(std::span<const float> signal,
                                std::span<const float> kernel) {
  if (signal.empty() || kernel.empty()) {
    throw ShapeError("fft_convolve: empty input");
  }
  const size_t out_len = signal.size() + kernel.size() - 1;
  const int n = next_power_of_two(static_cast<int>(out_len));
  std::vector<std::complex<double>> a(static_cast<size_t>(n));
  std::vector<std::complex<double>> b(static_cast<size_t>(n));
  for (size_t i = 0; i < signal.size(); ++i) a[i] = signal[i];
  for (size_t i = 0; i < kernel.size(); ++i) b[i] = kernel[i];
  fft_inplace(a);
  fft_inplace(b);
  for (int i = 0; i < n; ++i) a[static_cast<size_t>(i)] *= b[static_cast<size_t>(i)];
  ifft_inplace(a);
  std::vector<float> out(out_len);
  for (size_t i = 0; i < out_len; ++i) {
    out[i] = static_cast<float>(a[i].real());
  }
  return out;
}

}  // namespace pvad
