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

#pragma once

#include <complex>
#include <span>
#include <vector>

namespace pvad {

/// In-place iterative radix-2 FFT. Size must be a power of two.
/// Forward transform; no normalization.
void fft_inplace(std::vector<std::complex<double>>& data);

/// In-place inverse FFT (includes the 1/N normalization).
void ifft_inplace(std::vector<std::complex<double>>& data);

bool is_power_of_two(int n);
int next_power_of_two(int n);

/// Power spectrum |X_k|^2 of a real frame zero-padded to fft_size.
/// Returns fft_size/2 + 1 bins.
std::vector<double> power_spectrum(std::span<const double> frame, int fft_size);

/// Linear convolution of a real signal with a real kernel via FFT.
/// Output length = signal + kernel - 1.
std::vector<float> fft_convolve(std::span<const float> signal,
                                std::span<const float> kernel);

}  // namespace pvad
