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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pvad/dataset.hpp"
#include "pvad/model.hpp"
#include "pvad/nn.hpp"

namespace pvad {

/// Per-tensor symmetric 8-bit quantization: scale = max|t| / 127,
/// q = round(t / scale), values in [-127, 127]. No zero point.
struct QuantizedTensor {
  std::vector<int8_t> values;  // column-major, rows*cols entries
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  double scale = 1.0;
};

/// An all-zero tensor gets scale 1.0 and all-zero values.
QuantizedTensor quantize_tensor(const Eigen::Ref<const Eigen::MatrixXf>& t);
Eigen::MatrixXf dequantize_tensor(const QuantizedTensor& q);

/// One quantize/dequantize pass over every parameter tensor.
NetworkParams<float> quantize_dequantize(const NetworkParams<float>& net);

struct ModelFile {
  ArchitectureKind arch = ArchitectureKind::kEt;
  bool quantized = false;
  NetworkParams<float> params;  // dequantized when `quantized`
};

/// Little-endian binary model file. Layout (see docs/formats.md):
/// magic "PVADMDL\0", u32 version, u32 arch, i32 input/hidden/fc/classes,
/// u32 quantized flag, u32 tensor count, then per tensor a named payload.
void save_model(const std::filesystem::path& path, ArchitectureKind arch,
                const NetworkParams<float>& net, bool quantized);
ModelFile load_model(const std::filesystem::path& path);

struct QuantDeltaReport {
  EvalReport float_report;
  EvalReport quant_report;
  double max_weight_error = 0.0;

  double delta_ap(PvadClass cls) const {
    return quant_report.ap_for(cls) - float_report.ap_for(cls);
  }
  std::string to_text() const;
};

/// Evaluates the net twice (original and dequantized weights) on the same
/// utterances and reports the per-class AP movement.
QuantDeltaReport quantized_inference_delta(
    const NetworkParams<float>& net, ArchitectureKind arch,
    const std::vector<PreparedUtterance>& utts);

}  // namespace pvad
