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

#include "pvad/model_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pvad/errors.hpp"

namespace pvad {

namespace {

constexpr char kMagic[8] = {'P', 'V', 'A', 'D', 'M', 'D', 'L', '\0'};
constexpr uint32_t kFormatVersion = 1;

// Explicit little-endian writers keep the format platform-independent.
void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }

class ByteReader {
 public:
  ByteReader(std::string data, std::string path)
      : data_(std::move(data)), path_(std::move(path)) {}

  uint16_t u16() {
    need(2);
    uint16_t v = 0;
    for (int i = 0; i < 2; ++i) v |= static_cast<uint16_t>(byte()) << (8 * i);
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(byte()) << (8 * i);
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(byte()) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes(size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  uint8_t byte() { return static_cast<uint8_t>(data_[pos_++]); }
  void need(size_t n) {
    if (pos_ + n > data_.size()) {
      throw IoError("truncated model file: " + path_);
    }
  }

  std::string data_;
  std::string path_;
  size_t pos_ = 0;
};

}  // namespace

QuantizedTensor quantize_tensor(const Eigen::Ref<const Eigen::MatrixXf>& t) {
  if (!t.allFinite()) throw DataError("quantize_tensor: non-finite tensor");
  QuantizedTensor q;
  q.rows = t.rows();
  q.cols = t.cols();
  const float max_abs = t.size() == 0 ? 0.0f : t.cwiseAbs().maxCoeff();
  q.scale = max_abs > 0.0f ? static_cast<double>(max_abs) / 127.0 : 1.0;
  q.values.resize(static_cast<size_t>(t.size()));
  size_t k = 0;
  for (Eigen::Index c = 0; c < t.cols(); ++c) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      const double scaled = static_cast<double>(t(r, c)) / q.scale;
      const long v = std::lround(scaled);
      q.values[k++] = static_cast<int8_t>(std::clamp(v, -127L, 127L));
    }
  }
  return q;
}

Eigen::MatrixXf dequantize_tensor(const QuantizedTensor& q) {
  if (q.values.size() != static_cast<size_t>(q.rows * q.cols)) {
    throw ShapeError("dequantize_tensor: payload size mismatch");
  }
  if (!(q.scale > 0.0) || !std::isfinite(q.scale)) {
    throw DataError("dequantize_tensor: bad scale");
  }
  Eigen::MatrixXf t(q.rows, q.cols);
  size_t k = 0;
  for (Eigen::Index c = 0; c < q.cols; ++c) {
    for (Eigen::Index r = 0; r < q.rows; ++r) {
      t(r, c) = static_cast<float>(q.values[k++] * q.scale);
    }
  }
  return t;
}

NetworkParams<float> quantize_dequantize(const NetworkParams<float>& net) {
  NetworkParams<float> out = net;
  for (const TensorRef<float>& ref : tensor_refs(out)) {
    Eigen::Map<Eigen::MatrixXf> view(ref.data, ref.rows, ref.cols);
    view = dequantize_tensor(quantize_tensor(view));
  }
  return out;
}

void save_model(const std::filesystem::path& path, ArchitectureKind arch,
                const NetworkParams<float>& net, bool quantized) {
  const auto refs = tensor_refs(net);
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<uint32_t>(arch));
  put_u32(out, static_cast<uint32_t>(net.input_dim()));
  put_u32(out, static_cast<uint32_t>(net.hidden_dim()));
  put_u32(out, static_cast<uint32_t>(net.fc_dim()));
  put_u32(out, static_cast<uint32_t>(net.num_classes()));
  put_u32(out, quantized ? 1 : 0);
  put_u32(out, static_cast<uint32_t>(refs.size()));

  for (const TensorRef<const float>& ref : refs) {
    if (ref.name.size() > 0xffff) throw ConfigError("tensor name too long");
    put_u16(out, static_cast<uint16_t>(ref.name.size()));
    out.append(ref.name);
    put_u32(out, static_cast<uint32_t>(ref.rows));
    put_u32(out, static_cast<uint32_t>(ref.cols));
    const Eigen::Map<const Eigen::MatrixXf> view(ref.data, ref.rows, ref.cols);
    if (quantized) {
      const QuantizedTensor q = quantize_tensor(view);
      put_f64(out, q.scale);
      out.append(reinterpret_cast<const char*>(q.values.data()),
                 q.values.size());
    } else {
      for (Eigen::Index k = 0; k < ref.size(); ++k) put_f32(out, ref.data[k]);
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot create " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  ByteReader in(buf.str(), path.string());

  const std::string magic = in.bytes(sizeof(kMagic));
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a model file (bad magic): " + path.string());
  }
  const uint32_t version = in.u32();
  if (version != kFormatVersion) {
    throw IoError("unsupported model format version " +
                  std::to_string(version) + " in " + path.string());
  }
  const uint32_t arch_raw = in.u32();
  if (arch_raw > static_cast<uint32_t>(ArchitectureKind::kSet)) {
    throw IoError("bad architecture tag in " + path.string());
  }
  ModelFile model;
  model.arch = static_cast<ArchitectureKind>(arch_raw);
  const int input_dim = static_cast<int>(in.u32());
  const int hidden_dim = static_cast<int>(in.u32());
  const int fc_dim = static_cast<int>(in.u32());
  const int num_classes = static_cast<int>(in.u32());
  if (input_dim < 1 || input_dim > 1 << 20 || hidden_dim < 1 ||
      hidden_dim > 1 << 20 || fc_dim < 1 || fc_dim > 1 << 20 ||
      num_classes < 1 || num_classes > 1 << 20) {
    throw IoError("implausible dimensions in " + path.string());
  }
  model.quantized = in.u32() != 0;
  const uint32_t tensor_count = in.u32();

  // Build an empty net of the declared shape, then fill tensor by tensor.
  Rng dummy(0);
  model.params =
      init_network<float>(input_dim, num_classes, dummy, hidden_dim, fc_dim);
  const auto refs = tensor_refs(model.params);
  if (tensor_count != refs.size()) {
    throw IoError("expected " + std::to_string(refs.size()) + " tensors, found " +
                  std::to_string(tensor_count) + " in " + path.string());
  }

  for (const TensorRef<float>& ref : refs) {
    const uint16_t name_len = in.u16();
    const std::string name = in.bytes(name_len);
    if (name != ref.name) {
      throw IoError("tensor order mismatch: expected '" + ref.name +
                    "', found '" + name + "' in " + path.string());
    }
    const auto rows = static_cast<Eigen::Index>(in.u32());
    const auto cols = static_cast<Eigen::Index>(in.u32());
    if (rows != ref.rows || cols != ref.cols) {
      throw IoError("tensor '" + name + "' has shape " + std::to_string(rows) +
                    "x" + std::to_string(cols) + ", header implies " +
                    std::to_string(ref.rows) + "x" + std::to_string(ref.cols) +
                    " in " + path.string());
    }
    Eigen::Map<Eigen::MatrixXf> view(ref.data, ref.rows, ref.cols);
    if (model.quantized) {
      QuantizedTensor q;
      q.rows = rows;
      q.cols = cols;
      q.scale = in.f64();
      const std::string payload = in.bytes(static_cast<size_t>(rows * cols));
      q.values.resize(payload.size());
      std::memcpy(q.values.data(), payload.data(), payload.size());
      view = dequantize_tensor(q);
    } else {
      for (Eigen::Index k = 0; k < ref.size(); ++k) ref.data[k] = in.f32();
      if (!view.allFinite()) {
        throw IoError("tensor '" + name + "' contains non-finite values in " +
                      path.string());
      }
    }
  }
  if (!in.at_end()) {
    throw IoError("trailing bytes after last tensor in " + path.string());
  }
  return model;
}

std::string QuantDeltaReport::to_text() const {
  std::ostringstream os;
  os << "float weights:\n" << float_report.to_text();
  os << "dequantized weights:\n" << quant_report.to_text();
  char line[128];
  std::snprintf(line, sizeof(line),
                "delta AP: tss %+.6f  ns %+.6f  ntss %+.6f\n",
                delta_ap(PvadClass::kTss), delta_ap(PvadClass::kNs),
                delta_ap(PvadClass::kNtss));
  os << line;
  std::snprintf(line, sizeof(line), "max elementwise weight error: %.8g\n",
                max_weight_error);
  os << line;
  return os.str();
}

QuantDeltaReport quantized_inference_delta(
    const NetworkParams<float>& net, ArchitectureKind arch,
    const std::vector<PreparedUtterance>& utts) {
  QuantDeltaReport report;
  const NetworkParams<float> deq = quantize_dequantize(net);

  const auto a = tensor_refs(net);
  const auto b = tensor_refs(deq);
  for (size_t i = 0; i < a.size(); ++i) {
    for (Eigen::Index k = 0; k < a[i].size(); ++k) {
      const double err = std::abs(static_cast<double>(a[i].data[k]) -
                                  static_cast<double>(b[i].data[k]));
      report.max_weight_error = std::max(report.max_weight_error, err);
    }
  }

  report.float_report =
      evaluate_frames(score_utterances(net, arch, utts), "weights=float");
  report.quant_report =
      evaluate_frames(score_utterances(deq, arch, utts), "weights=int8");
  return report;
}

}  // namespace pvad
