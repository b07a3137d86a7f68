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

#include "pvad/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "pvad/errors.hpp"

namespace pvad {

namespace {

constexpr std::uint16_t kFormatPcm = 1;

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void write_u16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(b, 2);
}

}  // namespace

void validate_audio(const AudioBuffer& audio) {
  if (audio.sample_rate <= 0) throw ConfigError("audio: sample_rate must be > 0");
  for (float s : audio.samples) {
    if (!std::isfinite(s)) throw DataError("audio: non-finite sample");
  }
}

AudioBuffer read_wav(const std::filesystem::path& path, int required_sample_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file: " + path.string());

  char riff[4];
  in.read(riff, 4);
  if (!in || std::memcmp(riff, "RIFF", 4) != 0)
    throw DataError("not a RIFF file: " + path.string());
  read_u32(in);  // overall size, unused
  char wave[4];
  in.read(wave, 4);
  if (!in || std::memcmp(wave, "WAVE", 4) != 0)
    throw DataError("not a WAVE file: " + path.string());

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0, format = 0;
  std::uint32_t rate = 0;
  AudioBuffer out;

  while (in) {
    char id[4];
    in.read(id, 4);
    if (!in) break;
    const std::uint32_t size = read_u32(in);
    if (!in) throw DataError("truncated WAV chunk header: " + path.string());

    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw DataError("malformed fmt chunk: " + path.string());
      format = read_u16(in);
      channels = read_u16(in);
      rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      in.ignore(size - 16);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw DataError("WAV data chunk before fmt: " + path.string());
      if (format != kFormatPcm)
        throw DataError("unsupported WAV codec (PCM required): " + path.string());
      if (channels != 1)
        throw DataError("unsupported channel count " + std::to_string(channels) +
                        " (mono required): " + path.string());
      if (bits != 16)
        throw DataError("unsupported bit depth " + std::to_string(bits) +
                        " (16-bit required): " + path.string());
      if (static_cast<int>(rate) != required_sample_rate)
        throw DataError("unsupported sample rate " + std::to_string(rate) + " (" +
                        std::to_string(required_sample_rate) + " Hz required): " + path.string());
      const std::uint32_t count = size / 2;
      out.sample_rate = static_cast<int>(rate);
      out.samples.resize(count);
      std::vector<unsigned char> raw(size);
      in.read(reinterpret_cast<char*>(raw.data()), size);
      if (!in) throw DataError("truncated WAV data: " + path.string());
      for (std::uint32_t i = 0; i < count; ++i) {
        const std::int16_t v =
            static_cast<std::int16_t>(raw[2 * i] | (raw[2 * i + 1] << 8));
        out.samples[i] = static_cast<float>(v) / 32768.0f;
      }
      return out;
    } else {
      // Skip unknown chunks (LIST, fact, ...). Chunks are word aligned.
      in.ignore(size + (size & 1));
    }
  }
  throw DataError("WAV file has no data chunk: " + path.string());
}

std::int16_t pcm16_from_float(float sample) {
  // Scale by 32768 and clamp, matching the reader's division by 32768 so
  // int16 -> float -> int16 round-trips exactly.
  const long q = std::lrintf(sample * 32768.0f);
  return static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L));
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio) {
  validate_audio(audio);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create WAV file: " + path.string());

  const std::uint32_t data_bytes = static_cast<std::uint32_t>(audio.samples.size()) * 2;
  const std::uint32_t rate = static_cast<std::uint32_t>(audio.sample_rate);

  out.write("RIFF", 4);
  write_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, kFormatPcm);
  write_u16(out, 1);  // mono
  write_u32(out, rate);
  write_u32(out, rate * 2);  // byte rate
  write_u16(out, 2);         // block align
  write_u16(out, 16);        // bits
  out.write("data", 4);
  write_u32(out, data_bytes);
  for (float s : audio.samples) {
    const std::int16_t v = pcm16_from_float(s);
    const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    out.write(b, 2);
  }
  if (!out) throw IoError("failed writing WAV file: " + path.string());
}

}  // namespace pvad
