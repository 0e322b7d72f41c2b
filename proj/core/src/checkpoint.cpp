// Copyright 2026 The contactdiff Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "contactdiff/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace contactdiff {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}

uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) throw FormatError("truncated file while reading u32");
  return v;
}

double read_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  if (!in) throw FormatError("truncated file while reading f64");
  return v;
}

void write_magic(std::ostream& out, const char magic[4]) {
  out.write(magic, 4);
}

void expect_magic(std::istream& in, const char magic[4], const char* what) {
  char buf[4] = {0, 0, 0, 0};
  in.read(buf, 4);
  if (!in || std::memcmp(buf, magic, 4) != 0) {
    throw FormatError(std::string(what) + ": bad magic, expected \"" +
                      std::string(magic, 4) + "\"");
  }
}

void save_mlp(std::ostream& out, const MlpParams& params) {
  write_magic(out, "CDW1");
  const uint32_t layers = uint32_t(params.weights.size());
  write_u32(out, layers);
  for (int s : params.sizes) write_u32(out, uint32_t(s));
  for (uint32_t l = 0; l < layers; ++l) {
    for (double v : params.weights[l].data) write_f64(out, v);
    for (double v : params.biases[l]) write_f64(out, v);
  }
}

MlpParams load_mlp(std::istream& in) {
  expect_magic(in, "CDW1", "parameter checkpoint");
  const uint32_t layers = read_u32(in);
  if (layers == 0 || layers > 64) {
    throw FormatError("parameter checkpoint: implausible layer count " +
                      std::to_string(layers));
  }
  std::vector<int> sizes(layers + 1);
  for (auto& s : sizes) s = int(read_u32(in));
  MlpParams p;
  p.sizes = sizes;
  for (uint32_t l = 0; l < layers; ++l) {
    Array2 w(sizes[l], sizes[l + 1]);
    for (double& v : w.data) v = read_f64(in);
    std::vector<double> b(sizes[l + 1]);
    for (double& v : b) v = read_f64(in);
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  return p;
}

void save_wrapped_mlp(std::ostream& out, const char magic[4],
                      const std::string& json_header,
                      const MlpParams& params) {
  write_magic(out, magic);
  write_u32(out, uint32_t(json_header.size()));
  out.write(json_header.data(), std::streamsize(json_header.size()));
  save_mlp(out, params);
}

std::pair<std::string, MlpParams> load_wrapped_mlp(std::istream& in,
                                                   const char magic[4],
                                                   const char* what) {
  expect_magic(in, magic, what);
  const uint32_t len = read_u32(in);
  if (len > (1u << 24)) {
    throw FormatError(std::string(what) + ": implausible header size");
  }
  std::string header(len, '\0');
  in.read(header.data(), len);
  if (!in) throw FormatError(std::string(what) + ": truncated header");
  MlpParams params = load_mlp(in);
  return {std::move(header), std::move(params)};
}

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open for hashing: " + path);
  uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= uint8_t(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)h);
  return std::string(hex);
}

}  // namespace contactdiff
