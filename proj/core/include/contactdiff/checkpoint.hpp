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

#ifndef CONTACTDIFF_CHECKPOINT_HPP_
#define CONTACTDIFF_CHECKPOINT_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>

#include "contactdiff/mlp.hpp"

namespace contactdiff {

// Parameter checkpoint block, magic "CDW1":
//   "CDW1" | u32 layer count L | u32 sizes[0..L] | f64 weights+biases per
//   layer in order. All integers and floats little-endian.
void save_mlp(std::ostream& out, const MlpParams& params);
MlpParams load_mlp(std::istream& in);

// Little-endian primitives shared by the demo/checkpoint writers.
void write_u32(std::ostream& out, uint32_t v);
void write_f64(std::ostream& out, double v);
uint32_t read_u32(std::istream& in);
double read_f64(std::istream& in);
void write_magic(std::ostream& out, const char magic[4]);
void expect_magic(std::istream& in, const char magic[4], const char* what);

// Wrapped checkpoint: outer magic, a JSON text header, then a CDW1 block.
// The denoiser and dynamics checkpoints use this with their own magics.
void save_wrapped_mlp(std::ostream& out, const char magic[4],
                      const std::string& json_header, const MlpParams& params);
std::pair<std::string, MlpParams> load_wrapped_mlp(std::istream& in,
                                                   const char magic[4],
                                                   const char* what);

// FNV-1a 64 of a file's bytes, hex-encoded; used by the CLI manifest.
std::string file_hash_hex(const std::string& path);

}  // namespace contactdiff

#endif  // CONTACTDIFF_CHECKPOINT_HPP_
