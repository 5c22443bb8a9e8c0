/*
 * Copyright 2026 The sadsp Authors.
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

#include "sadsp/model/checkpoint.hpp"

#include "sadsp/binary_io.hpp"
#include "sadsp/errors.hpp"

namespace sadsp::model {
namespace {

constexpr std::size_t kHeaderBytes = 8 + 4 * 4;

std::size_t expected_length(const ModelParams& params) {
  std::size_t total = kHeaderBytes;
  for (const auto& [name, t] : params.named_tensors()) {
    total += 4 + name.size() + 4 + 4 * t->rank() + 8 * t->size();
  }
  return total;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  const Dims& d = params.dims();
  io::ByteWriter out;
  out.bytes(std::string_view(kCheckpointMagic, 8));
  out.u32(static_cast<std::uint32_t>(d.num_states));
  out.u32(static_cast<std::uint32_t>(d.num_objects));
  out.u32(static_cast<std::uint32_t>(d.feature_dim));
  out.u32(static_cast<std::uint32_t>(d.hidden));
  for (const auto& [name, t] : params.named_tensors()) {
    out.u32(static_cast<std::uint32_t>(name.size()));
    out.bytes(name);
    out.u32(static_cast<std::uint32_t>(t->rank()));
    for (std::size_t dim : t->shape()) out.u32(static_cast<std::uint32_t>(dim));
    for (double v : t->values()) out.f64(v);
  }
  io::write_file(path, out.buffer());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  const std::vector<char> raw = io::read_file(path);
  io::ByteReader in(raw, path.string());
  if (raw.size() < 8 || in.bytes(8, "magic") != std::string_view(kCheckpointMagic, 8)) {
    throw ParseError(path.string() + ": not a checkpoint (bad magic, expected SADSPCK1)");
  }
  Dims dims;
  dims.num_states = in.u32("num_states");
  dims.num_objects = in.u32("num_objects");
  dims.feature_dim = in.u32("feature_dim");
  dims.hidden = in.u32("hidden");
  if (dims.num_states == 0 || dims.num_objects == 0 || dims.feature_dim == 0 || dims.hidden == 0) {
    in.fail("zero dimension in checkpoint header");
  }
  ModelParams params = make_params(dims);
  const std::size_t expected = expected_length(params);
  if (raw.size() != expected) {
    throw ParseError(path.string() + ": checkpoint length " + std::to_string(raw.size()) + " bytes, expected " +
                     std::to_string(expected) + " for the declared dimensions");
  }
  for (auto& [name, t] : params.named_tensors()) {
    const std::uint32_t length = in.u32("name length");
    const std::string stored = in.bytes(length, "name");
    if (stored != name) in.fail("expected tensor '" + name + "', found '" + stored + "'");
    const std::uint32_t rank = in.u32("rank");
    if (rank != t->rank()) in.fail("tensor '" + name + "' has rank " + std::to_string(rank));
    for (std::size_t dim : t->shape()) {
      if (in.u32("dim") != dim) in.fail("tensor '" + name + "' has unexpected shape");
    }
    for (double& v : t->values()) v = in.f64("value");
  }
  return params;
}

}  // namespace sadsp::model
