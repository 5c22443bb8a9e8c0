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

#pragma once

#include <filesystem>

#include "sadsp/model/model.hpp"

namespace sadsp::model {

// Little-endian layout:
//   "SADSPCK1" | u32 |S| | u32 |O| | u32 d | u32 h
//   then every tensor in canonical order as
//   u32 name_length | name bytes | u32 rank | rank x u32 dims | f64 values
inline constexpr char kCheckpointMagic[] = "SADSPCK1";

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);

// Throws ParseError on a bad magic, unexpected tensor name/shape, or a file
// whose length differs from what the header implies.
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace sadsp::model
