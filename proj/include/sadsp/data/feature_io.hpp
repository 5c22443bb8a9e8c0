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
#include <string>

#include "sadsp/data/dataset.hpp"

namespace sadsp::data {

// Binary layout, little-endian:
//   "SADSPFV1" | u32 |S| | u32 |O| | u32 d | u32 n
//   n x ( d x f32 features | u16 state | u16 object | u8 split )
//
// CSV layout (chosen when the path ends in ".csv"): the same fields in the
// same order, as a header row naming the four dimensions, one row with their
// values, a header row "f0,...,f{d-1},state,object,split", then n sample rows.
inline constexpr char kFeatureMagic[] = "SADSPFV1";

// The seen-pair set is reconstructed from the train and test_seen rows.
// Throws ParseError naming the byte offset (binary) or line (CSV).
Dataset load_feature_file(const std::filesystem::path& path);

// Throws IoError when the file cannot be written.
void write_feature_file(const Dataset& dataset, const std::filesystem::path& path);

// Plain-text listing of the seen and unseen composition sets.
void write_pair_sidecar(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace sadsp::data
