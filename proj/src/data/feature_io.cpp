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

#include "sadsp/data/feature_io.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "sadsp/binary_io.hpp"
#include "sadsp/errors.hpp"

namespace sadsp::data {
namespace {

constexpr std::string_view kDimsHeader = "num_states,num_objects,feature_dim,num_samples";

bool is_csv(const std::filesystem::path& path) { return path.extension() == ".csv"; }

// Seen pairs are every pair carrying a train or test_seen sample.
void finish_spec(Dataset& dataset, const std::string& source) {
  std::set<Pair> seen;
  for (const Sample& s : dataset.samples) {
    if (s.split != Split::test_unseen) seen.insert(s.pair());
  }
  dataset.spec.seen_pairs.assign(seen.begin(), seen.end());
  dataset.spec.train_size = dataset.indices_of(Split::train).size();
  dataset.spec.test_size = dataset.samples.size() - dataset.spec.train_size;
  for (const Sample& s : dataset.samples) {
    if (s.split == Split::test_unseen && seen.count(s.pair())) {
      throw ParseError(source + ": pair (" + std::to_string(s.state) + "," + std::to_string(s.object) +
                       ") is marked both seen and unseen");
    }
  }
}

Dataset load_binary(const std::filesystem::path& path) {
  const std::vector<char> raw = io::read_file(path);
  io::ByteReader in(raw, path.string());
  if (in.bytes(8, "magic") != std::string_view(kFeatureMagic, 8)) {
    in.fail("bad magic, expected SADSPFV1");
  }
  Dataset dataset;
  DatasetSpec& spec = dataset.spec;
  spec.num_states = in.u32("num_states");
  spec.num_objects = in.u32("num_objects");
  spec.feature_dim = in.u32("feature_dim");
  const std::uint32_t count = in.u32("num_samples");
  if (spec.num_states == 0 || spec.num_objects == 0 || spec.feature_dim == 0) in.fail("zero dimension in header");
  const std::size_t row_bytes = spec.feature_dim * 4 + 5;
  if (in.remaining() < static_cast<std::size_t>(count) * row_bytes) {
    in.fail("truncated: header declares " + std::to_string(count) + " samples (" +
            std::to_string(static_cast<std::size_t>(count) * row_bytes) + " bytes) but " +
            std::to_string(in.remaining()) + " bytes follow");
  }
  dataset.samples.reserve(count);
  for (std::uint32_t n = 0; n < count; ++n) {
    Sample s;
    s.features.resize(spec.feature_dim);
    for (float& f : s.features) f = in.f32("feature");
    const std::size_t label_offset = in.offset();
    s.state = in.u16("state");
    s.object = in.u16("object");
    const std::uint8_t split = in.u8("split");
    if (s.state >= spec.num_states || s.object >= spec.num_objects) {
      throw ParseError(path.string() + ": byte offset " + std::to_string(label_offset) + ": sample " +
                       std::to_string(n) + " label (" + std::to_string(s.state) + "," + std::to_string(s.object) +
                       ") outside declared " + std::to_string(spec.num_states) + "x" +
                       std::to_string(spec.num_objects));
    }
    if (split > 2) in.fail("sample " + std::to_string(n) + " has split code " + std::to_string(split));
    s.split = static_cast<Split>(split);
    dataset.samples.push_back(std::move(s));
  }
  if (in.remaining() != 0) in.fail(std::to_string(in.remaining()) + " trailing bytes");
  finish_spec(dataset, path.string());
  return dataset;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view text, const std::string& where) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto result = std::from_chars(text.data(), end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw ParseError(where + ": cannot parse '" + std::string(text) + "'");
  }
  return value;
}

Dataset load_csv(const std::filesystem::path& path) {
  const std::vector<char> raw = io::read_file(path);
  std::vector<std::string> lines;
  {
    std::istringstream stream(std::string(raw.begin(), raw.end()));
    std::string line;
    while (std::getline(stream, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  auto where = [&](std::size_t line_index) { return path.string() + ": line " + std::to_string(line_index + 1); };
  if (lines.size() < 3) throw ParseError(where(lines.size()) + ": missing header rows");
  if (lines[0] != kDimsHeader) throw ParseError(where(0) + ": expected header '" + std::string(kDimsHeader) + "'");
  const auto dims = split_commas(lines[1]);
  if (dims.size() != 4) throw ParseError(where(1) + ": expected 4 dimension values");
  Dataset dataset;
  DatasetSpec& spec = dataset.spec;
  spec.num_states = parse_number<std::size_t>(dims[0], where(1));
  spec.num_objects = parse_number<std::size_t>(dims[1], where(1));
  spec.feature_dim = parse_number<std::size_t>(dims[2], where(1));
  const auto count = parse_number<std::size_t>(dims[3], where(1));
  const auto columns = split_commas(lines[2]);
  if (columns.size() != spec.feature_dim + 3) {
    throw ParseError(where(2) + ": expected " + std::to_string(spec.feature_dim + 3) + " columns");
  }
  if (lines.size() - 3 != count) {
    throw ParseError(where(lines.size()) + ": header declares " + std::to_string(count) + " samples, found " +
                     std::to_string(lines.size() - 3));
  }
  for (std::size_t li = 3; li < lines.size(); ++li) {
    const auto cells = split_commas(lines[li]);
    if (cells.size() != spec.feature_dim + 3) throw ParseError(where(li) + ": truncated row");
    Sample s;
    s.features.resize(spec.feature_dim);
    for (std::size_t i = 0; i < spec.feature_dim; ++i) s.features[i] = parse_number<float>(cells[i], where(li));
    s.state = parse_number<std::size_t>(cells[spec.feature_dim], where(li));
    s.object = parse_number<std::size_t>(cells[spec.feature_dim + 1], where(li));
    const auto split = parse_number<unsigned>(cells[spec.feature_dim + 2], where(li));
    if (s.state >= spec.num_states || s.object >= spec.num_objects) {
      throw ParseError(where(li) + ": label (" + std::to_string(s.state) + "," + std::to_string(s.object) +
                       ") out of range");
    }
    if (split > 2) throw ParseError(where(li) + ": split code " + std::to_string(split));
    s.split = static_cast<Split>(split);
    dataset.samples.push_back(std::move(s));
  }
  finish_spec(dataset, path.string());
  return dataset;
}

}  // namespace

Dataset load_feature_file(const std::filesystem::path& path) {
  return is_csv(path) ? load_csv(path) : load_binary(path);
}

void write_feature_file(const Dataset& dataset, const std::filesystem::path& path) {
  const DatasetSpec& spec = dataset.spec;
  if (is_csv(path)) {
    std::ostringstream out;
    out.precision(9);
    out << kDimsHeader << '\n'
        << spec.num_states << ',' << spec.num_objects << ',' << spec.feature_dim << ',' << dataset.samples.size()
        << '\n';
    for (std::size_t i = 0; i < spec.feature_dim; ++i) out << 'f' << i << ',';
    out << "state,object,split\n";
    for (const Sample& s : dataset.samples) {
      for (float f : s.features) out << f << ',';
      out << s.state << ',' << s.object << ',' << static_cast<unsigned>(s.split) << '\n';
    }
    io::write_text(path, out.str());
    return;
  }
  io::ByteWriter out;
  out.bytes(std::string_view(kFeatureMagic, 8));
  out.u32(static_cast<std::uint32_t>(spec.num_states));
  out.u32(static_cast<std::uint32_t>(spec.num_objects));
  out.u32(static_cast<std::uint32_t>(spec.feature_dim));
  out.u32(static_cast<std::uint32_t>(dataset.samples.size()));
  for (const Sample& s : dataset.samples) {
    for (float f : s.features) out.f32(f);
    out.u16(static_cast<std::uint16_t>(s.state));
    out.u16(static_cast<std::uint16_t>(s.object));
    out.u8(static_cast<std::uint8_t>(s.split));
  }
  io::write_file(path, out.buffer());
}

void write_pair_sidecar(const Dataset& dataset, const std::filesystem::path& path) {
  const DatasetSpec& spec = dataset.spec;
  std::set<Pair> unseen;
  for (const Sample& s : dataset.samples) {
    if (s.split == Split::test_unseen) unseen.insert(s.pair());
  }
  std::ostringstream out;
  out << "num_states " << spec.num_states << '\n'
      << "num_objects " << spec.num_objects << '\n'
      << "open_world_pairs " << spec.num_pairs() << '\n'
      << "seen_pairs " << spec.seen_pairs.size() << '\n'
      << "unseen_test_pairs " << unseen.size() << '\n';
  for (const Pair& p : spec.seen_pairs) out << "seen " << p.state << ' ' << p.object << '\n';
  for (const Pair& p : unseen) out << "unseen " << p.state << ' ' << p.object << '\n';
  io::write_text(path, out.str());
}

}  // namespace sadsp::data
