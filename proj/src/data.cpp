// Copyright 2026 The Revelight Authors. All Rights Reserved.
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

#include "revelight/data.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <numeric>
#include <vector>

#include "revelight/errors.hpp"
#include "revelight/rng.hpp"

namespace revelight {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

int to_label(std::string_view s, std::size_t line) {
  const auto v = to_double(s);
  if (!v || *v != std::round(*v) || std::abs(*v) > 1e9)
    throw ParseError("line " + std::to_string(line) + ": bad label '" + std::string(s) + "'");
  return static_cast<int>(*v);
}

std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

}  // namespace

std::string_view to_string(DataFormat f) {
  switch (f) {
    case DataFormat::kLibsvm: return "libsvm";
    case DataFormat::kCsv: return "csv";
    case DataFormat::kIdx: return "idx";
  }
  return "unknown";
}

DataFormat parse_format(std::string_view text) {
  if (text == "libsvm") return DataFormat::kLibsvm;
  if (text == "csv") return DataFormat::kCsv;
  if (text == "idx") return DataFormat::kIdx;
  throw ConfigError("unknown data format '" + std::string(text) + "'");
}

Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> dim) {
  struct Row {
    int label;
    std::vector<std::pair<std::size_t, double>> entries;
  };
  std::vector<Row> rows;
  std::size_t width = dim.value_or(0);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = trim(raw);
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = trim(s.substr(0, hash));
    if (s.empty()) continue;
    std::vector<std::string_view> tokens;
    while (!s.empty()) {
      const auto sp = s.find_first_of(" \t");
      tokens.push_back(s.substr(0, sp));
      s = sp == std::string_view::npos ? std::string_view{} : trim(s.substr(sp));
    }
    Row row{to_label(tokens[0], line), {}};
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      const auto colon = tokens[k].find(':');
      if (colon == std::string_view::npos)
        throw ParseError("line " + std::to_string(line) + ": expected idx:val, got '" +
                         std::string(tokens[k]) + "'");
      std::size_t idx = 0;
      const auto key = tokens[k].substr(0, colon);
      const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
      const auto val = to_double(tokens[k].substr(colon + 1));
      if (ec != std::errc() || ptr != key.data() + key.size() || idx == 0 || !val)
        throw ParseError("line " + std::to_string(line) + ": bad feature '" +
                         std::string(tokens[k]) + "'");
      if (dim && idx > *dim)
        throw ParseError("line " + std::to_string(line) + ": feature index " + std::to_string(idx) +
                         " exceeds dimension " + std::to_string(*dim));
      width = std::max(width, idx);
      row.entries.emplace_back(idx - 1, *val);
    }
    rows.push_back(std::move(row));
  }
  Dataset d;
  d.n = rows.size();
  d.dim = width;
  d.features.assign(d.n * width, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    d.labels.push_back(rows[i].label);
    for (const auto& [j, v] : rows[i].entries) d.features[i * width + j] = v;
  }
  return d;
}

Dataset parse_csv(std::istream& in) {
  Dataset d;
  std::string raw;
  std::size_t line = 0;
  bool first = true;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view s = trim(raw);
    if (s.empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
      const auto comma = s.find(',', pos);
      cells.push_back(s.substr(pos, comma == std::string_view::npos ? s.npos : comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (cells.size() < 2)
      throw ParseError("line " + std::to_string(line) + ": need at least one feature and a label");
    if (first) {
      d.dim = cells.size() - 1;
      first = false;
    } else if (cells.size() - 1 != d.dim) {
      throw ParseError("line " + std::to_string(line) + ": expected " + std::to_string(d.dim + 1) +
                       " columns, got " + std::to_string(cells.size()));
    }
    for (std::size_t k = 0; k + 1 < cells.size(); ++k) {
      const auto v = to_double(cells[k]);
      if (!v)
        throw ParseError("line " + std::to_string(line) + ": bad value '" +
                         std::string(cells[k]) + "'");
      d.features.push_back(*v);
    }
    d.labels.push_back(to_label(cells.back(), line));
    ++d.n;
  }
  return d;
}

Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels) {
  if (images.size() < 16) throw FormatError("IDX image file shorter than its header");
  if (be32(images, 0) != 0x00000803)
    throw FormatError("IDX image magic " + hex32(be32(images, 0)) + ", expected 0x00000803");
  if (labels.size() < 8) throw FormatError("IDX label file shorter than its header");
  if (be32(labels, 0) != 0x00000801)
    throw FormatError("IDX label magic " + hex32(be32(labels, 0)) + ", expected 0x00000801");
  const std::size_t n = be32(images, 4);
  const std::size_t dim = std::size_t{be32(images, 8)} * be32(images, 12);
  if (be32(labels, 4) != n) throw FormatError("IDX image and label counts differ");
  if (images.size() != 16 + n * dim) throw FormatError("IDX image file size does not match header");
  if (labels.size() != 8 + n) throw FormatError("IDX label file size does not match header");
  Dataset d;
  d.n = n;
  d.dim = dim;
  d.features.resize(n * dim);
  for (std::size_t k = 0; k < n * dim; ++k) d.features[k] = images[16 + k] / 255.0;
  d.labels.assign(labels.begin() + 8, labels.end());
  return d;
}

Dataset load_dataset(const std::string& path, DataFormat format, std::optional<std::size_t> dim,
                     const std::string& labels_path) {
  if (format == DataFormat::kIdx) {
    if (labels_path.empty()) throw ConfigError("idx format needs a label file");
    const auto img = read_bytes(path);
    const auto lab = read_bytes(labels_path);
    return parse_idx(img, lab);
  }
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  Dataset d = format == DataFormat::kLibsvm ? parse_libsvm(in, dim) : parse_csv(in);
  if (dim && format == DataFormat::kCsv && d.dim != *dim)
    throw ParseError("csv has " + std::to_string(d.dim) + " features, expected " + std::to_string(*dim));
  return d;
}

void relabel_binary(Dataset& data) {
  for (int& y : data.labels) y = y > 0 ? 1 : -1;
}

std::size_t relabel_classes(Dataset& data) {
  std::map<int, int> ids;
  for (int y : data.labels) ids.emplace(y, 0);
  int next = 0;
  for (auto& [_, id] : ids) id = next++;
  for (int& y : data.labels) y = ids[y];
  return ids.size();
}

std::string_view to_string(SyntheticFamily f) {
  switch (f) {
    case SyntheticFamily::kSeparable: return "separable";
    case SyntheticFamily::kNoisyLogistic: return "logistic";
    case SyntheticFamily::kBlobs: return "blobs";
  }
  return "unknown";
}

SyntheticFamily parse_family(std::string_view text) {
  if (text == "separable") return SyntheticFamily::kSeparable;
  if (text == "logistic") return SyntheticFamily::kNoisyLogistic;
  if (text == "blobs") return SyntheticFamily::kBlobs;
  throw ConfigError("unknown synthetic family '" + std::string(text) + "'");
}

Dataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.n == 0 || spec.dim == 0) throw DomainError("synthetic data needs n > 0 and dim > 0");
  if (spec.family == SyntheticFamily::kBlobs && spec.classes < 2)
    throw DomainError("blobs need at least two classes");
  Dataset d;
  d.n = spec.n;
  d.dim = spec.dim;
  d.features.resize(spec.n * spec.dim);
  d.labels.resize(spec.n);

  Stream truth(spec.seed, 0, Purpose::kData, 0);
  const std::size_t centres = spec.family == SyntheticFamily::kBlobs ? spec.classes : 1;
  std::vector<double> w(centres * spec.dim);
  for (double& v : w) v = truth.normal();

  for (std::size_t i = 0; i < spec.n; ++i) {
    Stream s(spec.seed, 0, Purpose::kData, i + 1);
    double* x = d.features.data() + i * spec.dim;
    if (spec.family == SyntheticFamily::kBlobs) {
      const std::size_t k = s.below(spec.classes);
      for (std::size_t j = 0; j < spec.dim; ++j) x[j] = spec.scale * w[k * spec.dim + j] + s.normal();
      d.labels[i] = static_cast<int>(k);
      continue;
    }
    double z = 0.0;
    for (std::size_t j = 0; j < spec.dim; ++j) {
      x[j] = s.normal();
      z += w[j] * x[j];
    }
    if (spec.family == SyntheticFamily::kSeparable) {
      d.labels[i] = z >= 0.0 ? 1 : -1;
    } else {
      const double pr = 1.0 / (1.0 + std::exp(-spec.scale * z / std::sqrt(double(spec.dim))));
      d.labels[i] = s.uniform() < pr ? 1 : -1;
    }
  }
  return d;
}

std::pair<Dataset, Dataset> split_holdout(const Dataset& data, std::uint64_t seed) {
  if (data.n < 10) throw DomainError("need at least ten samples to hold out a fold");
  std::vector<std::size_t> perm(data.n);
  std::iota(perm.begin(), perm.end(), 0);
  Stream s(seed, 0, Purpose::kSplit, 0);
  for (std::size_t k = data.n - 1; k > 0; --k) std::swap(perm[k], perm[s.below(k + 1)]);
  const std::size_t fold = data.n / 10;
  std::vector<std::size_t> test(perm.begin(), perm.begin() + fold);
  std::vector<std::size_t> train(perm.begin() + fold, perm.end());
  return {data.subset(train), data.subset(test)};
}

}  // namespace revelight
