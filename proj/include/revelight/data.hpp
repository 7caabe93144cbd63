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

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "revelight/models.hpp"

namespace revelight {

enum class DataFormat { kLibsvm, kCsv, kIdx };

std::string_view to_string(DataFormat f);
/// libsvm, csv or idx. ConfigError otherwise.
DataFormat parse_format(std::string_view text);

/// `label idx:val ...` with 1-based indices. When `dim` is given an index
/// beyond it is a ParseError; otherwise the width is the largest index seen.
Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> dim = std::nullopt);
/// One sample per line, comma separated, label in the last column.
Dataset parse_csv(std::istream& in);
/// Big-endian IDX image (magic 0x00000803) and label (0x00000801) files;
/// pixels are scaled to [0, 1]. FormatError on a bad magic or size.
Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels);

/// Reads a file. For idx, `labels_path` names the label file.
Dataset load_dataset(const std::string& path, DataFormat format,
                     std::optional<std::size_t> dim = std::nullopt,
                     const std::string& labels_path = {});

/// Maps labels to +1 (label > 0) and -1 (otherwise).
void relabel_binary(Dataset& data);
/// Maps the distinct labels, in increasing order, to 0..k-1; returns k.
std::size_t relabel_classes(Dataset& data);

enum class SyntheticFamily { kSeparable, kNoisyLogistic, kBlobs };

std::string_view to_string(SyntheticFamily f);
SyntheticFamily parse_family(std::string_view text);

struct SyntheticSpec {
  SyntheticFamily family = SyntheticFamily::kNoisyLogistic;
  std::size_t n = 512;
  std::size_t dim = 32;
  std::size_t classes = 2;  // blobs only
  double scale = 1.0;       // logit scale (logistic) or centre spread (blobs)
  std::uint64_t seed = 0;
};

/// Gaussian features. Separable: y = sign(<w*, x>). Noisy logistic:
/// P(y = +1) = sigmoid(scale <w*, x> / sqrt(dim)). Blobs: labels 0..k-1
/// around random centres. Binary families use labels in {-1, +1}.
Dataset make_synthetic(const SyntheticSpec& spec);

/// Shuffles with the seed, cuts ten folds and holds out fold 0.
std::pair<Dataset, Dataset> split_holdout(const Dataset& data, std::uint64_t seed);

}  // namespace revelight
