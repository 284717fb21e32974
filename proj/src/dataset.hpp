// Copyright 2026 The patchpose Authors
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

#ifndef PATCHPOSE_DATASET_HPP_
#define PATCHPOSE_DATASET_HPP_

#include <cstdint>
#include <string_view>
#include <vector>

#include "image.hpp"

namespace patchpose::data {

enum class Split : std::uint8_t { kTrain = 1, kVal = 2, kAttack = 3, kEval = 4 };

std::string_view split_name(Split s);

struct LabeledImage {
  Image image;
  int label = 0;
  std::uint64_t scene_seed = 0;
};

struct Dataset {
  Split split = Split::kTrain;
  int num_classes = 0;
  std::vector<LabeledImage> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
};

}  // namespace patchpose::data

#endif  // PATCHPOSE_DATASET_HPP_
