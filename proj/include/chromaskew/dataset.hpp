/*
 * Copyright 2026 The chromaskew Authors
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

#ifndef CHROMASKEW_DATASET_HPP_
#define CHROMASKEW_DATASET_HPP_

#include <string>
#include <vector>

#include "chromaskew/image.hpp"

namespace chromaskew {

struct Sample {
  Image image;
  int label = 0;
};

enum class Provenance { kCifar10, kCifar100, kShapes };

struct LabeledDataset {
  std::vector<Sample> samples;
  int classes = 0;
  std::string name;
  Provenance provenance = Provenance::kShapes;
  // Ground-truth foreground masks, parallel to samples (synthetic data only).
  std::vector<Mask> masks;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  // Checks: all images share one size and every label is < classes.
  void validate() const;
};

}  // namespace chromaskew

#endif  // CHROMASKEW_DATASET_HPP_
