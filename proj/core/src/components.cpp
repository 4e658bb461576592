// Copyright 2026 The mitocount Authors. All Rights Reserved.
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

#include "mitocount/components.hpp"

#include <numeric>
#include <stdexcept>
#include <vector>

namespace mitocount {
namespace {

class DisjointSet {
 public:
  int make() {
    parent_.push_back(static_cast<int>(parent_.size()));
    return parent_.back();
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Smaller root wins so the representative is the earliest provisional label.
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

Connectivity connectivity_from_int(int value) {
  if (value == 4) return Connectivity::kFour;
  if (value == 8) return Connectivity::kEight;
  throw std::invalid_argument("connectivity must be 4 or 8, got " + std::to_string(value));
}

LabeledMask label_instances(const BinaryMask& mask, Connectivity connectivity) {
  LabeledMask out;
  if (mask.empty()) return out;
  const int w = mask.width();
  const int h = mask.height();
  out.labels = LabelImage(w, h, 0);
  auto& lab = out.labels;

  DisjointSet sets;
  sets.make();  // provisional label 0 = background
  const bool eight = connectivity == Connectivity::kEight;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask(x, y) == 0) continue;
      // Already-visited neighbours: W, NW, N, NE.
      int found[4];
      int n = 0;
      if (x > 0 && lab(x - 1, y) != 0) found[n++] = lab(x - 1, y);
      if (y > 0 && lab(x, y - 1) != 0) found[n++] = lab(x, y - 1);
      if (eight && y > 0) {
        if (x > 0 && lab(x - 1, y - 1) != 0) found[n++] = lab(x - 1, y - 1);
        if (x + 1 < w && lab(x + 1, y - 1) != 0) found[n++] = lab(x + 1, y - 1);
      }
      if (n == 0) {
        lab(x, y) = sets.make();
        continue;
      }
      int smallest = found[0];
      for (int i = 1; i < n; ++i) smallest = std::min(smallest, found[i]);
      lab(x, y) = smallest;
      for (int i = 0; i < n; ++i) sets.unite(smallest, found[i]);
    }
  }

  // Second pass: dense ids in order of first raster encounter.
  std::vector<int> dense;
  for (auto& v : lab.pixels()) {
    if (v == 0) continue;
    const int root = sets.find(v);
    if (static_cast<std::size_t>(root) >= dense.size()) dense.resize(root + 1, 0);
    if (dense[root] == 0) dense[root] = ++out.count;
    v = dense[root];
  }
  return out;
}

}  // namespace mitocount
