// Copyright 2026 The psyn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PSYN_COMMON_RANDOM_H_
#define PSYN_COMMON_RANDOM_H_

#include <cstdint>
#include <string_view>
#include <vector>

namespace psyn {

// Counter-based pseudo-random stream. Output n is a SplitMix64 finalizer
// applied to (key + n * golden_gamma), so a stream is fully described by its
// key and counter and produces identical values on every platform.
//
// Named substreams (Fork) give independent streams for independent purposes,
// e.g. batch sampling and gradient noise in the same training run.
class Rng {
 public:
  explicit Rng(uint64_t key) : key_(Mix(key)) {}

  // Stream `name` of a run seeded with `seed`.
  static Rng FromSeed(uint64_t seed, std::string_view name);

  Rng Fork(std::string_view name) const;
  Rng Fork(uint64_t index) const;

  uint64_t NextU64();
  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform();
  // Uniform on (0, 1].
  double UniformPositive();
  // Standard normal via the Box-Muller transform. Values are generated in
  // pairs; the second of each pair is cached.
  double Normal();
  // Uniform integer in [0, n). n must be positive.
  uint64_t UniformInt(uint64_t n);
  bool Bernoulli(double p);

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(UniformInt(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  uint64_t key() const { return key_; }
  uint64_t counter() const { return counter_; }

  static uint64_t Mix(uint64_t z);
  static uint64_t HashName(std::string_view name);

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace psyn

#endif  // PSYN_COMMON_RANDOM_H_
