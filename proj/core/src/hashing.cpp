// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/hashing.hpp"

namespace clipdpo {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double keyed_uniform(std::uint64_t seed, std::string_view key) noexcept {
  const std::uint64_t bits = splitmix64(fnv1a64(key) ^ splitmix64(seed));
  // Top 53 bits -> exact double in [0, 1).
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::uint32_t shard_of(std::string_view image_id, std::uint32_t shard_count) noexcept {
  if (shard_count <= 1) return 0;
  return static_cast<std::uint32_t>(fnv1a64(image_id) % shard_count);
}

}  // namespace clipdpo
