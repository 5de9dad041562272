// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// Stable, platform-independent hashes used for sharding, seeded sampling and
// config fingerprints. std::hash is not stable across implementations, so it
// is never used for anything that reaches an output file.

#pragma once

#include <cstdint>
#include <string_view>

namespace clipdpo {

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Uniform draw in [0, 1) determined only by (seed, key).
double keyed_uniform(std::uint64_t seed, std::string_view key) noexcept;

std::uint32_t shard_of(std::string_view image_id, std::uint32_t shard_count) noexcept;

}  // namespace clipdpo
