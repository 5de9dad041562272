// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// Pluggable source of embeddings for texts (and image ids) that are not in a
// precomputed store. Three transports share one contract: one unit vector per
// key, in request order, each of `expected_dim` entries.
//
//   file_stub      an EmbeddingStore keyed by exact text or image id
//   local_process  a sidecar command speaking the wire protocol on stdin/stdout
//   http           POST wire-protocol frames to a URL

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "clipdpo/embedding.hpp"
#include "clipdpo/embedding_store.hpp"

namespace clipdpo {

enum class EncoderKind { file_stub, local_process, http };

std::string_view to_string(EncoderKind k) noexcept;
std::optional<EncoderKind> parse_encoder_kind(std::string_view s) noexcept;

struct EncoderEndpoint {
  EncoderKind kind = EncoderKind::file_stub;
  // Store path (file_stub), shell command (local_process) or URL (http).
  std::string address;
  std::string model_tag;
  std::chrono::milliseconds timeout{30000};
  // 0 accepts whatever dim the endpoint reports on first use.
  std::uint32_t expected_dim = 0;
  // Concurrent requests allowed for http endpoints.
  unsigned max_in_flight = 4;
};

class Encoder {
 public:
  virtual ~Encoder() = default;

  // Throws Timeout, DimMismatch (as DimensionMismatch), TransportError or
  // UnknownText.
  std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts);
  std::vector<EmbeddingVector> embed_images(std::span<const std::string> image_ids);

  virtual const EncoderEndpoint& endpoint() const noexcept = 0;

 protected:
  // Raw vectors for `keys`; the base class validates count, dim and
  // normalizes.
  virtual std::vector<std::vector<float>> fetch(std::span<const std::string> keys) = 0;

 private:
  std::vector<EmbeddingVector> embed(std::span<const std::string> keys);
};

class FileStubEncoder final : public Encoder {
 public:
  explicit FileStubEncoder(EncoderEndpoint ep);
  FileStubEncoder(EncoderEndpoint ep, EmbeddingStore store);

  const EncoderEndpoint& endpoint() const noexcept override { return ep_; }
  const EmbeddingStore& store() const noexcept { return store_; }

 protected:
  std::vector<std::vector<float>> fetch(std::span<const std::string> keys) override;

 private:
  EncoderEndpoint ep_;
  EmbeddingStore store_;
};

std::unique_ptr<Encoder> make_encoder(const EncoderEndpoint& ep);

// Serves wire-protocol requests from `store` on the given file descriptors
// until EOF. Unknown keys produce an empty (count 0) response. Used by the
// clipdpo-encoder-stub sidecar.
int serve_wire_protocol(const EmbeddingStore& store, int in_fd, int out_fd);

}  // namespace clipdpo
