// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// Encoder request / response framing, little-endian throughout:
//
//   request  = "ENCQ" u64 request_id u32 count { u32 len, len bytes UTF-8 }*
//   response = "ENCR" u64 request_id u32 dim u32 count  count*dim f32
//
// Both frames are self-delimiting, so they can be streamed over a pipe
// without extra framing.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace clipdpo::wire {

struct Request {
  std::uint64_t request_id = 0;
  std::vector<std::string> keys;

  bool operator==(const Request&) const = default;
};

struct Response {
  std::uint64_t request_id = 0;
  std::uint32_t dim = 0;
  std::uint32_t count = 0;
  std::vector<float> payload;  // count x dim, row-major

  bool operator==(const Response&) const = default;
};

std::string encode_request(const Request& req);
std::string encode_response(const Response& resp);

// Throws TransportError on bad magic or a malformed body. Trailing bytes are
// an error.
Request decode_request(std::string_view bytes);
Response decode_response(std::string_view bytes);

// Size of the complete frame starting at bytes[0], or nullopt if more bytes
// are needed. Throws TransportError on bad magic.
std::optional<std::size_t> request_frame_size(std::string_view bytes);
std::optional<std::size_t> response_frame_size(std::string_view bytes);

}  // namespace clipdpo::wire
