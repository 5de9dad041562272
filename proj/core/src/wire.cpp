// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/wire.hpp"

#include <bit>
#include <cstring>

#include "clipdpo/error.hpp"

namespace clipdpo::wire {

namespace {

constexpr std::string_view kRequestMagic = "ENCQ";
constexpr std::string_view kResponseMagic = "ENCR";

template <typename T>
void put(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get(std::string_view bytes, std::size_t at) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
  }
  return v;
}

void check_magic(std::string_view bytes, std::string_view magic) {
  const std::size_t n = std::min(bytes.size(), magic.size());
  if (bytes.substr(0, n) != magic.substr(0, n)) {
    throw Error(ErrorCode::TransportError, "bad frame magic, expected " + std::string(magic));
  }
}

}  // namespace

std::string encode_request(const Request& req) {
  std::string out(kRequestMagic);
  put<std::uint64_t>(out, req.request_id);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(req.keys.size()));
  for (const auto& k : req.keys) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(k.size()));
    out += k;
  }
  return out;
}

std::string encode_response(const Response& resp) {
  if (resp.payload.size() != static_cast<std::size_t>(resp.dim) * resp.count) {
    throw Error(ErrorCode::TransportError, "response payload does not match dim x count");
  }
  std::string out(kResponseMagic);
  put<std::uint64_t>(out, resp.request_id);
  put<std::uint32_t>(out, resp.dim);
  put<std::uint32_t>(out, resp.count);
  for (float x : resp.payload) put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));
  return out;
}

std::optional<std::size_t> request_frame_size(std::string_view bytes) {
  check_magic(bytes, kRequestMagic);
  constexpr std::size_t kHeader = 4 + 8 + 4;
  if (bytes.size() < kHeader) return std::nullopt;
  const auto count = get<std::uint32_t>(bytes, 12);
  std::size_t pos = kHeader;
  for (std::uint32_t i = 0; i < count; ++i) {
    if (bytes.size() < pos + 4) return std::nullopt;
    pos += 4 + get<std::uint32_t>(bytes, pos);
  }
  if (bytes.size() < pos) return std::nullopt;
  return pos;
}

std::optional<std::size_t> response_frame_size(std::string_view bytes) {
  check_magic(bytes, kResponseMagic);
  constexpr std::size_t kHeader = 4 + 8 + 4 + 4;
  if (bytes.size() < kHeader) return std::nullopt;
  const std::size_t total =
      kHeader + 4ull * get<std::uint32_t>(bytes, 12) * get<std::uint32_t>(bytes, 16);
  if (bytes.size() < total) return std::nullopt;
  return total;
}

Request decode_request(std::string_view bytes) {
  auto size = request_frame_size(bytes);
  if (!size) throw Error(ErrorCode::TransportError, "truncated request frame");
  if (*size != bytes.size()) throw Error(ErrorCode::TransportError, "trailing bytes after request");
  Request req;
  req.request_id = get<std::uint64_t>(bytes, 4);
  const auto count = get<std::uint32_t>(bytes, 12);
  std::size_t pos = 16;
  req.keys.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = get<std::uint32_t>(bytes, pos);
    req.keys.emplace_back(bytes.substr(pos + 4, len));
    pos += 4 + len;
  }
  return req;
}

Response decode_response(std::string_view bytes) {
  auto size = response_frame_size(bytes);
  if (!size) throw Error(ErrorCode::TransportError, "truncated response frame");
  if (*size != bytes.size()) throw Error(ErrorCode::TransportError, "trailing bytes after response");
  Response resp;
  resp.request_id = get<std::uint64_t>(bytes, 4);
  resp.dim = get<std::uint32_t>(bytes, 12);
  resp.count = get<std::uint32_t>(bytes, 16);
  resp.payload.resize(static_cast<std::size_t>(resp.dim) * resp.count);
  for (std::size_t i = 0; i < resp.payload.size(); ++i) {
    resp.payload[i] = std::bit_cast<float>(get<std::uint32_t>(bytes, 20 + 4 * i));
  }
  return resp;
}

}  // namespace clipdpo::wire
