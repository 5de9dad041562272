// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/encoder.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <semaphore>

#include <httplib.h>

#include "clipdpo/error.hpp"
#include "clipdpo/wire.hpp"

extern char** environ;

namespace clipdpo {

std::string_view to_string(EncoderKind k) noexcept {
  switch (k) {
    case EncoderKind::file_stub: return "file_stub";
    case EncoderKind::local_process: return "local_process";
    case EncoderKind::http: return "http";
  }
  return "file_stub";
}

std::optional<EncoderKind> parse_encoder_kind(std::string_view s) noexcept {
  for (auto k : {EncoderKind::file_stub, EncoderKind::local_process, EncoderKind::http}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::vector<EmbeddingVector> Encoder::embed_texts(std::span<const std::string> texts) {
  return embed(texts);
}

std::vector<EmbeddingVector> Encoder::embed_images(std::span<const std::string> image_ids) {
  return embed(image_ids);
}

std::vector<EmbeddingVector> Encoder::embed(std::span<const std::string> keys) {
  for (const auto& k : keys) {
    if (k.empty()) throw Error(ErrorCode::UnknownText, "empty key in encoder request");
  }
  if (keys.empty()) return {};
  auto raw = fetch(keys);
  if (raw.size() != keys.size()) {
    throw Error(ErrorCode::TransportError, "encoder returned " + std::to_string(raw.size()) +
                                               " vectors for " + std::to_string(keys.size()) +
                                               " keys");
  }
  const std::uint32_t expected = endpoint().expected_dim;
  const std::size_t dim = expected != 0 ? expected : raw.front().size();
  std::vector<EmbeddingVector> out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].empty() || raw[i].size() != dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  "encoder returned dim " + std::to_string(raw[i].size()) + ", expected " +
                      std::to_string(dim),
                  keys[i]);
    }
    try {
      out.push_back(normalize(EmbeddingVector(std::move(raw[i]))));
    } catch (const Error& e) {
      throw Error(e.code(), e.message(), keys[i]);
    }
  }
  return out;
}

FileStubEncoder::FileStubEncoder(EncoderEndpoint ep)
    : FileStubEncoder(ep, EmbeddingStore::load(ep.address)) {}

FileStubEncoder::FileStubEncoder(EncoderEndpoint ep, EmbeddingStore store)
    : ep_(std::move(ep)), store_(std::move(store)) {
  if (ep_.expected_dim != 0 && ep_.expected_dim != store_.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "stub store dim " + std::to_string(store_.dim()) +
                                                  " != expected " +
                                                  std::to_string(ep_.expected_dim));
  }
}

std::vector<std::vector<float>> FileStubEncoder::fetch(std::span<const std::string> keys) {
  std::vector<std::vector<float>> out;
  out.reserve(keys.size());
  for (const auto& k : keys) {
    auto idx = store_.find(k);
    if (!idx) throw Error(ErrorCode::UnknownText, "text not present in stub store", k);
    auto r = store_.row(*idx);
    out.emplace_back(r.begin(), r.end());
  }
  return out;
}

namespace {

std::vector<std::vector<float>> unpack(const wire::Response& resp, std::uint64_t request_id,
                                       std::span<const std::string> keys) {
  if (resp.request_id != request_id) {
    throw Error(ErrorCode::TransportError, "response id " + std::to_string(resp.request_id) +
                                               " does not match request " +
                                               std::to_string(request_id));
  }
  if (resp.count == 0 && !keys.empty()) {
    throw Error(ErrorCode::UnknownText, "encoder rejected the request", keys.front());
  }
  std::vector<std::vector<float>> out(resp.count);
  for (std::size_t i = 0; i < resp.count; ++i) {
    auto first = resp.payload.begin() + static_cast<std::ptrdiff_t>(i * resp.dim);
    out[i].assign(first, first + resp.dim);
  }
  return out;
}

std::atomic<std::uint64_t> g_next_request_id{1};

class LocalProcessEncoder final : public Encoder {
 public:
  explicit LocalProcessEncoder(EncoderEndpoint ep) : ep_(std::move(ep)) { spawn(); }

  ~LocalProcessEncoder() override {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    if (pid_ > 0) {
      int status = 0;
      if (::waitpid(pid_, &status, WNOHANG) == 0) {
        ::kill(pid_, SIGTERM);
        ::waitpid(pid_, &status, 0);
      }
    }
  }

  const EncoderEndpoint& endpoint() const noexcept override { return ep_; }

 protected:
  std::vector<std::vector<float>> fetch(std::span<const std::string> keys) override {
    wire::Request req{g_next_request_id++, {keys.begin(), keys.end()}};
    const std::string frame = wire::encode_request(req);
    std::lock_guard lock(mu_);
    write_all(frame);
    return unpack(read_response(), req.request_id, keys);
  }

 private:
  void spawn() {
    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0) {
      throw Error(ErrorCode::TransportError, std::string("pipe: ") + std::strerror(errno));
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    std::string sh = "/bin/sh", dash_c = "-c", cmd = ep_.address;
    char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
    const int rc = posix_spawn(&pid_, "/bin/sh", &actions, nullptr, argv, environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    if (rc != 0) {
      pid_ = -1;
      throw Error(ErrorCode::TransportError, "cannot spawn encoder: " + ep_.address);
    }
    // A dead sidecar must surface as TransportError, not SIGPIPE.
    ::signal(SIGPIPE, SIG_IGN);
  }

  void write_all(std::string_view bytes) {
    while (!bytes.empty()) {
      const ssize_t n = ::write(to_child_, bytes.data(), bytes.size());
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::TransportError, std::string("write to encoder: ") + std::strerror(errno));
      }
      bytes.remove_prefix(static_cast<std::size_t>(n));
    }
  }

  wire::Response read_response() {
    const auto deadline = std::chrono::steady_clock::now() + ep_.timeout;
    std::string buf;
    char chunk[65536];
    for (;;) {
      if (!buf.empty()) {
        if (auto size = wire::response_frame_size(buf)) {
          if (*size != buf.size()) {
            throw Error(ErrorCode::TransportError, "encoder sent bytes past the response frame");
          }
          return wire::decode_response(buf);
        }
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw Error(ErrorCode::Timeout, "encoder did not answer in time");
      pollfd pfd{from_child_, POLLIN, 0};
      const int pr = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (pr == 0) throw Error(ErrorCode::Timeout, "encoder did not answer in time");
      if (pr < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::TransportError, std::string("poll: ") + std::strerror(errno));
      }
      const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw Error(ErrorCode::TransportError, "encoder closed its output");
      buf.append(chunk, static_cast<std::size_t>(n));
    }
  }

  EncoderEndpoint ep_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::mutex mu_;
};

class HttpEncoder final : public Encoder {
 public:
  explicit HttpEncoder(EncoderEndpoint ep)
      : ep_(std::move(ep)), in_flight_(static_cast<std::ptrdiff_t>(std::max(1u, ep_.max_in_flight))) {
    const auto& url = ep_.address;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) {
      throw Error(ErrorCode::InvalidConfig, "http encoder address must start with http://");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    base_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  }

  const EncoderEndpoint& endpoint() const noexcept override { return ep_; }

 protected:
  std::vector<std::vector<float>> fetch(std::span<const std::string> keys) override {
    wire::Request req{g_next_request_id++, {keys.begin(), keys.end()}};
    const std::string body = wire::encode_request(req);

    in_flight_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{in_flight_};

    httplib::Client client(base_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(ep_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(ep_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(path_, body, "application/octet-stream");
    if (!res) {
      if (res.error() == httplib::Error::Read || res.error() == httplib::Error::ConnectionTimeout) {
        throw Error(ErrorCode::Timeout, "http encoder: " + httplib::to_string(res.error()));
      }
      throw Error(ErrorCode::TransportError, "http encoder: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw Error(ErrorCode::TransportError, "http encoder status " + std::to_string(res->status));
    }
    return unpack(wire::decode_response(res->body), req.request_id, keys);
  }

 private:
  EncoderEndpoint ep_;
  std::string base_;
  std::string path_;
  std::counting_semaphore<> in_flight_;
};

bool read_exact(int fd, char* dst, std::size_t n) {
  while (n > 0) {
    const ssize_t r = ::read(fd, dst, n);
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) return false;
    dst += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

bool write_exact(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t w = ::write(fd, bytes.data(), bytes.size());
    if (w < 0 && errno == EINTR) continue;
    if (w <= 0) return false;
    bytes.remove_prefix(static_cast<std::size_t>(w));
  }
  return true;
}

}  // namespace

std::unique_ptr<Encoder> make_encoder(const EncoderEndpoint& ep) {
  switch (ep.kind) {
    case EncoderKind::file_stub: return std::make_unique<FileStubEncoder>(ep);
    case EncoderKind::local_process: return std::make_unique<LocalProcessEncoder>(ep);
    case EncoderKind::http: return std::make_unique<HttpEncoder>(ep);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown encoder kind");
}

int serve_wire_protocol(const EmbeddingStore& store, int in_fd, int out_fd) {
  std::string buf;
  char header[16];
  for (;;) {
    if (!read_exact(in_fd, header, sizeof header)) return 0;
    buf.assign(header, sizeof header);
    if (buf.compare(0, 4, "ENCQ") != 0) return 1;
    std::uint32_t count = 0;
    for (int i = 0; i < 4; ++i) count |= static_cast<std::uint32_t>(static_cast<unsigned char>(header[12 + i])) << (8 * i);
    for (std::uint32_t k = 0; k < count; ++k) {
      char len_bytes[4];
      if (!read_exact(in_fd, len_bytes, 4)) return 1;
      buf.append(len_bytes, 4);
      std::uint32_t len = 0;
      for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(static_cast<unsigned char>(len_bytes[i])) << (8 * i);
      const std::size_t at = buf.size();
      buf.resize(at + len);
      if (len > 0 && !read_exact(in_fd, buf.data() + at, len)) return 1;
    }
    const auto req = wire::decode_request(buf);
    wire::Response resp;
    resp.request_id = req.request_id;
    bool all_known = true;
    for (const auto& k : req.keys) all_known = all_known && store.contains(k);
    if (all_known) {
      resp.dim = store.dim();
      resp.count = static_cast<std::uint32_t>(req.keys.size());
      resp.payload.reserve(static_cast<std::size_t>(resp.dim) * resp.count);
      for (const auto& k : req.keys) {
        auto r = store.row(k);
        resp.payload.insert(resp.payload.end(), r.begin(), r.end());
      }
    }
    if (!write_exact(out_fd, wire::encode_response(resp))) return 1;
  }
}

}  // namespace clipdpo
