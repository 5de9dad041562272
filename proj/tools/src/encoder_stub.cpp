// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

// Wire-protocol sidecar serving vectors from an EMB1 store over stdin/stdout.
// Usage: clipdpo-encoder-stub STORE

#include <unistd.h>

#include <iostream>

#include "clipdpo/embedding_store.hpp"
#include "clipdpo/encoder.hpp"
#include "clipdpo/error.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: clipdpo-encoder-stub STORE\n";
    return 1;
  }
  try {
    const auto store = clipdpo::EmbeddingStore::load(argv[1]);
    return clipdpo::serve_wire_protocol(store, STDIN_FILENO, STDOUT_FILENO);
  } catch (const clipdpo::Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
}
