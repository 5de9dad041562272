// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace clipdpo {

enum class ErrorCode {
  ZeroVector,
  NonFinite,
  DimensionMismatch,
  NotNormalized,
  BadMagic,
  UnsupportedVersion,
  DimMismatchHeader,
  TruncatedPayload,
  DuplicateId,
  SchemaError,
  UnknownImageId,
  MissingEmbedding,
  IoError,
  InvariantViolation,
  InvalidTransition,
  UnscoredCaption,
  InvalidPattern,
  InvalidConfig,
  EmptyBatch,
  EmptyInput,
  MissingAnnotation,
  OutOfRange,
  EmptyBank,
  Timeout,
  TransportError,
  UnknownText,
};

std::string_view to_string(ErrorCode code) noexcept;

// Validation errors are problems with the inputs (exit code 1); everything
// else is a runtime failure (exit code 2).
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string record_id = {},
        std::size_t line = 0);

  ErrorCode code() const noexcept { return code_; }
  // The message without the code / line / id decoration of what().
  const std::string& message() const noexcept { return message_; }
  // Offending record, pair or caption id when one is known.
  const std::string& record_id() const noexcept { return record_id_; }
  // 1-based line number for record-file errors, 0 otherwise.
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::string record_id_;
  std::size_t line_;
};

}  // namespace clipdpo
