// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "clipdpo/error.hpp"

namespace clipdpo {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::DimMismatchHeader: return "DimMismatchHeader";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnknownImageId: return "UnknownImageId";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::InvalidTransition: return "InvalidTransition";
    case ErrorCode::UnscoredCaption: return "UnscoredCaption";
    case ErrorCode::InvalidPattern: return "InvalidPattern";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MissingAnnotation: return "MissingAnnotation";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EmptyBank: return "EmptyBank";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::UnknownText: return "UnknownText";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::Timeout:
    case ErrorCode::TransportError:
    case ErrorCode::InvariantViolation:
      return false;
    default:
      return true;
  }
}

namespace {

std::string decorate(ErrorCode code, const std::string& message,
                     const std::string& record_id, std::size_t line) {
  std::string out(to_string(code));
  if (line != 0) out += " (line " + std::to_string(line) + ")";
  if (!record_id.empty()) out += " [" + record_id + "]";
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string record_id,
             std::size_t line)
    : std::runtime_error(decorate(code, message, record_id, line)),
      code_(code),
      message_(message),
      record_id_(std::move(record_id)),
      line_(line) {}

}  // namespace clipdpo
