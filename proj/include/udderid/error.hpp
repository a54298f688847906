#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace udderid {

enum class ErrorCode {
  FileNotFound,
  UndecodableImage,
  CropOutOfBounds,
  ImageTooSmall,
  DegenerateGeometry,
  EmptyGallery,
  InconsistentLayout,
  NonFiniteFeature,
  LayoutMismatch,
  CowMissingSession,
  EmptySubset,
  GroupSizeTooLarge,
  InvalidArgument,
  IoError,
  ParseError,
  SchemaViolation,
  DuplicateEntry,
  MissingTeat,
  DuplicatePosition,
  NonPositiveBox,
  BoxOutsideCanvas,
  ExtractionError,
};

/// Stable kebab-case identifier, used in CLI messages and HTTP error bodies.
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace udderid
