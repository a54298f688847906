#include "udderid/error.hpp"

namespace udderid {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "file-not-found";
    case ErrorCode::UndecodableImage: return "undecodable-image";
    case ErrorCode::CropOutOfBounds: return "crop-out-of-bounds";
    case ErrorCode::ImageTooSmall: return "image-too-small";
    case ErrorCode::DegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::EmptyGallery: return "empty-gallery";
    case ErrorCode::InconsistentLayout: return "inconsistent-layout";
    case ErrorCode::NonFiniteFeature: return "non-finite-feature";
    case ErrorCode::LayoutMismatch: return "layout-mismatch";
    case ErrorCode::CowMissingSession: return "cow-missing-session";
    case ErrorCode::EmptySubset: return "empty-subset";
    case ErrorCode::GroupSizeTooLarge: return "group-size-too-large";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::IoError: return "io-error";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::SchemaViolation: return "schema-violation";
    case ErrorCode::DuplicateEntry: return "duplicate-entry";
    case ErrorCode::MissingTeat: return "missing-teat";
    case ErrorCode::DuplicatePosition: return "duplicate-position";
    case ErrorCode::NonPositiveBox: return "non-positive-box";
    case ErrorCode::BoxOutsideCanvas: return "box-outside-canvas";
    case ErrorCode::ExtractionError: return "extraction-error";
  }
  return "unknown";
}

}  // namespace udderid
