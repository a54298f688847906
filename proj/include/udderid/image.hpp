#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace udderid {

/// 8-bit grayscale image. Rows are image rows (height), columns are image
/// columns (width); storage is row-major so `data()` is the pixel sequence.
using GrayImage = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Axis-aligned pixel rectangle, origin at the image top-left.
struct CropRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  friend bool operator==(const CropRect&, const CropRect&) = default;
};

struct ImageSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

inline ImageSize size_of(const GrayImage& img) {
  return {static_cast<int>(img.cols()), static_cast<int>(img.rows())};
}

inline CropRect full_rect(ImageSize size) { return {0, 0, size.width, size.height}; }
inline CropRect full_rect(const GrayImage& img) { return full_rect(size_of(img)); }

/// Loads a PNG or JPEG and converts it to gray with Rec.601 luma weights,
/// rounded to the nearest integer. Throws FileNotFound / UndecodableImage.
GrayImage load_grayscale(const std::filesystem::path& path);

/// Same conversion as load_grayscale, from an in-memory encoded buffer.
GrayImage decode_grayscale(std::span<const std::uint8_t> encoded);

/// Lossless PNG encoding (used by the annotation server and the synthesizer).
std::vector<std::uint8_t> encode_png(const GrayImage& img);
void save_png(const GrayImage& img, const std::filesystem::path& path);

/// Canvas size after a counter-clockwise rotation by `angle_deg`: the
/// axis-aligned bounding box of the rotated source. Quarter turns swap the
/// dimensions exactly.
ImageSize rotated_size(ImageSize source, double angle_deg);

/// Rotates counter-clockwise about the image center. Multiples of 90 degrees
/// are exact pixel permutations; other angles use bilinear interpolation with
/// zero fill outside the source.
GrayImage rotate(const GrayImage& img, double angle_deg);

/// Throws CropOutOfBounds unless `rect` lies fully inside `img`.
GrayImage crop(const GrayImage& img, const CropRect& rect);

/// The canonical preprocessing transform: rotate, then crop.
GrayImage rotate_crop(const GrayImage& img, double angle_deg, const CropRect& rect);

}  // namespace udderid
