#include "udderid/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "udderid/error.hpp"

namespace udderid {
namespace {

// Number of counter-clockwise quarter turns if `angle_deg` is a multiple of
// 90 degrees, otherwise -1.
int quarter_turns(double angle_deg) {
  const double turns = angle_deg / 90.0;
  const double nearest = std::round(turns);
  if (std::abs(turns - nearest) > 1e-12) return -1;
  const long long q = static_cast<long long>(nearest) % 4;
  return static_cast<int>(q < 0 ? q + 4 : q);
}

std::uint8_t luma601(int r, int g, int b) {
  return static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
}

GrayImage from_mat(const cv::Mat& decoded) {
  if (decoded.empty() || decoded.dims != 2) {
    throw Error(ErrorCode::UndecodableImage, "image could not be decoded");
  }
  cv::Mat eight;
  if (decoded.depth() == CV_8U) {
    eight = decoded;
  } else if (decoded.depth() == CV_16U) {
    decoded.convertTo(eight, CV_8U, 1.0 / 257.0);
  } else {
    throw Error(ErrorCode::UndecodableImage, "unsupported sample depth");
  }

  GrayImage out(eight.rows, eight.cols);
  const int channels = eight.channels();
  for (int y = 0; y < eight.rows; ++y) {
    const std::uint8_t* row = eight.ptr<std::uint8_t>(y);
    for (int x = 0; x < eight.cols; ++x) {
      const std::uint8_t* px = row + static_cast<std::ptrdiff_t>(x) * channels;
      switch (channels) {
        case 1:
        case 2:  // gray + alpha
          out(y, x) = px[0];
          break;
        case 3:
        case 4:  // OpenCV order is BGR(A)
          out(y, x) = luma601(px[2], px[1], px[0]);
          break;
        default:
          throw Error(ErrorCode::UndecodableImage, "unsupported channel count");
      }
    }
  }
  return out;
}

GrayImage rotate_quarter(const GrayImage& img, int turns) {
  const Eigen::Index w = img.cols();
  const Eigen::Index h = img.rows();
  switch (turns) {
    case 0:
      return img;
    case 1: {
      // out(u, v) = in(x = W-1-v, y = u)
      GrayImage out(w, h);
      for (Eigen::Index v = 0; v < w; ++v)
        for (Eigen::Index u = 0; u < h; ++u) out(v, u) = img(u, w - 1 - v);
      return out;
    }
    case 2:
      return img.reverse();
    default: {
      // out(u, v) = in(x = v, y = H-1-u)
      GrayImage out(w, h);
      for (Eigen::Index v = 0; v < w; ++v)
        for (Eigen::Index u = 0; u < h; ++u) out(v, u) = img(h - 1 - u, v);
      return out;
    }
  }
}

}  // namespace

GrayImage decode_grayscale(std::span<const std::uint8_t> encoded) {
  if (encoded.empty()) throw Error(ErrorCode::UndecodableImage, "empty buffer");
  const cv::Mat buffer(1, static_cast<int>(encoded.size()), CV_8U,
                       const_cast<std::uint8_t*>(encoded.data()));
  cv::Mat decoded;
  try {
    decoded = cv::imdecode(buffer, cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::UndecodableImage, e.what());
  }
  return from_mat(decoded);
}

GrayImage load_grayscale(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::FileNotFound, path.string());
  }
  cv::Mat decoded;
  try {
    decoded = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::UndecodableImage, path.string() + ": " + e.what());
  }
  if (decoded.empty()) throw Error(ErrorCode::UndecodableImage, path.string());
  return from_mat(decoded);
}

std::vector<std::uint8_t> encode_png(const GrayImage& img) {
  const cv::Mat view(static_cast<int>(img.rows()), static_cast<int>(img.cols()), CV_8U,
                     const_cast<std::uint8_t*>(img.data()));
  std::vector<std::uint8_t> bytes;
  if (!cv::imencode(".png", view, bytes)) throw Error(ErrorCode::IoError, "PNG encoding failed");
  return bytes;
}

void save_png(const GrayImage& img, const std::filesystem::path& path) {
  const cv::Mat view(static_cast<int>(img.rows()), static_cast<int>(img.cols()), CV_8U,
                     const_cast<std::uint8_t*>(img.data()));
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), view);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

ImageSize rotated_size(ImageSize source, double angle_deg) {
  const int q = quarter_turns(angle_deg);
  if (q == 0 || q == 2) return source;
  if (q == 1 || q == 3) return {source.height, source.width};
  const double rad = angle_deg * std::numbers::pi / 180.0;
  const double c = std::abs(std::cos(rad));
  const double s = std::abs(std::sin(rad));
  const auto extent = [](double v) { return std::max(1, static_cast<int>(std::lround(v))); };
  return {extent(source.width * c + source.height * s), extent(source.width * s + source.height * c)};
}

GrayImage rotate(const GrayImage& img, double angle_deg) {
  if (img.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty image");
  if (const int q = quarter_turns(angle_deg); q >= 0) return rotate_quarter(img, q);

  const ImageSize src = size_of(img);
  const ImageSize dst = rotated_size(src, angle_deg);
  const double rad = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const double src_cx = (src.width - 1) / 2.0;
  const double src_cy = (src.height - 1) / 2.0;
  const double dst_cx = (dst.width - 1) / 2.0;
  const double dst_cy = (dst.height - 1) / 2.0;

  const auto at = [&](long x, long y) -> double {
    if (x < 0 || y < 0 || x >= src.width || y >= src.height) return 0.0;
    return img(y, x);
  };

  GrayImage out(dst.height, dst.width);
  for (int v = 0; v < dst.height; ++v) {
    for (int u = 0; u < dst.width; ++u) {
      // Inverse map in y-down coordinates of a visually counter-clockwise turn.
      const double dx = u - dst_cx;
      const double dy = v - dst_cy;
      const double sx = src_cx + dx * c - dy * s;
      const double sy = src_cy + dx * s + dy * c;
      const double fx = std::floor(sx);
      const double fy = std::floor(sy);
      const double ax = sx - fx;
      const double ay = sy - fy;
      const long x0 = static_cast<long>(fx);
      const long y0 = static_cast<long>(fy);
      const double value = (1 - ax) * (1 - ay) * at(x0, y0) + ax * (1 - ay) * at(x0 + 1, y0) +
                           (1 - ax) * ay * at(x0, y0 + 1) + ax * ay * at(x0 + 1, y0 + 1);
      out(v, u) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
    }
  }
  return out;
}

GrayImage crop(const GrayImage& img, const CropRect& rect) {
  const ImageSize size = size_of(img);
  if (rect.w < 1 || rect.h < 1 || rect.x < 0 || rect.y < 0 ||
      static_cast<long>(rect.x) + rect.w > size.width ||
      static_cast<long>(rect.y) + rect.h > size.height) {
    throw Error(ErrorCode::CropOutOfBounds,
                "rect (" + std::to_string(rect.x) + "," + std::to_string(rect.y) + "," +
                    std::to_string(rect.w) + "," + std::to_string(rect.h) + ") exceeds " +
                    std::to_string(size.width) + "x" + std::to_string(size.height));
  }
  return img.block(rect.y, rect.x, rect.h, rect.w);
}

GrayImage rotate_crop(const GrayImage& img, double angle_deg, const CropRect& rect) {
  return crop(rotate(img, angle_deg), rect);
}

}  // namespace udderid
