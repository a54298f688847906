#include "udderid/image.hpp"

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "oracles.hpp"
#include "udderid/error.hpp"

namespace fs = std::filesystem;
using namespace udderid;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "udderid_test_image";
  fs::create_directories(dir);
  return dir;
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

TEST(LoadGrayscale, WhiteAndBlackPixels) {
  cv::Mat bgr(1, 2, CV_8UC3);
  bgr.at<cv::Vec3b>(0, 0) = {255, 255, 255};
  bgr.at<cv::Vec3b>(0, 1) = {0, 0, 0};
  const fs::path p = temp_dir() / "bw.png";
  ASSERT_TRUE(cv::imwrite(p.string(), bgr));

  const GrayImage img = load_grayscale(p);
  ASSERT_EQ(img.cols(), 2);
  ASSERT_EQ(img.rows(), 1);
  EXPECT_EQ(img(0, 0), 255);
  EXPECT_EQ(img(0, 1), 0);
}

TEST(LoadGrayscale, GrayMapsToItself) {
  cv::Mat bgr(1, 1, CV_8UC3, cv::Scalar(100, 100, 100));
  const fs::path p = temp_dir() / "gray.png";
  ASSERT_TRUE(cv::imwrite(p.string(), bgr));
  EXPECT_EQ(load_grayscale(p)(0, 0), 100);
}

TEST(LoadGrayscale, Rec601Weights) {
  // 0.299*200 + 0.587*10 + 0.114*50 = 59.8 + 5.87 + 5.7 = 71.37 -> 71
  cv::Mat bgr(1, 1, CV_8UC3, cv::Scalar(50, 10, 200));
  const fs::path p = temp_dir() / "rgb.png";
  ASSERT_TRUE(cv::imwrite(p.string(), bgr));
  EXPECT_EQ(load_grayscale(p)(0, 0), 71);
}

TEST(LoadGrayscale, Errors) {
  const fs::path text = temp_dir() / "note.txt";
  std::ofstream(text) << "not an image\n";
  EXPECT_EQ(code_of([&] { load_grayscale(text); }), ErrorCode::UndecodableImage);
  EXPECT_EQ(code_of([&] { load_grayscale(temp_dir() / "absent.png"); }), ErrorCode::FileNotFound);
}

TEST(LoadGrayscale, PngRoundTrip) {
  Rng rng(5);
  const GrayImage img = testing_support::random_image(rng, 13, 7);
  EXPECT_EQ(decode_grayscale(encode_png(img)), img);
}

TEST(RotateCrop, IdentityAtZero) {
  Rng rng(1);
  const GrayImage img = testing_support::random_image(rng, 9, 6);
  EXPECT_EQ(rotate_crop(img, 0, full_rect(img)), img);
}

TEST(RotateCrop, QuarterTurnIsExactPermutation) {
  GrayImage img(2, 3);  // W=3, H=2
  img << 1, 2, 3,
         4, 5, 6;
  const GrayImage r = rotate_crop(img, 90, {0, 0, 2, 3});
  GrayImage expected(3, 2);  // counter-clockwise: right column becomes top row
  expected << 3, 6,
              2, 5,
              1, 4;
  EXPECT_EQ(r, expected);
  EXPECT_EQ(rotated_size(size_of(img), 90), (ImageSize{2, 3}));
  EXPECT_EQ(rotate(img, -90), rotate(img, 270));
  EXPECT_EQ(rotate(img, 180), rotate(rotate(img, 90), 90));
}

TEST(RotateCrop, FourQuarterTurnsRestore) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const GrayImage img = testing_support::random_image(rng, 1 + static_cast<int>(rng.index(12)),
                                                        1 + static_cast<int>(rng.index(12)));
    GrayImage r = img;
    for (int i = 0; i < 4; ++i) r = rotate_crop(r, 90, full_rect(rotated_size(size_of(r), 90)));
    EXPECT_EQ(r, img);
  }
}

TEST(RotateCrop, CropOutOfBounds) {
  const GrayImage img = GrayImage::Constant(4, 5, 7);
  EXPECT_EQ(code_of([&] { rotate_crop(img, 0, {0, 0, 6, 4}); }), ErrorCode::CropOutOfBounds);
  EXPECT_EQ(code_of([&] { rotate_crop(img, 0, {-1, 0, 2, 2}); }), ErrorCode::CropOutOfBounds);
  EXPECT_EQ(code_of([&] { rotate_crop(img, 0, {0, 0, 0, 2}); }), ErrorCode::CropOutOfBounds);
  EXPECT_EQ(rotate_crop(img, 0, {1, 1, 3, 2}).size(), 6);
}

TEST(RotateCrop, ArbitraryAngleBilinear) {
  // A constant image keeps its value wherever the whole bilinear support is
  // inside the source; the rotated canvas is the bounding box.
  const GrayImage img = GrayImage::Constant(21, 21, 200);
  const GrayImage r = rotate(img, 45);
  EXPECT_EQ(size_of(r), (ImageSize{30, 30}));
  EXPECT_EQ(r(15, 15), 200);
  EXPECT_EQ(r(0, 0), 0);  // corner lies outside the source: zero fill
  EXPECT_LE(r.maxCoeff(), 255);
}

TEST(RotateCrop, SmallAngleKeepsCenterPixel) {
  Rng rng(3);
  const GrayImage img = testing_support::random_image(rng, 11, 11);
  const GrayImage r = rotate(img, 10);
  // Odd square: the center pixel maps onto itself.
  EXPECT_EQ(r(r.rows() / 2, r.cols() / 2), img(5, 5));
}

}  // namespace
