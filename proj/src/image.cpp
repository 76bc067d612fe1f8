#include "pathgls/image.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "pathgls/error.hpp"
#include "pathgls/hash.hpp"

namespace pathgls {

namespace {

Image from_mat(const cv::Mat& bgr, const std::string& what) {
  require(!bgr.empty(), "image-decode", "could not decode image: " + what);
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  Image img;
  img.width = rgb.cols;
  img.height = rgb.rows;
  img.pixels.assign(rgb.data, rgb.data + static_cast<std::size_t>(rgb.total()) * 3);
  return img;
}

cv::Mat to_mat(const Image& image) {
  require(!image.empty(), "image-empty", "empty image");
  cv::Mat rgb(image.height, image.width, CV_8UC3, const_cast<std::uint8_t*>(image.pixels.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  return bgr;
}

}  // namespace

Image Image::blank(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Image img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = r;
    img.pixels[i + 1] = g;
    img.pixels[i + 2] = b;
  }
  return img;
}

Image load_image(const std::string& path) {
  cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  return from_mat(bgr, path);
}

void save_png(const Image& image, const std::string& path) {
  if (!cv::imwrite(path, to_mat(image))) {
    fail("image-write", "could not write " + path);
  }
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  std::vector<uchar> buf;
  if (!cv::imencode(".png", to_mat(image), buf)) {
    fail("image-encode", "PNG encoding failed");
  }
  return std::vector<std::uint8_t>(buf.begin(), buf.end());
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
  cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat bgr = cv::imdecode(raw, cv::IMREAD_COLOR);
  return from_mat(bgr, "<memory>");
}

std::string image_content_hash(const Image& image) {
  std::string header = std::to_string(image.width) + "x" + std::to_string(image.height) + ":";
  std::vector<std::uint8_t> buf(header.begin(), header.end());
  buf.insert(buf.end(), image.pixels.begin(), image.pixels.end());
  return sha256_hex(buf.data(), buf.size());
}

}  // namespace pathgls
