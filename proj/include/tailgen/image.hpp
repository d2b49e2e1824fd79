#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tailgen {

/// RGB raster held at full precision. Channel values live in [0, 255];
/// quantization to 8 bits happens only when writing PPM bytes, so mixing
/// arithmetic stays exact until serialization.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // interleaved r,g,b

  ImageBuffer() = default;
  ImageBuffer(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0.0) {}

  bool empty() const { return data.empty(); }
  std::size_t channel_count() const { return data.size(); }

  double& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  double at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }

  bool operator==(const ImageBuffer& o) const {
    return width == o.width && height == o.height && data == o.data;
  }
};

/// Binary PPM (P6), 8-bit, round-half-to-even quantization.
std::vector<std::uint8_t> encode_ppm(const ImageBuffer& img);
ImageBuffer decode_ppm(const std::vector<std::uint8_t>& bytes);

void write_ppm(const std::string& path, const ImageBuffer& img);
ImageBuffer read_ppm(const std::string& path);

/// Center-crop to square then bilinear-resize to size x size.
ImageBuffer resize_to(const ImageBuffer& img, int size);

}  // namespace tailgen
