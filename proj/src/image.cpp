#include "tailgen/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "tailgen/errors.hpp"

namespace tailgen {

namespace {

std::uint8_t quantize(double v) {
  double clamped = std::clamp(v, 0.0, 255.0);
  // nearbyint honours the default rounding mode: round half to even.
  return static_cast<std::uint8_t>(std::nearbyint(clamped));
}

}  // namespace

std::vector<std::uint8_t> encode_ppm(const ImageBuffer& img) {
  if (img.width <= 0 || img.height <= 0) throw ValidationError("cannot encode empty image");
  char header[64];
  int n = std::snprintf(header, sizeof(header), "P6\n%d %d\n255\n", img.width, img.height);
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(n) + img.data.size());
  out.insert(out.end(), header, header + n);
  for (double v : img.data) out.push_back(quantize(v));
  return out;
}

ImageBuffer decode_ppm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> int {
    skip_ws();
    int v = 0;
    bool any = false;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      v = v * 10 + (bytes[pos] - '0');
      ++pos;
      any = true;
    }
    if (!any) throw ParseError("malformed PPM header");
    return v;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw ParseError("not a P6 PPM");
  pos = 2;
  int w = read_int();
  int h = read_int();
  int maxval = read_int();
  if (maxval != 255) throw ParseError("unsupported PPM maxval");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw ParseError("malformed PPM header");
  ++pos;  // single whitespace after maxval

  std::size_t need = static_cast<std::size_t>(w) * h * 3;
  if (bytes.size() - pos < need) throw ParseError("truncated PPM payload");
  ImageBuffer img(w, h);
  for (std::size_t i = 0; i < need; ++i) img.data[i] = static_cast<double>(bytes[pos + i]);
  return img;
}

void write_ppm(const std::string& path, const ImageBuffer& img) {
  auto bytes = encode_ppm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open for write: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ValidationError("short write: " + path);
}

ImageBuffer read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open image: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_ppm(bytes);
}

ImageBuffer resize_to(const ImageBuffer& img, int size) {
  if (img.empty()) throw ValidationError("cannot resize empty image");
  if (img.width == size && img.height == size) return img;

  // center crop to square
  int side = std::min(img.width, img.height);
  int x0 = (img.width - side) / 2;
  int y0 = (img.height - side) / 2;

  ImageBuffer out(size, size);
  double scale = static_cast<double>(side) / size;
  for (int y = 0; y < size; ++y) {
    double sy = (y + 0.5) * scale - 0.5;
    int iy = static_cast<int>(std::floor(sy));
    double fy = sy - iy;
    int y1 = std::clamp(iy, 0, side - 1);
    int y2 = std::clamp(iy + 1, 0, side - 1);
    for (int x = 0; x < size; ++x) {
      double sx = (x + 0.5) * scale - 0.5;
      int ix = static_cast<int>(std::floor(sx));
      double fx = sx - ix;
      int x1 = std::clamp(ix, 0, side - 1);
      int x2 = std::clamp(ix + 1, 0, side - 1);
      for (int c = 0; c < 3; ++c) {
        double top = img.at(x0 + x1, y0 + y1, c) * (1 - fx) + img.at(x0 + x2, y0 + y1, c) * fx;
        double bot = img.at(x0 + x1, y0 + y2, c) * (1 - fx) + img.at(x0 + x2, y0 + y2, c) * fx;
        out.at(x, y, c) = top * (1 - fy) + bot * fy;
      }
    }
  }
  return out;
}

}  // namespace tailgen
