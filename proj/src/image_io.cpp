/*
 * Copyright 2026 The chromaskew Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "chromaskew/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace chromaskew {
namespace {

struct Header {
  Index width;
  Index height;
};

void skip_space_and_comments(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

Index read_number(std::istream& in) {
  skip_space_and_comments(in);
  long long v = -1;
  if (!(in >> v) || v < 1) throw std::runtime_error("malformed netpbm header");
  return static_cast<Index>(v);
}

Header read_header(std::istream& in, const char* magic) {
  char m[2] = {};
  in.read(m, 2);
  if (!in || m[0] != magic[0] || m[1] != magic[1]) {
    throw std::runtime_error(std::string("expected netpbm magic ") + magic);
  }
  Header h{read_number(in), read_number(in)};
  if (read_number(in) != 255) throw std::runtime_error("only maxval 255 is supported");
  in.get();
  return h;
}

std::vector<unsigned char> read_payload(std::istream& in, std::size_t n) {
  std::vector<unsigned char> buf(n);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw std::runtime_error("truncated netpbm payload");
  }
  return buf;
}

template <typename Fn>
void save_with(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  fn(out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5));
}

void write_ppm(std::ostream& out, const Image& image) {
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  std::vector<char> buf(static_cast<std::size_t>(image.pixels.size()));
  for (Index p = 0; p < image.pixels.rows(); ++p) {
    for (Index c = 0; c < 3; ++c) {
      buf[static_cast<std::size_t>(p * 3 + c)] =
          static_cast<char>(quantize(image.pixels(p, c)));
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

Image read_ppm(std::istream& in) {
  const Header h = read_header(in, "P6");
  const auto buf = read_payload(in, static_cast<std::size_t>(h.width * h.height * 3));
  Image img(h.height, h.width);
  for (Index p = 0; p < h.width * h.height; ++p) {
    for (Index c = 0; c < 3; ++c) {
      img.pixels(p, c) = static_cast<float>(buf[static_cast<std::size_t>(p * 3 + c)]) / 255.0f;
    }
  }
  return img;
}

void save_ppm(const std::filesystem::path& path, const Image& image) {
  save_with(path, [&](std::ostream& out) { write_ppm(out, image); });
}

Image load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_ppm(in);
}

void write_pgm(std::ostream& out, const saliency::SaliencyMap& map) {
  out << "P5\n" << map.cols() << " " << map.rows() << "\n255\n";
  std::vector<char> buf(static_cast<std::size_t>(map.size()));
  for (Index i = 0; i < map.size(); ++i) {
    buf[static_cast<std::size_t>(i)] = static_cast<char>(quantize(map.data()[i]));
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

saliency::SaliencyMap read_pgm(std::istream& in) {
  const Header h = read_header(in, "P5");
  const auto buf = read_payload(in, static_cast<std::size_t>(h.width * h.height));
  saliency::SaliencyMap m(h.height, h.width);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = buf[static_cast<std::size_t>(i)] / 255.0;
  return m;
}

void save_pgm(const std::filesystem::path& path, const saliency::SaliencyMap& map) {
  save_with(path, [&](std::ostream& out) { write_pgm(out, map); });
}

}  // namespace chromaskew
