#pragma once

// Binary PGM (P5, maxval 255) serialization for images and masks.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "segsem/error.hpp"
#include "segsem/raster.hpp"

namespace segsem::pgm {

namespace detail {

inline int read_header_int(std::istream& in, const std::string& path) {
  // skip whitespace and '#' comments
  for (;;) {
    int c = in.peek();
    if (c == EOF) throw IoError(path, "truncated PGM header");
    if (std::isspace(c)) {
      in.get();
    } else if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else {
      break;
    }
  }
  int v = -1;
  if (!(in >> v) || v < 0) throw IoError(path, "malformed PGM header");
  return v;
}

inline void write_p5(const std::filesystem::path& path, int w, int h,
                     std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << "P5\n" << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace detail

inline GrayImage decode_image(std::istream& in, const std::string& path = "<stream>") {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') throw IoError(path, "not a binary PGM (P5)");
  const int w = detail::read_header_int(in, path);
  const int h = detail::read_header_int(in, path);
  const int maxval = detail::read_header_int(in, path);
  if (maxval != 255) throw IoError(path, "unsupported maxval " + std::to_string(maxval));
  if (w < 1 || h < 1) throw IoError(path, "invalid dimensions");
  if (!std::isspace(in.get())) throw IoError(path, "malformed PGM header");
  GrayImage img(w, h);
  in.read(reinterpret_cast<char*>(img.pixels().data()), static_cast<std::streamsize>(img.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.size())) {
    throw IoError(path, "truncated pixel data");
  }
  return img;
}

inline GrayImage read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  return decode_image(in, path.string());
}

/// Reads a mask stored as 0/255. Any other pixel value is rejected.
inline BinaryMask read_mask(const std::filesystem::path& path) {
  const GrayImage raw = read_image(path);
  BinaryMask mask(raw.width(), raw.height(), 0);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::uint8_t v = raw.pixels()[i];
    if (v != 0 && v != 255) {
      throw IoError(path.string(), "mask pixel value " + std::to_string(v) + " is not 0 or 255");
    }
    mask.pixels()[i] = v ? 1 : 0;
  }
  return mask;
}

inline void write_image(const std::filesystem::path& path, const GrayImage& img) {
  detail::write_p5(path, img.width(), img.height(), img.pixels());
}

inline void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  std::vector<std::uint8_t> bytes(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) bytes[i] = mask.pixels()[i] ? 255 : 0;
  detail::write_p5(path, mask.width(), mask.height(), bytes);
}

}  // namespace segsem::pgm
