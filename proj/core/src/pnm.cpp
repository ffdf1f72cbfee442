#include "edgeflow/pnm.hpp"

#include <cctype>
#include <string>

#include "edgeflow/error.hpp"
#include "edgeflow/fileio.hpp"

namespace edgeflow {

namespace {

struct Header {
  char kind = 0;
  int width = 0;
  int height = 0;
  std::size_t data_offset = 0;
};

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  int number() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) throw Error("netpbm: malformed header");
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) throw Error("netpbm: header value out of range");
      ++pos_;
    }
    return static_cast<int>(value);
  }

  std::size_t pos_ = 0;

 private:
  std::span<const std::uint8_t> bytes_;
};

Header parse_header(std::span<const std::uint8_t> bytes, char expected) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != static_cast<std::uint8_t>(expected)) {
    throw Error(std::string("netpbm: expected P") + expected + " magic");
  }
  HeaderReader reader(bytes);
  reader.pos_ = 2;
  Header h;
  h.kind = expected;
  h.width = reader.number();
  h.height = reader.number();
  const int maxval = reader.number();
  if (h.width < 1 || h.height < 1) throw Error("netpbm: zero image dimension");
  if (maxval != 255) throw Error("netpbm: only maxval 255 is supported, got " + std::to_string(maxval));
  // Exactly one whitespace byte separates the header from the raster.
  if (reader.pos_ >= bytes.size() || !std::isspace(bytes[reader.pos_])) throw Error("netpbm: malformed header");
  h.data_offset = reader.pos_ + 1;
  return h;
}

std::vector<std::uint8_t> raster_payload(std::span<const std::uint8_t> bytes, const Header& h, int channels) {
  const std::size_t expected = static_cast<std::size_t>(h.width) * h.height * channels;
  const std::size_t available = bytes.size() - h.data_offset;
  if (available < expected) throw Error("netpbm: truncated raster");
  if (available > expected) throw Error("netpbm: trailing bytes after raster");
  return {bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset), bytes.end()};
}

std::vector<std::uint8_t> with_header(char kind, int width, int height, std::span<const std::uint8_t> raster) {
  const std::string header =
      std::string("P") + kind + "\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), raster.begin(), raster.end());
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  return with_header('5', img.width(), img.height(), img.pixels());
}

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  const Header h = parse_header(bytes, '5');
  return GrayImage(h.width, h.height, raster_payload(bytes, h, 1));
}

std::vector<std::uint8_t> encode_edge_pgm(const EdgeMap& edges) {
  std::vector<std::uint8_t> raster(edges.cells().begin(), edges.cells().end());
  for (auto& v : raster) v = v ? 255 : 0;
  return with_header('5', edges.width(), edges.height(), raster);
}

EdgeMap decode_edge_pgm(std::span<const std::uint8_t> bytes) {
  const Header h = parse_header(bytes, '5');
  const std::vector<std::uint8_t> raster = raster_payload(bytes, h, 1);
  EdgeMap edges(h.width, h.height);
  auto cells = edges.cells();
  for (std::size_t i = 0; i < raster.size(); ++i) {
    if (raster[i] != 0 && raster[i] != 255) {
      throw Error("edge map: pixel value " + std::to_string(raster[i]) + " is neither 0 nor 255");
    }
    cells[i] = raster[i] ? 1 : 0;
  }
  return edges;
}

std::vector<std::uint8_t> encode_ppm(const RgbImage& img) {
  return with_header('6', img.width(), img.height(), img.bytes());
}

RgbImage decode_ppm(std::span<const std::uint8_t> bytes) {
  const Header h = parse_header(bytes, '6');
  return RgbImage(h.width, h.height, raster_payload(bytes, h, 3));
}

GrayImage read_pgm(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_pgm(bytes);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) { write_file_atomic(path, encode_pgm(img)); }

EdgeMap read_edge_pgm(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_edge_pgm(bytes);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_edge_pgm(const std::filesystem::path& path, const EdgeMap& edges) {
  write_file_atomic(path, encode_edge_pgm(edges));
}

RgbImage read_ppm(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_ppm(bytes);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) { write_file_atomic(path, encode_ppm(img)); }

}  // namespace edgeflow
