#include "gaitgender/image_io.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <png.h>

#include "gaitgender/error.hpp"

namespace gaitgender {

namespace {

[[noreturn]] void corrupt(const std::filesystem::path& path, const std::string& why) {
  throw Error(ErrorCode::CorruptImage, path.string() + ": " + why);
}

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Mask threshold(int width, int height, const unsigned char* gray, int maxval) {
  Mask m(height, width);
  // Scale to 8 bits first so the threshold means the same for any maxval.
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const int v = maxval == 255 ? gray[i] : gray[i] * 255 / maxval;
    m.data()[i] = v > kForegroundThreshold ? 1 : 0;
  }
  return m;
}

// Header tokens of a netpbm file, skipping comments.
class PnmReader {
 public:
  PnmReader(const std::vector<unsigned char>& bytes, const std::filesystem::path& path)
      : bytes_(bytes), path_(path) {}

  long next_int() {
    skip_space();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) corrupt(path_, "malformed PGM header");
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1'000'000) corrupt(path_, "PGM value out of range");
    }
    return v;
  }
  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 2;
};

RawSilhouette read_pgm(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  const bool binary = bytes[1] == '5';
  PnmReader r(bytes, path);
  const long width = r.next_int();
  const long height = r.next_int();
  const long maxval = r.next_int();
  if (width < 1 || height < 1) corrupt(path, "empty image");
  if (maxval < 1 || maxval > 255) corrupt(path, "only 8-bit PGM is supported");
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<unsigned char> gray(n);
  if (binary) {
    r.skip(1);  // single whitespace after maxval
    if (bytes.size() < r.pos() + n) corrupt(path, "truncated pixel data");
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos()), n, gray.begin());
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const long v = r.next_int();
      if (v > maxval) corrupt(path, "pixel exceeds maxval");
      gray[i] = static_cast<unsigned char>(v);
    }
  }
  return RawSilhouette(threshold(static_cast<int>(width), static_cast<int>(height), gray.data(),
                                 static_cast<int>(maxval)));
}

RawSilhouette read_png(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    corrupt(path, image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<unsigned char> gray(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, gray.data(), 0, nullptr)) {
    const std::string why = image.message;
    png_image_free(&image);
    corrupt(path, why);
  }
  if (image.width < 1 || image.height < 1) corrupt(path, "empty image");
  return RawSilhouette(
      threshold(static_cast<int>(image.width), static_cast<int>(image.height), gray.data(), 255));
}

}  // namespace

RawSilhouette read_silhouette(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = slurp(path);
  static constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) return read_png(bytes, path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '2')) {
    return read_pgm(bytes, path);
  }
  corrupt(path, "not a PNG or PGM file");
}

void write_silhouette(const std::filesystem::path& path, const Mask& mask) {
  std::vector<unsigned char> gray(static_cast<std::size_t>(mask.size()));
  for (Eigen::Index i = 0; i < mask.size(); ++i) gray[i] = mask.data()[i] ? 255 : 0;

  if (path.extension() == ".png") {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(mask.cols());
    image.height = static_cast<png_uint_32>(mask.rows());
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.c_str(), 0, gray.data(), 0, nullptr)) {
      throw Error(ErrorCode::IoError, path.string() + ": " + image.message);
    }
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "P5\n" << mask.cols() << ' ' << mask.rows() << "\n255\n";
  out.write(reinterpret_cast<const char*>(gray.data()), static_cast<std::streamsize>(gray.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

}  // namespace gaitgender
