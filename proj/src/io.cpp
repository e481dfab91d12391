#include "mvg/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mvg::io {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kMagic{'M', 'V', 'G', 'T'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw std::runtime_error("tensor file: truncated header");
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
  }
  pos += 4;
  return v;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

void write_tensor(const fs::path& path, const Tensor& t) {
  std::string out(kMagic.begin(), kMagic.end());
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (Index d : t.dims()) put_u32(out, static_cast<std::uint32_t>(d));
  for (Index i = 0; i < t.size(); ++i) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(t[i])));
  }
  write_bytes(path, out);
}

Tensor read_tensor(const fs::path& path) {
  const std::string in = read_bytes(path);
  if (in.size() < 4 || !std::equal(kMagic.begin(), kMagic.end(), in.begin())) {
    throw std::runtime_error("tensor file: bad magic in " + path.string());
  }
  std::size_t pos = 4;
  const std::uint32_t rank = get_u32(in, pos);
  Shape dims;
  for (std::uint32_t r = 0; r < rank; ++r) dims.push_back(get_u32(in, pos));
  const Index n = shape_size(dims);
  if (in.size() != pos + 4 * static_cast<std::size_t>(n)) {
    throw std::runtime_error("tensor file: size mismatch in " + path.string());
  }
  Tensor t(dims);
  for (Index i = 0; i < n; ++i) t[i] = std::bit_cast<float>(get_u32(in, pos));
  return t;
}

void write_pgm(const fs::path& path, const Tensor& image) {
  const Shape& d = image.dims();
  if (!(d.size() == 2 || (d.size() == 3 && d[2] == 1))) {
    throw std::invalid_argument("write_pgm: expected an HxW image, got " + shape_string(d));
  }
  std::string out = "P5\n" + std::to_string(d[1]) + " " + std::to_string(d[0]) + "\n255\n";
  for (Index i = 0; i < image.size(); ++i) {
    const double v = std::isfinite(image[i]) ? std::clamp(image[i], 0.0, 1.0) : 0.0;
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  write_bytes(path, out);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) {
    throw std::invalid_argument("csv: row has " + std::to_string(cells.size()) +
                                " cells, header has " + std::to_string(columns_));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_.push_back(',');
    text_ += cells[i];
  }
  text_.push_back('\n');
}

void CsvWriter::save(const fs::path& path) const { write_text(path, text_); }

std::string CsvWriter::num(double v) {
  if (std::isnan(v)) return "";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_text(const fs::path& path, const std::string& text) { write_bytes(path, text); }

std::string read_text(const fs::path& path) { return read_bytes(path); }

}  // namespace mvg::io
