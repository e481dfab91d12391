#pragma once

#include "mvg/tensor.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mvg::io {

/// Tensor file: "MVGT", u32 LE rank, rank x u32 LE dims, then float32 LE
/// values in row-major order.  Values are narrowed to float on write.
void write_tensor(const std::filesystem::path& path, const Tensor& t);
/// Throws std::runtime_error on a bad magic, truncated data or I/O failure.
Tensor read_tensor(const std::filesystem::path& path);

/// 8-bit binary PGM (P5) of an H x W (or H x W x 1) image, clamped to [0,1]
/// and scaled by 255 with rounding.
void write_pgm(const std::filesystem::path& path, const Tensor& image);

/// Comma-separated rows with a header.  Numbers use '.' and the shortest
/// round-trip representation regardless of the global locale; NaN cells are
/// written empty.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  std::string str() const { return text_; }
  void save(const std::filesystem::path& path) const;

  static std::string num(double v);
  static std::string num(long long v) { return std::to_string(v); }

 private:
  std::size_t columns_;
  std::string text_;
};

/// Writes `text` to `path` atomically enough for our purposes: to a sibling
/// temporary file first, then renamed.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace mvg::io
