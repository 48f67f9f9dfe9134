#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "frr/error.hpp"
#include "frr/matrix.hpp"

namespace frr {

enum class MatrixFormat { Csv, Binary };

/// ".csv" selects text, anything else the FRRM binary layout.
inline MatrixFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? MatrixFormat::Csv : MatrixFormat::Binary;
}

namespace detail {

inline constexpr std::array<char, 4> kMagic{'F', 'R', 'R', 'M'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 16;

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
}

inline std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed for " + path.string());
  return bytes;
}

inline void spill(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

inline double parse_double(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
    throw Error(ErrorCode::ParseError, "bad number '" + std::string(field) + "' on line " + std::to_string(line));
  return v;
}

}  // namespace detail

/// FRRM layout: "FRRM", u32 version (1), u32 rows, u32 cols, then
/// rows*cols binary64 values in column-major order, all little-endian.
inline std::string encode_binary(const Eigen::Ref<const Matrix>& M) {
  if (M.rows() > 0xFFFFFFFFll || M.cols() > 0xFFFFFFFFll) throw Error(ErrorCode::IoError, "matrix too large for FRRM");
  std::string out;
  out.reserve(detail::kHeaderBytes + 8 * static_cast<std::size_t>(M.size()));
  out.append(detail::kMagic.data(), detail::kMagic.size());
  detail::put_u32(out, detail::kVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(M.rows()));
  detail::put_u32(out, static_cast<std::uint32_t>(M.cols()));
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i < M.rows(); ++i) detail::put_f64(out, M(i, j));
  return out;
}

inline Matrix decode_binary(std::string_view bytes) {
  if (bytes.size() < detail::kHeaderBytes) throw Error(ErrorCode::TruncatedFile, "header shorter than 16 bytes");
  if (std::memcmp(bytes.data(), detail::kMagic.data(), 4) != 0) throw Error(ErrorCode::BadMagic, "missing FRRM magic");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const auto version = static_cast<std::uint32_t>(detail::get_le(p + 4, 4));
  if (version != detail::kVersion) throw Error(ErrorCode::BadVersion, "unsupported version " + std::to_string(version));
  const auto rows = detail::get_le(p + 8, 4);
  const auto cols = detail::get_le(p + 12, 4);
  const std::uint64_t payload = rows * cols * 8;
  if (bytes.size() - detail::kHeaderBytes < payload) throw Error(ErrorCode::TruncatedFile, "payload shorter than rows*cols");
  if (bytes.size() - detail::kHeaderBytes > payload) throw Error(ErrorCode::TruncatedFile, "payload longer than rows*cols");
  Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const unsigned char* v = p + detail::kHeaderBytes;
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i < M.rows(); ++i, v += 8) M(i, j) = std::bit_cast<double>(detail::get_le(v, 8));
  return M;
}

/// One row per line, shortest round-trip decimals.
inline std::string encode_csv(const Eigen::Ref<const Matrix>& M) {
  std::string out;
  char buf[32];
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j > 0) out.push_back(',');
      const auto res = std::to_chars(buf, buf + sizeof(buf), M(i, j));
      out.append(buf, res.ptr);
    }
    out.push_back('\n');
  }
  return out;
}

inline Matrix decode_csv(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.empty()) throw Error(ErrorCode::ParseError, "empty csv");
  std::vector<std::vector<double>> rows;
  rows.reserve(lines.size());
  for (std::size_t li = 0; li < lines.size(); ++li) {
    std::vector<double> row;
    std::string_view line = lines[li];
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      row.push_back(detail::parse_double(line.substr(start, comma - start), li + 1));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorCode::ParseError, "ragged row on line " + std::to_string(li + 1));
    rows.push_back(std::move(row));
  }
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return M;
}

inline void write_matrix(const Eigen::Ref<const Matrix>& M, const std::filesystem::path& path, MatrixFormat format) {
  detail::spill(path, format == MatrixFormat::Csv ? encode_csv(M) : encode_binary(M));
}

inline void write_matrix(const Eigen::Ref<const Matrix>& M, const std::filesystem::path& path) {
  write_matrix(M, path, format_for_path(path));
}

inline Matrix read_matrix(const std::filesystem::path& path, MatrixFormat format) {
  const std::string bytes = detail::slurp(path);
  return format == MatrixFormat::Csv ? decode_csv(bytes) : decode_binary(bytes);
}

inline Matrix read_matrix(const std::filesystem::path& path) { return read_matrix(path, format_for_path(path)); }

inline Labels parse_labels(std::string_view text) {
  Labels labels;
  const auto lines = detail::split_lines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string_view field = detail::trim(lines[li]);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || v < 0)
      throw Error(ErrorCode::ParseError, "bad label '" + std::string(field) + "' on line " + std::to_string(li + 1));
    labels.push_back(v);
  }
  return labels;
}

/// One non-negative integer per line.
inline Labels read_labels(const std::filesystem::path& path) { return parse_labels(detail::slurp(path)); }

inline void write_labels(const Labels& labels, const std::filesystem::path& path) {
  std::string out;
  for (int l : labels) {
    if (l < 0) throw Error(ErrorCode::ParseError, "negative label");
    out += std::to_string(l);
    out.push_back('\n');
  }
  detail::spill(path, out);
}

inline void write_mask(const Mask& mask, const std::filesystem::path& path) {
  Labels as_int(mask.begin(), mask.end());
  write_labels(as_int, path);
}

}  // namespace frr
