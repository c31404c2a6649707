#include "knockoff/datamodel.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_set>

#include "knockoff/errors.hpp"
#include "knockoff/format.hpp"

namespace knockoff {

namespace {

constexpr std::array<char, 4> kRawMagic = {'K', 'N', 'F', '1'};
constexpr std::size_t kRawHeaderBytes = 16;
constexpr std::string_view kCsvPrefix = "latent_";

std::string cell(Eigen::Index row, Eigen::Index col) {
  return "(row " + std::to_string(row) + ", col " + std::to_string(col) + ")";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view text, T& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && !text.empty();
}

std::vector<std::string_view> split_lines(const std::string& content) {
  std::vector<std::string_view> lines;
  std::string_view rest(content);
  while (!rest.empty()) {
    auto pos = rest.find('\n');
    if (pos == std::string_view::npos) {
      lines.push_back(rest);
      break;
    }
    lines.push_back(rest.substr(0, pos));
    rest.remove_prefix(pos + 1);
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_finite(const Eigen::MatrixXd& values) {
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    for (Eigen::Index j = 0; j < values.cols(); ++j)
      if (!std::isfinite(values(i, j)))
        throw DataError("non-finite value at " + cell(i, j));
}

FeatureMatrix load_csv(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  const auto lines = split_lines(content);
  if (lines.size() < 2) throw DataError(path.string() + ": no rows");

  std::vector<LatentId> ids;
  for (auto field : split(lines[0], ',')) {
    LatentId id = -1;
    if (!field.starts_with(kCsvPrefix) || !parse_number(field.substr(kCsvPrefix.size()), id) || id < 0)
      throw DataError(path.string() + ": malformed header field '" + std::string(field) + "'");
    ids.push_back(id);
  }

  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  const auto p = static_cast<Eigen::Index>(ids.size());
  Eigen::MatrixXd values(n, p);
  // Data rows are numbered from 1; the header is row 0.
  for (Eigen::Index r = 1; r <= n; ++r) {
    auto fields = split(lines[static_cast<std::size_t>(r)], ',');
    if (static_cast<Eigen::Index>(fields.size()) != p)
      throw DataError(path.string() + ": row " + std::to_string(r) + " has " +
                      std::to_string(fields.size()) + " fields, expected " + std::to_string(p));
    for (Eigen::Index c = 0; c < p; ++c) {
      double v = 0.0;
      if (!parse_number(fields[static_cast<std::size_t>(c)], v))
        throw DataError(path.string() + ": cannot parse value at " + cell(r, c));
      if (!std::isfinite(v)) throw DataError(path.string() + ": non-finite value at " + cell(r, c));
      values(r - 1, c) = v;
    }
  }
  return FeatureMatrix(std::move(values), std::move(ids));
}

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<char>((v >> shift) & 0xFFu));
}

std::vector<LatentId> load_ids(const std::filesystem::path& path, Eigen::Index p) {
  const auto sidecar = column_ids_path(path);
  if (!std::filesystem::exists(sidecar)) {
    std::vector<LatentId> ids(static_cast<std::size_t>(p));
    std::iota(ids.begin(), ids.end(), LatentId{0});
    return ids;
  }
  const std::string content = read_file(sidecar);
  std::vector<LatentId> ids;
  std::size_t line_no = 0;
  for (auto line : split_lines(content)) {
    ++line_no;
    LatentId id = -1;
    if (!parse_number(trim(line), id) || id < 0)
      throw DataError(sidecar.string() + ": malformed column id at line " + std::to_string(line_no));
    ids.push_back(id);
  }
  if (static_cast<Eigen::Index>(ids.size()) != p)
    throw DataError(sidecar.string() + ": has " + std::to_string(ids.size()) + " ids, matrix has " +
                    std::to_string(p) + " columns");
  return ids;
}

FeatureMatrix load_raw(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  if (content.empty()) throw DataError(path.string() + ": no rows");
  if (content.size() < kRawHeaderBytes) throw DataError(path.string() + ": truncated header");
  const auto* bytes = reinterpret_cast<const unsigned char*>(content.data());
  if (std::memcmp(bytes, kRawMagic.data(), kRawMagic.size()) != 0)
    throw DataError(path.string() + ": bad magic, expected KNF1");
  const std::uint32_t n = read_u32_le(bytes + 4);
  const std::uint32_t p = read_u32_le(bytes + 8);
  if (n == 0) throw DataError(path.string() + ": no rows");
  if (p == 0) throw DataError(path.string() + ": no columns");
  const std::uint64_t expected = kRawHeaderBytes + 4ull * n * p;
  if (content.size() != expected)
    throw DataError(path.string() + ": size " + std::to_string(content.size()) + " does not match header (" +
                    std::to_string(n) + " x " + std::to_string(p) + ")");

  Eigen::MatrixXd values(n, p);
  const unsigned char* data = bytes + kRawHeaderBytes;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < p; ++j) {
      const auto bits = read_u32_le(data + 4ull * (static_cast<std::uint64_t>(i) * p + j));
      const float v = std::bit_cast<float>(bits);
      if (!std::isfinite(v)) throw DataError(path.string() + ": non-finite value at " + cell(i, j));
      values(i, j) = static_cast<double>(v);
    }
  }
  return FeatureMatrix(std::move(values), load_ids(path, p));
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("write failed for " + path.string());
}


}  // namespace

FeatureMatrix::FeatureMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  column_ids_.resize(static_cast<std::size_t>(values_.cols()));
  std::iota(column_ids_.begin(), column_ids_.end(), LatentId{0});
  validate();
}

FeatureMatrix::FeatureMatrix(Eigen::MatrixXd values, std::vector<LatentId> column_ids)
    : values_(std::move(values)), column_ids_(std::move(column_ids)) {
  validate();
}

void FeatureMatrix::validate() const {
  if (values_.rows() < 1) throw DataError("feature matrix has no rows");
  if (values_.cols() < 1) throw DataError("feature matrix has no columns");
  if (static_cast<Eigen::Index>(column_ids_.size()) != values_.cols())
    throw DataError("column_ids length " + std::to_string(column_ids_.size()) + " != column count " +
                    std::to_string(values_.cols()));
  std::unordered_set<LatentId> seen;
  for (auto id : column_ids_) {
    if (id < 0) throw DataError("negative column id " + std::to_string(id));
    if (!seen.insert(id).second) throw DataError("duplicate column id " + std::to_string(id));
  }
  check_finite(values_);
}

LabelVector::LabelVector(std::vector<int> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (values_[i] != 0 && values_[i] != 1)
      throw DataError("label out of range at index " + std::to_string(i) + ": " + std::to_string(values_[i]));
}

bool LabelVector::has_both_classes() const noexcept {
  bool zero = false, one = false;
  for (int v : values_) (v == 0 ? zero : one) = true;
  return zero && one;
}

void check_aligned(const FeatureMatrix& matrix, const LabelVector& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != matrix.rows())
    throw DataError("label count " + std::to_string(labels.size()) + " does not match row count " +
                    std::to_string(matrix.rows()));
}

MatrixFormat parse_matrix_format(std::string_view name) {
  if (name == "csv") return MatrixFormat::csv;
  if (name == "raw-f32") return MatrixFormat::raw_f32;
  throw ConfigError("unknown matrix format '" + std::string(name) + "' (expected csv or raw-f32)");
}

std::string_view to_string(MatrixFormat format) {
  return format == MatrixFormat::csv ? "csv" : "raw-f32";
}

std::filesystem::path column_ids_path(const std::filesystem::path& matrix_path) {
  return std::filesystem::path(matrix_path.string() + ".ids");
}

FeatureMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
  return format == MatrixFormat::csv ? load_csv(path) : load_raw(path);
}

void save_matrix(const FeatureMatrix& m, const std::filesystem::path& path, MatrixFormat format) {
  const auto& v = m.values();
  check_finite(v);
  std::string out;
  if (format == MatrixFormat::csv) {
    for (std::size_t j = 0; j < m.column_ids().size(); ++j) {
      if (j) out += ',';
      out += kCsvPrefix;
      out += std::to_string(m.column_ids()[j]);
    }
    out += '\n';
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      for (Eigen::Index j = 0; j < v.cols(); ++j) {
        if (j) out += ',';
        out += format_number(v(i, j));
      }
      out += '\n';
    }
    write_file(path, out);
    return;
  }

  out.reserve(kRawHeaderBytes + 4 * static_cast<std::size_t>(v.size()));
  out.append(kRawMagic.data(), kRawMagic.size());
  write_u32_le(out, static_cast<std::uint32_t>(v.rows()));
  write_u32_le(out, static_cast<std::uint32_t>(v.cols()));
  write_u32_le(out, 0);
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j)
      write_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v(i, j))));
  write_file(path, out);

  std::string ids;
  for (auto id : m.column_ids()) ids += std::to_string(id) + '\n';
  write_file(column_ids_path(path), ids);
}

LabelVector load_labels(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  std::vector<int> values;
  std::size_t line_no = 0;
  for (auto line : split_lines(content)) {
    ++line_no;
    int v = 0;
    if (!parse_number(trim(line), v))
      throw DataError(path.string() + ": cannot parse label at line " + std::to_string(line_no));
    if (v != 0 && v != 1)
      throw DataError(path.string() + ": label out of range at line " + std::to_string(line_no) + ": " +
                      std::to_string(v));
    values.push_back(v);
  }
  return LabelVector(std::move(values));
}

void save_labels(const LabelVector& labels, const std::filesystem::path& path) {
  std::string out;
  for (int v : labels.values()) {
    out += static_cast<char>('0' + v);
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace knockoff
