#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace knockoff {

using LatentId = std::int64_t;

/// n x p matrix of feature activations (row = sample) together with the
/// original latent index of every column. Values are stored in double
/// precision regardless of the on-disk precision.
///
/// The constructor validates the invariants (n, p >= 1, finite entries,
/// unique non-negative ids); instances are immutable afterwards.
class FeatureMatrix {
 public:
  /// Column ids default to 0..p-1.
  explicit FeatureMatrix(Eigen::MatrixXd values);
  FeatureMatrix(Eigen::MatrixXd values, std::vector<LatentId> column_ids);

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const std::vector<LatentId>& column_ids() const noexcept { return column_ids_; }
  Eigen::Index rows() const noexcept { return values_.rows(); }
  Eigen::Index cols() const noexcept { return values_.cols(); }

 private:
  void validate() const;

  Eigen::MatrixXd values_;
  std::vector<LatentId> column_ids_;
};

/// Binary task labels in {0, 1}. May be empty; pairing with a matrix is
/// checked by check_aligned().
class LabelVector {
 public:
  LabelVector() = default;
  explicit LabelVector(std::vector<int> values);

  const std::vector<int>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  int operator[](std::size_t i) const { return values_[i]; }

  /// True when both classes occur.
  bool has_both_classes() const noexcept;

 private:
  std::vector<int> values_;
};

/// Throws DataError unless labels.size() == matrix.rows().
void check_aligned(const FeatureMatrix& matrix, const LabelVector& labels);

enum class MatrixFormat { csv, raw_f32 };

MatrixFormat parse_matrix_format(std::string_view name);
std::string_view to_string(MatrixFormat format);

/// csv: header "latent_<id>,..." then one comma-separated row per sample.
/// raw-f32: 16-byte header (magic "KNF1", u32 n, u32 p, u32 reserved = 0)
/// followed by n*p little-endian float32 values in row-major order; column
/// ids live in the sidecar text file `<path>.ids`, one per line.
FeatureMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format);
void save_matrix(const FeatureMatrix& m, const std::filesystem::path& path, MatrixFormat format);

/// Sidecar path holding the column ids of a raw-f32 matrix.
std::filesystem::path column_ids_path(const std::filesystem::path& matrix_path);

/// One ASCII integer per line.
LabelVector load_labels(const std::filesystem::path& path);
void save_labels(const LabelVector& labels, const std::filesystem::path& path);

}  // namespace knockoff
