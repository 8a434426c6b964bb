#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nirs/matrix.hpp"

namespace nirs {

enum class Task { regression, classification };

std::string_view to_string(Task t);
Task parse_task(std::string_view s);

/// Absorbance matrix (samples x channels) with optional wavelength axis.
class SpectraMatrix {
 public:
  SpectraMatrix() = default;
  explicit SpectraMatrix(Matrix values, std::vector<double> wavelengths = {});

  const Matrix& values() const { return values_; }
  const std::vector<double>& wavelengths() const { return wavelengths_; }
  std::size_t n_samples() const { return values_.rows(); }
  std::size_t n_features() const { return values_.cols(); }

 private:
  Matrix values_;
  std::vector<double> wavelengths_;
};

struct TargetVector {
  Task kind = Task::regression;
  std::vector<double> values;             // regression
  std::vector<int> labels;                // classification, dense ids in [0, C)
  std::vector<std::string> label_names;   // id -> original string

  std::size_t size() const { return kind == Task::regression ? values.size() : labels.size(); }
  std::size_t n_classes() const { return label_names.size(); }
  /// Regression values, or label ids widened to double.
  std::vector<double> as_real() const;
  void validate() const;
};

enum class SplitMethod { predefined, spxy, spxy_stratified };

std::string_view to_string(SplitMethod m);

struct SplitSpec {
  SplitMethod method = SplitMethod::spxy;
  double test_fraction = 0.25;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;

  void validate(std::size_t n_samples) const;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct Dataset {
  std::string name;
  std::string database;
  Task task = Task::regression;
  SpectraMatrix X;
  TargetVector y;
  SplitSpec split;

  std::size_t n() const { return X.n_samples(); }
  std::size_t p() const { return X.n_features(); }
  void validate() const;
};

/// One dataset as declared in a benchmark manifest.
struct DatasetEntry {
  std::string name;
  std::string database;
  Task task = Task::regression;
  std::filesystem::path path;
  std::string target;
  SplitSpec split;
};

/// Parses the spectra CSV named by `entry` and validates every invariant.
/// Errors name zero-based (sample row, feature column) coordinates.
Dataset load_dataset(const DatasetEntry& entry);

/// Same contract, from CSV text already in memory.
Dataset parse_dataset(std::string_view csv_text, const DatasetEntry& entry);

/// Writes X and y in the ingestion CSV layout. Feature headers are the
/// wavelengths when present, otherwise "f0", "f1", ...
std::string dataset_to_csv(const Dataset& ds, const std::string& target_column);

/// Reads a split index file: one zero-based index per line.
std::vector<std::size_t> read_index_file(const std::filesystem::path& path);

/// Train size for a computed split: n - floor(test_fraction * n).
std::size_t computed_train_size(std::size_t n, double test_fraction);

SplitIndices resolve_split(const Dataset& ds);

double median(std::vector<double> v);

}  // namespace nirs
