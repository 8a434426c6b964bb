#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "nirs/csv.hpp"
#include "nirs/dataset.hpp"
#include "nirs/error.hpp"
#include "nirs/sampling.hpp"

namespace nirs {

std::string_view to_string(Task t) {
  return t == Task::regression ? "regression" : "classification";
}

Task parse_task(std::string_view s) {
  if (s == "regression") return Task::regression;
  if (s == "classification") return Task::classification;
  throw ConfigError("unknown task '" + std::string(s) + "'");
}

std::string_view to_string(SplitMethod m) {
  switch (m) {
    case SplitMethod::predefined: return "predefined";
    case SplitMethod::spxy: return "spxy";
    case SplitMethod::spxy_stratified: return "spxy_stratified";
  }
  return "?";
}

SpectraMatrix::SpectraMatrix(Matrix values, std::vector<double> wavelengths)
    : values_(std::move(values)), wavelengths_(std::move(wavelengths)) {
  if (values_.rows() < 1 || values_.cols() < 1) throw DataError("spectra matrix must be non-empty");
  for (std::size_t r = 0; r < values_.rows(); ++r)
    for (std::size_t c = 0; c < values_.cols(); ++c)
      if (!std::isfinite(values_(r, c)))
        throw DataError("non-finite absorbance at (" + std::to_string(r) + ", " + std::to_string(c) + ")");
  if (!wavelengths_.empty()) {
    if (wavelengths_.size() != values_.cols())
      throw DataError("wavelength count does not match feature count");
    for (std::size_t i = 1; i < wavelengths_.size(); ++i)
      if (!(wavelengths_[i] > wavelengths_[i - 1]))
        throw DataError("wavelengths must be strictly increasing");
  }
}

std::vector<double> TargetVector::as_real() const {
  if (kind == Task::regression) return values;
  return {labels.begin(), labels.end()};
}

void TargetVector::validate() const {
  if (kind == Task::regression) {
    for (std::size_t i = 0; i < values.size(); ++i)
      if (!std::isfinite(values[i])) throw DataError("non-finite target at row " + std::to_string(i));
  } else {
    const int c = static_cast<int>(label_names.size());
    for (int id : labels)
      if (id < 0 || id >= c) throw DataError("label id out of range");
  }
}

void SplitSpec::validate(std::size_t n) const {
  if (method == SplitMethod::predefined) {
    if (train_indices.empty() || test_indices.empty())
      throw DataError("predefined split needs non-empty train and test index lists");
    std::vector<char> seen(n, 0);
    for (auto* list : {&train_indices, &test_indices})
      for (std::size_t i : *list) {
        if (i >= n) throw DataError("split index " + std::to_string(i) + " out of range");
        if (seen[i]) throw DataError("split index " + std::to_string(i) + " repeated or shared");
        seen[i] = 1;
      }
  } else if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw DataError("test_fraction must lie in (0,1)");
  }
}

void Dataset::validate() const {
  if (database.empty()) throw DataError("dataset '" + name + "' has no database key");
  if (y.size() != X.n_samples())
    throw DataError("dataset '" + name + "': " + std::to_string(X.n_samples()) + " spectra but " +
                    std::to_string(y.size()) + " targets");
  if (y.kind != task) throw DataError("dataset '" + name + "': target kind does not match task");
  y.validate();
  split.validate(X.n_samples());
}

namespace {

std::string coord(std::size_t r, std::size_t c) {
  return "(" + std::to_string(r) + ", " + std::to_string(c) + ")";
}

}  // namespace

Dataset parse_dataset(std::string_view csv_text, const DatasetEntry& entry) {
  const csv::Table table = csv::parse(csv_text);
  if (table.header.empty()) throw DataError(entry.name + ": empty CSV");
  if (table.rows.empty()) throw DataError(entry.name + ": CSV has no sample rows");

  const auto target_it = std::find(table.header.begin(), table.header.end(), entry.target);
  if (target_it == table.header.end())
    throw DataError(entry.name + ": target column '" + entry.target + "' not found");
  const std::size_t target_col = static_cast<std::size_t>(target_it - table.header.begin());

  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (c != target_col) feature_cols.push_back(c);
  if (feature_cols.empty()) throw DataError(entry.name + ": no feature columns");

  // Feature headers become the wavelength axis when they are all numeric and
  // strictly increasing; otherwise they are plain names.
  std::vector<double> wavelengths;
  for (std::size_t c : feature_cols) {
    double w;
    if (!csv::parse_double(table.header[c], w) || !std::isfinite(w)) {
      wavelengths.clear();
      break;
    }
    if (!wavelengths.empty() && !(w > wavelengths.back())) {
      wavelengths.clear();
      break;
    }
    wavelengths.push_back(w);
  }

  const std::size_t n = table.rows.size();
  const std::size_t p = feature_cols.size();
  Matrix values(n, p);
  TargetVector y;
  y.kind = entry.task;
  std::unordered_map<std::string, int> label_ids;

  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size())
      throw DataError(entry.name + ": row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                      " cells, header has " + std::to_string(table.header.size()));
    for (std::size_t j = 0; j < p; ++j) {
      double v;
      if (!csv::parse_double(row[feature_cols[j]], v))
        throw DataError(entry.name + ": non-numeric cell at " + coord(r, j) + ": '" + row[feature_cols[j]] + "'");
      if (!std::isfinite(v)) throw DataError(entry.name + ": non-finite absorbance at " + coord(r, j));
      values(r, j) = v;
    }
    const std::string& cell = row[target_col];
    if (entry.task == Task::regression) {
      double v;
      if (!csv::parse_double(cell, v))
        throw DataError(entry.name + ": non-numeric target at row " + std::to_string(r) + ": '" + cell + "'");
      if (!std::isfinite(v)) throw DataError(entry.name + ": non-finite target at row " + std::to_string(r));
      y.values.push_back(v);
    } else {
      if (cell.empty()) throw DataError(entry.name + ": empty label at row " + std::to_string(r));
      auto [it, inserted] = label_ids.emplace(cell, static_cast<int>(y.label_names.size()));
      if (inserted) y.label_names.push_back(cell);
      y.labels.push_back(it->second);
    }
  }

  Dataset ds;
  ds.name = entry.name;
  ds.database = entry.database;
  ds.task = entry.task;
  ds.X = SpectraMatrix(std::move(values), std::move(wavelengths));
  ds.y = std::move(y);
  ds.split = entry.split;
  ds.validate();
  return ds;
}

Dataset load_dataset(const DatasetEntry& entry) {
  std::ifstream in(entry.path, std::ios::binary);
  if (!in) throw DataError(entry.name + ": missing file " + entry.path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str(), entry);
}

std::string dataset_to_csv(const Dataset& ds, const std::string& target_column) {
  std::vector<std::string> header;
  const auto& wl = ds.X.wavelengths();
  for (std::size_t j = 0; j < ds.p(); ++j)
    header.push_back(wl.empty() ? "f" + std::to_string(j) : csv::format_double17(wl[j]));
  header.push_back(target_column);
  std::string out = csv::join_row(header) + "\n";
  const Matrix& X = ds.X.values();
  for (std::size_t r = 0; r < ds.n(); ++r) {
    std::vector<std::string> fields;
    fields.reserve(ds.p() + 1);
    for (double v : X.row(r)) fields.push_back(csv::format_double17(v));
    if (ds.task == Task::regression)
      fields.push_back(csv::format_double17(ds.y.values[r]));
    else
      fields.push_back(ds.y.label_names[static_cast<std::size_t>(ds.y.labels[r])]);
    out += csv::join_row(fields) + "\n";
  }
  return out;
}

std::vector<std::size_t> read_index_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing split index file " + path.string());
  std::vector<std::size_t> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    double v;
    if (!csv::parse_double(line, v) || v < 0 || v != std::floor(v))
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": not a zero-based index");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::size_t computed_train_size(std::size_t n, double test_fraction) {
  const auto n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n)));
  return n - n_test;
}

SplitIndices resolve_split(const Dataset& ds) {
  ds.split.validate(ds.n());
  SplitIndices out;
  switch (ds.split.method) {
    case SplitMethod::predefined:
      out.train = ds.split.train_indices;
      out.test = ds.split.test_indices;
      break;
    case SplitMethod::spxy: {
      const std::vector<double> y = ds.y.as_real();
      out = sampling::spxy_split(ds.X.values(), y, ds.split.test_fraction);
      break;
    }
    case SplitMethod::spxy_stratified:
      if (ds.task != Task::classification)
        throw DataError(ds.name + ": spxy_stratified requires a classification task");
      out = sampling::stratified_split(ds.X.values(), ds.y.labels, ds.split.test_fraction, ds.split.seed);
      break;
  }
  if (out.train.empty() || out.test.empty())
    throw DataError(ds.name + ": split leaves an empty side");
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace nirs
