#include <algorithm>
#include <cmath>
#include <limits>

#include "nirs/error.hpp"
#include "nirs/kernels.hpp"
#include "nirs/sampling.hpp"

namespace nirs::sampling {

namespace {

struct JointDistance {
  const Matrix& X;
  std::span<const double> y;
  double inv_dx = 0.0;  // 1 / max dx, or 0 to drop the term
  double inv_dy = 0.0;

  double operator()(std::size_t i, std::size_t j) const {
    double d = 0.0;
    if (inv_dx != 0.0) d += std::sqrt(simd::squared_distance(X.row(i), X.row(j))) * inv_dx;
    if (inv_dy != 0.0) d += std::abs(y[i] - y[j]) * inv_dy;
    return d;
  }
};

}  // namespace

std::vector<std::size_t> spxy_select(const Matrix& X, std::span<const double> y, std::size_t m) {
  const std::size_t n = X.rows();
  if (n < 2) throw DegenerateInput("spxy needs at least 2 samples");
  if (!y.empty() && y.size() != n) throw DataError("spxy: target length differs from sample count");
  if (m < 2 || m > n) throw ParameterError("spxy: selection size must lie in [2, n]");

  double max_dx = 0.0, max_dy = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      max_dx = std::max(max_dx, simd::squared_distance(X.row(i), X.row(j)));
      if (!y.empty()) max_dy = std::max(max_dy, std::abs(y[i] - y[j]));
    }
  max_dx = std::sqrt(max_dx);
  if (max_dx == 0.0 && max_dy == 0.0) throw DegenerateInput("spxy: all samples identical");

  JointDistance dist{X, y, max_dx > 0.0 ? 1.0 / max_dx : 0.0, max_dy > 0.0 ? 1.0 / max_dy : 0.0};

  // Farthest pair; strict comparison keeps the lexicographically first pair.
  std::size_t a = 0, b = 1;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = dist(i, j);
      if (d > best) {
        best = d;
        a = i;
        b = j;
      }
    }

  std::vector<std::size_t> selected{a, b};
  std::vector<char> taken(n, 0);
  taken[a] = taken[b] = 1;
  std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    if (!taken[i]) min_d[i] = std::min(dist(i, a), dist(i, b));

  while (selected.size() < m) {
    std::size_t pick = n;
    double far = -1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!taken[i] && min_d[i] > far) {
        far = min_d[i];
        pick = i;
      }
    selected.push_back(pick);
    taken[pick] = 1;
    for (std::size_t i = 0; i < n; ++i)
      if (!taken[i]) min_d[i] = std::min(min_d[i], dist(i, pick));
  }
  return selected;
}

SplitIndices spxy_split(const Matrix& X, std::span<const double> y, double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ParameterError("test_fraction must lie in (0,1)");
  const std::size_t n = X.rows();
  const std::size_t n_train = computed_train_size(n, test_fraction);
  if (n_train < 2 || n_train >= n)
    throw DegenerateInput("spxy split of " + std::to_string(n) + " samples at fraction " +
                          std::to_string(test_fraction) + " leaves an empty or singleton side");
  SplitIndices out;
  out.train = spxy_select(X, y, n_train);
  std::vector<char> in_train(n, 0);
  for (std::size_t i : out.train) in_train[i] = 1;
  for (std::size_t i = 0; i < n; ++i)
    if (!in_train[i]) out.test.push_back(i);
  return out;
}

namespace {

std::vector<std::vector<std::size_t>> rows_by_class(std::span<const int> labels) {
  int n_classes = 0;
  for (int l : labels) {
    if (l < 0) throw DataError("negative label id");
    n_classes = std::max(n_classes, l + 1);
  }
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  return by_class;
}

// Full SPXY order of the rows `members` using X-only distances.
std::vector<std::size_t> class_order(const Matrix& X, const std::vector<std::size_t>& members) {
  if (members.size() == 1) return members;
  const Matrix sub = X.select_rows(members);
  bool all_same = true;
  for (std::size_t i = 1; i < sub.rows() && all_same; ++i)
    all_same = simd::squared_distance(sub.row(0), sub.row(i)) == 0.0;
  std::vector<std::size_t> local(members.size());
  if (all_same) {
    for (std::size_t i = 0; i < local.size(); ++i) local[i] = i;
  } else {
    local = spxy_select(sub, {}, sub.rows());
  }
  std::vector<std::size_t> out;
  out.reserve(local.size());
  for (std::size_t i : local) out.push_back(members[i]);
  return out;
}

}  // namespace

SplitIndices stratified_split(const Matrix& X, std::span<const int> labels, double test_fraction,
                              std::uint64_t /*seed*/) {
  if (labels.size() != X.rows()) throw DataError("stratified split: label count differs from sample count");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ParameterError("test_fraction must lie in (0,1)");
  SplitIndices out;
  const auto by_class = rows_by_class(labels);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const auto& members = by_class[c];
    if (members.empty()) continue;
    if (members.size() < 2)
      throw DegenerateInput("stratified split: class " + std::to_string(c) + " has a single sample");
    const auto n_c = static_cast<long>(members.size());
    long n_test = std::lround(test_fraction * static_cast<double>(n_c));
    n_test = std::clamp(n_test, 1L, n_c - 1);
    const std::vector<std::size_t> order = class_order(X, members);
    const auto n_train = static_cast<std::size_t>(n_c - n_test);
    out.train.insert(out.train.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.insert(out.test.end(), order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  }
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<std::size_t> FoldAssignment::train_rows(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] != fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldAssignment::validation_rows(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldAssignment::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int f : fold_of) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

FoldAssignment folds_from_order(std::span<const std::size_t> order, std::size_t n, int k) {
  if (k < 2) throw ParameterError("k-fold needs k >= 2");
  if (n < static_cast<std::size_t>(k)) throw DegenerateInput("fewer calibration samples than folds");
  if (order.size() != n) throw DataError("fold order must cover every calibration row");
  FoldAssignment f;
  f.k = k;
  f.fold_of.assign(n, -1);
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    f.fold_of[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  return f;
}

FoldAssignment spxy_kfold(const Matrix& X, std::span<const double> y, int k) {
  if (k < 2) throw ParameterError("k-fold needs k >= 2");
  const std::size_t n = X.rows();
  if (n < static_cast<std::size_t>(k)) throw DegenerateInput("fewer calibration samples than folds");
  const std::vector<std::size_t> order = spxy_select(X, y, n);
  return folds_from_order(order, n, k);
}

FoldAssignment stratified_kfold(const Matrix& X, std::span<const int> labels, int k) {
  if (k < 2) throw ParameterError("k-fold needs k >= 2");
  const std::size_t n = X.rows();
  if (n < static_cast<std::size_t>(k)) throw DegenerateInput("fewer calibration samples than folds");
  std::vector<std::size_t> order;
  for (const auto& members : rows_by_class(labels)) {
    if (members.empty()) continue;
    const auto o = class_order(X, members);
    order.insert(order.end(), o.begin(), o.end());
  }
  return folds_from_order(order, n, k);
}

}  // namespace nirs::sampling
