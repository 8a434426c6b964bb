#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nirs/dataset.hpp"
#include "nirs/matrix.hpp"

namespace nirs::sampling {

/// Greedy SPXY selection on joint distance
///   d(i,j) = dx(i,j)/max dx + dy(i,j)/max dy
/// (Euclidean dx on rows, |y_i - y_j| for dy). An empty `y`, or a y with no
/// spread, drops the dy term. Returns m indices in selection order; ties go
/// to the lowest index.
std::vector<std::size_t> spxy_select(const Matrix& X, std::span<const double> y, std::size_t m);

/// train = spxy_select(n - floor(fraction * n)) in selection order,
/// test = complement ascending.
SplitIndices spxy_split(const Matrix& X, std::span<const double> y, double test_fraction);

/// Per-class SPXY (X-only distances). Per-class test count is
/// round(fraction * n_c) clamped to keep at least one sample on each side.
/// `seed` is accepted for interface symmetry; the selection is deterministic.
SplitIndices stratified_split(const Matrix& X, std::span<const int> labels, double test_fraction,
                              std::uint64_t seed);

struct FoldAssignment {
  std::vector<int> fold_of;  // per calibration row
  int k = 0;

  std::vector<std::size_t> train_rows(int fold) const;
  std::vector<std::size_t> validation_rows(int fold) const;
  std::vector<std::size_t> fold_sizes() const;
};

/// Folds from the SPXY ordering of all calibration rows: fold = position mod k.
FoldAssignment spxy_kfold(const Matrix& X, std::span<const double> y, int k);

/// Modular assignment from an explicit ordering.
FoldAssignment folds_from_order(std::span<const std::size_t> order, std::size_t n, int k);

/// Classification folds: SPXY order within each class (X-only distances),
/// dealt round-robin with the position counter carried across classes, so
/// folds stay balanced to within one sample and every class is spread.
FoldAssignment stratified_kfold(const Matrix& X, std::span<const int> labels, int k);

}  // namespace nirs::sampling
