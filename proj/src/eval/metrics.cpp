#include <algorithm>
#include <cmath>

#include "nirs/error.hpp"
#include "nirs/eval.hpp"

namespace nirs::eval {

double rmse(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) throw DataError("rmse: length mismatch");
  if (y.empty()) throw DataError("rmse: empty input");
  double ss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - yhat[i];
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(y.size()));
}

double balanced_accuracy(std::span<const int> y, std::span<const int> yhat) {
  int n_classes = 0;
  for (int v : y) n_classes = std::max(n_classes, v + 1);
  if (y.size() != yhat.size()) throw DataError("balanced accuracy: length mismatch");
  if (y.empty()) throw DataError("balanced accuracy: empty input");
  std::vector<int> hits(static_cast<std::size_t>(n_classes), 0), count(static_cast<std::size_t>(n_classes), 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0) throw DataError("balanced accuracy: negative label");
    ++count[static_cast<std::size_t>(y[i])];
    if (yhat[i] == y[i]) ++hits[static_cast<std::size_t>(y[i])];
  }
  double sum = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < count.size(); ++c)
    if (count[c] > 0) {
      sum += static_cast<double>(hits[c]) / count[c];
      ++present;
    }
  return sum / present;
}

double balanced_accuracy(std::span<const int> y, std::span<const int> yhat, int n_classes) {
  std::vector<char> seen(static_cast<std::size_t>(std::max(n_classes, 0)), 0);
  for (int v : y) {
    if (v < 0 || v >= n_classes) throw DataError("balanced accuracy: label outside [0, C)");
    seen[static_cast<std::size_t>(v)] = 1;
  }
  for (int c = 0; c < n_classes; ++c)
    if (!seen[static_cast<std::size_t>(c)])
      throw DataError("balanced accuracy: class " + std::to_string(c) + " absent from y");
  return balanced_accuracy(y, yhat);
}

double irmsep(double rmsep_ref, double rmsep_cmp) {
  if (!(rmsep_ref > 0.0)) throw ParameterError("iRMSEP: reference RMSEP must be > 0");
  return 100.0 * (rmsep_ref - rmsep_cmp) / rmsep_ref;
}

double relative_acc_gain(double acc_ref, double acc_cmp) {
  if (!(acc_ref > 0.0)) throw ParameterError("relative accuracy gain: reference accuracy must be > 0");
  return 100.0 * (acc_cmp - acc_ref) / acc_ref;
}

std::optional<double> subset_rmse(std::span<const double> y, std::span<const double> yhat,
                                  std::span<const std::size_t> idx) {
  if (y.size() != yhat.size()) throw DataError("subset rmse: length mismatch");
  if (idx.empty()) return std::nullopt;
  double ss = 0.0;
  for (std::size_t i : idx) {
    if (i >= y.size()) throw DataError("subset rmse: index out of range");
    const double r = y[i] - yhat[i];
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(idx.size()));
}

std::vector<std::size_t> extrapolation_indices(std::span<const double> y_train, std::span<const double> y_test) {
  if (y_train.empty()) throw DataError("extrapolation: empty calibration targets");
  const auto [lo, hi] = std::minmax_element(y_train.begin(), y_train.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < y_test.size(); ++i)
    if (y_test[i] < *lo || y_test[i] > *hi) out.push_back(i);
  return out;
}

}  // namespace nirs::eval
