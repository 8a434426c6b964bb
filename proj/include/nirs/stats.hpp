#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nirs/matrix.hpp"

namespace nirs::stats {

// Special functions.

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);
/// Upper tail of the chi-square distribution with `df` degrees of freedom.
double chi2_survival(double x, double df);
/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double x, double a, double b);
double f_cdf(double x, double d1, double d2);
/// Inverse of f_cdf by bisection (tolerance 1e-10, at most 200 steps).
double f_quantile(double p, double d1, double d2);

// Rank statistics.

enum class Orientation { lower_is_better, higher_is_better };

/// One per-dataset score. A missing score marks the (database, model) cell
/// incomplete.
struct ScoreRecord {
  std::string dataset;
  std::string database;
  std::string model;
  std::optional<double> score;
};

struct RankTable {
  std::vector<std::string> databases;  // B, sorted
  std::vector<std::string> models;     // k, in the requested order
  Matrix scores;                       // B x k database means
  Matrix ranks;                        // B x k, 1 = best, ties averaged
  std::vector<double> average_ranks;   // k
  std::vector<std::string> dropped_databases;  // incomplete for some model

  std::size_t n_databases() const { return databases.size(); }
  std::size_t n_models() const { return models.size(); }
};

/// Average ranks of one row; rank 1 is the best score under `o`.
std::vector<double> rank_row(std::span<const double> scores, Orientation o);

/// Database means over the complete intersection, then per-row ranks.
/// `models` fixes the column order; empty means all models, sorted.
RankTable aggregate_scores(const std::vector<ScoreRecord>& records, Orientation o,
                           std::vector<std::string> models = {});

/// Friedman statistic from a B x k rank matrix.
double friedman_statistic(const Matrix& ranks);

/// Studentized-range based q at alpha = 0.05 for k in [2, 20].
double nemenyi_q(int k);
double nemenyi_cd(int k, int n_databases);

/// significant[i][j] iff |R_i - R_j| > cd.
std::vector<std::vector<bool>> pairwise_significance(std::span<const double> average_ranks, double cd);

/// Maximal runs of models (indices into average_ranks, sorted by rank)
/// whose rank spread is within cd. Singletons are omitted.
std::vector<std::vector<std::size_t>> cd_groups(std::span<const double> average_ranks, double cd);

struct FriedmanResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  double cd = 0.0;
  int n_databases = 0;
  int n_models = 0;
  std::vector<std::vector<bool>> significant;
  std::optional<double> exact_p_value;
};

/// Chi-square approximation, Nemenyi CD at alpha 0.05 and the pairwise
/// matrix. With `exact`, also the permutation p-value (k <= 4, B <= 8).
FriedmanResult friedman_test(const RankTable& table, bool exact = false);

/// Exact null distribution of the Friedman statistic by enumerating rank
/// sums; P(stat >= observed).
double friedman_exact_p(int k, int n_databases, double statistic);

struct WinLoss {
  int wins = 0;
  int ties = 0;
  int losses = 0;
  double win_rate = 0.0;       // wins / (wins + losses)
  double non_loss_rate = 0.0;  // (wins + ties) / total
};

WinLoss win_loss_from_counts(int wins, int ties, int losses);

/// Database-level comparison of model `a` against `b` over databases where
/// both have complete scores. Aggregated scores equal after rounding to six
/// decimals count as ties.
WinLoss win_loss(const std::vector<ScoreRecord>& records, const std::string& a, const std::string& b,
                 Orientation o);

}  // namespace nirs::stats
