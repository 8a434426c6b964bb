#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "nirs/error.hpp"
#include "nirs/stats.hpp"

namespace nirs::stats {

namespace {

// Studentized range critical values at alpha = 0.05, infinite df, divided
// by sqrt(2); index k - 2.
constexpr double kQ05[] = {1.960, 2.344, 2.569, 2.728, 2.850, 2.948, 3.031, 3.102, 3.164, 3.219,
                           3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517, 3.544};

bool better(double a, double b, Orientation o) { return o == Orientation::lower_is_better ? a < b : a > b; }

// database -> model -> (sum, count, any missing)
struct Cell {
  double sum = 0.0;
  int count = 0;
  bool missing = false;
};
using CellMap = std::map<std::string, std::map<std::string, Cell>>;

CellMap collect(const std::vector<ScoreRecord>& records) {
  CellMap cells;
  for (const auto& r : records) {
    Cell& c = cells[r.database][r.model];
    if (r.score && std::isfinite(*r.score)) {
      c.sum += *r.score;
      ++c.count;
    } else {
      c.missing = true;
    }
  }
  return cells;
}

std::optional<double> cell_mean(const CellMap& cells, const std::string& db, const std::string& model) {
  const auto it = cells.find(db);
  if (it == cells.end()) return std::nullopt;
  const auto jt = it->second.find(model);
  if (jt == it->second.end() || jt->second.missing || jt->second.count == 0) return std::nullopt;
  return jt->second.sum / jt->second.count;
}

}  // namespace

std::vector<double> rank_row(std::span<const double> scores, Orientation o) {
  const std::size_t k = scores.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return better(scores[a], scores[b], o); });
  std::vector<double> ranks(k);
  std::size_t i = 0;
  while (i < k) {
    std::size_t j = i + 1;
    while (j < k && scores[order[j]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    i = j;
  }
  return ranks;
}

RankTable aggregate_scores(const std::vector<ScoreRecord>& records, Orientation o,
                           std::vector<std::string> models) {
  const CellMap cells = collect(records);
  if (models.empty()) {
    std::set<std::string> all;
    for (const auto& r : records) all.insert(r.model);
    models.assign(all.begin(), all.end());
  }
  RankTable t;
  t.models = models;
  std::vector<std::vector<double>> rows;
  for (const auto& [db, _] : cells) {
    std::vector<double> row;
    bool complete = true;
    for (const auto& m : models) {
      const auto v = cell_mean(cells, db, m);
      if (!v) {
        complete = false;
        break;
      }
      row.push_back(*v);
    }
    if (!complete) {
      t.dropped_databases.push_back(db);
      continue;
    }
    t.databases.push_back(db);
    rows.push_back(std::move(row));
  }
  if (t.databases.size() < 2 || models.size() < 2)
    throw DegenerateInput("rank analysis needs at least 2 complete databases and 2 models (have " +
                          std::to_string(t.databases.size()) + " and " + std::to_string(models.size()) + ")");
  t.scores = Matrix::from_rows(rows);
  t.ranks = Matrix(rows.size(), models.size());
  for (std::size_t b = 0; b < rows.size(); ++b) {
    const auto r = rank_row(rows[b], o);
    std::copy(r.begin(), r.end(), t.ranks.row(b).begin());
  }
  t.average_ranks = t.ranks.column_means();
  return t;
}

double friedman_statistic(const Matrix& ranks) {
  const auto B = static_cast<double>(ranks.rows());
  const auto k = static_cast<double>(ranks.cols());
  if (ranks.rows() < 2 || ranks.cols() < 2) throw DegenerateInput("friedman test needs B >= 2 and k >= 2");
  const std::vector<double> R = ranks.column_means();
  const double centre = 0.5 * (k + 1.0);
  double ss = 0.0;
  for (double r : R) ss += (r - centre) * (r - centre);
  return 12.0 * B / (k * (k + 1.0)) * ss;
}

double nemenyi_q(int k) {
  if (k < 2 || k > 20) throw ParameterError("nemenyi: k must lie in [2, 20]");
  return kQ05[k - 2];
}

double nemenyi_cd(int k, int n_databases) {
  if (n_databases < 2) throw ParameterError("nemenyi: need at least 2 databases");
  return nemenyi_q(k) * std::sqrt(k * (k + 1.0) / (6.0 * n_databases));
}

std::vector<std::vector<bool>> pairwise_significance(std::span<const double> average_ranks, double cd) {
  const std::size_t k = average_ranks.size();
  std::vector<std::vector<bool>> sig(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (i != j) sig[i][j] = std::abs(average_ranks[i] - average_ranks[j]) > cd;
  return sig;
}

std::vector<std::vector<std::size_t>> cd_groups(std::span<const double> average_ranks, double cd) {
  const std::size_t k = average_ranks.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return average_ranks[a] < average_ranks[b]; });
  std::vector<std::vector<std::size_t>> groups;
  std::size_t last_end = 0;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i;
    while (j + 1 < k && average_ranks[order[j + 1]] - average_ranks[order[i]] <= cd) ++j;
    // Keep only runs not contained in the previous one.
    if (j > i && (groups.empty() || j > last_end)) {
      groups.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                          order.begin() + static_cast<std::ptrdiff_t>(j + 1));
      last_end = j;
    }
  }
  return groups;
}

double friedman_exact_p(int k, int n_databases, double statistic) {
  if (k < 2 || k > 4 || n_databases < 2 || n_databases > 8)
    throw ParameterError("exact friedman test supports k <= 4 and B <= 8");
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 1);
  std::vector<std::vector<int>> perms;
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));

  // Distribution of the rank-sum vector after b rows.
  std::map<std::vector<int>, double> dist{{std::vector<int>(static_cast<std::size_t>(k), 0), 1.0}};
  for (int b = 0; b < n_databases; ++b) {
    std::map<std::vector<int>, double> next;
    for (const auto& [sums, w] : dist)
      for (const auto& pr : perms) {
        std::vector<int> s = sums;
        for (std::size_t j = 0; j < s.size(); ++j) s[j] += pr[j];
        next[s] += w;
      }
    dist = std::move(next);
  }
  const double B = n_databases;
  const double total = std::pow(static_cast<double>(perms.size()), B);
  double tail = 0.0;
  for (const auto& [sums, w] : dist) {
    double ss = 0.0;
    for (int s : sums) {
      const double d = s / B - 0.5 * (k + 1.0);
      ss += d * d;
    }
    const double stat = 12.0 * B / (k * (k + 1.0)) * ss;
    if (stat >= statistic - 1e-9) tail += w;
  }
  return tail / total;
}

FriedmanResult friedman_test(const RankTable& table, bool exact) {
  FriedmanResult r;
  r.n_databases = static_cast<int>(table.n_databases());
  r.n_models = static_cast<int>(table.n_models());
  r.statistic = friedman_statistic(table.ranks);
  r.df = r.n_models - 1;
  r.p_value = std::clamp(chi2_survival(std::max(0.0, r.statistic), r.df), 0.0, 1.0);
  r.cd = nemenyi_cd(r.n_models, r.n_databases);
  r.significant = pairwise_significance(table.average_ranks, r.cd);
  if (exact) r.exact_p_value = friedman_exact_p(r.n_models, r.n_databases, r.statistic);
  return r;
}

WinLoss win_loss_from_counts(int wins, int ties, int losses) {
  if (wins < 0 || ties < 0 || losses < 0) throw ParameterError("win/loss counts must be >= 0");
  WinLoss w{wins, ties, losses, 0.0, 0.0};
  const int decided = wins + losses;
  const int total = decided + ties;
  w.win_rate = decided > 0 ? static_cast<double>(wins) / decided : 0.0;
  w.non_loss_rate = total > 0 ? static_cast<double>(wins + ties) / total : 0.0;
  return w;
}

WinLoss win_loss(const std::vector<ScoreRecord>& records, const std::string& a, const std::string& b,
                 Orientation o) {
  const CellMap cells = collect(records);
  int wins = 0, ties = 0, losses = 0;
  for (const auto& [db, _] : cells) {
    const auto sa = cell_mean(cells, db, a);
    const auto sb = cell_mean(cells, db, b);
    if (!sa || !sb) continue;
    const double ra = std::round(*sa * 1e6);
    const double rb = std::round(*sb * 1e6);
    if (ra == rb) ++ties;
    else if (better(ra, rb, o)) ++wins;
    else ++losses;
  }
  if (wins + ties + losses == 0) throw DegenerateInput("win/loss: no common databases for " + a + " and " + b);
  return win_loss_from_counts(wins, ties, losses);
}

}  // namespace nirs::stats
