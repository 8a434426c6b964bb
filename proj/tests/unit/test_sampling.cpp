#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "nirs/error.hpp"
#include "nirs/sampling.hpp"
#include "oracles.hpp"

using namespace nirs;
using namespace nirs::sampling;

TEST_CASE("spxy matches the brute-force greedy rule") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 8 + seed % 8;
    const Matrix X = testing::random_matrix(n, 4, 100 + seed);
    const auto y = testing::random_vector(n, 200 + seed);
    const std::size_t m = n / 2 + 1;
    CHECK(spxy_select(X, y, m) == oracle::spxy(X, y, m));
    CHECK(spxy_select(X, {}, m) == oracle::spxy(X, {}, m));
  }
}

TEST_CASE("spxy selections are nested prefixes") {
  const Matrix X = testing::random_matrix(14, 3, 1);
  const auto y = testing::random_vector(14, 2);
  const auto full = spxy_select(X, y, 14);
  for (std::size_t m = 2; m <= 14; ++m) {
    const auto part = spxy_select(X, y, m);
    CHECK(std::equal(part.begin(), part.end(), full.begin()));
  }
}

TEST_CASE("spxy rejects degenerate inputs") {
  CHECK_THROWS_AS(spxy_select(Matrix(1, 3, 0.0), {}, 1), DegenerateInput);
  CHECK_THROWS_AS(spxy_select(Matrix(4, 3, 1.0), std::vector<double>(4, 2.0), 2), DegenerateInput);
  CHECK_THROWS_AS(spxy_select(testing::random_matrix(4, 2, 1), {}, 5), ParameterError);
}

TEST_CASE("spxy split partitions the rows") {
  const Matrix X = testing::random_matrix(20, 5, 3);
  const auto y = testing::random_vector(20, 4);
  const auto s = spxy_split(X, y, 0.25);
  CHECK(s.train.size() == 15);
  CHECK(s.test.size() == 5);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 20);
}

TEST_CASE("stratified split keeps every class on both sides") {
  const Dataset ds = testing::class_dataset("c", 7, 10, 3, 5);
  const auto s = stratified_split(ds.X.values(), ds.y.labels, 0.25, 0);
  for (int c = 0; c < 3; ++c) {
    int tr = 0, te = 0;
    for (auto i : s.train) tr += ds.y.labels[i] == c;
    for (auto i : s.test) te += ds.y.labels[i] == c;
    CHECK(te == 2);  // round(0.25 * 7)
    CHECK(tr == 5);
  }
  std::vector<int> bad{0, 0, 0, 1};
  CHECK_THROWS_AS(stratified_split(testing::random_matrix(4, 3, 1), bad, 0.25, 0), DegenerateInput);
}

TEST_CASE("k-fold assignments are balanced") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 9 + seed;
    const Matrix X = testing::random_matrix(n, 4, seed);
    const auto y = testing::random_vector(n, seed + 50);
    const auto f = spxy_kfold(X, y, 3);
    const auto sizes = f.fold_sizes();
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    CHECK(*hi - *lo <= 1);
    CHECK(f.train_rows(0).size() + f.validation_rows(0).size() == n);
  }
  const Dataset ds = testing::class_dataset("c", 6, 8, 2, 9);
  const auto f = stratified_kfold(ds.X.values(), ds.y.labels, 3);
  for (int k = 0; k < 3; ++k) {
    std::set<int> seen;
    for (auto i : f.validation_rows(k)) seen.insert(ds.y.labels[i]);
    CHECK(seen.size() == 2);
  }
  CHECK_THROWS_AS(spxy_kfold(testing::random_matrix(2, 2, 1), {}, 3), DegenerateInput);
}
