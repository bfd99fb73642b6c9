#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <set>
#include <vector>

#include "bear/batch_source.hpp"
#include "bear/errors.hpp"
#include "oracles.hpp"

using bear::BatchSource;
using bear::index_t;
using bear::Matrix;

TEST_CASE("batch widths partition the columns: 10 = 4 + 4 + 2") {
  auto src = BatchSource::from_matrix(oracles::random_matrix(3, 10, 1), 4, 7);
  src.begin_epoch(0);
  Matrix batch;
  std::vector<index_t> widths;
  while (src.next_batch(batch)) widths.push_back(batch.cols());
  CHECK(widths == std::vector<index_t>{4, 4, 2});
  CHECK(src.batches_per_epoch() == 3);
}

TEST_CASE("batch_size >= m gives one full shuffled batch") {
  const Matrix y = oracles::random_matrix(4, 6, 2);
  auto src = BatchSource::from_matrix(y, 100, 3);
  src.begin_epoch(0);
  Matrix batch;
  std::vector<index_t> ids;
  REQUIRE(src.next_batch(batch, &ids));
  CHECK(batch.cols() == 6);
  CHECK_FALSE(src.next_batch(batch));
  // order is a permutation, and with this seed not the identity
  std::set<index_t> seen(ids.begin(), ids.end());
  CHECK(seen.size() == 6);
  for (index_t j = 0; j < 6; ++j)
    CHECK(std::memcmp(batch.col(j), y.col(ids[j]), 4 * sizeof(float)) == 0);
}

TEST_CASE("one epoch covers every column exactly once") {
  auto src = BatchSource::from_matrix(oracles::random_matrix(2, 23, 5), 5, 11);
  for (index_t epoch = 0; epoch < 3; ++epoch) {
    src.begin_epoch(epoch);
    Matrix batch;
    std::vector<index_t> ids, all;
    while (src.next_batch(batch, &ids)) all.insert(all.end(), ids.begin(), ids.end());
    std::sort(all.begin(), all.end());
    REQUIRE(all.size() == 23);
    for (index_t j = 0; j < 23; ++j) CHECK(all[static_cast<std::size_t>(j)] == j);
  }
}

TEST_CASE("batch order is a pure function of (seed, epoch)") {
  const Matrix y = oracles::random_matrix(2, 40, 9);
  auto a = BatchSource::from_matrix(y, 7, 1234);
  auto b = BatchSource::from_matrix(y, 7, 1234);
  auto c = BatchSource::from_matrix(y, 7, 1235);

  for (index_t epoch : {0, 1, 5}) {
    std::vector<index_t> oa, ob, oc;
    Matrix batch;
    std::vector<index_t> ids;
    a.begin_epoch(epoch);
    while (a.next_batch(batch, &ids)) oa.insert(oa.end(), ids.begin(), ids.end());
    b.begin_epoch(epoch);
    while (b.next_batch(batch, &ids)) ob.insert(ob.end(), ids.begin(), ids.end());
    c.begin_epoch(epoch);
    while (c.next_batch(batch, &ids)) oc.insert(oc.end(), ids.begin(), ids.end());
    CHECK(oa == ob);
    CHECK(oa != oc);
  }
  // different epochs shuffle differently
  std::vector<index_t> e0, e1;
  Matrix batch;
  std::vector<index_t> ids;
  a.begin_epoch(0);
  while (a.next_batch(batch, &ids)) e0.insert(e0.end(), ids.begin(), ids.end());
  a.begin_epoch(1);
  while (a.next_batch(batch, &ids)) e1.insert(e1.end(), ids.begin(), ids.end());
  CHECK(e0 != e1);
}

TEST_CASE("concatenating an epoch and inverting the permutation reproduces Y") {
  const Matrix y = oracles::random_matrix(50, 37, 31);
  auto src = BatchSource::from_matrix(y, 8, 77);
  src.begin_epoch(4);

  Matrix rebuilt(50, 37);
  Matrix batch;
  std::vector<index_t> ids;
  while (src.next_batch(batch, &ids)) {
    for (index_t t = 0; t < batch.cols(); ++t)
      std::memcpy(rebuilt.col(ids[static_cast<std::size_t>(t)]), batch.col(t),
                  50 * sizeof(float));
  }
  CHECK(std::memcmp(rebuilt.data(), y.data(), sizeof(float) * y.size()) == 0);
}

TEST_CASE("sequential passes ignore the shuffle flag") {
  auto src = BatchSource::from_matrix(oracles::random_matrix(2, 12, 3), 5, 42,
                                      /*shuffle=*/true);
  src.begin_epoch(9, /*sequential=*/true);
  Matrix batch;
  std::vector<index_t> ids, all;
  while (src.next_batch(batch, &ids)) all.insert(all.end(), ids.begin(), ids.end());
  for (index_t j = 0; j < 12; ++j) CHECK(all[static_cast<std::size_t>(j)] == j);
}

TEST_CASE("shuffle can be disabled") {
  auto src = BatchSource::from_matrix(oracles::random_matrix(2, 12, 3), 5, 42,
                                      /*shuffle=*/false);
  src.begin_epoch(3);
  Matrix batch;
  std::vector<index_t> ids, all;
  while (src.next_batch(batch, &ids)) all.insert(all.end(), ids.begin(), ids.end());
  for (index_t j = 0; j < 12; ++j) CHECK(all[static_cast<std::size_t>(j)] == j);
}

TEST_CASE("limit_cols restricts the epoch to a prefix") {
  const Matrix y = oracles::random_matrix(3, 10, 8);
  auto src = BatchSource::from_matrix(y, 4, 5, true, /*limit_cols=*/7);
  CHECK(src.cols() == 7);
  src.begin_epoch(0);
  Matrix batch;
  std::vector<index_t> ids, all;
  while (src.next_batch(batch, &ids)) all.insert(all.end(), ids.begin(), ids.end());
  std::sort(all.begin(), all.end());
  REQUIRE(all.size() == 7);
  CHECK(all.back() == 6);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(BatchSource::from_matrix(oracles::random_matrix(2, 2, 1), 0, 0),
                  bear::ParameterError);
  auto src = BatchSource::from_matrix(oracles::random_matrix(2, 2, 1), 1, 0);
  Matrix batch;
  CHECK_THROWS_AS(src.next_batch(batch), bear::ParameterError);  // no begin_epoch
}

TEST_CASE("non-finite entries are rejected at construction") {
  Matrix y(2, 2);
  y(1, 1) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(BatchSource::from_matrix(std::move(y), 1, 0), bear::FormatError);
}
