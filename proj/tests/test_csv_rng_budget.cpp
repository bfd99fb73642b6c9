#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "bear/budget.hpp"
#include "bear/csv.hpp"
#include "bear/errors.hpp"
#include "bear/matrix.hpp"
#include "bear/rng.hpp"

namespace fs = std::filesystem;

TEST_CASE("empty record list writes a header-only file") {
  const auto path = fs::temp_directory_path() / "bear_csv_empty.csv";
  bear::write_metrics_csv({"r", "rho", "rel_err"}, {}, path);
  const auto parsed = bear::read_csv(path);
  CHECK(parsed.columns == std::vector<std::string>{"r", "rho", "rel_err"});
  CHECK(parsed.rows.empty());
  fs::remove(path);
}

TEST_CASE("one record gives a two-line file that round-trips to 1e-8") {
  const auto path = fs::temp_directory_path() / "bear_csv_one.csv";
  bear::write_metrics_csv({"r", "rho", "rel_err"},
                          {{std::int64_t{2}, 0.05, 0.0123456789}}, path);
  const auto parsed = bear::read_csv(path);
  REQUIRE(parsed.rows.size() == 1);
  CHECK(parsed.rows[0][0] == "2");
  CHECK(std::abs(std::strtod(parsed.rows[0][1].c_str(), nullptr) - 0.05) <=
        0.05 * 1e-8);
  CHECK(std::abs(std::strtod(parsed.rows[0][2].c_str(), nullptr) - 0.0123456789) <=
        0.0123456789 * 1e-8);
  fs::remove(path);
}

TEST_CASE("doubles survive a write/parse cycle to 1e-8 relative") {
  const auto path = fs::temp_directory_path() / "bear_csv_round.csv";
  bear::Rng rng(5);
  std::vector<bear::MetricRow> rows;
  std::vector<double> values;
  for (int i = 0; i < 50; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, (i % 13) - 6);
    values.push_back(v);
    rows.push_back({v});
  }
  bear::write_metrics_csv({"v"}, rows, path);
  const auto parsed = bear::read_csv(path);
  REQUIRE(parsed.rows.size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double back = std::strtod(parsed.rows[i][0].c_str(), nullptr);
    CHECK(std::abs(back - values[i]) <= std::abs(values[i]) * 1e-8);
  }
  fs::remove(path);
}

TEST_CASE("quoting: fields with commas and quotes survive") {
  const auto path = fs::temp_directory_path() / "bear_csv_quote.csv";
  bear::write_metrics_csv({"name", "x"},
                          {{std::string("a,b \"c\""), std::int64_t{1}}}, path);
  const auto parsed = bear::read_csv(path);
  CHECK(parsed.rows[0][0] == "a,b \"c\"");
  fs::remove(path);
}

TEST_CASE("schema mismatches are rejected") {
  const auto path = fs::temp_directory_path() / "bear_csv_bad.csv";
  CHECK_THROWS_AS(
      bear::write_metrics_csv({"a", "b"}, {{std::int64_t{1}}}, path),
      bear::ParameterError);
  fs::remove(path);
}

TEST_CASE("rng streams are deterministic and tag-separated") {
  bear::Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
  }
  CHECK(a.next_u64() != c.next_u64());

  CHECK(bear::derive_seed(7, 1) != bear::derive_seed(7, 2));
  CHECK(bear::derive_seed(7, 1, 2) != bear::derive_seed(7, 2, 1));
  CHECK(bear::derive_seed(7, 1) == bear::derive_seed(7, 1));
}

TEST_CASE("rng uniform and normal are sane") {
  bear::Rng rng(123);
  double sum = 0.0, sum2 = 0.0;
  const int kN = 100000;
  for (int i = 0; i < kN; ++i) {
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / kN;
  const double var = sum2 / kN - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);

  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.below(7) < 7);
  }
}

TEST_CASE("budget tracks matrix allocations and enforces the cap") {
  const auto base = bear::budget::current();
  {
    bear::Matrix m(100, 100);  // 40 KB
    CHECK(bear::budget::current() == base + 100 * 100 * 4);
    CHECK(bear::budget::peak() >= base + 100 * 100 * 4);
  }
  CHECK(bear::budget::current() == base);

  bear::budget::set_cap(base + 1000);
  CHECK_THROWS_AS(bear::Matrix(100, 100), bear::CapacityError);
  CHECK(bear::budget::current() == base);  // failed acquire rolls back
  bear::budget::set_cap(0);
  bear::Matrix ok(100, 100);
  CHECK(ok.size() == 10000);
}
