#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "bear/bmat.hpp"
#include "bear/budget.hpp"
#include "bear/errors.hpp"
#include "oracles.hpp"

using bear::index_t;
using bear::Matrix;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  TempDir() {
    path = fs::temp_directory_path() /
           ("bear_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path file(const std::string& name) const { return path / name; }
  fs::path path;
  static inline int counter = 0;
};

bool files_identical(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::string ca((std::istreambuf_iterator<char>(fa)), {});
  std::string cb((std::istreambuf_iterator<char>(fb)), {});
  return !ca.empty() && ca == cb;
}

}  // namespace

TEST_CASE("BMAT file size is exactly 28 + rows*cols*4") {
  TempDir dir;
  const Matrix m = oracles::random_matrix(2, 3, 1);
  bear::write_bmat(m, dir.file("m.bmat"));
  CHECK(fs::file_size(dir.file("m.bmat")) == 28 + 2 * 3 * 4);
}

TEST_CASE("BMAT round-trip is bitwise") {
  TempDir dir;
  const Matrix m = oracles::random_matrix(100, 50, 77);
  bear::write_bmat(m, dir.file("m.bmat"));
  const Matrix back = bear::read_bmat(dir.file("m.bmat"));
  REQUIRE(back.rows() == 100);
  REQUIRE(back.cols() == 50);
  CHECK(std::memcmp(m.data(), back.data(), sizeof(float) * m.size()) == 0);
}

TEST_CASE("BMAT header validation") {
  TempDir dir;
  const auto path = dir.file("bad.bmat");

  SUBCASE("bad magic") {
    std::ofstream out(path, std::ios::binary);
    out << "NOTBEAR!" << std::string(200, '\0');
    out.close();
    CHECK_THROWS_AS(bear::read_bmat(path), bear::FormatError);
  }
  SUBCASE("bad dtype") {
    const Matrix m = oracles::random_matrix(2, 2, 3);
    bear::write_bmat(m, path);
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(8);
    const char dtype[4] = {9, 0, 0, 0};
    f.write(dtype, 4);
    f.close();
    CHECK_THROWS_AS(bear::read_bmat(path), bear::FormatError);
  }
  SUBCASE("truncated payload names the byte counts") {
    const Matrix m = oracles::random_matrix(4, 4, 3);
    bear::write_bmat(m, path);
    fs::resize_file(path, 40);
    try {
      bear::read_bmat(path);
      FAIL("expected FormatError");
    } catch (const bear::FormatError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(std::to_string(28 + 4 * 4 * 4)) != std::string::npos);
      CHECK(msg.find("40") != std::string::npos);
    }
  }
  SUBCASE("missing file is a storage error") {
    CHECK_THROWS_AS(bear::read_bmat(dir.file("absent.bmat")), bear::StorageError);
  }
  SUBCASE("non-finite payload entries are rejected") {
    Matrix m(2, 2);
    bear::write_bmat(m, path);
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(28);
    const float inf = std::numeric_limits<float>::infinity();
    f.write(reinterpret_cast<const char*>(&inf), 4);
    f.close();
    CHECK_THROWS_AS(bear::read_bmat(path), bear::FormatError);
  }
}

TEST_CASE("BmatWriter streams chunks to the same bytes as write_bmat") {
  TempDir dir;
  const Matrix m = oracles::random_matrix(8, 13, 5);
  bear::write_bmat(m, dir.file("whole.bmat"));

  bear::BmatWriter writer(dir.file("chunks.bmat"), 8, 13);
  index_t done = 0;
  for (index_t width : {4, 6, 3}) {
    Matrix chunk;
    chunk.resize_uninit(8, width);
    std::memcpy(chunk.data(), m.col(done), sizeof(float) * 8 * width);
    writer.append(chunk);
    done += width;
  }
  writer.close();
  CHECK(files_identical(dir.file("whole.bmat"), dir.file("chunks.bmat")));
}

TEST_CASE("BmatWriter rejects wrong column counts") {
  TempDir dir;
  {
    bear::BmatWriter writer(dir.file("short.bmat"), 4, 10);
    writer.append(Matrix(4, 3));
    CHECK_THROWS_AS(writer.close(), bear::StorageError);
  }
  {
    bear::BmatWriter writer(dir.file("over.bmat"), 4, 2);
    CHECK_THROWS_AS(writer.append(Matrix(4, 3)), bear::ParameterError);
  }
}

TEST_CASE("MappedBmat exposes columns without charging the budget") {
  TempDir dir;
  const Matrix m = oracles::random_matrix(32, 9, 21);
  bear::write_bmat(m, dir.file("m.bmat"));

  const auto before = bear::budget::current();
  bear::MappedBmat mapped(dir.file("m.bmat"));
  CHECK(bear::budget::current() == before);
  REQUIRE(mapped.rows() == 32);
  REQUIRE(mapped.cols() == 9);
  for (index_t j = 0; j < 9; ++j)
    CHECK(std::memcmp(mapped.col(j), m.col(j), 32 * sizeof(float)) == 0);
}

TEST_CASE("read_bmat over a memory cap signals a capacity error") {
  TempDir dir;
  const Matrix m = oracles::random_matrix(64, 64, 2);
  bear::write_bmat(m, dir.file("m.bmat"));
  bear::budget::set_cap(bear::budget::current() + 1024);  // far below 16 KiB payload
  CHECK_THROWS_AS(bear::read_bmat(dir.file("m.bmat")), bear::CapacityError);
  bear::budget::set_cap(0);
}
