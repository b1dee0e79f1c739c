#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "mzrom/errors.hpp"
#include "mzrom/io.hpp"
#include "mzrom/parallel.hpp"

using namespace mzrom;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "mzrom-unit" / "io";
  fs::create_directories(dir);
  return dir / name;
}
}  // namespace

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 1e-3, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("csv write and read") {
  CsvTable t({"t", "a", "b"});
  const double r1[] = {0.0, 1.0 / 3.0, std::numeric_limits<double>::quiet_NaN()};
  const double r2[] = {0.01, 2.0, 3.0};
  t.add_row(r1);
  t.add_partial_row(r2, 2);
  CHECK(t.rows() == 2);
  const std::string s = t.str();
  CHECK(s.rfind("t,a,b\n", 0) == 0);
  CHECK(s.find("0,0.33333333333333331,\n") != std::string::npos);
  CHECK(s.find("0.01,2,\n") != std::string::npos);

  const auto path = scratch("t.csv");
  t.save(path);
  const auto back = read_csv(path);
  CHECK(back.header == t.header());
  CHECK(back.column("a")[0] == 1.0 / 3.0);
  CHECK(std::isnan(back.column("b")[0]));
  CHECK(std::isnan(back.column("b")[1]));
  CHECK_THROWS_AS(back.column("missing"), InvalidArgument);
  CHECK_THROWS_AS(t.add_row(std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("atomic writes leave no temporaries") {
  const auto path = scratch("atomic.txt");
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  CHECK(read_file(path) == "second");
  for (const auto& e : fs::directory_iterator(path.parent_path()))
    CHECK(e.path().filename().string().find(".tmp") == std::string::npos);
  CHECK_THROWS_AS(read_file(scratch("nope")), IoError);
  CHECK_THROWS_AS(write_file_atomic("/proc/definitely/not/here", "x"), IoError);
}

TEST_CASE("float64 payload encoding") {
  const std::vector<double> v{1.0, -0.0, 1e-310, std::numeric_limits<double>::infinity()};
  std::string buf = "hdr";
  append_f64(buf, v);
  CHECK(buf.size() == 3 + 32);
  CHECK(static_cast<unsigned char>(buf[3 + 7]) == 0x3f);  // little-endian 1.0
  std::vector<double> back(4);
  std::size_t off = 3;
  read_f64(buf, off, back);
  CHECK(off == buf.size());
  CHECK(std::signbit(back[1]));
  CHECK(back[2] == 1e-310);
  CHECK(std::isinf(back[3]));
  std::vector<double> more(1);
  CHECK_THROWS_AS(read_f64(buf, off, more), IoError);
}

TEST_CASE("parallel_for covers every index and propagates errors") {
  for (std::size_t w : {1u, 2u, 5u}) {
    std::vector<int> hit(100, 0);
    parallel_for(hit.size(), w, [&](std::size_t i) { hit[i] += 1; });
    for (int h : hit) CHECK(h == 1);
  }
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 7) throw InvalidArgument("boom");
                               }),
                  InvalidArgument);
  CHECK(default_workers() >= 1);
}
