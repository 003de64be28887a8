#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "solvlab/error.hpp"
#include "solvlab/io.hpp"

using namespace solvlab;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "solvlab_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Io, LineColumn) {
  int l = 0, c = 0;
  line_column("ab\ncd\nef", 4, l, c);
  EXPECT_EQ(l, 2);
  EXPECT_EQ(c, 2);
  line_column("x", 0, l, c);
  EXPECT_EQ(l, 1);
  EXPECT_EQ(c, 1);
}

TEST(Io, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(Io, StructuredGridRoundTrip) {
  const Grid3D g({-1.5, 0.25, 3}, 0.125, {3, 4, 2});
  ScalarField f(g);
  for (std::size_t c = 0; c < f.size(); ++c) f[c] = std::sin(0.7 * c) / 3.0;
  const auto path = scratch("f.sg").string();
  write_structured_grid(path, f);
  const ScalarField back = read_structured_grid(path);
  EXPECT_EQ(back.grid, g);
  EXPECT_EQ(back.values, f.values);
}

TEST(Io, StructuredGridErrorsCarryLine) {
  std::istringstream bad("# structured-grid v1\ndims 2 2 2\norigin 0 0 0\nspacing 1\n1\n2\nthree\n");
  try {
    read_structured_grid(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7);
  }
  std::istringstream shape("# structured-grid v1\ndims 2 2\n");
  EXPECT_THROW(read_structured_grid(shape), ParseError);
  std::istringstream truncated("# structured-grid v1\ndims 2 2 2\norigin 0 0 0\nspacing 1\n1\n");
  EXPECT_THROW(read_structured_grid(truncated), ParseError);
}

TEST(Io, CsvQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
  std::ostringstream os;
  CsvWriter w(os);
  w.row({"a", "b,c"});
  w.row({"1", ""});
  EXPECT_EQ(os.str(), "a,\"b,c\"\r\n1,\r\n");
}

TEST(Io, PhiTableRoundTrip) {
  PhiTable t;
  t.entries.push_back({{1.0, 0.0}, 0.75, {8, 16, 32}, 1e-3});
  t.entries.push_back({{0.0, 1.0}, 1.25, {}, 0.0});
  const auto path = scratch("phi.json").string();
  write_phi_table(path, t);
  const PhiTable back = read_phi_table(path);
  ASSERT_EQ(back.entries.size(), 2u);
  EXPECT_EQ(back.entries[0].radii, t.entries[0].radii);
  EXPECT_DOUBLE_EQ(back.lookup({2.0, 0.0}), 1.5);
  std::ofstream(path) << "{\"entries\": [\n  {\"direction\": [1, }\n]}";
  try {
    read_phi_table(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}
