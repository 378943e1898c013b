#include <gtest/gtest.h>

#include <limits>
#include <sstream>

#include "gpkmd/csv.hpp"
#include "gpkmd/error.hpp"

namespace csv = gpkmd::csv;

TEST(Csv, HeaderDetectedWhenNoCellIsNumeric) {
  const auto t = csv::parse_numeric("a,b\n1,2\n3,4\n");
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1][0], 3.0);
}

TEST(Csv, HeaderOptional) {
  const auto t = csv::parse_numeric("1,2\n3,4");
  EXPECT_TRUE(t.header.empty());
  EXPECT_EQ(t.rows.size(), 2u);
}

TEST(Csv, CrlfBlankLinesAndSigns) {
  const auto t = csv::parse_numeric("x\r\n+1.5\r\n\r\n-2e-3\r\n");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], 1.5);
  EXPECT_EQ(t.rows[1][0], -2e-3);
}

TEST(Csv, RaggedRowNamesTheRow) {
  try {
    csv::parse_numeric("a,b\n1,2\n3\n");
    FAIL() << "expected ParseError";
  } catch (const gpkmd::ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
  }
}

TEST(Csv, NonNumericCellNamesTheRow) {
  try {
    csv::parse_numeric("1,2\n3,x\n");
    FAIL() << "expected ParseError";
  } catch (const gpkmd::ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
  }
}

TEST(Csv, NonFiniteRejected) {
  EXPECT_THROW(csv::parse_numeric("1,nan\n"), gpkmd::ParseError);
  EXPECT_THROW(csv::parse_numeric("1\ninf\n"), gpkmd::ParseError);
}

TEST(Csv, FormatRoundTripsExactly) {
  for (double v : {0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 0.0, 123456789.0}) {
    const auto text = csv::format(v);
    const auto t = csv::parse_numeric(text);
    EXPECT_EQ(t.rows.at(0).at(0), v) << text;
  }
  EXPECT_EQ(csv::format(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(Csv, WriteRow) {
  std::ostringstream s;
  csv::write_row(s, std::vector<std::string>{"a", "b"});
  csv::write_row(s, std::vector<double>{1.0, 0.5});
  EXPECT_EQ(s.str(), "a,b\n1,0.5\n");
}
