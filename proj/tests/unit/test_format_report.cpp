#include <gtest/gtest.h>

#include "wattbench/detail/csv.hpp"
#include "wattbench/format.hpp"
#include "wattbench/report.hpp"

using namespace wattbench;

TEST(Csv, QuotedFieldsAndCrlf) {
  const auto doc = csv::parse("a,b\r\n\"x, y\",\"say \"\"hi\"\"\"\r\n\r\n1,2\n", "t");
  ASSERT_EQ(doc.rows.size(), 2u);
  EXPECT_EQ(doc.rows[0].fields[0], "x, y");
  EXPECT_EQ(doc.rows[0].fields[1], "say \"hi\"");
  EXPECT_EQ(doc.rows[1].line, 4u);
  EXPECT_EQ(doc.column("b"), 1u);
  EXPECT_TRUE(doc.has_column("a"));
  EXPECT_FALSE(doc.has_column("c"));
}

TEST(Csv, ErrorsCarryLineNumbers) {
  try {
    csv::parse("a,b\n1,2\n3\n", "f.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(csv::parse("", "f"), ParseError);
  EXPECT_THROW(csv::parse("a\n\"open\n", "f"), ParseError);
  EXPECT_THROW(csv::parse("a,b\n", "f").column("c"), ParseError);
}

TEST(Csv, StrictNumbers) {
  EXPECT_EQ(csv::to_double(" 1.5 "), 1.5);
  EXPECT_EQ(csv::to_double("1e-3"), 1e-3);
  EXPECT_FALSE(csv::to_double("1.5x"));
  EXPECT_FALSE(csv::to_double(""));
  EXPECT_EQ(csv::to_int("+42"), 42);
  EXPECT_FALSE(csv::to_int("4.2"));
}

TEST(Csv, EscapeRoundTrips) {
  for (std::string s : {"plain", "a,b", "q\"uote", "multi\nline"}) {
    const auto doc = csv::parse("h\n" + csv::escape(s) + "\n", "t");
    EXPECT_EQ(doc.rows.at(0).fields.at(0), s);
  }
}

TEST(Format, FixedAndSignificant) {
  EXPECT_EQ(fmt::fixed(0.33, 2), "0.33");
  EXPECT_EQ(fmt::fixed(-0.001, 2), "0.00");
  EXPECT_EQ(fmt::fixed(296.0, 1), "296.0");
  EXPECT_EQ(fmt::sig(86.7, 3), "86.7");
  EXPECT_EQ(fmt::sig(2.0, 2), "2.0");
  EXPECT_EQ(fmt::sig(9.96, 2), "10");
  EXPECT_EQ(fmt::sig(44942.0, 3), "44900");
  EXPECT_EQ(fmt::strip_zeros("0.010"), "0.01");
  EXPECT_EQ(fmt::strip_zeros("3.0"), "3");
  EXPECT_EQ(fmt::strip_zeros("300"), "300");
  EXPECT_EQ(fmt::compact(99.21), "99.21");
  EXPECT_EQ(fmt::sci(4.44e11, 3), "4.44e11");
  EXPECT_EQ(fmt::sci(2.22e-4, 3), "2.22e-4");
  EXPECT_EQ(fmt::sci(5.0, 2), "5.0");
}

TEST(Format, Uncertainty) {
  EXPECT_EQ(fmt::uncertainty(86.7e-9, 1.11e-9, 3), "(86.7 ± 1.11) × 10⁻⁹");
  EXPECT_EQ(fmt::uncertainty(1245.35e-9, 44.48e-9, 3), "(1.25 ± 0.0445) × 10⁻⁶");
  EXPECT_EQ(fmt::uncertainty(3.31, 0.04, 3), "3.31 ± 0.04");
  EXPECT_EQ(fmt::uncertainty(3.31, 0.0, 3), "3.31");
  EXPECT_EQ(fmt::uncertainty(4.47e-9, 0.0, 3), "4.47 × 10⁻⁹");
  EXPECT_EQ(fmt::fixed_uncertainty(0.33, 0.01, 2), "0.33 ± 0.01");
  EXPECT_EQ(fmt::fixed_uncertainty(57.0, 0.8, 1), "57.0 ± 0.8");
  EXPECT_EQ(fmt::superscript(-12), "⁻¹²");
}

namespace {

ReportTable one_by_one() {
  ReportTable t;
  t.title = "T";
  t.columns = {{"US", "gCO2e"}};
  t.add_row({"149"});
  return t;
}

}  // namespace

TEST(Report, RejectsRaggedRows) {
  ReportTable t;
  t.columns = {{"a", ""}, {"b", ""}};
  EXPECT_THROW(t.add_row({"1"}), InvalidValue);
  t.rows.push_back({"1", "2", "3"});
  EXPECT_THROW(render(t, Format::csv), InvalidValue);
}

TEST(Report, OneByOneCsvIsHeaderAndCell) {
  EXPECT_EQ(render(one_by_one(), Format::csv), "US (gCO2e)\n149\n");
}

TEST(Report, Markdown) {
  auto t = one_by_one();
  t.footnotes = {"note"};
  EXPECT_EQ(render(t, Format::markdown), "### T\n\n| US (gCO2e) |\n| --- |\n| 149 |\n\n- note\n");
}

TEST(Report, MarkdownEscapesPipes) {
  ReportTable t;
  t.columns = {{"a", ""}};
  t.add_row({"x|y"});
  EXPECT_NE(render(t, Format::markdown).find("x\\|y"), std::string::npos);
}

TEST(Report, JsonRoundTripAndDeterminism) {
  auto t = one_by_one();
  t.footnotes = {"f"};
  const auto j1 = render(t, Format::json);
  EXPECT_EQ(j1, render(t, Format::json));
  EXPECT_EQ(parse_table_json(j1), t);
  EXPECT_THROW(parse_table_json(R"({"title":"x","columns":[],"rows":[],"footnotes":[],"extra":1})"), SchemaError);
}

TEST(Report, SeveralTables) {
  const std::vector<ReportTable> ts{one_by_one(), one_by_one()};
  EXPECT_EQ(render(ts, Format::csv), "US (gCO2e)\n149\n\nUS (gCO2e)\n149\n");
  EXPECT_EQ(render(ts, Format::json).front(), '[');
}

TEST(Report, ParseFormat) {
  EXPECT_EQ(parse_format("csv"), Format::csv);
  EXPECT_EQ(parse_format("json"), Format::json);
  EXPECT_EQ(parse_format("markdown"), Format::markdown);
  EXPECT_THROW(parse_format("xml"), InvalidValue);
}
