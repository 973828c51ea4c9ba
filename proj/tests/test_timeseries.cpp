#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "volspill/errors.hpp"
#include "volspill/timeseries.hpp"

using namespace volspill;
using std::chrono::day;
using std::chrono::month;
using std::chrono::year;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

Date ymd(int y, unsigned m, unsigned d) { return Date{year{y}, month{m}, day{d}}; }

}  // namespace

TEST_SUITE("timeseries") {
  TEST_CASE("parse three rows, two assets") {
    auto f = parse_prices("date,a,b\n2008-01-02,1,2\n2008-01-03,3,4\n2008-01-04,5,6\n");
    CHECK(f.rows() == 3);
    CHECK(f.cols() == 2);
    CHECK(f.dates[0] == ymd(2008, 1, 2));
    CHECK(f.values(2, 1) == 6.0);
    CHECK(f.column("b") == 1);
  }

  TEST_CASE("rows are sorted by date") {
    auto f = parse_prices("date,a\n2008-01-04,3\n2008-01-02,1\n2008-01-03,2\n");
    CHECK(f.dates.front() == ymd(2008, 1, 2));
    CHECK(f.values(0, 0) == 1.0);
    CHECK(f.values(2, 0) == 3.0);
  }

  TEST_CASE("day-month-year dates") {
    LoadOptions o;
    o.date_format = DateFormat::DayMonthYear;
    auto f = parse_prices("date,a\n02/01/2008,1\n03/01/2008,2\n", o);
    CHECK(f.dates[1] == ymd(2008, 1, 3));
  }

  TEST_CASE("duplicate date names the date") {
    auto text = "date,a\n2008-01-02,1\n2008-01-02,2\n";
    CHECK(testutil::error_kind([&] { parse_prices(text); }) == ErrorKind::DuplicateDate);
    CHECK(message_of([&] { parse_prices(text); }).find("2008-01-02") != std::string::npos);
  }

  TEST_CASE("blank cell reports the row") {
    auto text = "date,a,b\n2008-01-02,1,2\n2008-01-03,,4\n";
    CHECK(testutil::error_kind([&] { parse_prices(text); }) == ErrorKind::NonNumericCell);
    auto msg = message_of([&] { parse_prices(text); });
    CHECK(msg.find("row 3") != std::string::npos);
    CHECK(msg.find("'a'") != std::string::npos);
  }

  TEST_CASE("bad date and missing column") {
    CHECK(testutil::error_kind([] { parse_prices("date,a\n2008-02-30,1\n"); }) == ErrorKind::UnparseableDate);
    LoadOptions o;
    o.asset_columns = {"zzz"};
    CHECK(testutil::error_kind([&] { parse_prices("date,a\n2008-01-02,1\n", o); }) == ErrorKind::MissingColumn);
    o = {};
    o.date_column = "when";
    CHECK(testutil::error_kind([&] { parse_prices("date,a\n2008-01-02,1\n", o); }) == ErrorKind::MissingColumn);
  }

  TEST_CASE("missing file") {
    CHECK(testutil::error_kind([] { load_prices("/nonexistent/prices.csv"); }) == ErrorKind::Io);
  }

  TEST_CASE("file round trip") {
    auto dir = testutil::temp_dir("ts_roundtrip");
    testutil::write_file(dir / "p.csv", "date;x\n2010-05-03;10.5\n2010-05-04;11\n");
    LoadOptions o;
    o.delimiter = ';';
    auto f = load_prices(dir / "p.csv", o);
    CHECK(f.rows() == 2);
    CHECK(f.values(0, 0) == 10.5);
  }

  TEST_CASE("align keeps the common dates") {
    auto a = parse_prices("date,a\n2008-01-02,1\n2008-01-03,2\n2008-01-04,3\n");
    auto b = parse_prices("date,b\n2008-01-01,9\n2008-01-02,8\n2008-01-03,7\n");
    auto f = align_common_days({a, b});
    REQUIRE(f.rows() == 2);
    CHECK(f.dates[0] == ymd(2008, 1, 2));
    CHECK(f.dates[1] == ymd(2008, 1, 3));
    CHECK(f.assets == std::vector<std::string>{"a", "b"});
    CHECK(f.values(1, 0) == 2.0);
    CHECK(f.values(1, 1) == 7.0);
  }

  TEST_CASE("align of one frame is the identity") {
    auto a = parse_prices("date,a,b\n2008-01-02,1,5\n2008-01-03,2,6\n");
    auto f = align_common_days({a});
    CHECK(f.dates == a.dates);
    CHECK(f.values == a.values);
  }

  TEST_CASE("align errors") {
    auto a = parse_prices("date,a\n2008-01-02,1\n");
    auto b = parse_prices("date,b\n2008-01-03,1\n");
    CHECK(testutil::error_kind([&] { align_common_days({a, b}); }) == ErrorKind::EmptyIntersection);
    CHECK(testutil::error_kind([&] { align_common_days({}); }) == ErrorKind::EmptyIntersection);
  }

  TEST_CASE("log returns") {
    auto c = parse_prices("date,a\n2008-01-02,100\n2008-01-03,100\n2008-01-04,100\n");
    auto r = log_returns(c);
    REQUIRE(r.rows() == 2);
    CHECK(r.values(0, 0) == 0.0);
    CHECK(r.values(1, 0) == 0.0);
    CHECK(r.dates[0] == ymd(2008, 1, 3));

    PriceFrame f;
    f.dates = {ymd(2008, 1, 2), ymd(2008, 1, 3)};
    f.assets = {"a"};
    f.values.resize(2, 1);
    f.values << 100.0, 100.0 * std::exp(0.01);
    CHECK(log_returns(f).values(0, 0) == doctest::Approx(0.01).epsilon(1e-14));
  }

  TEST_CASE("zero price is rejected") {
    auto f = parse_prices("date,a\n2008-01-02,100\n2008-01-03,0\n");
    CHECK(testutil::error_kind([&] { log_returns(f); }) == ErrorKind::NonPositivePrice);
  }

  TEST_CASE("window validation") {
    auto first = ymd(2008, 1, 1), last = ymd(2012, 12, 31);
    CHECK_NOTHROW(validate_window({"w", ymd(2009, 1, 1), ymd(2009, 6, 30)}, first, last));
    CHECK(testutil::error_kind([&] { validate_window({"w", ymd(2010, 1, 1), ymd(2009, 1, 1)}, first, last); }) == ErrorKind::EmptyWindow);
    CHECK(testutil::error_kind([&] { validate_window({"w", ymd(2015, 1, 1), ymd(2016, 1, 1)}, first, last); }) == ErrorKind::EmptyWindow);
  }

  TEST_CASE("date format round trip") {
    Date d;
    REQUIRE(parse_date("2011-07-21", DateFormat::Iso, d));
    CHECK(format_date(d) == "2011-07-21");
    CHECK_FALSE(parse_date("21/07/2011", DateFormat::Iso, d));
    CHECK_FALSE(parse_date("2011-13-01", DateFormat::Iso, d));
  }
}
