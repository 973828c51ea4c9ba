#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace volspill {

using Date = std::chrono::year_month_day;

enum class DateFormat { Iso, DayMonthYear };

/// Parses "YYYY-MM-DD" or "DD/MM/YYYY". Returns false on malformed or invalid
/// calendar dates.
bool parse_date(std::string_view text, DateFormat format, Date& out);
std::string format_date(const Date& d);

/// Date-aligned panel of daily price levels, T rows by k assets.
struct PriceFrame {
  std::vector<Date> dates;
  std::vector<std::string> assets;
  Eigen::MatrixXd values;

  std::size_t rows() const { return dates.size(); }
  std::size_t cols() const { return assets.size(); }
  /// Column index of an asset; throws MissingColumn.
  std::size_t column(std::string_view asset) const;
};

/// Daily log returns. dates[t] is the date of the later price of each pair.
struct ReturnSeries {
  std::vector<Date> dates;
  std::vector<std::string> assets;
  Eigen::MatrixXd values;

  std::size_t rows() const { return dates.size(); }
  std::size_t cols() const { return assets.size(); }
  std::size_t column(std::string_view asset) const;
};

struct CrisisWindow {
  std::string label;
  Date start;
  Date end;
};

struct LoadOptions {
  std::string date_column;                 // empty: first column
  std::vector<std::string> asset_columns;  // empty: every other column
  DateFormat date_format = DateFormat::Iso;
  char delimiter = ',';
};

PriceFrame load_prices(const std::filesystem::path& source, const LoadOptions& options = {});
PriceFrame parse_prices(std::string_view csv_text, const LoadOptions& options = {});

PriceFrame align_common_days(const std::vector<PriceFrame>& frames);

ReturnSeries log_returns(const PriceFrame& frame);

/// Checks start <= end and that the window overlaps [first, last].
void validate_window(const CrisisWindow& window, const Date& first, const Date& last);

}  // namespace volspill
