#include "volspill/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "volspill/errors.hpp"

namespace volspill {

namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == delim) {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::size_t find_column(const std::vector<std::string>& names, std::string_view name) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw Error(ErrorKind::MissingColumn, "column '" + std::string(name) + "' not found");
  }
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

bool parse_date(std::string_view text, DateFormat format, Date& out) {
  text = trim(text);
  int y = 0, m = 0, d = 0;
  if (format == DateFormat::Iso) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
        !parse_int(text.substr(8, 2), d)) {
      return false;
    }
  } else {
    if (text.size() != 10 || text[2] != '/' || text[5] != '/') return false;
    if (!parse_int(text.substr(0, 2), d) || !parse_int(text.substr(3, 2), m) ||
        !parse_int(text.substr(6, 4), y)) {
      return false;
    }
  }
  Date candidate{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                 std::chrono::day{static_cast<unsigned>(d)}};
  if (!candidate.ok()) return false;
  out = candidate;
  return true;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

std::size_t PriceFrame::column(std::string_view asset) const { return find_column(assets, asset); }
std::size_t ReturnSeries::column(std::string_view asset) const { return find_column(assets, asset); }

PriceFrame parse_prices(std::string_view csv_text, const LoadOptions& options) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    for (std::size_t i = 0; i <= csv_text.size(); ++i) {
      if (i == csv_text.size() || csv_text[i] == '\n') {
        std::string_view line = csv_text.substr(start, i - start);
        if (!trim(line).empty() && trim(line).front() != '#') lines.push_back(line);
        start = i + 1;
      }
    }
  }
  if (lines.empty()) throw Error(ErrorKind::MissingColumn, "input has no header row");

  std::vector<std::string> header;
  for (auto cell : split(lines.front(), options.delimiter)) header.emplace_back(cell);

  std::size_t date_col = options.date_column.empty() ? 0 : find_column(header, options.date_column);
  std::vector<std::size_t> asset_cols;
  std::vector<std::string> asset_names;
  if (options.asset_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == date_col) continue;
      asset_cols.push_back(c);
      asset_names.push_back(header[c]);
    }
  } else {
    for (const auto& name : options.asset_columns) {
      asset_cols.push_back(find_column(header, name));
      asset_names.push_back(name);
    }
  }

  struct Row {
    Date date;
    std::vector<double> values;
    std::size_t line;
  };
  std::vector<Row> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    auto cells = split(lines[li], options.delimiter);
    const std::size_t row_no = li + 1;  // 1-based file line
    Row row;
    row.line = row_no;
    if (date_col >= cells.size() || !parse_date(cells[date_col], options.date_format, row.date)) {
      std::string cell = date_col < cells.size() ? std::string(cells[date_col]) : std::string();
      throw Error(ErrorKind::UnparseableDate, "row " + std::to_string(row_no) + ", column '" +
                                                  header[date_col] + "': '" + cell + "'");
    }
    row.values.reserve(asset_cols.size());
    for (std::size_t a = 0; a < asset_cols.size(); ++a) {
      double v = 0.0;
      std::size_t c = asset_cols[a];
      if (c >= cells.size() || !parse_number(cells[c], v)) {
        throw Error(ErrorKind::NonNumericCell,
                    "row " + std::to_string(row_no) + ", column '" + asset_names[a] + "'");
      }
      row.values.push_back(v);
    }
    rows.push_back(std::move(row));
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].date == rows[i - 1].date) {
      throw Error(ErrorKind::DuplicateDate, "duplicate date " + format_date(rows[i].date) +
                                                " at row " + std::to_string(rows[i].line));
    }
  }

  PriceFrame frame;
  frame.assets = std::move(asset_names);
  frame.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(frame.assets.size()));
  frame.dates.reserve(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    frame.dates.push_back(rows[t].date);
    for (std::size_t a = 0; a < rows[t].values.size(); ++a) {
      frame.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(a)) = rows[t].values[a];
    }
  }
  return frame;
}

PriceFrame load_prices(const std::filesystem::path& source, const LoadOptions& options) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + source.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_prices(buf.str(), options);
}

PriceFrame align_common_days(const std::vector<PriceFrame>& frames) {
  if (frames.empty()) throw Error(ErrorKind::EmptyIntersection, "no frames to align");
  std::set<std::string> seen;
  for (const auto& f : frames) {
    for (const auto& a : f.assets) {
      if (!seen.insert(a).second) {
        throw Error(ErrorKind::InvalidConfig, "asset '" + a + "' appears in more than one frame");
      }
    }
  }

  std::vector<Date> common(frames.front().dates);
  std::sort(common.begin(), common.end());
  for (std::size_t f = 1; f < frames.size(); ++f) {
    std::vector<Date> other(frames[f].dates);
    std::sort(other.begin(), other.end());
    std::vector<Date> next;
    std::set_intersection(common.begin(), common.end(), other.begin(), other.end(),
                          std::back_inserter(next));
    common = std::move(next);
  }
  if (common.empty()) throw Error(ErrorKind::EmptyIntersection, "frames share no common dates");

  PriceFrame out;
  out.dates = common;
  Eigen::Index k = 0;
  for (const auto& f : frames) k += static_cast<Eigen::Index>(f.cols());
  out.values.resize(static_cast<Eigen::Index>(common.size()), k);

  Eigen::Index col = 0;
  for (const auto& f : frames) {
    std::map<Date, std::size_t> index;
    for (std::size_t t = 0; t < f.dates.size(); ++t) index.emplace(f.dates[t], t);
    for (std::size_t t = 0; t < common.size(); ++t) {
      auto row = static_cast<Eigen::Index>(index.at(common[t]));
      out.values.block(static_cast<Eigen::Index>(t), col, 1, static_cast<Eigen::Index>(f.cols())) =
          f.values.row(row);
    }
    col += static_cast<Eigen::Index>(f.cols());
    out.assets.insert(out.assets.end(), f.assets.begin(), f.assets.end());
  }
  return out;
}

ReturnSeries log_returns(const PriceFrame& frame) {
  const auto T = static_cast<Eigen::Index>(frame.rows());
  const auto k = static_cast<Eigen::Index>(frame.cols());
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index i = 0; i < k; ++i) {
      if (!(frame.values(t, i) > 0.0)) {
        throw Error(ErrorKind::NonPositivePrice,
                    "asset '" + frame.assets[static_cast<std::size_t>(i)] + "' on " +
                        format_date(frame.dates[static_cast<std::size_t>(t)]));
      }
    }
  }
  ReturnSeries r;
  r.assets = frame.assets;
  if (T < 2) {
    r.values.resize(0, k);
    return r;
  }
  r.dates.assign(frame.dates.begin() + 1, frame.dates.end());
  r.values = frame.values.bottomRows(T - 1).array().log() - frame.values.topRows(T - 1).array().log();
  return r;
}

void validate_window(const CrisisWindow& window, const Date& first, const Date& last) {
  if (window.end < window.start) {
    throw Error(ErrorKind::EmptyWindow, "window '" + window.label + "' ends before it starts");
  }
  if (window.end < first || last < window.start) {
    throw Error(ErrorKind::EmptyWindow, "window '" + window.label + "' lies outside the sample");
  }
}

}  // namespace volspill
