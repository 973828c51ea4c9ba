#include "volspill/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "volspill/errors.hpp"

namespace volspill {

namespace {

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

std::string provenance_line(const Provenance& p) {
  std::ostringstream ss;
  ss << "# volspill " << kVersion << " config_hash=";
  ss << std::hex;
  ss.width(16);
  ss.fill('0');
  ss << p.config_hash << std::dec << " seed=" << p.seed;
  if (!p.rng.empty()) ss << " rng=" << p.rng;
  return ss.str();
}

std::string format_number(double v, bool raw) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, raw ? "%.17g" : "%.6g", v);
  return buf;
}

void write_csv(std::ostream& out, const Table& table, const Provenance& prov) {
  out << provenance_line(prov) << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << escape(table.columns[c]);
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << escape(row[c]);
    out << '\n';
  }
}

void write_csv_file(const std::filesystem::path& path, const Table& table, const Provenance& prov) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_csv(out, table, prov);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

Table read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  Table t;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      t.columns = split_csv_line(line);
      header = false;
    } else {
      t.rows.push_back(split_csv_line(line));
    }
  }
  return t;
}

Table recovery_table(const RecoveryReport& report, bool raw) {
  Table t;
  t.columns = {"parameter", "truth", "mean", "bias", "rmse", "count", "replications", "failures"};
  for (const auto& p : report.params) {
    t.rows.push_back({p.name, format_number(p.truth, raw), format_number(p.mean, raw), format_number(p.bias, raw),
                      format_number(p.rmse, raw), std::to_string(p.count), std::to_string(report.replications),
                      std::to_string(report.failures)});
  }
  return t;
}

Table simulation_table(const Simulation& sim, bool raw) {
  Table t;
  t.columns = {"date", "asset", "epsilon", "sigma2", "xi"};
  const auto& r = sim.returns;
  for (std::size_t s = 0; s < r.rows(); ++s) {
    const auto ts = static_cast<Eigen::Index>(s);
    for (std::size_t i = 0; i < r.cols(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      t.rows.push_back({format_date(r.dates[s]), r.assets[i], format_number(r.values(ts, ii), raw),
                        format_number(sim.sigma2(ts, ii), raw), format_number(sim.xi(ts, ii), raw)});
    }
  }
  return t;
}

Table simulated_rho_table(const Simulation& sim, bool raw) {
  Table t;
  t.columns = {"date", "asset_i", "asset_j", "rho"};
  const auto& r = sim.returns;
  for (std::size_t s = 0; s < sim.R.size(); ++s) {
    for (std::size_t i = 0; i < r.cols(); ++i) {
      for (std::size_t j = i + 1; j < r.cols(); ++j) {
        t.rows.push_back({format_date(r.dates[s]), r.assets[i], r.assets[j],
                          format_number(sim.R[s](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), raw)});
      }
    }
  }
  return t;
}

}  // namespace volspill
