#include "volspill/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "volspill/errors.hpp"

namespace volspill {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); }

double to_double(const std::string& key, std::string s) {
  boost::algorithm::trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad(key + ": '" + s + "' is not a number");
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, s, boost::algorithm::is_any_of(","));
  for (auto& p : parts) boost::algorithm::trim(p);
  parts.erase(std::remove(parts.begin(), parts.end(), std::string()), parts.end());
  return parts;
}

std::string lower(std::string s) {
  boost::algorithm::to_lower(s);
  boost::algorithm::trim(s);
  return s;
}

Date parse_iso(const std::string& key, const std::string& text) {
  Date d;
  if (!parse_date(boost::algorithm::trim_copy(text), DateFormat::Iso, d)) bad(key + ": '" + text + "' is not a YYYY-MM-DD date");
  return d;
}

Eigen::VectorXd broadcast(const IniFile& ini, const std::string& key, Eigen::Index n, bool required) {
  const std::vector<double> v = ini.get_doubles(key);
  if (v.empty()) {
    if (required) bad(key + " is required");
    return {};
  }
  if (v.size() == 1) return Eigen::VectorXd::Constant(n, v[0]);
  if (static_cast<Eigen::Index>(v.size()) != n) bad(key + ": expected " + std::to_string(n) + " values");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), n);
}

}  // namespace

IniFile IniFile::parse(const std::string& text, std::filesystem::path origin) {
  IniFile f;
  f.path = std::move(origin);
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    bad(f.path.string() + ": line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      f.entries.emplace_back(section, body.data());
      continue;
    }
    for (const auto& [key, value] : body) f.entries.emplace_back(section + "." + key, value.data());
  }
  return f;
}

IniFile IniFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

const std::string* IniFile::find(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string IniFile::get(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? boost::algorithm::trim_copy(*v) : fallback;
}

std::string IniFile::require(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) bad("missing required key " + key);
  return boost::algorithm::trim_copy(*v);
}

double IniFile::get_double(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  return v ? to_double(key, *v) : fallback;
}

int IniFile::get_int(const std::string& key, int fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  const double d = to_double(key, *v);
  if (d != static_cast<double>(static_cast<long long>(d))) bad(key + " must be an integer");
  return static_cast<int>(d);
}

bool IniFile::get_bool(const std::string& key, bool fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  const std::string s = lower(*v);
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  bad(key + ": '" + *v + "' is not a boolean");
}

std::vector<double> IniFile::get_doubles(const std::string& key) const {
  std::vector<double> out;
  if (const std::string* v = find(key)) {
    for (const auto& p : split_list(*v)) out.push_back(to_double(key, p));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> IniFile::section(const std::string& name) const {
  std::vector<std::pair<std::string, std::string>> out;
  const std::string prefix = name + ".";
  for (const auto& [k, v] : entries) {
    if (k.rfind(prefix, 0) == 0) out.emplace_back(k.substr(prefix.size()), boost::algorithm::trim_copy(v));
  }
  return out;
}

std::filesystem::path IniFile::resolve(const std::string& value) const {
  std::filesystem::path p(value);
  if (p.is_absolute() || path.empty()) return p;
  return path.parent_path() / p;
}

std::uint64_t IniFile::hash() const {
  std::vector<std::string> lines;
  lines.reserve(entries.size());
  for (const auto& [k, v] : entries) lines.push_back(k + "=" + boost::algorithm::trim_copy(v));
  std::sort(lines.begin(), lines.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& line : lines) {
    for (unsigned char c : line) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= '\n';
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex_hash(std::uint64_t h) {
  std::ostringstream ss;
  ss << std::hex;
  ss.width(16);
  ss.fill('0');
  ss << h;
  return ss.str();
}

RunConfig parse_run_config(const IniFile& ini) {
  RunConfig c;
  c.config_hash = ini.hash();

  const std::string files = ini.get("input.files", ini.get("input.file", ""));
  for (const auto& f : split_list(files)) c.inputs.push_back(ini.resolve(f));
  if (c.inputs.empty()) bad("input.files is required");
  c.load.date_column = ini.get("input.date_column", "");
  for (const auto& a : split_list(ini.get("input.assets", ""))) c.load.asset_columns.push_back(a);
  const std::string fmt = lower(ini.get("input.date_format", "iso"));
  if (fmt == "iso") {
    c.load.date_format = DateFormat::Iso;
  } else if (fmt == "dmy") {
    c.load.date_format = DateFormat::DayMonthYear;
  } else {
    bad("input.date_format must be iso or dmy");
  }
  const std::string delim = ini.get("input.delimiter", ",");
  if (delim == "tab" || delim == "\\t") {
    c.load.delimiter = '\t';
  } else if (delim.size() == 1) {
    c.load.delimiter = delim[0];
  } else {
    bad("input.delimiter must be a single character or 'tab'");
  }

  const std::string transform = lower(ini.get("returns.transform", "log"));
  if (transform != "log") bad("returns.transform supports only 'log'");
  c.return_scale = ini.get_double("returns.scale", 1.0);
  if (!(c.return_scale > 0.0)) bad("returns.scale must be positive");

  const std::string mean = lower(ini.get("mean.model", "arma"));
  if (mean == "arma") {
    c.mean = MeanModel::Arma;
  } else if (mean == "var") {
    c.mean = MeanModel::Var;
  } else if (mean == "none") {
    c.mean = MeanModel::None;
  } else {
    bad("mean.model must be arma, var or none");
  }
  c.max_ar = ini.get_int("mean.max_ar", c.max_ar);
  c.max_ma = ini.get_int("mean.max_ma", c.max_ma);
  c.max_var_lag = ini.get_int("mean.max_var_lag", c.max_var_lag);
  if (c.max_ar < 0 || c.max_ma < 0 || c.max_var_lag < 1) bad("mean orders must be non-negative (VAR lag >= 1)");
  const std::string crit = lower(ini.get("mean.criterion", "aic"));
  if (crit == "aic") {
    c.criterion = Criterion::Aic;
  } else if (crit == "bic") {
    c.criterion = Criterion::Bic;
  } else {
    bad("mean.criterion must be aic or bic");
  }
  c.mean_constant = ini.get_bool("mean.constant", true);

  const std::string uni = lower(ini.get("univariate.model", "garch"));
  if (uni == "garch") {
    c.univariate = UniModel::Garch;
  } else if (uni == "gjr") {
    c.univariate = UniModel::Gjr;
  } else {
    bad("univariate.model must be garch or gjr");
  }

  const std::string corr = lower(ini.get("correlation.model", "dcc"));
  if (corr == "ccc") {
    c.correlation = CorrModel::Ccc;
  } else if (corr == "dcc") {
    c.correlation = CorrModel::Dcc;
  } else if (corr == "gdcc") {
    c.correlation = CorrModel::Gdcc;
  } else if (corr == "agdcc") {
    c.correlation = CorrModel::Agdcc;
  } else {
    bad("correlation.model must be ccc, dcc, gdcc or agdcc");
  }
  c.joint = ini.get_bool("correlation.joint", false);
  for (const auto& p : split_list(ini.get("correlation.pairs", ""))) {
    std::vector<std::string> ab;
    boost::algorithm::split(ab, p, boost::algorithm::is_any_of(":"));
    if (ab.size() != 2) bad("correlation.pairs entries must look like a:b, got '" + p + "'");
    boost::algorithm::trim(ab[0]);
    boost::algorithm::trim(ab[1]);
    if (ab[0] == ab[1]) bad("pair '" + p + "' repeats one asset");
    c.pairs.emplace_back(ab[0], ab[1]);
  }

  for (const auto& [label, value] : ini.section("windows")) {
    const auto parts = split_list(value);
    if (parts.size() != 2) bad("windows." + label + " must be 'start, end'");
    CrisisWindow w{label, parse_iso("windows." + label, parts[0]), parse_iso("windows." + label, parts[1])};
    if (w.end < w.start) bad("windows." + label + ": end precedes start");
    c.windows.push_back(std::move(w));
  }

  if (const std::string* ctx = ini.find("switch.context")) c.switch_context = ini.resolve(boost::algorithm::trim_copy(*ctx));
  c.eua_column = ini.get("switch.price_column", c.eua_column);

  c.diag_lags = ini.get_int("diagnostics.lags", c.diag_lags);
  if (c.diag_lags < 1) bad("diagnostics.lags must be positive");
  c.output_dir = ini.resolve(ini.get("output.dir", "volspill_out"));
  c.seed = static_cast<std::uint64_t>(ini.get_double("output.seed", 0.0));
  c.raw = ini.get_bool("output.raw", false);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(IniFile::load(path)); }

DgpConfig parse_dgp_config(const IniFile& ini) {
  DgpConfig c;
  c.config_hash = ini.hash();
  Dgp& d = c.dgp;
  d.T = ini.get_int("dgp.T", d.T);
  d.burn_in = ini.get_int("dgp.burn_in", d.burn_in);
  d.seed = static_cast<std::uint64_t>(ini.get_double("dgp.seed", 0.0));
  const int k = ini.get_int("dgp.assets", 1);
  if (k < 1) bad("dgp.assets must be positive");
  const int reps = ini.get_int("dgp.replications", 0);
  if (reps < 0) bad("dgp.replications must be non-negative");
  c.replications = static_cast<std::size_t>(reps);

  const std::string shocks = lower(ini.get("dgp.shocks", "gaussian"));
  if (shocks == "gaussian") {
    d.shocks.kind = ShockDist::Kind::Gaussian;
  } else if (shocks == "student_t") {
    d.shocks.kind = ShockDist::Kind::StudentT;
  } else if (shocks == "skewed") {
    d.shocks.kind = ShockDist::Kind::Skewed;
  } else {
    bad("dgp.shocks must be gaussian, student_t or skewed");
  }
  d.shocks.nu = ini.get_double("dgp.nu", d.shocks.nu);
  d.shocks.lambda = ini.get_double("dgp.lambda", d.shocks.lambda);

  for (int i = 1; i <= k; ++i) {
    const std::string own = "x" + std::to_string(i) + ".";
    auto pick = [&](const std::string& key) -> const std::string* {
      if (const std::string* v = ini.find(own + key)) return v;
      return ini.find("univariate." + key);
    };
    auto pick_int = [&](const std::string& key, int fallback) {
      const std::string* v = pick(key);
      return v ? static_cast<int>(to_double(key, *v)) : fallback;
    };
    auto pick_list = [&](const std::string& key) {
      std::vector<double> out;
      if (const std::string* v = pick(key)) {
        for (const auto& s : split_list(*v)) out.push_back(to_double(key, s));
      }
      return out;
    };
    GarchSpec spec;
    const std::string* model = pick("model");
    const std::string m = model ? lower(*model) : "garch";
    if (m != "garch" && m != "gjr") bad(own + "model must be garch or gjr");
    spec.o = m == "gjr" ? 1 : 0;
    spec.p = pick_int("p", spec.p);
    spec.o = pick_int("o", spec.o);
    spec.q = pick_int("q", spec.q);
    spec.delta = pick_int("delta", spec.delta);

    GarchParams prm;
    const std::string* omega = pick("omega");
    if (!omega) bad("asset " + std::to_string(i) + ": omega is required");
    prm.omega = to_double("omega", *omega);
    auto vec = [&](const std::string& key, int n) {
      const std::vector<double> v = pick_list(key);
      if (static_cast<int>(v.size()) != n) {
        bad("asset " + std::to_string(i) + ": " + key + " needs " + std::to_string(n) + " values");
      }
      return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), n));
    };
    prm.alpha = vec("alpha", spec.p);
    prm.gamma = spec.o > 0 ? vec("gamma", spec.o) : Eigen::VectorXd();
    prm.beta = spec.q > 0 ? vec("beta", spec.q) : Eigen::VectorXd();
    d.specs.push_back(spec);
    d.params.push_back(std::move(prm));
  }

  const std::string corr = lower(ini.get("correlation.model", "none"));
  const auto kk = static_cast<Eigen::Index>(k);
  if (corr == "none") {
    d.corr = CorrModel::None;
  } else if (corr == "ccc") {
    d.corr = CorrModel::Ccc;
  } else if (corr == "dcc") {
    d.corr = CorrModel::Dcc;
  } else if (corr == "gdcc") {
    d.corr = CorrModel::Gdcc;
  } else if (corr == "agdcc") {
    d.corr = CorrModel::Agdcc;
  } else {
    bad("correlation.model must be none, ccc, dcc, gdcc or agdcc");
  }
  if (d.corr != CorrModel::None) {
    const std::vector<double> target = ini.get_doubles("correlation.target");
    if (!target.empty()) {
      if (static_cast<Eigen::Index>(target.size()) != kk * kk) bad("correlation.target needs k*k values (row-major)");
      d.target = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(target.data(), kk, kk);
    } else {
      const double rho = ini.get_double("correlation.rho", 0.0);
      d.target = Eigen::MatrixXd::Constant(kk, kk, rho);
      d.target.diagonal().setOnes();
    }
  }
  if (d.corr == CorrModel::Dcc) {
    const std::vector<double> a = ini.get_doubles("correlation.alpha"), b = ini.get_doubles("correlation.beta");
    if (a.empty()) bad("correlation.alpha is required for dcc");
    d.dcc.alpha = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
    d.dcc.beta = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  }
  if (d.corr == CorrModel::Gdcc || d.corr == CorrModel::Agdcc) {
    d.agdcc.a = broadcast(ini, "correlation.a", kk, true);
    d.agdcc.b = broadcast(ini, "correlation.b", kk, true);
    if (d.corr == CorrModel::Agdcc) d.agdcc.g = broadcast(ini, "correlation.g", kk, true);
  }
  c.output_dir = ini.resolve(ini.get("output.dir", "volspill_sim"));
  try {
    validate(d);
  } catch (const Error& e) {
    bad(e.what());
  }
  return c;
}

DgpConfig load_dgp_config(const std::filesystem::path& path) { return parse_dgp_config(IniFile::load(path)); }

SwitchConfig parse_switch_config(const IniFile& ini) {
  SwitchConfig c;
  c.config_hash = ini.hash();
  SwitchContext& x = c.context;
  auto plant = [&](const std::string& name, PlantParams& p) {
    p.efficiency = ini.get_double(name + ".efficiency", p.efficiency);
    p.emission_factor = ini.get_double(name + ".emission_factor", p.emission_factor);
  };
  plant("coal_efficient", x.coal_efficient);
  plant("coal_inefficient", x.coal_inefficient);
  plant("gas_efficient", x.gas_efficient);
  plant("gas_inefficient", x.gas_inefficient);
  x.fc_coal = ini.get_double("market.fc_coal", x.fc_coal);
  x.fc_gas = ini.get_double("market.fc_gas", x.fc_gas);
  x.rho = ini.get_double("market.rho", x.rho);
  x.sigma_fc = ini.get_double("market.sigma_fc", x.sigma_fc);
  x.sigma_ec = ini.get_double("market.sigma_ec", x.sigma_ec);
  c.price_column = ini.get("prices.column", c.price_column);
  const std::string unit = lower(ini.get("prices.unit", "eur_per_tonne"));
  if (unit == "eur_per_tonne") {
    c.price_per_tonne = true;
  } else if (unit == "eur_per_kg") {
    c.price_per_tonne = false;
  } else {
    bad("prices.unit must be eur_per_tonne or eur_per_kg");
  }
  try {
    validate(x);
  } catch (const Error& e) {
    bad(e.what());
  }
  return c;
}

SwitchConfig load_switch_config(const std::filesystem::path& path) { return parse_switch_config(IniFile::load(path)); }

}  // namespace volspill
