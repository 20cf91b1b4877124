#include "config.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace crq::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "n",     "k",    "delta", "sigma2", "snr_db",      "rho",     "lambda", "squid",
      "solver", "trials", "seed", "out",  "theory_only", "threads", "grid"};
  return keys;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v.front() == '-') throw std::invalid_argument(v);
    const unsigned long long u = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects an unsigned 64-bit integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + key + "' expects a boolean, got '" + v + "'");
}

std::optional<std::string> get(const Settings& s, const std::string& key) {
  const auto it = s.find(key);
  if (it == s.end()) return std::nullopt;
  return it->second;
}

int checked_dim(const std::string& key, long long v) {
  if (v < 1 || v > 1'000'000) throw ConfigError("'" + key + "' must be in [1, 1e6]");
  return static_cast<int>(v);
}

}  // namespace

Settings parse_key_value(std::istream& in) {
  Settings out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (key == "grid" && out.count("grid") != 0) {
      out["grid"] += ";" + value;
    } else {
      out[key] = value;
    }
  }
  return out;
}

Settings load_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_key_value(in);
}

void write_key_value(std::ostream& out, const Settings& settings) {
  for (const auto& [key, value] : settings) {
    if (key == "grid") {
      std::stringstream ss(value);
      std::string axis;
      while (std::getline(ss, axis, ';')) out << "grid = " << axis << '\n';
    } else {
      out << key << " = " << value << '\n';
    }
  }
}

Settings merge(Settings file, const Settings& flags) {
  if (flags.count("snr_db") != 0) file.erase("sigma2");
  if (flags.count("sigma2") != 0) file.erase("snr_db");
  for (const auto& [key, value] : flags) file[key] = value;
  return file;
}

GridAxis parse_grid_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigError("grid '" + spec + "': expected key=values");
  GridAxis axis;
  axis.key = trim(spec.substr(0, eq));
  if (axis.key != "rho" && axis.key != "lambda" && axis.key != "snr_db" && axis.key != "delta") {
    throw ConfigError("grid key '" + axis.key + "' is not one of rho, lambda, snr_db, delta");
  }
  const std::string body = trim(spec.substr(eq + 1));
  if (body.find(':') != std::string::npos) {
    std::stringstream ss(body);
    std::string part;
    std::vector<double> range;
    while (std::getline(ss, part, ':')) range.push_back(to_double("grid", trim(part)));
    if (range.size() != 3 || !(range[2] > 0.0) || range[1] < range[0]) {
      throw ConfigError("grid '" + spec + "': expected lo:hi:step with step > 0 and lo <= hi");
    }
    // Index-based stepping avoids accumulating rounding in the values.
    const auto count = static_cast<long long>(std::floor((range[1] - range[0]) / range[2] + 1e-9));
    if (count > 100000) throw ConfigError("grid '" + spec + "' has too many points");
    for (long long i = 0; i <= count; ++i) {
      axis.values.push_back(range[0] + static_cast<double>(i) * range[2]);
    }
  } else {
    std::stringstream ss(body);
    std::string part;
    while (std::getline(ss, part, ',')) axis.values.push_back(to_double("grid", trim(part)));
  }
  if (axis.values.empty()) throw ConfigError("grid '" + spec + "' has no values");
  return axis;
}

ModelParams RunConfig::model() const {
  ModelParams p;
  p.delta = delta;
  p.sigma2 = sigma2;
  if (squid) {
    p.rho = 0.0;
    p.lambda = sigma2 * delta;  // sigma2 K / N
    p.squid = true;
  } else {
    p.rho = *rho;
    p.lambda = *lambda;
  }
  return p;
}

SystemConfig RunConfig::system() const {
  if (!n || !k) throw ConfigError("simulation needs the dimensions N and K (or one of them and delta)");
  SystemConfig c;
  c.n = *n;
  c.k = *k;
  c.sigma2 = sigma2;
  c.squid = squid;
  c.rho = squid ? 0.0 : *rho;
  c.lambda = squid ? sigma2 * c.delta() : *lambda;
  c.solver = solver;
  return c;
}

RunConfig resolve(const Settings& settings) {
  for (const auto& [key, value] : settings) {
    bool known = false;
    for (const auto& k : known_keys()) known = known || k == key;
    if (!known) throw ConfigError("unknown setting '" + key + "'");
  }

  RunConfig c;
  c.echo = settings;

  if (auto v = get(settings, "n")) c.n = checked_dim("n", to_integer("n", *v));
  if (auto v = get(settings, "k")) c.k = checked_dim("k", to_integer("k", *v));
  std::optional<double> delta;
  if (auto v = get(settings, "delta")) {
    delta = to_double("delta", *v);
    if (!(*delta > 0.0)) throw ConfigError("delta must be positive");
  }
  if (c.n && c.k) {
    const double ratio = static_cast<double>(*c.k) / static_cast<double>(*c.n);
    if (delta && std::abs(*delta * *c.n - *c.k) > 1e-9 * *c.k) {
      throw ConfigError("inconsistent dimensions: N * delta != K");
    }
    c.delta = ratio;
  } else if (delta && c.n) {
    const double k = *delta * *c.n;
    if (std::abs(k - std::round(k)) > 1e-9 * k) throw ConfigError("N * delta is not an integer");
    c.k = checked_dim("k", std::llround(k));
    c.delta = *delta;
  } else if (delta && c.k) {
    const double n = *c.k / *delta;
    if (std::abs(n - std::round(n)) > 1e-9 * n) throw ConfigError("K / delta is not an integer");
    c.n = checked_dim("n", std::llround(n));
    c.delta = *delta;
  } else if (delta) {
    c.delta = *delta;
  } else {
    throw ConfigError("system size missing: give delta, or two of N, K, delta");
  }

  const auto sigma2 = get(settings, "sigma2");
  const auto snr_db = get(settings, "snr_db");
  if (sigma2.has_value() == snr_db.has_value()) {
    throw ConfigError("give exactly one of sigma2 and snr_db");
  }
  if (snr_db) {
    c.snr_db = to_double("snr_db", *snr_db);
    c.sigma2 = sigma2_from_snr_db(*c.snr_db);
  } else {
    c.sigma2 = to_double("sigma2", *sigma2);
    if (!(c.sigma2 >= 0.0)) throw ConfigError("sigma2 must be nonnegative");
  }

  if (auto v = get(settings, "squid")) c.squid = to_bool("squid", *v);
  if (auto v = get(settings, "rho")) c.rho = to_double("rho", *v);
  if (auto v = get(settings, "lambda")) c.lambda = to_double("lambda", *v);
  if (c.squid) {
    if (c.rho || c.lambda) throw ConfigError("squid sets rho and lambda itself; drop rho/lambda");
    if (!(c.sigma2 * c.delta > 0.0)) {
      throw DegenerateLambda("squid preset: lambda = sigma2 K / N is zero");
    }
  } else {
    if (!c.lambda) throw ConfigError("lambda is required (or use squid)");
    if (!c.rho) throw ConfigError("rho is required (or use squid)");
    if (!(*c.lambda > 0.0)) throw ConfigError("lambda must be positive");
    if (!(*c.rho >= 0.0)) throw ConfigError("rho must be nonnegative");
  }

  if (auto v = get(settings, "solver")) c.solver = parse_solver_backend(*v);
  if (auto v = get(settings, "trials")) {
    c.trials = to_integer("trials", *v);
    if (c.trials < 1) throw ConfigError("trials must be at least 1");
  }
  if (auto v = get(settings, "seed")) c.seed = to_u64("seed", *v);
  if (auto v = get(settings, "out")) c.out = *v;
  if (auto v = get(settings, "theory_only")) c.theory_only = to_bool("theory_only", *v);
  if (auto v = get(settings, "threads")) {
    const long long t = to_integer("threads", *v);
    if (t < 0 || t > 1024) throw ConfigError("threads must be in [0, 1024]");
    c.threads = static_cast<unsigned>(t);
  }
  if (auto v = get(settings, "grid")) {
    std::stringstream ss(*v);
    std::string axis;
    while (std::getline(ss, axis, ';')) {
      if (trim(axis).empty()) continue;
      c.grid.push_back(parse_grid_axis(axis));
    }
    if (c.grid.size() > 2) throw ConfigError("at most two grid axes are supported");
    if (c.grid.size() == 2 && c.grid[0].key == c.grid[1].key) {
      throw ConfigError("grid axes must differ");
    }
    for (const auto& axis : c.grid) {
      if (c.squid && (axis.key == "rho" || axis.key == "lambda")) {
        throw ConfigError("squid fixes rho and lambda; they cannot be swept");
      }
    }
  }
  c.model().validate();
  return c;
}

std::vector<GridPoint> expand_grid(const RunConfig& config) {
  const auto base_snr = config.snr_db.value_or(std::numeric_limits<double>::quiet_NaN());
  std::vector<GridPoint> points{{base_snr, config}};
  for (const auto& axis : config.grid) {
    std::vector<GridPoint> next;
    next.reserve(points.size() * axis.values.size());
    for (const auto& p : points) {
      for (double v : axis.values) {
        GridPoint q = p;
        RunConfig& c = q.config;
        if (axis.key == "rho") {
          if (!(v >= 0.0)) throw ConfigError("grid rho values must be nonnegative");
          c.rho = v;
        } else if (axis.key == "lambda") {
          if (!(v > 0.0)) throw ConfigError("grid lambda values must be positive");
          c.lambda = v;
        } else if (axis.key == "snr_db") {
          c.snr_db = v;
          c.sigma2 = sigma2_from_snr_db(v);
          q.snr_db = v;
        } else if (axis.key == "delta") {
          if (!(v > 0.0)) throw ConfigError("grid delta values must be positive");
          c.delta = v;
          if (c.n) {
            const double k = v * *c.n;
            if (std::abs(k - std::round(k)) > 1e-9 * k) {
              throw ConfigError("grid delta=" + std::to_string(v) + ": N * delta is not an integer");
            }
            c.k = static_cast<int>(std::llround(k));
          } else {
            c.k.reset();
          }
        }
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

}  // namespace crq::cli
