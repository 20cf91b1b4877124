#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>

#ifndef CRQ_VERSION
#define CRQ_VERSION "0.0.0+unknown"
#endif

namespace crq::cli {

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// JSON has no inf/nan; they are stored as null.
nlohmann::json jnum(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

double snr_db_of(const GridPoint& p) {
  if (!std::isnan(p.snr_db)) return p.snr_db;
  const double s2 = p.config.sigma2;
  return s2 > 0.0 ? -10.0 * std::log10(s2) : std::numeric_limits<double>::infinity();
}

nlohmann::json theory_json(const AsymptoticCharacterization& c) {
  return {{"a_star", c.a_star},
          {"tau2_star", c.fp_star.tau2},
          {"gamma_star", c.fp_star.gamma},
          {"residual_tau", c.fp_star.residuals[0]},
          {"residual_gamma", c.fp_star.residuals[1]},
          {"alpha_bar", c.alpha_bar},
          {"beta_bar", c.beta_bar},
          {"snr_bar", jnum(c.snr_bar)},
          {"sep", c.sep}};
}

nlohmann::json sim_json(const McReport& r) {
  return {{"sep_hat", r.sep_hat},
          {"sep_ci", r.sep_ci},
          {"errors", r.errors},
          {"trials", r.trials},
          {"users", r.users},
          {"alpha_hat", r.alpha_hat},
          {"alpha_se", jnum(r.alpha_se)},
          {"var_hat", r.var_hat},
          {"var_se", jnum(r.var_se)},
          {"second_moment", r.second_moment},
          {"second_moment_se", jnum(r.second_moment_se)},
          {"skewness", r.skewness},
          {"skewness_se", jnum(r.skewness_se)},
          {"sign_agreement", jnum(r.sign_agreement)},
          {"mean_a_hat", r.mean_a_hat}};
}

struct CsvRow {
  GridPoint point;
  const AsymptoticCharacterization* theory = nullptr;
  const McReport* sim = nullptr;
};

void write_csv_header(std::ostream& csv, bool with_status) {
  const auto& cols = simulate_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) csv << (i ? "," : "") << cols[i];
  if (with_status) csv << ",status";
  csv << '\n';
}

std::string csv_escape(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

void write_csv_row(std::ostream& csv, const CsvRow& row, long long trials, std::uint64_t seed,
                   const std::string* status) {
  const RunConfig& c = row.point.config;
  const ModelParams m = c.model();
  const auto opt_int = [](const std::optional<int>& v) { return v ? std::to_string(*v) : ""; };
  const auto th = [&](double AsymptoticCharacterization::*f) {
    return row.theory ? num(row.theory->*f) : std::string();
  };
  const auto sm = [&](double McReport::*f) { return row.sim ? num(row.sim->*f) : std::string(); };
  csv << num(snr_db_of(row.point)) << ',' << num(m.rho) << ',' << num(m.lambda) << ','
      << num(m.delta) << ',' << opt_int(c.n) << ',' << opt_int(c.k) << ','
      << (row.sim ? std::to_string(trials) : "0") << ',' << th(&AsymptoticCharacterization::sep)
      << ',' << sm(&McReport::sep_hat) << ',' << sm(&McReport::sep_ci) << ','
      << th(&AsymptoticCharacterization::alpha_bar) << ',' << sm(&McReport::alpha_hat) << ','
      << th(&AsymptoticCharacterization::beta_bar) << ',' << sm(&McReport::var_hat) << ','
      << seed;
  if (status != nullptr) csv << ',' << csv_escape(*status);
  csv << '\n';
  csv.flush();
}

nlohmann::json point_json(const GridPoint& p) {
  const ModelParams m = p.config.model();
  nlohmann::json j = {{"snr_db", jnum(snr_db_of(p))},
                      {"sigma2", m.sigma2},
                      {"rho", m.rho},
                      {"lambda", m.lambda},
                      {"delta", m.delta},
                      {"squid", m.squid}};
  if (p.config.n) j["n"] = *p.config.n;
  if (p.config.k) j["k"] = *p.config.k;
  return j;
}

RunRecord start_record(const char* command, const RunConfig& config) {
  RunRecord r;
  r.version = artifact_version();
  r.command = command;
  r.started_at = utc_now();
  r.config = config.echo;
  return r;
}

bool only_noise_varies(const RunConfig& c) {
  for (const auto& axis : c.grid) {
    if (axis.key != "snr_db") return false;
  }
  return !c.squid;
}

}  // namespace

void to_json(nlohmann::json& j, const RunRecord& r) {
  j = {{"tool", r.tool},         {"version", r.version},         {"command", r.command},
       {"started_at", r.started_at}, {"finished_at", r.finished_at}, {"config", r.config},
       {"results", r.results}};
}

void from_json(const nlohmann::json& j, RunRecord& r) {
  j.at("tool").get_to(r.tool);
  j.at("version").get_to(r.version);
  j.at("command").get_to(r.command);
  j.at("started_at").get_to(r.started_at);
  j.at("finished_at").get_to(r.finished_at);
  j.at("config").get_to(r.config);
  r.results = j.at("results");
}

std::string artifact_version() { return CRQ_VERSION; }

const std::vector<std::string>& simulate_csv_columns() {
  static const std::vector<std::string> cols = {
      "snr_db",  "rho",        "lambda",  "delta",     "n",         "k",
      "trials",  "sep_theory", "sep_hat", "sep_ci",    "alpha_bar", "alpha_hat",
      "beta_bar", "var_hat",   "seed"};
  return cols;
}

RunRecord cmd_characterize(const RunConfig& config, std::ostream& out) {
  RunRecord rec = start_record("characterize", config);
  const ModelParams m = config.model();
  const AsymptoticCharacterization c = characterize(m);
  out << "delta      = " << num(m.delta) << '\n'
      << "rho        = " << num(m.rho) << (m.continuation() ? "  (rho -> 0+ continuation)" : "")
      << '\n'
      << "lambda     = " << num(m.lambda) << (m.squid ? "  (SQUID preset)" : "") << '\n'
      << "sigma2     = " << num(m.sigma2) << '\n'
      << "a_star     = " << num(c.a_star) << '\n'
      << "tau2_star  = " << num(c.fp_star.tau2) << '\n'
      << "gamma_star = " << num(c.fp_star.gamma) << '\n'
      << "alpha_bar  = " << num(c.alpha_bar) << '\n'
      << "beta_bar   = " << num(c.beta_bar) << '\n'
      << "snr_bar    = " << num(c.snr_bar) << '\n'
      << "sep        = " << num(c.sep) << '\n';
  GridPoint base{config.snr_db.value_or(std::numeric_limits<double>::quiet_NaN()), config};
  rec.results = {{"point", point_json(base)}, {"theory", theory_json(c)}};
  rec.finished_at = utc_now();
  return rec;
}

RunRecord cmd_simulate(const RunConfig& config, std::ostream& csv) {
  if (config.trials < 1) throw ConfigError("simulate needs trials >= 1");
  RunRecord rec = start_record("simulate", config);
  const auto points = expand_grid(config);
  MonteCarloOptions opts;
  opts.threads = config.threads;

  write_csv_header(csv, false);
  nlohmann::json rows = nlohmann::json::array();
  const auto emit = [&](const GridPoint& p, const McReport& r) {
    write_csv_row(csv, {p, &r.theory, &r}, config.trials, config.seed, nullptr);
    rows.push_back({{"point", point_json(p)}, {"theory", theory_json(r.theory)},
                    {"simulation", sim_json(r)}});
  };

  try {
    if (points.size() > 1 && only_noise_varies(config)) {
      std::vector<double> sigma2s;
      for (const auto& p : points) sigma2s.push_back(p.config.sigma2);
      const auto reports =
          run_sep_curve(config.system(), sigma2s, config.trials, config.seed, opts);
      for (std::size_t i = 0; i < points.size(); ++i) emit(points[i], reports[i]);
    } else {
      for (const auto& p : points) {
        emit(p, run_sep_experiment(p.config.system(), config.trials, config.seed, opts));
      }
    }
  } catch (const std::exception& e) {
    csv << "# FAILED: " << e.what() << '\n';
    csv.flush();
    throw;
  }
  rec.results = {{"rows", rows}};
  rec.finished_at = utc_now();
  return rec;
}

RunRecord cmd_sweep(const RunConfig& config, std::ostream& csv) {
  if (config.grid.empty()) throw ConfigError("sweep needs at least one grid axis");
  if (!config.theory_only && config.trials < 1) {
    throw ConfigError("sweep needs trials >= 1 unless theory_only is set");
  }
  RunRecord rec = start_record("sweep", config);
  const auto points = expand_grid(config);
  MonteCarloOptions opts;
  opts.threads = config.threads;

  write_csv_header(csv, true);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& p : points) {
    std::optional<AsymptoticCharacterization> theory;
    std::optional<McReport> sim;
    std::string status = "ok";
    try {
      theory = characterize(p.config.model());
      if (!config.theory_only) {
        sim = run_sep_experiment(p.config.system(), config.trials, config.seed, opts);
      }
    } catch (const Error& e) {
      status = e.what();
    }
    write_csv_row(csv, {p, theory ? &*theory : nullptr, sim ? &*sim : nullptr}, config.trials,
                  config.seed, &status);
    nlohmann::json row = {{"point", point_json(p)}, {"status", status}};
    if (theory) row["theory"] = theory_json(*theory);
    if (sim) row["simulation"] = sim_json(*sim);
    rows.push_back(std::move(row));
  }
  rec.results = {{"rows", rows}, {"theory_only", config.theory_only}};
  rec.finished_at = utc_now();
  return rec;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"CRQ one-bit precoding: asymptotic analysis and Monte Carlo validation", "crq"};
  app.require_subcommand(1);
  app.set_version_flag("--version", artifact_version());

  struct Flags {
    std::string config_path;
    Settings values;
    std::vector<std::string> grid;
    bool squid = false;
    bool theory_only = false;
  };
  auto flags = std::make_shared<Flags>();

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags->config_path, "Key-value config file; flags override it");
    const auto value = [&](const char* flag, const char* key, const char* help) {
      sub->add_option_function<std::string>(
          flag, [flags, key](const std::string& v) { flags->values[key] = v; }, help);
    };
    value("--seed", "seed", "Master RNG seed (u64)");
    value("--trials", "trials", "Monte Carlo trials");
    value("--snr-db", "snr_db", "SNR in dB; sigma2 = 10^(-snr/10)");
    value("--sigma2", "sigma2", "Noise variance");
    value("--rho", "rho", "l2 regularizer (0 = continuation)");
    value("--lambda", "lambda", "Box regularizer");
    value("--delta", "delta", "Load ratio K/N");
    value("--n", "n", "Transmit antennas N");
    value("--k", "k", "Users K");
    value("--solver", "solver", "convex | amp | cross-check");
    value("--out", "out", "Output path (CSV; JSON record beside it)");
    value("--threads", "threads", "Worker threads (0 = all cores)");
    sub->add_option("--grid", flags->grid, "Grid axis key=lo:hi:step or key=v1,v2 (repeatable)");
    sub->add_flag("--squid", flags->squid, "SQUID preset: rho = 0, lambda = sigma2 K/N");
    sub->add_flag("--theory-only", flags->theory_only, "Skip Monte Carlo in sweep");
  };
  CLI::App* characterize_cmd = app.add_subcommand("characterize", "Asymptotic characterization");
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo SEP experiment");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Theory/simulation table over a grid");
  for (auto* sub : {characterize_cmd, simulate_cmd, sweep_cmd}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  RunConfig config;
  try {
    Settings file;
    if (!flags->config_path.empty()) file = load_key_value_file(flags->config_path);
    Settings cmdline = flags->values;
    if (flags->squid) cmdline["squid"] = "true";
    if (flags->theory_only) cmdline["theory_only"] = "true";
    if (!flags->grid.empty()) {
      std::string joined;
      for (const auto& g : flags->grid) joined += (joined.empty() ? "" : ";") + g;
      cmdline["grid"] = joined;
    }
    config = resolve(merge(std::move(file), cmdline));
    if (simulate_cmd->parsed() && config.trials < 1) throw ConfigError("simulate needs --trials >= 1");
    if (!characterize_cmd->parsed() && !config.theory_only) (void)config.system();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DegenerateLambda& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  std::unique_ptr<std::ofstream> file_out;
  std::ostream* sink = &out;
  if (!config.out.empty() && !characterize_cmd->parsed()) {
    file_out = std::make_unique<std::ofstream>(config.out, std::ios::binary);
    if (!*file_out) {
      err << "config error: cannot write '" << config.out << "'\n";
      return kExitConfig;
    }
    sink = file_out.get();
  }

  RunRecord record;
  try {
    if (characterize_cmd->parsed()) {
      record = cmd_characterize(config, out);
    } else if (simulate_cmd->parsed()) {
      record = cmd_simulate(config, *sink);
    } else {
      record = cmd_sweep(config, *sink);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }

  if (!config.out.empty()) {
    const std::string path = characterize_cmd->parsed() ? config.out : config.out + ".json";
    std::ofstream json_out(path, std::ios::binary);
    if (!json_out) {
      err << "cannot write run record '" << path << "'\n";
      return kExitConfig;
    }
    json_out << nlohmann::json(record).dump(2) << '\n';
  }
  return kExitOk;
}

}  // namespace crq::cli
