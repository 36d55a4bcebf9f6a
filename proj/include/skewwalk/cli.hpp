#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skewwalk/conv_seq.hpp"
#include "skewwalk/errors.hpp"
#include "skewwalk/lattice_pmf.hpp"
#include "skewwalk/moment_engine.hpp"
#include "skewwalk/report.hpp"
#include "skewwalk/simulator.hpp"

namespace skewwalk {

enum class Command {
  none,
  pmf,
  convolution,
  tauberian,
  moments,
  tightness_scan,
  simulate,
  converge
};

inline const char* command_name(Command c) {
  switch (c) {
    case Command::pmf: return "pmf";
    case Command::convolution: return "convolution";
    case Command::tauberian: return "tauberian";
    case Command::moments: return "moments";
    case Command::tightness_scan: return "tightness-scan";
    case Command::simulate: return "simulate";
    case Command::converge: return "converge";
    default: return "none";
  }
}

enum class OutputFormat { csv, json };

struct ExperimentConfig {
  Command command = Command::none;
  std::vector<double> alphas = {0.7};
  std::vector<long long> n_list = {1024};
  long long horizon = 1;
  std::uint64_t replicates = 100000;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  OutputFormat format = OutputFormat::csv;
  unsigned threads = 1;
  // command-specific knobs (negative/zero sentinels mean "not set")
  long long pair_j = -1;
  long long pair_k = -1;
  double time_s = -1.0;
  double time_t = -1.0;
  double converge_t = 1.0;
  std::uint64_t kmax = 1000;
  SamplerId sampler = SamplerId::direct;
  bool dump_paths = false;
  std::uint64_t nongrid_samples = 1000;

  bool operator==(const ExperimentConfig&) const = default;

  /// Canonical flag echo: feeding this back to parse_config reproduces an
  /// equal config regardless of environment variables.
  std::vector<std::string> canonical_argv() const {
    std::vector<std::string> argv;
    argv.push_back(command_name(command));
    auto push = [&argv](const std::string& flag, const std::string& value) {
      argv.push_back(flag);
      argv.push_back(value);
    };
    std::string alpha_csv;
    for (std::size_t i = 0; i < alphas.size(); ++i)
      alpha_csv += (i ? "," : "") + format_double(alphas[i]);
    push("--alpha", alpha_csv);
    std::string n_csv;
    for (std::size_t i = 0; i < n_list.size(); ++i)
      n_csv += (i ? "," : "") + std::to_string(n_list[i]);
    push("--n", n_csv);
    push("--horizon", std::to_string(horizon));
    push("--replicates", std::to_string(replicates));
    push("--seed", std::to_string(seed));
    push("--out", out_dir);
    push("--format", format == OutputFormat::csv ? "csv" : "json");
    push("--threads", std::to_string(threads));
    if (command == Command::moments) {
      if (pair_j >= 0) push("--j", std::to_string(pair_j));
      if (pair_k >= 0) push("--k", std::to_string(pair_k));
      if (time_s >= 0.0) push("--s", format_double(time_s));
      if (time_t >= 0.0) push("--t", format_double(time_t));
    }
    if (command == Command::converge) push("--t", format_double(converge_t));
    if (command == Command::convolution || command == Command::tauberian)
      push("--kmax", std::to_string(kmax));
    if (command == Command::simulate) {
      push("--sampler", sampler_name(sampler));
      if (dump_paths) argv.push_back("--dump-paths");
    }
    if (command == Command::tightness_scan)
      push("--nongrid", std::to_string(nongrid_samples));
    return argv;
  }
};

/// Raised when --help was requested; carries the text to print.
struct help_requested {
  std::string text;
};

inline const char* kUsageText =
    "skewwalk <command> [options]\n"
    "\n"
    "commands:\n"
    "  pmf             exact n-step law of the walk\n"
    "  convolution     return-probability sequence g and its powers mu, nu\n"
    "  tauberian       partial-sum ratios against the power-law profile\n"
    "  moments         fourth moment of one increment, with term breakdown\n"
    "  tightness-scan  sup of E|X(t)-X(s)|^4/(t-s)^2 over grid pairs\n"
    "  simulate        sampled endpoint law vs the exact one\n"
    "  converge        KS distance to the skew Brownian marginal\n"
    "\n"
    "common options: --alpha --n --horizon --replicates --seed --out\n"
    "                --format csv|json --threads\n"
    "run 'skewwalk <command> --help' for the full option list\n";

/// Parses and validates a full command line (without the program name).
/// Throws usage_error on bad input and help_requested for --help.
inline ExperimentConfig parse_config(const std::vector<std::string>& argv) {
  ExperimentConfig cfg;
  if (const char* env = std::getenv("SKEWWALK_OUT")) cfg.out_dir = env;

  CLI::App app{"skew random walk laboratory"};
  app.fallthrough();
  std::string format_text = cfg.format == OutputFormat::csv ? "csv" : "json";
  std::string sampler_text = "direct";
  app.add_option("--alpha", cfg.alphas,
                 "skewness parameter(s) in (0,1), comma separated")
      ->delimiter(',');
  app.add_option("--n", cfg.n_list, "scale(s) / step counts, comma separated")
      ->delimiter(',');
  app.add_option("--horizon", cfg.horizon, "grid horizon in units of time");
  app.add_option("--replicates", cfg.replicates, "Monte Carlo replicates");
  app.add_option("--seed", cfg.seed, "master seed");
  app.add_option("--out", cfg.out_dir,
                 "output directory (default: $SKEWWALK_OUT or ./out)");
  app.add_option("--format", format_text, "output format: csv or json");
  app.add_option("--threads", cfg.threads, "worker threads");

  CLI::App* cmd_pmf = app.add_subcommand("pmf", "exact n-step law");
  CLI::App* cmd_conv =
      app.add_subcommand("convolution", "g, mu = g*g, nu = g*g*g*g");
  CLI::App* cmd_taub =
      app.add_subcommand("tauberian", "partial-sum ratio diagnostics");
  CLI::App* cmd_moments =
      app.add_subcommand("moments", "fourth moment of one increment");
  CLI::App* cmd_scan =
      app.add_subcommand("tightness-scan", "grid supremum scan");
  CLI::App* cmd_sim = app.add_subcommand("simulate", "sampled endpoint law");
  CLI::App* cmd_converge =
      app.add_subcommand("converge", "KS distance to the limit marginal");
  app.require_subcommand(0, 1);

  cmd_conv->add_option("--kmax", cfg.kmax, "largest index");
  cmd_taub->add_option("--kmax", cfg.kmax, "largest index");
  cmd_moments->add_option("--j", cfg.pair_j, "left grid index");
  cmd_moments->add_option("--k", cfg.pair_k, "right grid index");
  cmd_moments->add_option("--s", cfg.time_s, "left time (non-grid variant)");
  cmd_moments->add_option("--t", cfg.time_t, "right time (non-grid variant)");
  cmd_sim->add_option("--sampler", sampler_text,
                      "path sampler: direct or excursion");
  cmd_sim->add_flag("--dump-paths", cfg.dump_paths, "emit raw paths as well");
  cmd_converge->add_option("--t", cfg.converge_t,
                           "time of the compared marginal");
  cmd_scan->add_option("--nongrid", cfg.nongrid_samples,
                       "sampled non-grid pairs per scale");

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    throw help_requested{app.help()};
  } catch (const CLI::ParseError& e) {
    throw usage_error(e.what());
  }

  if (cmd_pmf->parsed()) cfg.command = Command::pmf;
  else if (cmd_conv->parsed()) cfg.command = Command::convolution;
  else if (cmd_taub->parsed()) cfg.command = Command::tauberian;
  else if (cmd_moments->parsed()) cfg.command = Command::moments;
  else if (cmd_scan->parsed()) cfg.command = Command::tightness_scan;
  else if (cmd_sim->parsed()) cfg.command = Command::simulate;
  else if (cmd_converge->parsed()) cfg.command = Command::converge;
  else throw usage_error("no command given");

  if (format_text == "csv") cfg.format = OutputFormat::csv;
  else if (format_text == "json") cfg.format = OutputFormat::json;
  else throw usage_error("--format must be csv or json");
  if (sampler_text == "direct") cfg.sampler = SamplerId::direct;
  else if (sampler_text == "excursion") cfg.sampler = SamplerId::excursion;
  else throw usage_error("--sampler must be direct or excursion");

  if (cfg.alphas.empty()) throw usage_error("--alpha needs at least one value");
  for (double a : cfg.alphas)
    if (!(std::isfinite(a) && a > 0.0 && a < 1.0))
      throw usage_error("alpha must lie in (0,1): bad --alpha value " +
                        format_double(a));
  if (cfg.n_list.empty()) throw usage_error("--n needs at least one value");
  for (long long n : cfg.n_list)
    if (n < 1) throw usage_error("--n values must be >= 1");
  if (cfg.horizon < 1) throw usage_error("--horizon must be >= 1");
  if (cfg.replicates < 1) throw usage_error("--replicates must be >= 1");
  if (cfg.threads < 1) throw usage_error("--threads must be >= 1");

  if (cfg.command == Command::moments) {
    const bool grid = cfg.pair_j >= 0 || cfg.pair_k >= 0;
    const bool interp = cfg.time_s >= 0.0 || cfg.time_t >= 0.0;
    if (grid == interp)
      throw usage_error("moments needs either --j/--k or --s/--t");
    if (grid && !(cfg.pair_j >= 0 && cfg.pair_k > cfg.pair_j))
      throw usage_error("moments requires 0 <= --j < --k");
    if (interp && !(cfg.time_s >= 0.0 && cfg.time_t > cfg.time_s))
      throw usage_error("moments requires 0 <= --s < --t");
  }
  if (cfg.command == Command::converge) {
    if (!(cfg.converge_t > 0.0)) throw usage_error("--t must be positive");
    for (long long n : cfg.n_list) {
      const double nt = static_cast<double>(n) * cfg.converge_t;
      if (std::abs(nt - std::llround(nt)) > 1e-9 || std::llround(nt) < 1)
        throw usage_error("--t times --n must be a positive integer");
    }
  }
  return cfg;
}

namespace detail {

inline std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return std::string(buf);
}

inline void emit_table(const ExperimentConfig& cfg, const TableWriter& table,
                       RunManifest& manifest) {
  const std::string ext = cfg.format == OutputFormat::csv ? ".csv" : ".json";
  const std::string bytes = cfg.format == OutputFormat::csv
                                ? table.to_csv()
                                : table.to_json(manifest);
  emit_file(cfg.out_dir, table.name() + ext, bytes, manifest, table.rows());
}

inline void run_pmf(const ExperimentConfig& cfg, RunManifest& manifest) {
  const SkewParam p(cfg.alphas.front());
  const long long k = cfg.n_list.front();
  const LatticePmf pmf = exact_pmf(p, k);
  TableWriter table("pmf", {"k", "m", "prob"});
  for (long long m = -k; m <= k; m += 2)
    table.row({k, m, pmf.prob(m)});
  emit_table(cfg, table, manifest);
}

inline void run_convolution(const ExperimentConfig& cfg,
                            RunManifest& manifest) {
  const std::size_t kmax = static_cast<std::size_t>(cfg.kmax);
  if (kmax > 4'000'000)
    throw resource_error("convolution kmax exceeds the memory budget");
  const ConvSeq g = g_seq(kmax);
  const ConvSeq mu = convolve(g, g);
  const ConvSeq nu = convolve(mu, mu);
  TableWriter table("convolution", {"name", "index", "value", "partial_sum"});
  auto emit_seq = [&table](const char* name, const ConvSeq& s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      acc += s.values[i];
      table.row({std::string(name), static_cast<long long>(i), s.values[i],
                 acc});
    }
  };
  emit_seq("g", g);
  emit_seq("mu", mu);
  emit_seq("nu", nu);
  emit_table(cfg, table, manifest);
}

inline void run_tauberian(const ExperimentConfig& cfg, RunManifest& manifest) {
  const std::size_t kmax = static_cast<std::size_t>(cfg.kmax);
  if (kmax > 4'000'000)
    throw resource_error("tauberian kmax exceeds the memory budget");
  const ConvSeq g = g_seq(kmax);
  const ConvSeq mu = convolve(g, g);
  const ConvSeq nu = convolve(mu, mu);
  TableWriter table("tauberian",
                    {"name", "theta", "c", "index", "partial_sum", "ratio"});
  struct Entry {
    const char* name;
    const ConvSeq* seq;
    double theta;
    double c;
  };
  // The constants c were pinned against the exact partial-sum closed forms
  // so that every ratio tends to 1 under the c * n^theta / Gamma(theta)
  // profile used by tauberian_ratio.
  const Entry entries[] = {{"g", &g, 0.5, std::sqrt(2.0)},
                           {"mu", &mu, 1.0, 0.5},
                           {"nu", &nu, 2.0, 0.125}};
  for (const Entry& e : entries) {
    const ConvSeq sums = partial_sums(*e.seq);
    const ConvSeq ratio = tauberian_ratio(*e.seq, e.theta, e.c);
    for (std::size_t i = 1; i <= kmax; i *= 2) {
      table.row({std::string(e.name), e.theta, e.c, static_cast<long long>(i),
                 sums.values[i], ratio.values[i]});
      if (i == kmax) break;
      if (i * 2 > kmax) {
        table.row({std::string(e.name), e.theta, e.c,
                   static_cast<long long>(kmax), sums.values[kmax],
                   ratio.values[kmax]});
        break;
      }
    }
  }
  emit_table(cfg, table, manifest);
}

inline void run_moments(const ExperimentConfig& cfg, RunManifest& manifest) {
  TableWriter table("moments",
                    {"alpha", "n", "j", "k", "s", "t", "fourth_moment",
                     "ratio", "term_diag", "term_square_pairs",
                     "term_pair_cross", "term_quad_cross"});
  const long long n = cfg.n_list.front();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double a : cfg.alphas) {
    const SkewParam p(a);
    if (cfg.pair_j >= 0) {
      const MomentReport r = moment_report(p, GridPair(n, cfg.pair_j, cfg.pair_k));
      table.row({a, n, r.pair.j, r.pair.k, r.pair.s(), r.pair.t(),
                 r.fourth_moment, r.ratio, r.term_breakdown[0],
                 r.term_breakdown[1], r.term_breakdown[2],
                 r.term_breakdown[3]});
    } else {
      const double moment = fourth_moment_interp(p, n, cfg.time_s, cfg.time_t);
      const double dt = cfg.time_t - cfg.time_s;
      const long long j =
          static_cast<long long>(std::floor(static_cast<double>(n) * cfg.time_s));
      const long long k =
          static_cast<long long>(std::floor(static_cast<double>(n) * cfg.time_t));
      table.row({a, n, j, k, cfg.time_s, cfg.time_t, moment,
                 moment / (dt * dt), nan, nan, nan, nan});
    }
  }
  emit_table(cfg, table, manifest);
}

inline void run_tightness_scan(const ExperimentConfig& cfg,
                               RunManifest& manifest) {
  TableWriter grid("tightness_scan",
                   {"alpha", "n", "j", "k", "fourth_moment", "ratio"});
  TableWriter nongrid("tightness_scan_nongrid",
                      {"alpha", "n", "s", "t", "fourth_moment", "ratio"});
  for (double a : cfg.alphas) {
    const SkewParam p(a);
    ScanOptions options;
    options.nongrid_samples = cfg.nongrid_samples;
    options.master_seed = cfg.seed;
    options.threads = cfg.threads;
    const TightnessReport report =
        tightness_scan(p, cfg.n_list, cfg.horizon, options);
    for (const TightnessRow& row : report.rows) {
      grid.row({a, row.n, row.j, row.k, row.fourth_moment, row.ratio});
      if (cfg.nongrid_samples > 0) {
        const double dt = row.nongrid_t - row.nongrid_s;
        nongrid.row({a, row.n, row.nongrid_s, row.nongrid_t,
                     row.nongrid_ratio * dt * dt, row.nongrid_ratio});
      }
    }
  }
  emit_table(cfg, grid, manifest);
  if (cfg.nongrid_samples > 0) emit_table(cfg, nongrid, manifest);
}

inline void run_simulate(const ExperimentConfig& cfg, RunManifest& manifest) {
  TableWriter table("simulate",
                    {"alpha", "sampler", "n", "replicates", "seed", "m",
                     "count", "emp_prob", "exact_prob"});
  const long long n = cfg.n_list.front();
  const std::size_t steps = static_cast<std::size_t>(n);
  if (n > 2048)
    throw resource_error("simulate path length exceeds the summary budget");
  for (double a : cfg.alphas) {
    const SkewParam p(a);
    const RngContract rng{cfg.seed, 0};
    const std::vector<double> counts = empirical_endpoint_counts(
        p, steps, cfg.replicates, rng, cfg.sampler, cfg.threads);
    const LatticePmf pmf = exact_pmf(p, n);
    for (long long m = -n; m <= n; m += 2) {
      const double count = counts[static_cast<std::size_t>(m + n)];
      table.row({a, std::string(sampler_name(cfg.sampler)), n,
                 static_cast<long long>(cfg.replicates),
                 static_cast<long long>(cfg.seed), m, count,
                 count / static_cast<double>(cfg.replicates), pmf.prob(m)});
    }
  }
  emit_table(cfg, table, manifest);
  if (cfg.dump_paths) {
    if (cfg.replicates * (steps + 1) > 10'000'000)
      throw resource_error("path dump would exceed the size budget");
    TableWriter paths("simulate_paths",
                      {"alpha", "replicate", "step", "position"});
    for (double a : cfg.alphas) {
      const SkewParam p(a);
      const RngContract rng{cfg.seed, 0};
      for (std::uint64_t r = 0; r < cfg.replicates; ++r) {
        const PathSample path =
            sample_path(p, steps, rng, cfg.sampler, r * steps);
        for (std::size_t i = 0; i < path.positions.size(); ++i)
          paths.row({a, static_cast<long long>(r), static_cast<long long>(i),
                     static_cast<long long>(path.positions[i])});
      }
    }
    emit_table(cfg, paths, manifest);
  }
}

inline void run_converge(const ExperimentConfig& cfg, RunManifest& manifest) {
  TableWriter table("converge", {"alpha", "n", "t", "ks_exact"});
  for (double a : cfg.alphas) {
    const SkewParam p(a);
    for (long long n : cfg.n_list) {
      const double ks = ks_statistic(p, n, cfg.converge_t, KsMode::exact);
      table.row({a, n, cfg.converge_t, ks});
    }
  }
  emit_table(cfg, table, manifest);
}

}  // namespace detail

/// Dispatches a validated config, writes the data files and the manifest,
/// and returns the manifest.
inline RunManifest run(const ExperimentConfig& cfg) {
  RunManifest manifest;
  manifest.version = kVersion;
  manifest.command = command_name(cfg.command);
  manifest.config_argv = cfg.canonical_argv();
  manifest.master_seed = cfg.seed;
  manifest.timestamp = detail::iso_timestamp();
  switch (cfg.command) {
    case Command::pmf: detail::run_pmf(cfg, manifest); break;
    case Command::convolution: detail::run_convolution(cfg, manifest); break;
    case Command::tauberian: detail::run_tauberian(cfg, manifest); break;
    case Command::moments: detail::run_moments(cfg, manifest); break;
    case Command::tightness_scan:
      detail::run_tightness_scan(cfg, manifest);
      break;
    case Command::simulate: detail::run_simulate(cfg, manifest); break;
    case Command::converge: detail::run_converge(cfg, manifest); break;
    case Command::none: throw usage_error("no command given");
  }
  const std::string manifest_bytes = manifest_to_json(manifest).dump(2) + "\n";
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  const std::filesystem::path path =
      std::filesystem::path(cfg.out_dir) / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw resource_error("cannot write " + path.string());
  out.write(manifest_bytes.data(),
            static_cast<std::streamsize>(manifest_bytes.size()));
  return manifest;
}

/// Exit statuses: 0 success, 1 no command (usage shown), 2 usage error,
/// 3 resource/io error, 4 internal assertion.
inline int cli_main(const std::vector<std::string>& argv, std::ostream& out,
                    std::ostream& err) {
  if (argv.empty()) {
    err << kUsageText;
    return 1;
  }
  ExperimentConfig cfg;
  try {
    cfg = parse_config(argv);
  } catch (const help_requested& help) {
    out << help.text;
    return 0;
  } catch (const usage_error& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }
  try {
    const RunManifest manifest = run(cfg);
    for (const auto& f : manifest.files)
      out << "wrote " << f.name << " (" << f.rows << " rows, digest "
          << f.digest << ")\n";
    return 0;
  } catch (const resource_error& e) {
    err << "resource error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace skewwalk
