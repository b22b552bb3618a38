// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ncnet/bounds.hpp"
#include "ncnet/error.hpp"
#include "ncnet/fading.hpp"
#include "ncnet/powerchain.hpp"
#include "ncnet/simulate.hpp"
#include "ncnet/topology.hpp"

namespace ncnet::cli {

namespace {

struct Config {
  std::string topo_file;
  std::string gen_spec;
  std::string model_file;
  std::string grid = "8,16,5";
  std::string perm;
  std::size_t outer = 20000;
  std::size_t inner = 2000;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  std::size_t guard = kDefaultReceiverGuard;
  std::string format = "csv";
  std::string out_path;
  std::string plot_path;
  bool no_mc = false;
};

Topology load_topology_arg(const Config &cfg) {
  if (cfg.topo_file.empty() == cfg.gen_spec.empty())
    throw InputError("exactly one of --topo or --gen is required");
  if (!cfg.topo_file.empty()) return load_topology(cfg.topo_file);
  const std::uint64_t *seed = cfg.seed ? &*cfg.seed : nullptr;
  return generate(cfg.gen_spec, seed);
}

Topology load_pruned(const Config &cfg) {
  Topology topo = load_topology_arg(cfg);
  if (!topo.is_pruned())
    throw InputError("topology has a silent transmitter or deaf receiver; prune it first");
  return topo;
}

FadingModel load_model(const Config &cfg, const Topology &topo) {
  if (cfg.model_file.empty()) return FadingModel::iid(topo);
  return load_fading_model(topo, cfg.model_file);
}

std::vector<double> parse_grid(const std::string &spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
  if (parts.size() != 3) throw InputError("--grid expects START,STOP,POINTS");
  try {
    std::size_t used = 0;
    const double start = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument(parts[0]);
    const double stop = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
    const long points = std::stol(parts[2], &used);
    if (used != parts[2].size() || points < 1) throw std::invalid_argument(parts[2]);
    return log_grid(start, stop, static_cast<std::size_t>(points));
  } catch (const std::logic_error &) {
    throw InputError("cannot parse --grid '" + spec + "'");
  }
}

Permutation parse_perm(const std::string &spec, std::size_t n_tx) {
  Permutation perm;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ',');) {
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(p, &used);
    } catch (const std::logic_error &) {
      throw InputError("cannot parse --perm entry '" + p + "'");
    }
    if (used != p.size() || v < 1) throw InputError("--perm entries are 1-based indices");
    perm.push_back(static_cast<std::size_t>(v - 1));
  }
  if (!is_permutation_of(perm, n_tx))
    throw InputError("--perm must be a permutation of 1.." + std::to_string(n_tx));
  return perm;
}

// Writes to --out if given, else to `out`.
template <class Fn> void emit(const Config &cfg, std::ostream &out, Fn &&write) {
  if (cfg.out_path.empty()) {
    write(out);
    return;
  }
  std::ofstream f(cfg.out_path, std::ios::binary);
  if (!f) throw InputError("cannot open " + cfg.out_path + " for writing");
  write(f);
}

void write_plot(const std::string &path, const std::vector<std::pair<double, double>> &rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open " + path + " for writing");
  f << "# loglogE value\n";
  char buf[64];
  for (const auto &[x, y] : rows) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", x, y);
    f << buf;
  }
}

int cmd_kappa(const Config &cfg, std::ostream &out) {
  const Topology original = load_topology_arg(cfg);
  const PruneResult pr = prune(original);
  if (pr.degenerate) throw InputError("topology is empty after pruning");
  const LongestChain lc = longest_chain(pr.topology, cfg.guard);
  PowerChain chain;
  for (auto t : lc.chain.transmitters) chain.transmitters.push_back(pr.kept_tx[t]);
  for (auto r : lc.chain.witnesses) chain.witnesses.push_back(pr.kept_rx[r]);

  nlohmann::ordered_json j;
  j["n_t"] = original.n_tx();
  j["n_r"] = original.n_rx();
  j["kappa_star"] = lc.kappa;
  const auto cj = to_json(chain);
  j["chain"] = cj["transmitters"];
  j["witnesses"] = cj["witnesses"];
  auto removed = [](const IndexSet &s) {
    auto a = nlohmann::ordered_json::array();
    for (auto i : s) a.push_back(i + 1);
    return a;
  };
  j["removed_transmitters"] = removed(pr.removed_tx);
  j["removed_receivers"] = removed(pr.removed_rx);
  out << j.dump(2) << '\n';
  return kOk;
}

int cmd_decompose(const Config &cfg, std::ostream &out) {
  const Topology topo = load_pruned(cfg);
  Permutation perm;
  if (cfg.perm.empty()) {
    for (std::size_t t = 0; t < topo.n_tx(); ++t) perm.push_back(t);
  } else {
    perm = parse_perm(cfg.perm, topo.n_tx());
  }
  out << to_json(decompose(topo, perm)).dump(2) << '\n';
  return kOk;
}

void print_summary(std::ostream &os, const std::vector<SweepRecord> &records) {
  std::size_t feasible = 0;
  for (const auto &r : records) feasible += r.feasible ? 1 : 0;
  os << "kappa_star " << records.front().kappa_star;
  try {
    const auto target = records.front().n_outer > 0 || feasible == 0 ? FitTarget::monte_carlo
                                                                      : FitTarget::lower;
    const LoglogFit fit = fit_loglog_slope(records, target);
    char buf[128];
    std::snprintf(buf, sizeof buf, " slope %.6f intercept %.6f residual %.3g points %zu",
                  fit.slope, fit.intercept, fit.residual, fit.points);
    os << buf << (target == FitTarget::lower ? " (analytic lower bound)" : "");
  } catch (const InputError &e) {
    os << " slope n/a (" << e.what() << ")";
  }
  os << " feasible " << feasible << '/' << records.size() << '\n';
}

int cmd_sweep(const Config &cfg, std::ostream &out, std::ostream &err) {
  if (!cfg.seed) throw InputError("sweep requires --seed");
  if (cfg.format != "csv" && cfg.format != "json") throw InputError("--format must be csv or json");
  const Topology topo = load_pruned(cfg);
  const FadingModel model = load_model(cfg, topo);
  const auto grid = parse_grid(cfg.grid);

  SweepOptions opt;
  opt.n_outer = cfg.outer;
  opt.m_inner = cfg.inner;
  opt.seed = *cfg.seed;
  opt.workers = cfg.workers;
  opt.monte_carlo = !cfg.no_mc;
  const auto records = snr_sweep(model, grid, opt);

  emit(cfg, out, [&](std::ostream &os) {
    if (cfg.format == "csv")
      write_csv(os, records);
    else
      os << to_json(records).dump(2) << '\n';
  });
  if (!cfg.plot_path.empty()) {
    std::vector<std::pair<double, double>> rows;
    for (const auto &r : records) {
      const auto v = r.mc_estimate ? r.mc_estimate : r.analytic_lower;
      if (v) rows.emplace_back(std::log(std::log(r.snr)), *v);
    }
    write_plot(cfg.plot_path, rows);
  }
  print_summary(cfg.out_path.empty() ? err : out, records);

  for (const auto &r : records)
    if (r.feasible) return kOk;
  err << "every grid point is below the allocation threshold "
      << min_valid_snr(records.front().kappa_star) << '\n';
  return kInfeasible;
}

int cmd_bounds(const Config &cfg, std::ostream &out, std::ostream &err) {
  const Topology topo = load_pruned(cfg);
  const FadingModel model = load_model(cfg, topo);
  const auto grid = parse_grid(cfg.grid);
  std::vector<BoundReport> reports;
  for (double e : grid) reports.push_back(bound_report(model, e));

  emit(cfg, out, [&](std::ostream &os) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto &r : reports) arr.push_back(to_json(r));
    os << arr.dump(2) << '\n';
  });
  if (!cfg.plot_path.empty()) {
    std::vector<std::pair<double, double>> rows;
    for (const auto &r : reports)
      if (r.lower_bound) rows.emplace_back(std::log(std::log(r.snr)), *r.lower_bound);
    write_plot(cfg.plot_path, rows);
  }
  for (const auto &r : reports)
    if (r.feasible) return kOk;
  err << "every grid point is below the allocation threshold "
      << min_valid_snr(reports.front().kappa_star) << '\n';
  return kInfeasible;
}

void add_topology_flags(CLI::App *cmd, Config &cfg) {
  cmd->add_option("--topo", cfg.topo_file, "Topology JSON file");
  cmd->add_option("--gen", cfg.gen_spec,
                  "Generator: full:NT,NR | diagonal:N | wyner_linear:N | wyner_cyclic:N | "
                  "random:NT,NR,P[,SEED]");
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  Config cfg;
  CLI::App app{"Capacity pre-factor, bounds and Monte Carlo sweeps for non-coherent fading "
               "networks",
               "ncnet"};
  app.require_subcommand(1);

  auto *kappa = app.add_subcommand("kappa", "Longest power chain of a topology");
  add_topology_flags(kappa, cfg);
  kappa->add_option("--seed", cfg.seed, "Seed for random generators");
  kappa->add_option("--guard", cfg.guard, "Receiver-count guard of the exact solver")
      ->check(CLI::Range(std::size_t{1}, kMaxReceiverGuard));

  auto *dec = app.add_subcommand("decompose", "Chain decomposition for an ordering permutation");
  add_topology_flags(dec, cfg);
  dec->add_option("--seed", cfg.seed, "Seed for random generators");
  dec->add_option("--perm", cfg.perm, "1-based permutation, e.g. 2,1,3 (default identity)");

  auto *sweep = app.add_subcommand("sweep", "Bounds and Monte Carlo rates over an SNR grid");
  add_topology_flags(sweep, cfg);
  sweep->add_option("--model", cfg.model_file, "Fading model JSON (default IID CN(0,1))");
  sweep->add_option("--grid", cfg.grid, "START,STOP,POINTS in base-10 exponents")
      ->capture_default_str();
  sweep->add_option("--outer", cfg.outer, "Outer Monte Carlo samples")->capture_default_str();
  sweep->add_option("--inner", cfg.inner, "Inner mixture size")->capture_default_str();
  sweep->add_option("--seed", cfg.seed, "Root seed (required)");
  sweep->add_option("--workers", cfg.workers, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep->add_option("--format", cfg.format, "csv or json")->capture_default_str();
  sweep->add_option("--out", cfg.out_path, "Output file (default stdout)");
  sweep->add_option("--plot", cfg.plot_path, "Write two-column (log log E, rate) data here");
  sweep->add_flag("--no-mc", cfg.no_mc, "Skip the Monte Carlo estimate");

  auto *bounds = app.add_subcommand("bounds", "Analytic bounds over an SNR grid (JSON)");
  add_topology_flags(bounds, cfg);
  bounds->add_option("--model", cfg.model_file, "Fading model JSON (default IID CN(0,1))");
  bounds->add_option("--grid", cfg.grid, "START,STOP,POINTS in base-10 exponents")
      ->capture_default_str();
  bounds->add_option("--seed", cfg.seed, "Seed for random generators");
  bounds->add_option("--out", cfg.out_path, "Output file (default stdout)");
  bounds->add_option("--plot", cfg.plot_path,
                     "Write two-column (log log E, lower bound) data here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*kappa) return cmd_kappa(cfg, out);
    if (*dec) return cmd_decompose(cfg, out);
    if (*sweep) return cmd_sweep(cfg, out, err);
    if (*bounds) return cmd_bounds(cfg, out, err);
  } catch (const SizeGuardError &e) {
    err << "error: " << e.what() << '\n';
    return kSizeGuard;
  } catch (const InputError &e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const InfeasibleAllocation &e) {
    err << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const nlohmann::json::exception &e) {
    err << "error: malformed JSON: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

} // namespace ncnet::cli
