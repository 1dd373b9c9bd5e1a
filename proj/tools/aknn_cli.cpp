// Command-line front end: sweeps, tuning, rate fits, theory tables and plots.
//
//   aknn rates --alpha 1 --beta 1 --d 1
//   aknn sweep --config samples/configs/laplace_cos5x_adaptive.json --out adaptive.csv
//   aknn fit adaptive.csv
//   aknn plot standard.csv adaptive.csv -o laplace.svg
//   aknn table --suite classification --trials 200
//
// Exit status: 0 on success, 2 for usage errors and bad configs, 1 when a run
// fails.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "aknn/aknn.hpp"

namespace {

using namespace aknn;

constexpr int kUsage = 2;
constexpr int kFailure = 1;

std::string fmt4(double v) { return format_fixed(v, 4); }
std::string fmt2(double v) { return format_fixed(v, 2); }

std::string exponent_str(const theory::Exponent& e) {
  return fmt4(e.value) + (e.log_factor ? " (log)" : "");
}

std::string rate_str(const SweepResult& r) {
  return r.fit ? fmt4(r.fit->rate()) : "n/a (" + r.fit_error + ")";
}

void print_sweep(const SweepResult& r) {
  if (r.tuned_parameter) std::cout << "tuned " << (r.method == "standard" ? "k" : "K") << " = "
                                   << format_double(*r.tuned_parameter) << "\n";
  for (const auto& p : r.points) {
    std::cout << "N=" << p.N << " mean=" << format_double(p.risk.mean)
              << " stderr=" << format_double(p.risk.std_error);
    if (p.k) std::cout << " k=" << p.k;
    std::cout << "\n";
  }
  std::cout << "rate " << rate_str(r);
  if (r.fit) std::cout << " +- " << fmt4(r.fit->slope_std_error);
  std::cout << "\n";
}

int cmd_rates(double alpha, double beta, std::optional<double> beta_prime, int d,
              std::optional<double> q_opt) {
  const double q = q_opt ? *q_opt : theory::q_star(d);
  const double bp = beta_prime ? *beta_prime : beta;
  theory::RateParams{alpha, beta, bp, d, q}.validate();

  std::cout << "lambda " << fmt4(theory::lambda(q, d)) << "  (q = " << fmt4(q) << ")\n";
  std::cout << "classification standard " << exponent_str(theory::standard_cls_rate(alpha, beta, d)) << "\n";
  std::cout << "classification adaptive " << exponent_str(theory::adaptive_cls_rate(alpha, beta, d, q))
            << "\n";
  try {
    std::cout << "classification minimax " << exponent_str(theory::minimax_cls_rate(alpha, beta, d)) << "\n";
  } catch (const Error& e) {
    std::cout << "n/a (" << e.what() << ")\n";
  }
  std::cout << "regression standard " << exponent_str(theory::standard_reg_rate(beta, d)) << "\n";
  std::cout << "regression adaptive " << exponent_str(theory::adaptive_reg_rate(beta, d, q)) << "\n";
  std::cout << "regression minimax " << exponent_str(theory::minimax_reg_rate(beta, d)) << "\n";
  std::cout << "regression_unbounded standard " << exponent_str(theory::standard_reg_rate_unbounded(bp, d))
            << "\n";
  std::cout << "regression_unbounded adaptive "
            << exponent_str(theory::adaptive_reg_rate_unbounded(bp, d, q)) << "\n";
  return 0;
}

int cmd_fit(const std::string& path) {
  const auto series = read_csv(path);
  if (series.empty()) throw Error(path + ": no data rows");
  for (const auto& s : series)
    if (!s.fit) throw Error(path + ": " + s.method + "/" + s.world + ": " + s.fit_error);
  if (series.size() == 1) {
    std::cout << fmt4(series[0].fit->rate()) << "\n";
    return 0;
  }
  for (const auto& s : series) std::cout << s.method << " " << s.world << " " << fmt4(s.fit->rate()) << "\n";
  return 0;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<SweepResult> all;
  for (const auto& path : inputs) {
    auto s = read_csv(path);
    all.insert(all.end(), s.begin(), s.end());
  }
  emit_svg(all, out);
  return 0;
}

void print_table(const std::vector<SuiteEntry>& entries, const std::vector<SuiteRow>* rows) {
  std::printf("%-24s %-22s %-22s\n", "world", "standard emp/theo", "adaptive emp/theo");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    std::string s_emp = "-", a_emp = "-";
    if (rows) {
      const auto& r = (*rows)[i];
      s_emp = r.standard.fit ? fmt2(r.standard.fit->rate()) : "n/a";
      a_emp = r.adaptive.fit ? fmt2(r.adaptive.fit->rate()) : "n/a";
    }
    std::printf("%-24s %-22s %-22s\n", e.world.name.c_str(), (s_emp + "/" + fmt2(e.standard.value)).c_str(),
                (a_emp + "/" + fmt2(e.adaptive.value)).c_str());
  }
}

int cmd_table(Suite suite, const SuiteRunOptions& opt, bool theory_only, const std::string& csv_out) {
  const auto entries = suite_entries(suite);
  if (theory_only) {
    print_table(entries, nullptr);
    return 0;
  }
  std::vector<SuiteRow> rows;
  std::vector<SweepResult> all;
  for (const auto& e : entries) {
    std::cerr << "running " << e.world.name << "...\n";
    rows.push_back(run_suite_entry(e, opt));
    all.push_back(rows.back().standard);
    all.push_back(rows.back().adaptive);
  }
  print_table(entries, &rows);
  if (!csv_out.empty()) emit_csv(all, csv_out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Standard and adaptive k-nearest-neighbor experiments"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  unsigned workers = 0;
  bool workers_set = false;

  auto* sweep_cmd = app.add_subcommand("sweep", "Run an N-sweep from a JSON config and write a CSV");
  sweep_cmd->add_option("--config", config_path, "JSON config")->required();
  sweep_cmd->add_option("--out", out_path, "output CSV")->required();
  sweep_cmd->add_option("--workers", workers, "worker threads (0 = hardware)");

  auto* tune_cmd = app.add_subcommand("tune", "Tune k or K at the config's tuning sample size");
  tune_cmd->add_option("--config", config_path, "JSON config")->required();
  tune_cmd->add_option("--workers", workers, "worker threads (0 = hardware)");

  std::string fit_path;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the empirical rate of each series in a CSV");
  fit_cmd->add_option("csv", fit_path, "sweep CSV")->required();

  double alpha = 1.0, beta = 1.0;
  std::optional<double> beta_prime, q;
  int d = 1;
  auto* rates_cmd = app.add_subcommand("rates", "Print theoretical rate exponents");
  rates_cmd->add_option("--alpha", alpha, "margin exponent")->required();
  rates_cmd->add_option("--beta", beta, "tail exponent")->required();
  rates_cmd->add_option("--d", d, "dimension")->required();
  rates_cmd->add_option("--q", q, "adaptive exponent (default 4/(d+4))");
  rates_cmd->add_option("--beta-prime", beta_prime, "tail exponent for unbounded eta (default beta)");

  std::vector<std::string> plot_inputs;
  std::string svg_path;
  auto* plot_cmd = app.add_subcommand("plot", "Log-log plot of one or more sweep CSVs");
  plot_cmd->add_option("csv", plot_inputs, "sweep CSVs")->required();
  plot_cmd->add_option("-o,--out", svg_path, "output SVG")->required();

  std::string suite_name;
  SuiteRunOptions suite_opt;
  bool theory_only = false;
  std::string table_csv;
  auto* table_cmd = app.add_subcommand("table", "Empirical and theoretical rates for a benchmark suite");
  table_cmd->add_option("--suite", suite_name, "classification or regression")
      ->required()
      ->check(CLI::IsMember({"classification", "regression"}));
  table_cmd->add_option("--trials", suite_opt.trials, "trials per grid point");
  table_cmd->add_option("--tune-trials", suite_opt.tune_trials, "trials per tuning candidate");
  table_cmd->add_option("--seed", suite_opt.base_seed, "base seed");
  table_cmd->add_option("--workers", suite_opt.workers, "worker threads (0 = hardware)");
  table_cmd->add_option("--csv", table_csv, "also write all sweeps to this CSV");
  table_cmd->add_flag("--theory-only", theory_only, "skip the simulations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kUsage;
  }
  workers_set = (sweep_cmd->parsed() && sweep_cmd->count("--workers")) ||
                (tune_cmd->parsed() && tune_cmd->count("--workers"));

  std::optional<ExperimentConfig> cfg;
  if (sweep_cmd->parsed() || tune_cmd->parsed()) {
    try {
      cfg = load_config(config_path);
      if (workers_set) cfg->workers = workers;
      if (tune_cmd->parsed() && !cfg->tuning) cfg->tuning = TuningSpec{};
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kUsage;
    }
  }

  try {
    if (sweep_cmd->parsed()) {
      const SweepResult r = sweep(*cfg);
      emit_csv(r, out_path);
      print_sweep(r);
      return 0;
    }
    if (tune_cmd->parsed()) {
      const TuneResult t = tune(*cfg);
      for (std::size_t i = 0; i < t.grid.size(); ++i)
        std::cout << format_double(t.grid[i]) << " " << format_double(t.mean_risk[i]) << "\n";
      std::cout << "best " << format_double(t.best) << "\n";
      return 0;
    }
    if (fit_cmd->parsed()) return cmd_fit(fit_path);
    if (rates_cmd->parsed()) return cmd_rates(alpha, beta, beta_prime, d, q);
    if (plot_cmd->parsed()) return cmd_plot(plot_inputs, svg_path);
    if (table_cmd->parsed()) return cmd_table(parse_suite(suite_name), suite_opt, theory_only, table_csv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
