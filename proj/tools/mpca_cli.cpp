// mpca: simulate datasets, fit matrix factor models, select factor numbers,
// run Monte Carlo benchmarks and rolling validation.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mpca/config.hpp"
#include "mpca/dataset_io.hpp"
#include "mpca/error.hpp"
#include "mpca/estimators.hpp"
#include "mpca/harness.hpp"
#include "mpca/metrics.hpp"
#include "mpca/portfolio.hpp"
#include "mpca/rank_selection.hpp"
#include "mpca/results.hpp"

namespace {

using json = nlohmann::json;
using namespace mpca;

// Small column table for the per-command outputs that are not ResultsTables.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;
};

std::string cell_text(const json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string render(const Table& t, ResultFormat format) {
  std::ostringstream os;
  switch (format) {
    case ResultFormat::csv: {
      for (const auto& [k, v] : t.metadata) os << "# " << k << '=' << v << '\n';
      for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
      os << '\n';
      for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << cell_text(row[c]);
        os << '\n';
      }
      break;
    }
    case ResultFormat::json: {
      json j;
      j["metadata"] = json::object();
      for (const auto& [k, v] : t.metadata) j["metadata"][k] = v;
      j["rows"] = json::array();
      for (const auto& row : t.rows) {
        json r;
        for (std::size_t c = 0; c < row.size(); ++c) r[t.columns[c]] = row[c];
        j["rows"].push_back(std::move(r));
      }
      os << j.dump(2) << '\n';
      break;
    }
    case ResultFormat::markdown: {
      for (const auto& [k, v] : t.metadata) os << "<!-- " << k << ": " << v << " -->\n";
      os << '|';
      for (const auto& c : t.columns) os << ' ' << c << " |";
      os << "\n|";
      for (std::size_t c = 0; c < t.columns.size(); ++c) os << "---|";
      os << '\n';
      for (const auto& row : t.rows) {
        os << '|';
        for (const auto& v : row) {
          os << ' ' << (v.is_number_float() ? fixed4(v.get<double>()) : cell_text(v)) << " |";
        }
        os << '\n';
      }
      break;
    }
  }
  return os.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw IoError("write to '" + path + "' failed");
}

template <class T>
void override_if(const CLI::Option* opt, const T& value, T& target) {
  if (opt->count() > 0) target = value;
}

std::pair<Index, Index> parse_dims(const std::string& s) {
  const auto x = s.find_first_of("xX,");
  if (x == std::string::npos) throw InputError("dims must look like 100x100, got '" + s + "'");
  return {std::stol(s.substr(0, x)), std::stol(s.substr(x + 1))};
}

char delimiter_for(const std::string& format) {
  if (format == "csv") return ',';
  if (format == "tsv") return '\t';
  if (format == "space") return ' ';
  throw InputError("dataset format must be csv, tsv or space");
}

// Shared options present on every subcommand.
struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string format;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* format_opt = nullptr;

  void attach(CLI::App* app, const std::string& default_format) {
    format = default_format;
    app->add_option("--config", config, "JSON configuration file")->check(CLI::ExistingFile);
    seed_opt = app->add_option("--seed", seed, "Random seed");
    out_opt = app->add_option("--out", out, "Output path ('-' for stdout)");
    format_opt = app->add_option("--format", format, "Output format");
  }
  std::string config_text() const { return config.empty() ? "{}" : read_text_file(config); }
};

struct SimulateCmd {
  Common common;
  SimulationConfig cfg;
  std::string dist = "gaussian";
  Index t_len = 0;
  double gamma = 0.0;
  std::string truth_path;
  CLI::Option *p, *q, *p0, *q0, *t, *phi, *psi, *s_e, *dist_opt, *gamma_opt, *spherical, *burn;
  bool spherical_flag = false;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("simulate", "Generate a synthetic dataset");
    common.attach(app, "csv");
    p = app->add_option("--p", cfg.p, "Rows per observation");
    q = app->add_option("--q", cfg.q, "Columns per observation");
    p0 = app->add_option("--p0", cfg.p0, "Row factor number");
    q0 = app->add_option("--q0", cfg.q0, "Column factor number");
    t = app->add_option("--T", t_len, "Sample size (default 3 sqrt(pq))");
    phi = app->add_option("--phi", cfg.phi, "Factor AR(1) coefficient");
    psi = app->add_option("--psi", cfg.psi, "Noise AR(1) coefficient");
    s_e = app->add_option("--s-e", cfg.s_e, "Noise scale");
    dist_opt = app->add_option("--dist", dist, "gaussian, t<v>, skewed-t<v>, stable<alpha>");
    gamma_opt = app->add_option("--gamma", gamma, "Noise rescaling constant");
    spherical = app->add_flag("--spherical-noise", spherical_flag, "Identity noise covariances");
    burn = app->add_option("--burn-in", cfg.burn_in, "Discarded warm-up steps");
    app->add_option("--truth", truth_path, "Also write the ground truth as JSON");
    app->callback([this] { run(); });
  }

  void run() {
    SimulationConfig base = parse_simulation(common.config_text());
    override_if(p, cfg.p, base.p);
    override_if(q, cfg.q, base.q);
    override_if(p0, cfg.p0, base.p0);
    override_if(q0, cfg.q0, base.q0);
    if (t->count()) base.T = t_len;
    override_if(phi, cfg.phi, base.phi);
    override_if(psi, cfg.psi, base.psi);
    override_if(s_e, cfg.s_e, base.s_e);
    if (dist_opt->count()) base.dist = parse_distribution(dist);
    if (gamma_opt->count()) base.gamma = gamma;
    if (spherical->count()) base.spherical_noise = spherical_flag;
    override_if(burn, cfg.burn_in, base.burn_in);
    override_if(common.seed_opt, common.seed, base.seed);
    const auto data = gen_dataset(base);
    std::ostringstream os;
    write_dataset(os, data.observations, delimiter_for(common.format));
    write_output(common.out, os.str());
    if (!truth_path.empty()) save_truth(truth_path, data.truth);
  }
};

struct EstimateCmd {
  Common common;
  std::string data;
  std::string method = "mpca_f";
  Ranks ranks{3, 3};
  IterationControl ctl;
  bool rotate = false;
  CLI::Option *method_opt, *p0, *q0, *tol, *iters;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("estimate", "Fit loadings and factors to a dataset");
    common.attach(app, "json");
    app->add_option("--data", data, "Dataset file")->required()->check(CLI::ExistingFile);
    method_opt = app->add_option("--method", method, "mpca_op, mpca_f, pca_2d2 or pe");
    p0 = app->add_option("--p0", ranks.p0, "Row factor number");
    q0 = app->add_option("--q0", ranks.q0, "Column factor number");
    tol = app->add_option("--tol", ctl.tol, "Convergence tolerance");
    iters = app->add_option("--max-iter", ctl.max_iter, "Iteration cap");
    app->add_flag("--varimax", rotate, "Report varimax-rotated loadings");
    app->callback([this] { run(); });
  }

  void run() {
    const auto file = parse_experiment(common.config_text());
    Ranks r{file.spec.p0, file.spec.q0};
    IterationControl c = file.spec.ctl;
    std::string m = file.spec.methods.empty() ? method : file.spec.methods.front();
    if (!is_estimator_tag(m)) m = method;
    override_if(p0, ranks.p0, r.p0);
    override_if(q0, ranks.q0, r.q0);
    override_if(tol, ctl.tol, c.tol);
    override_if(iters, ctl.max_iter, c.max_iter);
    override_if(method_opt, method, m);
    std::string fmt = file.output.format.value_or("json");
    override_if(common.format_opt, common.format, fmt);
    std::string out = file.output.path.value_or("-");
    override_if(common.out_opt, common.out, out);

    const auto x = load_dataset(data);
    auto fit = estimate(x, parse_method(m), r, c);
    if (rotate) {
      fit.loadings.r_hat = varimax(fit.loadings.r_hat).loadings;
      fit.loadings.c_hat = varimax(fit.loadings.c_hat).loadings;
      fit.factors = factor_scores(x, fit.loadings);
    }
    if (fmt == "json") {
      if (out == "-") {
        json j;
        j["method"] = m;
        j["iterations"] = fit.iterations;
        j["converged"] = fit.converged;
        auto mat = [](const Matrix& a) {
          json rows = json::array();
          for (Index i = 0; i < a.rows(); ++i) {
            json row = json::array();
            for (Index k = 0; k < a.cols(); ++k) row.push_back(a(i, k));
            rows.push_back(row);
          }
          return rows;
        };
        j["r_hat"] = mat(fit.loadings.r_hat);
        j["c_hat"] = mat(fit.loadings.c_hat);
        j["factors"] = json::array();
        for (const auto& f : fit.factors) j["factors"].push_back(mat(f));
        std::cout << j.dump() << '\n';
      } else {
        save_fit(out, fit);
      }
      return;
    }
    Table t;
    t.columns = {"block", "t", "i", "j", "value"};
    t.metadata = {{"method", m},
                  {"iterations", std::to_string(fit.iterations)},
                  {"converged", fit.converged ? "true" : "false"}};
    auto add = [&](const std::string& block, long tt, const Matrix& a) {
      for (Index i = 0; i < a.rows(); ++i) {
        for (Index k = 0; k < a.cols(); ++k) t.rows.push_back({block, tt, i + 1, k + 1, a(i, k)});
      }
    };
    add("r_hat", 0, fit.loadings.r_hat);
    add("c_hat", 0, fit.loadings.c_hat);
    for (std::size_t s = 0; s < fit.factors.size(); ++s) {
      add("factor", static_cast<long>(s) + 1, fit.factors[s]);
    }
    write_output(out, render(t, parse_result_format(fmt)));
  }
};

struct SelectRankCmd {
  Common common;
  std::string data;
  std::string method = "all";
  Index r_max = kDefaultRMax;
  IterationControl ctl;
  CLI::Option *method_opt, *rmax_opt, *tol, *iters;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("select-rank", "Estimate the factor numbers (p0, q0)");
    common.attach(app, "csv");
    app->add_option("--data", data, "Dataset file")->required()->check(CLI::ExistingFile);
    method_opt = app->add_option("--method", method, "mer_op, mer_f, er_2d2, iter_er or all");
    rmax_opt = app->add_option("--r-max", r_max, "Largest candidate factor number");
    tol = app->add_option("--tol", ctl.tol, "Convergence tolerance");
    iters = app->add_option("--max-iter", ctl.max_iter, "Iteration cap");
    app->callback([this] { run(); });
  }

  void run() {
    const auto file = parse_experiment(common.config_text());
    Index rm = file.spec.r_max;
    IterationControl c = file.spec.ctl;
    std::vector<std::string> methods;
    for (const auto& m : file.spec.methods) {
      if (is_rank_tag(m)) methods.push_back(m);
    }
    if (methods.empty() || method_opt->count()) {
      methods = method == "all" ? std::vector<std::string>{"mer_op", "mer_f", "er_2d2", "iter_er"}
                                : std::vector<std::string>{method};
    }
    override_if(rmax_opt, r_max, rm);
    override_if(tol, ctl.tol, c.tol);
    override_if(iters, ctl.max_iter, c.max_iter);
    std::string fmt = file.output.format.value_or("csv");
    override_if(common.format_opt, common.format, fmt);
    std::string out = file.output.path.value_or("-");
    override_if(common.out_opt, common.out, out);

    const auto x = load_dataset(data);
    Table t;
    t.columns = {"method", "p0_hat", "q0_hat", "r0_hat", "iterations", "converged", "cycled"};
    t.metadata = {{"r_max", std::to_string(rm)}};
    for (const auto& m : methods) {
      const auto s = select_rank(x, parse_rank_method(m), rm, c);
      t.rows.push_back({m, s.p0_hat, s.q0_hat, s.r0_hat, s.iterations, s.converged, s.cycled});
    }
    write_output(out, render(t, parse_result_format(fmt)));
  }
};

struct BenchmarkCmd {
  Common common;
  ExperimentSpec cli;
  std::vector<std::string> dims, dists, methods;
  Index t_len = 0;
  std::string records_path;
  CLI::Option *dims_o, *dists_o, *scales_o, *p0, *q0, *phi, *psi, *t, *burn, *methods_o, *reps,
      *rmax, *tol, *iters, *workers;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("benchmark", "Run a Monte Carlo experiment grid");
    common.attach(app, "csv");
    dims_o = app->add_option("--dims", dims, "Dimension pairs, e.g. 20x20 100x100");
    dists_o = app->add_option("--dists", dists, "Noise distributions");
    scales_o = app->add_option("--noise-scales", cli.noise_scales, "Values of s_E");
    p0 = app->add_option("--p0", cli.p0, "Row factor number");
    q0 = app->add_option("--q0", cli.q0, "Column factor number");
    phi = app->add_option("--phi", cli.phi, "Factor AR(1) coefficient");
    psi = app->add_option("--psi", cli.psi, "Noise AR(1) coefficient");
    t = app->add_option("--T", t_len, "Sample size (default 3 sqrt(pq))");
    burn = app->add_option("--burn-in", cli.burn_in, "Discarded warm-up steps");
    methods_o = app->add_option("--methods", methods, "Estimator and rank selector tags");
    reps = app->add_option("--replications", cli.replications, "Replications per cell");
    rmax = app->add_option("--r-max", cli.r_max, "Largest candidate factor number");
    tol = app->add_option("--tol", cli.ctl.tol, "Convergence tolerance");
    iters = app->add_option("--max-iter", cli.ctl.max_iter, "Iteration cap");
    workers = app->add_option("--workers", cli.workers, "Worker threads (0: all)");
    app->add_option("--replications-out", records_path, "Per-replication metrics csv");
    app->callback([this] { run(); });
  }

  void run() {
    auto file = parse_experiment(common.config_text());
    auto& spec = file.spec;
    if (dims_o->count()) {
      spec.dims.clear();
      for (const auto& d : dims) spec.dims.push_back(parse_dims(d));
    }
    if (dists_o->count()) {
      spec.dists.clear();
      for (const auto& d : dists) spec.dists.push_back(parse_distribution(d));
    }
    override_if(scales_o, cli.noise_scales, spec.noise_scales);
    override_if(p0, cli.p0, spec.p0);
    override_if(q0, cli.q0, spec.q0);
    override_if(phi, cli.phi, spec.phi);
    override_if(psi, cli.psi, spec.psi);
    if (t->count()) spec.T = t_len;
    override_if(burn, cli.burn_in, spec.burn_in);
    override_if(methods_o, methods, spec.methods);
    override_if(reps, cli.replications, spec.replications);
    override_if(rmax, cli.r_max, spec.r_max);
    override_if(tol, cli.ctl.tol, spec.ctl.tol);
    override_if(iters, cli.ctl.max_iter, spec.ctl.max_iter);
    override_if(workers, cli.workers, spec.workers);
    override_if(common.seed_opt, common.seed, spec.base_seed);
    spec.keep_replications = spec.keep_replications || !records_path.empty();
    std::string fmt = file.output.format.value_or("csv");
    override_if(common.format_opt, common.format, fmt);
    std::string out = file.output.path.value_or("-");
    override_if(common.out_opt, common.out, out);

    const auto result = run_monte_carlo(spec);
    write_output(out, format_results(result.table, parse_result_format(fmt)));
    if (!records_path.empty()) {
      std::ostringstream os;
      write_replications_csv(os, result.records);
      write_output(records_path, os.str());
    }
    if (!result.table.failures.empty()) {
      std::cerr << result.table.failures.size() << " replication failure(s) recorded\n";
    }
  }
};

struct RollingCmd {
  Common common;
  std::string data;
  RollingOptions cli;
  std::string method = "mpca_f";
  std::string order = "size_major";
  int adjustment = -1;
  std::vector<double> missing;
  CLI::Option *first, *last, *band, *p0, *q0, *method_o, *tol, *iters, *order_o, *adj_o, *miss_o;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("rolling-validate", "Rolling validation on a portfolio table");
    common.attach(app, "csv");
    app->add_option("--data", data, "Portfolio return table")->required()->check(CLI::ExistingFile);
    first = app->add_option("--first-year", cli.first_year, "First test year");
    last = app->add_option("--last-year", cli.last_year, "Last test year");
    band = app->add_option("--bandwidth", cli.bandwidth, "Training window in years");
    p0 = app->add_option("--p0", cli.ranks.p0, "Row factor number");
    q0 = app->add_option("--q0", cli.ranks.q0, "Column factor number");
    method_o = app->add_option("--method", method, "Estimator tag");
    tol = app->add_option("--tol", cli.ctl.tol, "Convergence tolerance");
    iters = app->add_option("--max-iter", cli.ctl.max_iter, "Iteration cap");
    order_o = app->add_option("--order", order, "size_major or be_major column order");
    adj_o = app->add_option("--adjustment-column", adjustment, "Column subtracted from every cell");
    miss_o = app->add_option("--missing", missing, "Missing-value sentinels");
    app->callback([this] { run(); });
  }

  void run() {
    auto file = parse_rolling(common.config_text());
    auto& o = file.options;
    override_if(first, cli.first_year, o.first_year);
    override_if(last, cli.last_year, o.last_year);
    override_if(band, cli.bandwidth, o.bandwidth);
    override_if(p0, cli.ranks.p0, o.ranks.p0);
    override_if(q0, cli.ranks.q0, o.ranks.q0);
    if (method_o->count()) o.method = parse_method(method);
    override_if(tol, cli.ctl.tol, o.ctl.tol);
    override_if(iters, cli.ctl.max_iter, o.ctl.max_iter);
    if (order_o->count()) {
      file.layout.order = order == "be_major" ? PortfolioLayout::Order::be_major
                                              : PortfolioLayout::Order::size_major;
    }
    if (adj_o->count()) file.layout.adjustment_column = adjustment;
    override_if(miss_o, missing, file.layout.missing_sentinels);
    std::string fmt = file.output.format.value_or("csv");
    override_if(common.format_opt, common.format, fmt);
    std::string out = file.output.path.value_or("-");
    override_if(common.out_opt, common.out, out);

    const auto series = ingest_portfolios(data, file.layout);
    const auto report = rolling_validate(series, o);
    Table t;
    t.columns = {"year", "mse", "op_max"};
    t.metadata = {{"method", std::string(to_string(o.method))},
                  {"bandwidth", std::to_string(o.bandwidth)},
                  {"p0", std::to_string(o.ranks.p0)},
                  {"q0", std::to_string(o.ranks.q0)},
                  {"mse_mean", format_double(report.mse_mean)},
                  {"mse_sd", format_double(report.mse_sd)},
                  {"op_max_mean", format_double(report.op_max_mean)},
                  {"op_max_sd", format_double(report.op_max_sd)}};
    for (const auto& y : report.years) t.rows.push_back({y.year, y.mse, y.op_max});
    write_output(out, render(t, parse_result_format(fmt)));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manifold PCA for matrix factor models"};
  app.require_subcommand(1);
  SimulateCmd simulate;
  EstimateCmd est;
  SelectRankCmd select;
  BenchmarkCmd bench;
  RollingCmd rolling;
  simulate.attach(app);
  est.attach(app);
  select.attach(app);
  bench.attach(app);
  rolling.attach(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const mpca::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const mpca::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
