#include "mpca/harness.hpp"

#include <cmath>
#include <cstring>
#include <ostream>

#include <omp.h>

#include "mpca/dataset_io.hpp"
#include "mpca/error.hpp"
#include "mpca/metrics.hpp"

namespace mpca {

namespace {

constexpr const char* kEstimatorMetrics[] = {"d_r", "d_c", "mse", "op_max"};
constexpr const char* kRankMetrics[] = {"p0_hat", "q0_hat"};

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 14695981039346656037ull) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

struct MethodOutcome {
  std::vector<double> values;  // metric values in fixed order; empty on failure
  std::string failure;
};

struct TaskOutcome {
  std::vector<MethodOutcome> methods;
  std::string failure;  // dataset generation failure
};

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

TaskOutcome run_task(const ExperimentSpec& spec, const ExperimentCell& cell, int rep) {
  TaskOutcome out;
  SimulatedData data;
  try {
    data = gen_dataset(cell_config(spec, cell, rep));
  } catch (const std::exception& e) {
    out.failure = one_line(e.what());
    return out;
  }
  const auto& x = data.observations;
  const std::uint64_t digest = dataset_digest(x);
  const Ranks ranks{spec.p0, spec.q0};

  bool need_spectra = false;
  for (const auto& m : spec.methods) {
    if (m == "mpca_op" || m == "mpca_f" || m == "mer_op" || m == "mer_f") need_spectra = true;
  }
  bool need_rank_spectra = false;
  for (const auto& m : spec.methods) need_rank_spectra |= is_rank_tag(m);
  const Index k = std::min(std::min(x.p(), x.q()),
                           std::max(ranks.r0(), need_rank_spectra ? spec.r_max : Index{1}));
  kernels::ObservationSpectra spectra;
  if (need_spectra) spectra = kernels::observation_spectra(x, k);

  for (const auto& tag : spec.methods) {
    MethodOutcome mo;
    try {
      if (is_estimator_tag(tag)) {
        const auto fit = estimate(x, spectra, parse_method(tag), ranks, spec.ctl);
        const auto rep_metrics = evaluate_fit(x, fit, data.truth);
        mo.values = {rep_metrics.d_r, rep_metrics.d_c, rep_metrics.mse, rep_metrics.op_max};
      } else {
        const auto sel = select_rank(x, spectra, parse_rank_method(tag), spec.r_max, spec.ctl);
        mo.values = {static_cast<double>(sel.p0_hat), static_cast<double>(sel.q0_hat)};
      }
      for (std::size_t i = 0; i < mo.values.size(); ++i) {
        if (!std::isfinite(mo.values[i])) {
          mo.failure = "non-finite " + std::string(is_estimator_tag(tag) ? kEstimatorMetrics[i]
                                                                         : kRankMetrics[i]);
          mo.values.clear();
          break;
        }
      }
    } catch (const std::exception& e) {
      mo.values.clear();
      mo.failure = one_line(e.what());
    }
    out.methods.push_back(std::move(mo));
  }
  if (dataset_digest(x) != digest) {
    throw ContractError("dataset changed while methods ran in cell " + cell.id());
  }
  return out;
}

}  // namespace

bool is_estimator_tag(const std::string& tag) {
  return tag == "mpca_op" || tag == "mpca_f" || tag == "pca_2d2" || tag == "pe";
}

bool is_rank_tag(const std::string& tag) {
  return tag == "mer_op" || tag == "mer_f" || tag == "er_2d2" || tag == "iter_er";
}

void validate(const ExperimentSpec& spec) {
  if (spec.replications < 1) throw InputError("replications must be at least 1");
  if (spec.methods.empty()) throw InputError("no methods requested");
  if (spec.dims.empty() || spec.dists.empty() || spec.noise_scales.empty()) {
    throw InputError("experiment grid is empty");
  }
  for (const auto& m : spec.methods) {
    if (!is_estimator_tag(m) && !is_rank_tag(m)) throw InputError("unknown method '" + m + "'");
  }
  if (spec.workers < 0) throw InputError("workers must be nonnegative");
  validate(spec.ctl);
  bool ranks_needed = false;
  for (const auto& m : spec.methods) ranks_needed |= is_rank_tag(m);
  for (const auto& cell : expand_cells(spec)) {
    validate(cell_config(spec, cell, 0));
    bool manifold = false;
    for (const auto& m : spec.methods) manifold |= (m == "mpca_op" || m == "mpca_f");
    if (manifold) validate_manifold_ranks({spec.p0, spec.q0}, cell.p, cell.q);
    if (ranks_needed) validate_r_max(spec.r_max, cell.p, cell.q);
  }
}

std::string ExperimentCell::id() const {
  return to_string(dist) + "|p=" + std::to_string(p) + "|q=" + std::to_string(q) +
         "|s_e=" + format_double(s_e);
}

std::vector<ExperimentCell> expand_cells(const ExperimentSpec& spec) {
  std::vector<ExperimentCell> cells;
  for (const auto& [p, q] : spec.dims) {
    for (const auto& d : spec.dists) {
      for (double s : spec.noise_scales) cells.push_back({d, p, q, s});
    }
  }
  return cells;
}

SimulationConfig cell_config(const ExperimentSpec& spec, const ExperimentCell& cell, int replication) {
  SimulationConfig cfg;
  cfg.p = cell.p;
  cfg.q = cell.q;
  cfg.p0 = spec.p0;
  cfg.q0 = spec.q0;
  cfg.T = spec.T;
  cfg.phi = spec.phi;
  cfg.psi = spec.psi;
  cfg.s_e = cell.s_e;
  cfg.dist = cell.dist;
  cfg.burn_in = spec.burn_in;
  cfg.seed = replication_seed(spec.base_seed, cell.id(), replication);
  return cfg;
}

std::uint64_t replication_seed(std::uint64_t base_seed, const std::string& cell_id, int replication) {
  return mix_seed({base_seed, fnv1a(cell_id.data(), cell_id.size()),
                   static_cast<std::uint64_t>(replication)});
}

std::uint64_t dataset_digest(const ObservationSet& x) {
  std::uint64_t h = 14695981039346656037ull;
  for (const auto& m : x.matrices()) {
    h = fnv1a(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double), h);
  }
  return h;
}

MonteCarloOutput run_monte_carlo(const ExperimentSpec& spec) {
  validate(spec);
  const auto cells = expand_cells(spec);
  const auto reps = static_cast<std::size_t>(spec.replications);
  const auto n_tasks = cells.size() * reps;
  std::vector<TaskOutcome> outcomes(n_tasks);
  std::vector<std::string> fatal(n_tasks);

  const int workers = spec.workers > 0 ? spec.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (long i = 0; i < static_cast<long>(n_tasks); ++i) {
    const auto task = static_cast<std::size_t>(i);
    try {
      outcomes[task] = run_task(spec, cells[task / reps], static_cast<int>(task % reps));
    } catch (const std::exception& e) {
      fatal[task] = e.what();
    }
  }
  for (const auto& f : fatal) {
    if (!f.empty()) throw ContractError(f);
  }

  MonteCarloOutput out;
  auto& table = out.table;
  auto& md = table.metadata;
  md.emplace_back("version", std::string(kVersion));
  md.emplace_back("base_seed", std::to_string(spec.base_seed));
  md.emplace_back("replications", std::to_string(spec.replications));
  md.emplace_back("p0", std::to_string(spec.p0));
  md.emplace_back("q0", std::to_string(spec.q0));
  md.emplace_back("phi", format_double(spec.phi));
  md.emplace_back("psi", format_double(spec.psi));
  md.emplace_back("T", spec.T ? std::to_string(*spec.T) : std::string("auto"));
  md.emplace_back("burn_in", std::to_string(spec.burn_in));
  md.emplace_back("r_max", std::to_string(spec.r_max));
  md.emplace_back("tol", format_double(spec.ctl.tol));
  md.emplace_back("max_iter", std::to_string(spec.ctl.max_iter));

  const double nan = std::nan("");
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    const std::string id = cell.id();
    const std::string dist = to_string(cell.dist);
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& o = outcomes[c * reps + r];
      if (!o.failure.empty()) table.failures.push_back({id, static_cast<int>(r), "*", o.failure});
    }
    for (std::size_t m = 0; m < spec.methods.size(); ++m) {
      const auto& tag = spec.methods[m];
      const bool est = is_estimator_tag(tag);
      const std::size_t n_metrics = est ? 4 : 2;
      std::vector<std::vector<double>> columns(n_metrics);
      std::vector<std::pair<Index, Index>> pairs;
      for (std::size_t r = 0; r < reps; ++r) {
        const auto& o = outcomes[c * reps + r];
        if (!o.failure.empty()) continue;
        const auto& mo = o.methods[m];
        if (!mo.failure.empty()) {
          table.failures.push_back({id, static_cast<int>(r), tag, mo.failure});
          continue;
        }
        for (std::size_t k = 0; k < n_metrics; ++k) {
          columns[k].push_back(mo.values[k]);
          if (spec.keep_replications) {
            out.records.push_back({id, static_cast<int>(r), tag,
                                   est ? kEstimatorMetrics[k] : kRankMetrics[k], mo.values[k]});
          }
        }
        if (!est) {
          pairs.emplace_back(static_cast<Index>(mo.values[0]), static_cast<Index>(mo.values[1]));
        }
      }
      for (std::size_t k = 0; k < n_metrics; ++k) {
        const auto [mean, sd] = columns[k].empty() ? std::pair{nan, nan} : mean_sd(columns[k]);
        table.rows.push_back({dist, cell.p, cell.q, cell.s_e, tag,
                              est ? kEstimatorMetrics[k] : kRankMetrics[k], mean, sd, nan, nan,
                              static_cast<Index>(columns[k].size())});
      }
      if (!est) {
        const auto [exact, under] = rank_frequencies(pairs, spec.p0, spec.q0);
        table.rows.push_back({dist, cell.p, cell.q, cell.s_e, tag, "pair", nan, nan, exact, under,
                              static_cast<Index>(pairs.size())});
      }
    }
  }
  return out;
}

void write_replications_csv(std::ostream& os, const std::vector<ReplicationRecord>& records) {
  os << "cell,replication,method,metric,value\n";
  for (const auto& r : records) {
    os << '"' << r.cell << "\"," << r.replication << ',' << r.method << ',' << r.metric << ','
       << format_double(r.value) << '\n';
  }
}

}  // namespace mpca
