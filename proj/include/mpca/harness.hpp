#pragma once

// Monte Carlo experiment runner over a grid of simulation settings.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mpca/estimators.hpp"
#include "mpca/rank_selection.hpp"
#include "mpca/results.hpp"
#include "mpca/sampling.hpp"

namespace mpca {

struct ExperimentSpec {
  std::vector<std::pair<Index, Index>> dims{{20, 20}};
  std::vector<NoiseDistribution> dists{Gaussian{}};
  std::vector<double> noise_scales{1.0};
  Index p0 = 3;
  Index q0 = 3;
  double phi = 0.1;
  double psi = 0.1;
  std::optional<Index> T;  // default ⌊3 (pq)^{1/2}⌋ per cell
  Index burn_in = 100;
  int replications = 100;
  /// Estimator tags (mpca_op, mpca_f, pca_2d2, pe) and/or rank selector tags
  /// (mer_op, mer_f, er_2d2, iter_er).
  std::vector<std::string> methods{"mpca_f"};
  Index r_max = kDefaultRMax;
  IterationControl ctl{};
  std::uint64_t base_seed = 0;
  int workers = 0;  // 0: OpenMP default
  bool keep_replications = false;
};

/// Throws InputError for an invalid spec.
void validate(const ExperimentSpec& spec);

/// One grid cell of a spec.
struct ExperimentCell {
  NoiseDistribution dist;
  Index p = 0;
  Index q = 0;
  double s_e = 1.0;

  std::string id() const;
};

std::vector<ExperimentCell> expand_cells(const ExperimentSpec& spec);
SimulationConfig cell_config(const ExperimentSpec& spec, const ExperimentCell& cell, int replication);

/// Dataset seed for replication r of a cell.
std::uint64_t replication_seed(std::uint64_t base_seed, const std::string& cell_id, int replication);

/// FNV-1a over the raw bytes of every observation.
std::uint64_t dataset_digest(const ObservationSet& x);

struct ReplicationRecord {
  std::string cell;
  int replication = 0;
  std::string method;
  std::string metric;
  double value = 0.0;
};

struct MonteCarloOutput {
  ResultsTable table;
  std::vector<ReplicationRecord> records;  // filled when spec.keep_replications
};

/// Generates every (cell, replication) dataset, runs all methods on the same
/// dataset and aggregates metrics per cell in a fixed order. Per-replication
/// failures are recorded in the table. The output does not depend on the
/// number of worker threads.
MonteCarloOutput run_monte_carlo(const ExperimentSpec& spec);

void write_replications_csv(std::ostream& os, const std::vector<ReplicationRecord>& records);

bool is_estimator_tag(const std::string& tag);
bool is_rank_tag(const std::string& tag);

}  // namespace mpca
