#pragma once

// JSON experiment files.
//
//   {
//     "grid":    {"dims": [[100, 100]], "distributions": ["gaussian", "t1"],
//                 "noise_scales": [1.0]},
//     "model":   {"p0": 3, "q0": 3, "phi": 0.1, "psi": 0.1, "T": null, "burn_in": 100},
//     "methods": {"list": ["mpca_f", "mer_f"], "r_max": 8, "tol": 1e-6, "max_iter": 100},
//     "run":     {"replications": 100, "seed": 0, "workers": 0},
//     "output":  {"path": "results.csv", "format": "csv"}
//   }
//
// Every section and key is optional; missing keys keep their defaults. The
// "simulation" section describes a single dataset for the simulate command;
// "rolling" and "portfolio" configure rolling validation on a portfolio table:
//
//   "rolling":   {"first_year": 1996, "last_year": 2019, "bandwidth": 5}
//   "portfolio": {"order": "size_major", "adjustment_column": 101,
//                 "missing": [-99.99, -999], "month_column": 0, "first_value_column": 1}

#include <filesystem>
#include <optional>
#include <string>

#include "mpca/harness.hpp"
#include "mpca/metrics.hpp"
#include "mpca/portfolio.hpp"
#include "mpca/sampling.hpp"

namespace mpca {

struct OutputSettings {
  std::optional<std::string> path;
  std::optional<std::string> format;
};

struct ExperimentFile {
  ExperimentSpec spec;
  OutputSettings output;
};

/// Parses the JSON text; unknown keys and type errors raise InputError.
ExperimentFile parse_experiment(const std::string& text);
ExperimentFile load_experiment(const std::filesystem::path& path);

/// Reads the "simulation" section on top of the given defaults.
SimulationConfig parse_simulation(const std::string& text, SimulationConfig defaults = {});

struct RollingFile {
  RollingOptions options;
  PortfolioLayout layout;
  OutputSettings output;
};

/// Reads "rolling", "portfolio", "model" (p0, q0) and "methods" (first entry
/// of list, tol, max_iter).
RollingFile parse_rolling(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace mpca
