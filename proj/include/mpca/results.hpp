#pragma once

// Monte Carlo results tables and their csv / json / markdown renderings.

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mpca/linalg.hpp"

namespace mpca {

inline constexpr std::string_view kVersion = "mpca 1.0.0";

/// One aggregate cell. Estimator metrics fill mean/sd; the rank-selection
/// "pair" metric fills exact/under frequencies. Unused fields hold NaN.
struct ResultRow {
  std::string distribution;
  Index p = 0;
  Index q = 0;
  double s_e = 1.0;
  std::string method;
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;
  double exact = 0.0;
  double under = 0.0;
  Index count = 0;  // replications entering the aggregate
};

struct FailureRecord {
  std::string cell;
  int replication = 0;
  std::string method;
  std::string reason;
};

struct ResultsTable {
  std::vector<std::pair<std::string, std::string>> metadata;  // insertion ordered
  std::vector<ResultRow> rows;
  std::vector<FailureRecord> failures;
};

/// Field-wise equality; NaN equals NaN, other doubles compare bitwise.
bool same_table(const ResultsTable& a, const ResultsTable& b);

enum class ResultFormat { csv, json, markdown };
ResultFormat parse_result_format(std::string_view tag);

std::string format_results(const ResultsTable& table, ResultFormat format);
/// Writes the rendering to a file; unwritable paths raise IoError.
void emit_results(const ResultsTable& table, ResultFormat format,
                  const std::filesystem::path& path);

ResultsTable parse_results_csv(std::string_view text);
ResultsTable parse_results_json(std::string_view text);

/// "(mean,sd)" with the given number of decimals.
std::string paren_pair(double a, double b, int decimals);

/// Frequencies of exact selection and of underestimation (not exact, neither
/// index above the truth) over selected (p0, q0) pairs.
std::pair<double, double> rank_frequencies(const std::vector<std::pair<Index, Index>>& selected,
                                           Index p0, Index q0);

}  // namespace mpca
