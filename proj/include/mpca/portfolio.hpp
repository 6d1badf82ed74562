#pragma once

// Ingestion of monthly 10×10 portfolio return tables (one row per month, a
// YYYYMM month column and 100 value columns) into matrix observations.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mpca/metrics.hpp"

namespace mpca {

struct PortfolioLayout {
  enum class Order {
    size_major,  // value column k -> (size k / cols, book-to-equity k % cols)
    be_major     // value column k -> (size k % rows, book-to-equity k / rows)
  };

  Index rows = 10;  // size deciles
  Index cols = 10;  // book-to-equity deciles
  int month_column = 0;
  int first_value_column = 1;
  Order order = Order::size_major;
  /// Column whose value is subtracted from every cell of its month.
  std::optional<int> adjustment_column;
  std::vector<double> missing_sentinels{-99.99, -999.0};
  /// 0 selects ',', ';', tab or whitespace from the first data row.
  char delimiter = 0;
};

/// Throws InputError for inconsistent layouts.
void validate(const PortfolioLayout& layout);

/// Leading lines that do not start with a month are skipped as headers; the
/// table ends at the first blank or non-month line after the data. Missing
/// values are filled by linear interpolation in time per cell, with gaps at
/// either end taking the nearest observed value. Malformed rows, non-increasing
/// months and cells with no observed value raise InputError naming the line or cell.
LabeledSeries parse_portfolios(std::istream& is, const PortfolioLayout& layout = {});
LabeledSeries ingest_portfolios(const std::filesystem::path& path,
                                const PortfolioLayout& layout = {});

/// Writes a table that parse_portfolios reads back to identical matrices.
void write_portfolios(std::ostream& os, const LabeledSeries& series,
                      const PortfolioLayout& layout = {});

/// Cell index (row, col) of value column k under the layout.
std::pair<Index, Index> cell_of_column(const PortfolioLayout& layout, Index k);

}  // namespace mpca
