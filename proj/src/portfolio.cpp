#include "mpca/portfolio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "mpca/dataset_io.hpp"
#include "mpca/error.hpp"

namespace mpca {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

char detect_delimiter(std::string_view line) {
  for (char c : {',', ';', '\t'}) {
    if (line.find(c) != std::string_view::npos) return c;
  }
  return ' ';
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  line = trim(line);
  if (delim == ' ') {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      if (i == line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }
  std::size_t i = 0;
  while (true) {
    const auto j = line.find(delim, i);
    out.push_back(trim(line.substr(i, j == std::string_view::npos ? j : j - i)));
    if (j == std::string_view::npos) break;
    i = j + 1;
  }
  return out;
}

// A data row holds a six-digit YYYYMM month in the month column.
bool is_month_field(std::string_view f) {
  if (f.size() != 6) return false;
  for (char c : f) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

bool is_missing(double v, const PortfolioLayout& layout) {
  if (std::isnan(v)) return true;
  for (double s : layout.missing_sentinels) {
    if (std::abs(v - s) <= 1e-9 * std::max(1.0, std::abs(s))) return true;
  }
  return false;
}

std::string cell_name(Index i, Index j) {
  return "cell (size " + std::to_string(i + 1) + ", book-to-equity " + std::to_string(j + 1) + ")";
}

}  // namespace

void validate(const PortfolioLayout& layout) {
  if (layout.rows < 1 || layout.cols < 1) throw InputError("portfolio layout: empty grid");
  if (layout.month_column < 0 || layout.first_value_column < 0) {
    throw InputError("portfolio layout: negative column index");
  }
  const int last = layout.first_value_column + static_cast<int>(layout.rows * layout.cols) - 1;
  auto overlaps = [&](int c) { return c >= layout.first_value_column && c <= last; };
  if (overlaps(layout.month_column)) {
    throw InputError("portfolio layout: month column overlaps the value columns");
  }
  if (layout.adjustment_column &&
      (*layout.adjustment_column < 0 || overlaps(*layout.adjustment_column) ||
       *layout.adjustment_column == layout.month_column)) {
    throw InputError("portfolio layout: invalid adjustment column");
  }
}

std::pair<Index, Index> cell_of_column(const PortfolioLayout& layout, Index k) {
  if (layout.order == PortfolioLayout::Order::size_major) return {k / layout.cols, k % layout.cols};
  return {k % layout.rows, k / layout.rows};
}

LabeledSeries parse_portfolios(std::istream& is, const PortfolioLayout& layout) {
  validate(layout);
  const Index cells = layout.rows * layout.cols;
  int needed = std::max(layout.month_column, layout.first_value_column + static_cast<int>(cells) - 1);
  if (layout.adjustment_column) needed = std::max(needed, *layout.adjustment_column);
  const auto width = static_cast<std::size_t>(needed + 1);

  std::vector<int> months;
  std::vector<Vector> values;  // one row of cells per month
  std::vector<std::vector<bool>> missing;
  std::string line;
  long line_no = 0;
  char delim = layout.delimiter;
  bool in_data = false;

  while (std::getline(is, line)) {
    ++line_no;
    const char d = delim ? delim : detect_delimiter(line);
    const auto fields = split(line, d);
    const auto mc = static_cast<std::size_t>(layout.month_column);
    if (fields.size() <= mc || !is_month_field(fields[mc])) {
      if (in_data) break;
      continue;
    }
    in_data = true;
    delim = d;
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() < width) {
      throw InputError("portfolio table: " + where + " has " + std::to_string(fields.size()) +
                       " fields, expected at least " + std::to_string(width));
    }
    int m = 0;
    const auto mf = fields[static_cast<std::size_t>(layout.month_column)];
    const auto res = std::from_chars(mf.data(), mf.data() + mf.size(), m);
    if (res.ec != std::errc() || res.ptr != mf.data() + mf.size() || m % 100 < 1 ||
        m % 100 > 12) {
      throw InputError("portfolio table: " + where + " has invalid month '" + std::string(mf) + "'");
    }
    if (!months.empty() && m <= months.back()) {
      throw InputError("portfolio table: " + where + " month " + std::to_string(m) +
                       " does not follow " + std::to_string(months.back()));
    }
    double adjustment = 0.0;
    try {
      if (layout.adjustment_column) {
        adjustment = parse_double(fields[static_cast<std::size_t>(*layout.adjustment_column)]);
        if (is_missing(adjustment, layout) || !std::isfinite(adjustment)) {
          throw InputError("missing adjustment value");
        }
      }
      Vector row(cells);
      std::vector<bool> gap(static_cast<std::size_t>(cells), false);
      for (Index k = 0; k < cells; ++k) {
        const double v = parse_double(
            fields[static_cast<std::size_t>(layout.first_value_column + static_cast<int>(k))]);
        if (is_missing(v, layout)) {
          gap[static_cast<std::size_t>(k)] = true;
          row(k) = 0.0;
        } else if (!std::isfinite(v)) {
          throw InputError("non-finite value in value column " + std::to_string(k + 1));
        } else {
          row(k) = v - adjustment;
        }
      }
      values.push_back(std::move(row));
      missing.push_back(std::move(gap));
    } catch (const InputError& e) {
      throw InputError("portfolio table: " + where + ": " + e.what());
    }
    months.push_back(m);
  }
  if (months.empty()) throw InputError("portfolio table: no data rows");

  const auto T = months.size();
  for (Index k = 0; k < cells; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    std::vector<std::size_t> observed;
    for (std::size_t t = 0; t < T; ++t) {
      if (!missing[t][kk]) observed.push_back(t);
    }
    if (observed.empty()) {
      const auto [i, j] = cell_of_column(layout, k);
      throw InputError("portfolio table: " + cell_name(i, j) + " has no observed values");
    }
    for (std::size_t t = 0; t < observed.front(); ++t) values[t](k) = values[observed.front()](k);
    for (std::size_t t = observed.back() + 1; t < T; ++t) values[t](k) = values[observed.back()](k);
    for (std::size_t s = 0; s + 1 < observed.size(); ++s) {
      const auto a = observed[s];
      const auto b = observed[s + 1];
      const double va = values[a](k);
      const double vb = values[b](k);
      for (auto t = a + 1; t < b; ++t) {
        const double w = static_cast<double>(t - a) / static_cast<double>(b - a);
        values[t](k) = va + w * (vb - va);
      }
    }
  }

  std::vector<Matrix> data;
  data.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    Matrix m(layout.rows, layout.cols);
    for (Index k = 0; k < cells; ++k) {
      const auto [i, j] = cell_of_column(layout, k);
      m(i, j) = values[t](k);
    }
    data.push_back(std::move(m));
  }
  return {ObservationSet(std::move(data)), std::move(months)};
}

LabeledSeries ingest_portfolios(const std::filesystem::path& path, const PortfolioLayout& layout) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_portfolios(is, layout);
}

void write_portfolios(std::ostream& os, const LabeledSeries& series, const PortfolioLayout& layout) {
  validate(layout);
  const auto& x = series.observations;
  if (x.p() != layout.rows || x.q() != layout.cols) {
    throw DimensionError("write_portfolios: observations do not match the layout grid");
  }
  if (static_cast<Index>(series.months.size()) != x.T()) {
    throw InputError("write_portfolios: month labels do not match observations");
  }
  const char delim = layout.delimiter ? layout.delimiter : ',';
  const Index cells = layout.rows * layout.cols;
  int width = std::max(layout.month_column, layout.first_value_column + static_cast<int>(cells) - 1);
  if (layout.adjustment_column) width = std::max(width, *layout.adjustment_column);
  ++width;

  std::vector<std::string> fields(static_cast<std::size_t>(width));
  auto emit = [&]() {
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c) os << delim;
      os << fields[c];
    }
    os << '\n';
  };
  for (auto& f : fields) f.clear();
  fields[static_cast<std::size_t>(layout.month_column)] = "Month";
  for (Index k = 0; k < cells; ++k) {
    const auto [i, j] = cell_of_column(layout, k);
    fields[static_cast<std::size_t>(layout.first_value_column + static_cast<int>(k))] =
        "S" + std::to_string(i + 1) + "BE" + std::to_string(j + 1);
  }
  if (layout.adjustment_column) fields[static_cast<std::size_t>(*layout.adjustment_column)] = "Adj";
  emit();
  for (Index t = 0; t < x.T(); ++t) {
    for (auto& f : fields) f = "0";
    fields[static_cast<std::size_t>(layout.month_column)] =
        std::to_string(series.months[static_cast<std::size_t>(t)]);
    for (Index k = 0; k < cells; ++k) {
      const auto [i, j] = cell_of_column(layout, k);
      fields[static_cast<std::size_t>(layout.first_value_column + static_cast<int>(k))] =
          format_double(x[t](i, j));
    }
    emit();
  }
}

}  // namespace mpca
