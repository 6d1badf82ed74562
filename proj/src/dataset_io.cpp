#include "mpca/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "mpca/error.hpp"

namespace mpca {

namespace {

using json = nlohmann::json;

bool is_delimiter(char c) { return c == ',' || c == ';' || c == '\t' || c == ' ' || c == '\r'; }

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  const bool whitespace_only = line.find_first_of(",;") == std::string_view::npos;
  while (i <= line.size()) {
    if (whitespace_only) {
      while (i < line.size() && is_delimiter(line[i])) ++i;
      if (i == line.size()) break;
    }
    std::size_t j = i;
    while (j < line.size() && !(whitespace_only ? is_delimiter(line[j])
                                                : (line[j] == ',' || line[j] == ';'))) {
      ++j;
    }
    auto field = line.substr(i, j - i);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && is_delimiter(field.back())) field.remove_suffix(1);
    out.push_back(field);
    i = j + 1;
  }
  return out;
}

bool blank_or_comment(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!is_delimiter(c)) return false;
  }
  return true;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty() || !rows.front().is_array()) {
    throw InputError("expected a non-empty array of rows");
  }
  const auto n = static_cast<Index>(rows.size());
  const auto m = static_cast<Index>(rows.front().size());
  Matrix out(n, m);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != m) {
      throw InputError("ragged matrix at row " + std::to_string(i));
    }
    for (Index j = 0; j < m; ++j) out(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return out;
}

json sequence_to_json(const std::vector<Matrix>& seq) {
  json out = json::array();
  for (const auto& m : seq) out.push_back(matrix_to_json(m));
  return out;
}

std::vector<Matrix> sequence_from_json(const json& j) {
  std::vector<Matrix> out;
  if (!j.is_array()) return out;
  for (const auto& m : j) out.push_back(matrix_from_json(m));
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
  return is;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
  if (token == "nan" || token == "NaN") return std::nan("");
  if (token == "inf") return HUGE_VAL;
  if (token == "-inf") return -HUGE_VAL;
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw InputError("not a number: '" + std::string(token) + "'");
  }
  return v;
}

void write_dataset(std::ostream& os, const ObservationSet& x, char delimiter) {
  os << x.T() << delimiter << x.p() << delimiter << x.q() << '\n';
  std::string line;
  for (Index t = 0; t < x.T(); ++t) {
    os << '\n';
    const Matrix& m = x[t];
    for (Index i = 0; i < m.rows(); ++i) {
      line.clear();
      for (Index j = 0; j < m.cols(); ++j) {
        if (j) line.push_back(delimiter);
        line += format_double(m(i, j));
      }
      line.push_back('\n');
      os << line;
    }
  }
}

ObservationSet read_dataset(std::istream& is) {
  std::string line;
  long line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      ++line_no;
      if (!blank_or_comment(line)) return true;
    }
    return false;
  };
  if (!next_line()) throw InputError("dataset: missing header");
  const auto header = split_fields(line);
  if (header.size() != 3) {
    throw InputError("dataset: line " + std::to_string(line_no) + ": header must hold T, p, q");
  }
  Index dims[3];
  for (int k = 0; k < 3; ++k) {
    long v = 0;
    const auto f = header[static_cast<std::size_t>(k)];
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (res.ec != std::errc() || res.ptr != f.data() + f.size() || v < 1) {
      throw InputError("dataset: invalid header field '" + std::string(f) + "'");
    }
    dims[k] = static_cast<Index>(v);
  }
  const auto [T, p, q] = dims;
  std::vector<Matrix> data;
  data.reserve(static_cast<std::size_t>(T));
  for (Index t = 0; t < T; ++t) {
    Matrix m(p, q);
    for (Index i = 0; i < p; ++i) {
      if (!next_line()) {
        throw InputError("dataset: line " + std::to_string(line_no + 1) + ": unexpected end of input in observation " +
                         std::to_string(t + 1));
      }
      const auto fields = split_fields(line);
      if (static_cast<Index>(fields.size()) != q) {
        throw InputError("dataset: line " + std::to_string(line_no) + " has " +
                         std::to_string(fields.size()) + " values, expected " + std::to_string(q));
      }
      for (Index j = 0; j < q; ++j) {
        try {
          m(i, j) = parse_double(fields[static_cast<std::size_t>(j)]);
          if (!std::isfinite(m(i, j))) throw InputError("non-finite value");
        } catch (const InputError& e) {
          throw InputError("dataset: line " + std::to_string(line_no) + ": " + e.what());
        }
      }
    }
    data.push_back(std::move(m));
  }
  if (next_line()) throw InputError("dataset: trailing data at line " + std::to_string(line_no));
  return ObservationSet(std::move(data));
}

void save_dataset(const std::filesystem::path& path, const ObservationSet& x, char delimiter) {
  auto os = open_out(path);
  write_dataset(os, x, delimiter);
  finish(os, path);
}

ObservationSet load_dataset(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_dataset(is);
}

void save_truth(const std::filesystem::path& path, const GroundTruth& truth) {
  json j;
  j["r"] = matrix_to_json(truth.r);
  j["c"] = matrix_to_json(truth.c);
  j["f"] = sequence_to_json(truth.f);
  j["s"] = sequence_to_json(truth.s);
  auto os = open_out(path);
  os << j.dump() << '\n';
  finish(os, path);
}

GroundTruth load_truth(const std::filesystem::path& path) {
  auto is = open_in(path);
  json j;
  try {
    is >> j;
    GroundTruth out;
    out.r = matrix_from_json(j.at("r"));
    out.c = matrix_from_json(j.at("c"));
    out.f = sequence_from_json(j.value("f", json::array()));
    out.s = sequence_from_json(j.value("s", json::array()));
    return out;
  } catch (const json::exception& e) {
    throw InputError("truth file '" + path.string() + "': " + e.what());
  }
}

void save_fit(const std::filesystem::path& path, const FactorModelFit& fit) {
  json j;
  j["method"] = std::string(to_string(fit.loadings.method));
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["r_hat"] = matrix_to_json(fit.loadings.r_hat);
  j["c_hat"] = matrix_to_json(fit.loadings.c_hat);
  j["factors"] = sequence_to_json(fit.factors);
  auto os = open_out(path);
  os << j.dump() << '\n';
  finish(os, path);
}

}  // namespace mpca
