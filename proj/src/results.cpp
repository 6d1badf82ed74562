#include "mpca/results.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mpca/dataset_io.hpp"
#include "mpca/error.hpp"

namespace mpca {

namespace {

using json = nlohmann::json;

constexpr std::string_view kCsvHeader =
    "distribution,p,q,s_e,method,metric,mean,sd,exact,under,count";
constexpr std::string_view kFailureHeader = "#failures";

bool same_double(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

Index parse_index(const std::string& s) {
  const double v = parse_double(s);
  if (v != std::floor(v)) throw InputError("not an integer: '" + s + "'");
  return static_cast<Index>(v);
}

// NaN is stored as null and infinities as the strings "inf" / "-inf".
json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return format_double(v);
  return v;
}

double number_from(const json& j) {
  if (j.is_null()) return std::nan("");
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

std::string fixed(double v, int decimals) {
  if (!std::isfinite(v)) return format_double(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string to_csv(const ResultsTable& t) {
  std::ostringstream os;
  for (const auto& [k, v] : t.metadata) os << "# " << k << '=' << v << '\n';
  os << kCsvHeader << '\n';
  for (const auto& r : t.rows) {
    os << csv_field(r.distribution) << ',' << r.p << ',' << r.q << ',' << format_double(r.s_e)
       << ',' << csv_field(r.method) << ',' << csv_field(r.metric) << ','
       << format_double(r.mean) << ',' << format_double(r.sd) << ',' << format_double(r.exact)
       << ',' << format_double(r.under) << ',' << r.count << '\n';
  }
  if (!t.failures.empty()) {
    os << kFailureHeader << '\n';
    for (const auto& f : t.failures) {
      os << csv_field(f.cell) << ',' << f.replication << ',' << csv_field(f.method) << ','
         << csv_field(f.reason) << '\n';
    }
  }
  return os.str();
}

std::string to_json(const ResultsTable& t) {
  json j;
  j["metadata"] = json::array();
  for (const auto& [k, v] : t.metadata) j["metadata"].push_back({k, v});
  j["rows"] = json::array();
  for (const auto& r : t.rows) {
    j["rows"].push_back({{"distribution", r.distribution},
                         {"p", r.p},
                         {"q", r.q},
                         {"s_e", number_or_null(r.s_e)},
                         {"method", r.method},
                         {"metric", r.metric},
                         {"mean", number_or_null(r.mean)},
                         {"sd", number_or_null(r.sd)},
                         {"exact", number_or_null(r.exact)},
                         {"under", number_or_null(r.under)},
                         {"count", r.count}});
  }
  j["failures"] = json::array();
  for (const auto& f : t.failures) {
    j["failures"].push_back({{"cell", f.cell},
                             {"replication", f.replication},
                             {"method", f.method},
                             {"reason", f.reason}});
  }
  return j.dump(2) + "\n";
}

std::string to_markdown(const ResultsTable& t) {
  std::ostringstream os;
  for (const auto& [k, v] : t.metadata) os << "<!-- " << k << ": " << v << " -->\n";
  os << "| distribution | (p,q) | s_E | method | metric | value | n |\n";
  os << "|---|---|---|---|---|---|---|\n";
  for (const auto& r : t.rows) {
    const bool freq = std::isnan(r.mean) && !std::isnan(r.exact);
    os << "| " << r.distribution << " | (" << r.p << ',' << r.q << ") | " << format_double(r.s_e)
       << " | " << r.method << " | " << r.metric << " | "
       << (freq ? paren_pair(r.exact, r.under, 2) : paren_pair(r.mean, r.sd, 4)) << " | "
       << r.count << " |\n";
  }
  if (!t.failures.empty()) {
    os << "\n" << t.failures.size() << " failed replication(s):\n\n";
    for (const auto& f : t.failures) {
      os << "- " << f.cell << " rep " << f.replication << " " << f.method << ": " << f.reason
         << '\n';
    }
  }
  return os.str();
}

}  // namespace

bool same_table(const ResultsTable& a, const ResultsTable& b) {
  if (a.metadata != b.metadata || a.rows.size() != b.rows.size() ||
      a.failures.size() != b.failures.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& x = a.rows[i];
    const auto& y = b.rows[i];
    if (x.distribution != y.distribution || x.p != y.p || x.q != y.q || x.method != y.method ||
        x.metric != y.metric || x.count != y.count || !same_double(x.s_e, y.s_e) ||
        !same_double(x.mean, y.mean) || !same_double(x.sd, y.sd) ||
        !same_double(x.exact, y.exact) || !same_double(x.under, y.under)) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.failures.size(); ++i) {
    const auto& x = a.failures[i];
    const auto& y = b.failures[i];
    if (x.cell != y.cell || x.replication != y.replication || x.method != y.method ||
        x.reason != y.reason) {
      return false;
    }
  }
  return true;
}

ResultFormat parse_result_format(std::string_view tag) {
  if (tag == "csv") return ResultFormat::csv;
  if (tag == "json") return ResultFormat::json;
  if (tag == "markdown" || tag == "md") return ResultFormat::markdown;
  throw InputError("unknown output format '" + std::string(tag) + "'");
}

std::string format_results(const ResultsTable& table, ResultFormat format) {
  switch (format) {
    case ResultFormat::csv: return to_csv(table);
    case ResultFormat::json: return to_json(table);
    case ResultFormat::markdown: return to_markdown(table);
  }
  throw InputError("unknown output format");
}

void emit_results(const ResultsTable& table, ResultFormat format,
                  const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << format_results(table, format);
  os.flush();
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

ResultsTable parse_results_csv(std::string_view text) {
  ResultsTable t;
  std::istringstream is{std::string(text)};
  std::string line;
  bool header_seen = false;
  bool in_failures = false;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == kFailureHeader) {
      in_failures = true;
      continue;
    }
    if (!header_seen && line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw InputError("results csv: bad metadata line");
      t.metadata.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (!header_seen) {
      if (line != kCsvHeader) throw InputError("results csv: unexpected header");
      header_seen = true;
      continue;
    }
    const auto f = csv_split(line);
    try {
      if (in_failures) {
        if (f.size() != 4) throw InputError("expected 4 failure fields");
        t.failures.push_back({f[0], static_cast<int>(parse_index(f[1])), f[2], f[3]});
      } else {
        if (f.size() != 11) throw InputError("expected 11 fields");
        t.rows.push_back({f[0], parse_index(f[1]), parse_index(f[2]), parse_double(f[3]), f[4],
                          f[5], parse_double(f[6]), parse_double(f[7]), parse_double(f[8]),
                          parse_double(f[9]), parse_index(f[10])});
      }
    } catch (const InputError& e) {
      throw InputError("results csv line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!header_seen) throw InputError("results csv: missing header");
  return t;
}

ResultsTable parse_results_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    ResultsTable t;
    for (const auto& kv : j.at("metadata")) {
      t.metadata.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
    }
    for (const auto& r : j.at("rows")) {
      t.rows.push_back({r.at("distribution").get<std::string>(), r.at("p").get<Index>(),
                        r.at("q").get<Index>(), number_from(r.at("s_e")),
                        r.at("method").get<std::string>(), r.at("metric").get<std::string>(),
                        number_from(r.at("mean")), number_from(r.at("sd")),
                        number_from(r.at("exact")), number_from(r.at("under")),
                        r.at("count").get<Index>()});
    }
    for (const auto& f : j.at("failures")) {
      t.failures.push_back({f.at("cell").get<std::string>(), f.at("replication").get<int>(),
                            f.at("method").get<std::string>(), f.at("reason").get<std::string>()});
    }
    return t;
  } catch (const json::exception& e) {
    throw InputError(std::string("results json: ") + e.what());
  }
}

std::string paren_pair(double a, double b, int decimals) {
  return "(" + fixed(a, decimals) + "," + fixed(b, decimals) + ")";
}

std::pair<double, double> rank_frequencies(const std::vector<std::pair<Index, Index>>& selected,
                                           Index p0, Index q0) {
  if (selected.empty()) return {std::nan(""), std::nan("")};
  std::size_t exact = 0;
  std::size_t under = 0;
  for (const auto& [p, q] : selected) {
    if (p == p0 && q == q0) ++exact;
    else if (p <= p0 && q <= q0) ++under;
  }
  const auto n = static_cast<double>(selected.size());
  return {static_cast<double>(exact) / n, static_cast<double>(under) / n};
}

}  // namespace mpca
