#include "mpca/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mpca/error.hpp"

namespace mpca {

namespace {

using json = nlohmann::json;

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

const json* section(const json& root, const char* name, std::set<std::string> keys) {
  if (!root.contains(name)) return nullptr;
  const json& s = root.at(name);
  if (!s.is_object()) throw InputError(std::string("config: section '") + name + "' must be an object");
  for (const auto& [k, v] : s.items()) {
    if (!keys.count(k)) throw InputError("config: unknown key '" + k + "' in section '" + name + "'");
  }
  return &s;
}

template <class T>
void read(const json* s, const char* key, T& out) {
  if (!s || !s->contains(key) || s->at(key).is_null()) return;
  try {
    out = s->at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

template <class T>
void read(const json* s, const char* key, std::optional<T>& out) {
  if (!s || !s->contains(key) || s->at(key).is_null()) return;
  T v{};
  read(s, key, v);
  out = v;
}

}  // namespace

ExperimentFile parse_experiment(const std::string& text) {
  const json root = parse_json(text);
  if (!root.is_object()) throw InputError("config: top level must be an object");
  for (const auto& [k, v] : root.items()) {
    static const std::set<std::string> known{"grid", "model", "methods", "run", "output",
                                             "simulation", "rolling", "portfolio"};
    if (!known.count(k)) throw InputError("config: unknown section '" + k + "'");
  }
  ExperimentFile f;
  auto& spec = f.spec;

  if (const json* g = section(root, "grid", {"dims", "distributions", "noise_scales"})) {
    if (g->contains("dims")) {
      std::vector<std::vector<Index>> dims;
      read(g, "dims", dims);
      spec.dims.clear();
      for (const auto& d : dims) {
        if (d.size() != 2) throw InputError("config: each dims entry must be [p, q]");
        spec.dims.emplace_back(d[0], d[1]);
      }
    }
    if (g->contains("distributions")) {
      std::vector<std::string> labels;
      read(g, "distributions", labels);
      spec.dists.clear();
      for (const auto& l : labels) spec.dists.push_back(parse_distribution(l));
    }
    read(g, "noise_scales", spec.noise_scales);
  }
  if (const json* m = section(root, "model", {"p0", "q0", "phi", "psi", "T", "burn_in"})) {
    read(m, "p0", spec.p0);
    read(m, "q0", spec.q0);
    read(m, "phi", spec.phi);
    read(m, "psi", spec.psi);
    read(m, "T", spec.T);
    read(m, "burn_in", spec.burn_in);
  }
  if (const json* m = section(root, "methods", {"list", "r_max", "tol", "max_iter"})) {
    read(m, "list", spec.methods);
    read(m, "r_max", spec.r_max);
    read(m, "tol", spec.ctl.tol);
    read(m, "max_iter", spec.ctl.max_iter);
  }
  if (const json* r = section(root, "run", {"replications", "seed", "workers", "keep_replications"})) {
    read(r, "replications", spec.replications);
    read(r, "seed", spec.base_seed);
    read(r, "workers", spec.workers);
    read(r, "keep_replications", spec.keep_replications);
  }
  if (const json* o = section(root, "output", {"path", "format"})) {
    read(o, "path", f.output.path);
    read(o, "format", f.output.format);
  }
  return f;
}

ExperimentFile load_experiment(const std::filesystem::path& path) {
  return parse_experiment(read_text_file(path));
}

SimulationConfig parse_simulation(const std::string& text, SimulationConfig cfg) {
  const json root = parse_json(text);
  const json* s = section(root, "simulation",
                          {"p", "q", "p0", "q0", "T", "phi", "psi", "s_e", "distribution", "gamma",
                           "spherical_noise", "burn_in", "seed"});
  read(s, "p", cfg.p);
  read(s, "q", cfg.q);
  read(s, "p0", cfg.p0);
  read(s, "q0", cfg.q0);
  read(s, "T", cfg.T);
  read(s, "phi", cfg.phi);
  read(s, "psi", cfg.psi);
  read(s, "s_e", cfg.s_e);
  std::optional<std::string> dist;
  read(s, "distribution", dist);
  if (dist) cfg.dist = parse_distribution(*dist);
  read(s, "gamma", cfg.gamma);
  read(s, "spherical_noise", cfg.spherical_noise);
  read(s, "burn_in", cfg.burn_in);
  read(s, "seed", cfg.seed);
  return cfg;
}

RollingFile parse_rolling(const std::string& text) {
  const json root = parse_json(text);
  RollingFile f;
  auto& o = f.options;
  if (const json* r = section(root, "rolling", {"first_year", "last_year", "bandwidth"})) {
    read(r, "first_year", o.first_year);
    read(r, "last_year", o.last_year);
    read(r, "bandwidth", o.bandwidth);
  }
  if (const json* m = section(root, "model", {"p0", "q0", "phi", "psi", "T", "burn_in"})) {
    read(m, "p0", o.ranks.p0);
    read(m, "q0", o.ranks.q0);
  }
  if (const json* m = section(root, "methods", {"list", "r_max", "tol", "max_iter"})) {
    std::vector<std::string> list;
    read(m, "list", list);
    if (!list.empty()) o.method = parse_method(list.front());
    read(m, "tol", o.ctl.tol);
    read(m, "max_iter", o.ctl.max_iter);
  }
  auto& l = f.layout;
  if (const json* p = section(root, "portfolio", {"order", "adjustment_column", "missing",
                                                  "month_column", "first_value_column"})) {
    std::optional<std::string> order;
    read(p, "order", order);
    if (order) {
      if (*order == "size_major") l.order = PortfolioLayout::Order::size_major;
      else if (*order == "be_major") l.order = PortfolioLayout::Order::be_major;
      else throw InputError("config: portfolio order must be size_major or be_major");
    }
    read(p, "adjustment_column", l.adjustment_column);
    read(p, "missing", l.missing_sentinels);
    read(p, "month_column", l.month_column);
    read(p, "first_value_column", l.first_value_column);
  }
  if (const json* out = section(root, "output", {"path", "format"})) {
    read(out, "path", f.output.path);
    read(out, "format", f.output.format);
  }
  return f;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace mpca
