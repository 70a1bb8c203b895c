#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "moran/catalog.hpp"
#include "moran/dynamics.hpp"
#include "moran/entropy.hpp"
#include "moran/errors.hpp"
#include "moran/format.hpp"
#include "moran/process.hpp"

namespace moran {

/// Landscape as configured: a catalog entry or an explicit matrix.
using LandscapeSpec = std::variant<LandscapeId, GameMatrix>;

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

/// mu = (n-1)/n * base^-k with base N+1 (or N when `base_is_n`).
struct ScalingKRule {
  double k = 1.0;
  bool base_is_n = false;
};
/// mu = c / N.
struct COverNRule {
  double c = 1.0;
};
using DerivedMu = std::variant<ScalingKRule, COverNRule>;

enum class OutputFormat { csv, json };

struct SweepOutput {
  std::string path;
  OutputFormat format = OutputFormat::csv;
};

struct SweepSpec {
  std::size_t n = 2;
  int N = 10;
  IncentiveSpec incentive = QReplicator{1.0};
  MutationModel mutation = UniformMutation{0.1};
  LandscapeSpec landscape = LandscapeId{landscape::Neutral{2}};
  std::vector<SweepAxis> axes;
  std::optional<DerivedMu> derived_mu;
  std::optional<SweepOutput> output;
  SolverOptions solver;
};

struct SweepRow {
  std::size_t n = 0;
  int N = 0;
  std::optional<double> mu;
  std::optional<double> q;
  std::optional<double> beta;
  std::string landscape;
  std::optional<double> param_a;
  std::optional<double> param_b;
  std::optional<double> r;
  std::optional<double> k;
  std::optional<double> entropy_rate;
  double bound = 0.0;
  std::optional<double> residual;
  std::string method;
  std::string error;
  /// Seconds spent on this grid point; not written to files.
  double wall_time = 0.0;

  bool same_values(const SweepRow& o) const {
    return n == o.n && N == o.N && mu == o.mu && q == o.q && beta == o.beta && landscape == o.landscape &&
           param_a == o.param_a && param_b == o.param_b && r == o.r && k == o.k &&
           entropy_rate == o.entropy_rate && bound == o.bound && residual == o.residual &&
           method == o.method && error == o.error;
  }
};

inline const std::vector<std::string>& sweep_csv_columns() {
  static const std::vector<std::string> columns{"n",       "N",       "mu",           "q",     "beta",
                                                "landscape", "param_a", "param_b",    "r",     "k",
                                                "entropy_rate", "bound", "residual", "method", "error"};
  return columns;
}

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) throw error(errc::schema, where + ": expected a number");
  return j.get<double>();
}

inline double number_or(const nlohmann::json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return require_number(obj[key], where + "/" + key);
}

inline std::string require_string(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    throw error(errc::schema, where + "/" + key + ": expected a string");
  }
  return obj[key].get<std::string>();
}

inline IncentiveSpec parse_incentive(const nlohmann::json& j) {
  const std::string where = "/incentive";
  if (!j.is_object()) throw error(errc::schema, where + ": expected an object");
  const std::string type = require_string(j, "type", where);
  if (type == "replicator") return QReplicator{number_or(j, "q", 1.0, where)};
  if (type == "fermi") return QFermi{number_or(j, "q", 1.0, where), number_or(j, "beta", 1.0, where)};
  if (type == "best_reply") return BestReply{};
  if (type == "neutral") return Neutral{};
  throw error(errc::schema, where + "/type: unknown incentive '" + type + "'");
}

inline MutationModel parse_mutation(const nlohmann::json& j) {
  const std::string where = "/mutation";
  if (!j.is_object()) throw error(errc::schema, where + ": expected an object");
  const std::string type = require_string(j, "type", where);
  if (type == "uniform") return UniformMutation{number_or(j, "mu", 0.0, where)};
  if (type == "matrix") {
    if (!j.contains("matrix") || !j["matrix"].is_array()) {
      throw error(errc::schema, where + "/matrix: expected an array of rows");
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < j["matrix"].size(); ++i) {
      const auto& row = j["matrix"][i];
      if (!row.is_array()) throw error(errc::schema, where + "/matrix/" + std::to_string(i) + ": expected an array");
      rows.emplace_back();
      for (std::size_t c = 0; c < row.size(); ++c) {
        rows.back().push_back(require_number(row[c], where + "/matrix/" + std::to_string(i) + "/" + std::to_string(c)));
      }
    }
    return ExplicitMutation{MutationMatrix(SquareMatrix(rows))};
  }
  throw error(errc::schema, where + "/type: unknown mutation model '" + type + "'");
}

inline LandscapeSpec parse_landscape(const nlohmann::json& j, std::size_t n) {
  const std::string where = "/landscape";
  if (!j.is_object()) throw error(errc::schema, where + ": expected an object");
  const std::string type = require_string(j, "type", where);
  if (type == "neutral") return LandscapeId{landscape::Neutral{n}};
  if (type == "moran") return LandscapeId{landscape::MoranR{number_or(j, "r", 1.0, where)}};
  if (type == "hawk_dove") return LandscapeId{landscape::HawkDove{}};
  if (type == "zero_diag") return LandscapeId{landscape::ZeroDiag{}};
  if (type == "rsp") return LandscapeId{landscape::RSP{number_or(j, "a", 1.0, where), number_or(j, "b", 1.0, where)}};
  if (type == "matrix") return load_game_matrix(j);
  throw error(errc::schema, where + "/type: unknown landscape '" + type + "'");
}

inline std::size_t landscape_types(const LandscapeSpec& l, std::size_t n) {
  if (const auto* m = std::get_if<GameMatrix>(&l)) return m->size();
  const auto& id = std::get<LandscapeId>(l);
  if (std::holds_alternative<landscape::Neutral>(id)) return n;
  if (std::holds_alternative<landscape::RSP>(id)) return 3;
  return 2;
}

struct GridPoint {
  std::map<std::string, double> values;
};

inline bool is_integral(double v) { return std::floor(v) == v; }

}  // namespace detail

/// Checks axis names against the configured process: an axis may only vary a
/// parameter the process actually has.
inline void validate(const SweepSpec& spec) {
  if (spec.axes.size() > 2) throw error(errc::schema, "/axes: at most two axes are supported");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < spec.axes.size(); ++i) {
    const SweepAxis& axis = spec.axes[i];
    const std::string where = "/axes/" + std::to_string(i);
    if (axis.values.empty()) throw error(errc::schema, where + "/values: grid is empty");
    if (!seen.insert(axis.name).second) throw error(errc::schema, where + "/name: duplicate axis '" + axis.name + "'");
    const std::string& a = axis.name;
    bool ok = false;
    if (a == "N") {
      ok = true;
      for (double v : axis.values) {
        if (!detail::is_integral(v) || v < 1) throw error(errc::schema, where + "/values: N must be a positive integer");
      }
    } else if (a == "n") {
      const auto* id = std::get_if<LandscapeId>(&spec.landscape);
      ok = id && std::holds_alternative<landscape::Neutral>(*id);
      for (double v : axis.values) {
        if (!detail::is_integral(v) || v < 2) throw error(errc::schema, where + "/values: n must be an integer >= 2");
      }
    } else if (a == "mu") {
      if (spec.derived_mu) throw error(errc::schema, where + "/name: a mu axis excludes derived_mu");
      ok = std::holds_alternative<UniformMutation>(spec.mutation);
    } else if (a == "q") {
      ok = std::holds_alternative<QReplicator>(spec.incentive) || std::holds_alternative<QFermi>(spec.incentive);
    } else if (a == "beta") {
      ok = std::holds_alternative<QFermi>(spec.incentive);
    } else if (a == "r") {
      const auto* id = std::get_if<LandscapeId>(&spec.landscape);
      ok = id && std::holds_alternative<landscape::MoranR>(*id);
    } else if (a == "a" || a == "b") {
      const auto* id = std::get_if<LandscapeId>(&spec.landscape);
      ok = id && std::holds_alternative<landscape::RSP>(*id);
    } else if (a == "k") {
      ok = spec.derived_mu && std::holds_alternative<ScalingKRule>(*spec.derived_mu);
    }
    if (!ok) throw error(errc::schema, where + "/name: '" + a + "' is not a parameter of this process");
  }
  const bool n_varies = std::any_of(spec.axes.begin(), spec.axes.end(), [](const SweepAxis& a) { return a.name == "n"; });
  if (!n_varies && detail::landscape_types(spec.landscape, spec.n) != spec.n) {
    throw error(errc::schema, "/landscape: has " + std::to_string(detail::landscape_types(spec.landscape, spec.n)) +
                                  " types but n=" + std::to_string(spec.n));
  }
  if (spec.derived_mu && !std::holds_alternative<UniformMutation>(spec.mutation)) {
    throw error(errc::schema, "/derived_mu: requires uniform mutation");
  }
}

/// Parses the sweep configuration document.
inline SweepSpec parse_sweep_spec(const nlohmann::json& doc) {
  if (!doc.is_object()) throw error(errc::schema, "/: expected an object");
  SweepSpec spec;
  if (!doc.contains("n") || !doc["n"].is_number_integer() || doc["n"].get<long long>() < 2) {
    throw error(errc::schema, "/n: expected an integer >= 2");
  }
  if (!doc.contains("N") || !doc["N"].is_number_integer() || doc["N"].get<long long>() < 1) {
    throw error(errc::schema, "/N: expected a positive integer");
  }
  spec.n = doc["n"].get<std::size_t>();
  spec.N = doc["N"].get<int>();
  if (!doc.contains("incentive")) throw error(errc::schema, "/incentive: missing");
  spec.incentive = detail::parse_incentive(doc["incentive"]);
  if (doc.contains("mutation")) spec.mutation = detail::parse_mutation(doc["mutation"]);
  if (!doc.contains("landscape")) throw error(errc::schema, "/landscape: missing");
  spec.landscape = detail::parse_landscape(doc["landscape"], spec.n);
  if (doc.contains("axes")) {
    if (!doc["axes"].is_array()) throw error(errc::schema, "/axes: expected an array");
    for (std::size_t i = 0; i < doc["axes"].size(); ++i) {
      const auto& a = doc["axes"][i];
      const std::string where = "/axes/" + std::to_string(i);
      if (!a.is_object()) throw error(errc::schema, where + ": expected an object");
      SweepAxis axis{detail::require_string(a, "name", where), {}};
      if (!a.contains("values") || !a["values"].is_array()) {
        throw error(errc::schema, where + "/values: expected an array");
      }
      for (std::size_t v = 0; v < a["values"].size(); ++v) {
        axis.values.push_back(detail::require_number(a["values"][v], where + "/values/" + std::to_string(v)));
      }
      spec.axes.push_back(std::move(axis));
    }
  }
  if (doc.contains("derived_mu") && !doc["derived_mu"].is_null()) {
    const auto& d = doc["derived_mu"];
    const std::string where = "/derived_mu";
    if (!d.is_object()) throw error(errc::schema, where + ": expected an object");
    const std::string rule = detail::require_string(d, "rule", where);
    if (rule == "scaling_k") {
      ScalingKRule s{detail::number_or(d, "k", 1.0, where), false};
      if (d.contains("base")) {
        const std::string base = detail::require_string(d, "base", where);
        if (base == "N") s.base_is_n = true;
        else if (base != "N+1") throw error(errc::schema, where + "/base: expected \"N+1\" or \"N\"");
      }
      spec.derived_mu = s;
    } else if (rule == "c_over_N") {
      spec.derived_mu = COverNRule{detail::number_or(d, "c", 1.0, where)};
    } else {
      throw error(errc::schema, where + "/rule: unknown rule '" + rule + "'");
    }
  }
  if (doc.contains("output") && !doc["output"].is_null()) {
    const auto& o = doc["output"];
    if (!o.is_object()) throw error(errc::schema, "/output: expected an object");
    SweepOutput out{detail::require_string(o, "path", "/output"), OutputFormat::csv};
    if (o.contains("format")) {
      const std::string f = detail::require_string(o, "format", "/output");
      if (f == "json") out.format = OutputFormat::json;
      else if (f != "csv") throw error(errc::schema, "/output/format: expected \"csv\" or \"json\"");
    }
    spec.output = out;
  }
  if (doc.contains("tolerance")) spec.solver.tolerance = detail::require_number(doc["tolerance"], "/tolerance");
  if (doc.contains("max_iters")) {
    if (!doc["max_iters"].is_number_integer()) throw error(errc::schema, "/max_iters: expected an integer");
    spec.solver.max_iterations = doc["max_iters"].get<std::size_t>();
  }
  validate(spec);
  return spec;
}

inline SweepSpec load_sweep_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::io, "cannot open sweep config " + path + ": file not found or unreadable");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw error(errc::schema, std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return parse_sweep_spec(doc);
}

namespace detail {

inline std::vector<GridPoint> grid(const SweepSpec& spec) {
  std::vector<GridPoint> points{GridPoint{}};
  for (const SweepAxis& axis : spec.axes) {
    std::vector<GridPoint> next;
    for (const GridPoint& p : points) {
      for (double v : axis.values) {
        GridPoint q = p;
        q.values[axis.name] = v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

// Applies one grid point to the base spec and evaluates it. Failures are
// recorded in the row rather than thrown.
inline SweepRow evaluate_point(const SweepSpec& spec, const GridPoint& point) {
  const auto start = std::chrono::steady_clock::now();
  auto value = [&](const char* name) -> std::optional<double> {
    auto it = point.values.find(name);
    if (it == point.values.end()) return std::nullopt;
    return it->second;
  };

  SweepRow row;
  row.n = value("n") ? static_cast<std::size_t>(*value("n")) : spec.n;
  row.N = value("N") ? static_cast<int>(*value("N")) : spec.N;

  IncentiveSpec incentive = spec.incentive;
  if (auto* r = std::get_if<QReplicator>(&incentive)) {
    if (value("q")) r->q = *value("q");
    row.q = r->q;
  } else if (auto* f = std::get_if<QFermi>(&incentive)) {
    if (value("q")) f->q = *value("q");
    if (value("beta")) f->beta = *value("beta");
    row.q = f->q;
    row.beta = f->beta;
  }

  LandscapeSpec landscape = spec.landscape;
  if (auto* id = std::get_if<LandscapeId>(&landscape)) {
    if (auto* neutral = std::get_if<landscape::Neutral>(id)) {
      neutral->n = row.n;
    } else if (auto* moran = std::get_if<landscape::MoranR>(id)) {
      if (value("r")) moran->r = *value("r");
      row.r = moran->r;
    } else if (auto* rsp = std::get_if<landscape::RSP>(id)) {
      if (value("a")) rsp->a = *value("a");
      if (value("b")) rsp->b = *value("b");
      row.param_a = rsp->a;
      row.param_b = rsp->b;
    }
    row.landscape = landscape_name(*id);
  } else {
    row.landscape = "matrix";
  }

  MutationModel mutation = spec.mutation;
  try {
    row.bound = entropy_rate_bound(row.n);
    if (auto* u = std::get_if<UniformMutation>(&mutation)) {
      if (value("mu")) u->mu = *value("mu");
      if (spec.derived_mu) {
        if (const auto* s = std::get_if<ScalingKRule>(&*spec.derived_mu)) {
          const double k = value("k").value_or(s->k);
          const double base = s->base_is_n ? row.N : row.N + 1.0;
          u->mu = static_cast<double>(row.n - 1) / static_cast<double>(row.n) * std::pow(base, -k);
          row.k = k;
        } else {
          u->mu = std::get<COverNRule>(*spec.derived_mu).c / row.N;
        }
      }
      row.mu = u->mu;
    }

    ProcessConfig config;
    config.n = row.n;
    config.N = row.N;
    config.incentive = incentive;
    config.mutation = mutation;
    config.landscape = std::holds_alternative<GameMatrix>(landscape)
                           ? std::get<GameMatrix>(landscape)
                           : landscape_matrix(std::get<LandscapeId>(landscape));
    PipelineOptions options;
    options.solver = spec.solver;
    const ProcessResult result = analyze(config, options);
    row.entropy_rate = result.report.entropy_rate;
    row.residual = result.report.residual;
    row.method = to_string(result.report.method);
  } catch (const error& e) {
    if (e.code() == errc::numerical_consistency) throw;
    row.error = e.what();
  }
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace detail

/// Worker count from MORAN_THREADS, falling back to the hardware count.
inline unsigned default_worker_count() {
  if (const char* env = std::getenv("MORAN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates every grid point (first axis outermost). Rows come back in grid
/// order whatever the number of workers. A row whose entropy rate exceeds
/// the bound aborts the sweep with numerical_consistency.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned workers = 1) {
  validate(spec);
  const std::vector<detail::GridPoint> points = detail::grid(spec);
  std::vector<SweepRow> rows(points.size());
  std::vector<std::exception_ptr> failures(points.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        rows[i] = detail::evaluate_point(spec, points[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(points.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (failures[i]) std::rethrow_exception(failures[i]);
    if (rows[i].entropy_rate && *rows[i].entropy_rate > rows[i].bound + 1e-9) {
      throw error(errc::numerical_consistency,
                  "entropy rate " + format_double(*rows[i].entropy_rate) + " exceeds the bound " +
                      format_double(rows[i].bound) + " at grid point " + std::to_string(i));
    }
  }
  return rows;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_number(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

inline std::vector<std::string> split_csv_line(std::istream& is, bool& ok) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (is.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          is.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  ok = any;
  if (any) fields.push_back(std::move(field));
  return fields;
}

inline std::optional<double> optional_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

inline nlohmann::json json_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace detail

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  const auto& columns = sweep_csv_columns();
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const SweepRow& r : rows) {
    using detail::csv_number;
    os << r.n << ',' << r.N << ',' << csv_number(r.mu) << ',' << csv_number(r.q) << ','
       << csv_number(r.beta) << ',' << detail::csv_field(r.landscape) << ',' << csv_number(r.param_a) << ','
       << csv_number(r.param_b) << ',' << csv_number(r.r) << ',' << csv_number(r.k) << ','
       << csv_number(r.entropy_rate) << ',' << format_double(r.bound) << ',' << csv_number(r.residual) << ','
       << detail::csv_field(r.method) << ',' << detail::csv_field(r.error) << '\n';
  }
}

inline std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  bool ok = false;
  const auto header = detail::split_csv_line(is, ok);
  if (!ok || header != sweep_csv_columns()) throw error(errc::schema, "unexpected sweep CSV header");
  std::vector<SweepRow> rows;
  std::size_t line = 1;
  for (;;) {
    auto f = detail::split_csv_line(is, ok);
    ++line;
    if (!ok) break;
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != header.size()) {
      throw error(errc::schema, "line " + std::to_string(line) + ": expected " +
                                    std::to_string(header.size()) + " fields");
    }
    SweepRow r;
    r.n = static_cast<std::size_t>(parse_double(f[0]));
    r.N = static_cast<int>(parse_double(f[1]));
    r.mu = detail::optional_number(f[2]);
    r.q = detail::optional_number(f[3]);
    r.beta = detail::optional_number(f[4]);
    r.landscape = f[5];
    r.param_a = detail::optional_number(f[6]);
    r.param_b = detail::optional_number(f[7]);
    r.r = detail::optional_number(f[8]);
    r.k = detail::optional_number(f[9]);
    r.entropy_rate = detail::optional_number(f[10]);
    r.bound = parse_double(f[11]);
    r.residual = detail::optional_number(f[12]);
    r.method = f[13];
    r.error = f[14];
    rows.push_back(std::move(r));
  }
  return rows;
}

inline nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const SweepRow& r : rows) {
    using detail::json_number;
    out.push_back({{"n", r.n},
                   {"N", r.N},
                   {"mu", json_number(r.mu)},
                   {"q", json_number(r.q)},
                   {"beta", json_number(r.beta)},
                   {"landscape", r.landscape},
                   {"param_a", json_number(r.param_a)},
                   {"param_b", json_number(r.param_b)},
                   {"r", json_number(r.r)},
                   {"k", json_number(r.k)},
                   {"entropy_rate", json_number(r.entropy_rate)},
                   {"bound", r.bound},
                   {"residual", json_number(r.residual)},
                   {"method", r.method},
                   {"error", r.error}});
  }
  return out;
}

/// Opens the output file before any computation so an unwritable path fails
/// fast, then runs the sweep and writes it.
inline std::vector<SweepRow> run_sweep_to_file(const SweepSpec& spec, unsigned workers = 1) {
  if (!spec.output) throw error(errc::schema, "/output: sweep has no output path");
  std::ofstream out(spec.output->path, std::ios::binary | std::ios::trunc);
  if (!out) throw error(errc::io, "cannot write " + spec.output->path);
  std::vector<SweepRow> rows = run_sweep(spec, workers);
  if (spec.output->format == OutputFormat::csv) {
    write_sweep_csv(out, rows);
  } else {
    out << sweep_to_json(rows).dump(2) << '\n';
  }
  if (!out) throw error(errc::io, "failed writing " + spec.output->path);
  return rows;
}

}  // namespace moran
