#include "markov_krieger/serialize.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <memory>
#include <utility>

#include "markov_krieger/errors.hpp"

namespace mk {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(Err::InvalidInput, where + ": " + what);
}

const json& require(const json& doc, const char* key, const std::string& where) {
  if (!doc.is_object()) bad(where, "expected an object");
  const auto it = doc.find(key);
  if (it == doc.end()) bad(where, std::string("missing key '") + key + "'");
  return *it;
}

double require_number(const json& doc, const char* key,
                      const std::string& where) {
  const json& v = require(doc, key, where);
  if (!v.is_number()) bad(where + "." + key, "expected a number");
  return v.get<double>();
}

std::int64_t require_integer(const json& doc, const char* key,
                             const std::string& where) {
  const json& v = require(doc, key, where);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    bad(where + "." + key, "expected an integer");
  return v.get<std::int64_t>();
}

std::string require_string(const json& doc, const char* key,
                           const std::string& where) {
  const json& v = require(doc, key, where);
  if (!v.is_string()) bad(where + "." + key, "expected a string");
  return v.get<std::string>();
}

// ------------------------------------------------------------ enum names

std::string family_name(ExampleFamily f) {
  return f == ExampleFamily::Fullshift2 ? "fullshift2" : "golden-mean";
}

ExampleFamily family_from_name(const std::string& s, const std::string& where) {
  if (s == "fullshift2") return ExampleFamily::Fullshift2;
  if (s == "golden-mean") return ExampleFamily::GoldenMean;
  bad(where, "unknown family '" + s + "' (fullshift2 | golden-mean)");
}

std::string series_status_name(SeriesStatus s) {
  switch (s) {
    case SeriesStatus::Converges: return "Converges";
    case SeriesStatus::Diverges: return "Diverges";
    case SeriesStatus::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

std::string basis_name(BasisKind b) {
  return b == BasisKind::SymbolicTail ? "symbolic-tail" : "numeric-heuristic";
}

std::string verdict_name(VerdictKind v) {
  switch (v) {
    case VerdictKind::TypeII1: return "TypeII1";
    case VerdictKind::TypeIII1: return "TypeIII1";
    case VerdictKind::NotConservative: return "NotConservative";
    case VerdictKind::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

std::string scope_name(DichotomyScope s) {
  switch (s) {
    case DichotomyScope::TwoStateCovered: return "two-state-covered";
    case DichotomyScope::GoldenMeanCovered: return "golden-mean-covered";
    case DichotomyScope::BeyondProvenScope: return "beyond-proven-scope";
  }
  return "beyond-proven-scope";
}

// ------------------------------------------------------------- sub-parsers

json segment_to_json(const Segment& s) {
  return json{{"begin", s.begin}, {"end", s.end},
              {"rows", matrix_to_json(s.matrix)}};
}

Segment segment_from_json(const json& doc, const std::string& where) {
  Segment s;
  s.begin = require_integer(doc, "begin", where);
  s.end = require_integer(doc, "end", where);
  s.matrix = matrix_from_json(require(doc, "rows", where), where + ".rows");
  return s;
}

json p_rule_to_json(const PRule& p) {
  if (const auto* c = std::get_if<ConstantP>(&p))
    return json{{"kind", "constant"}, {"value", c->value}};
  if (const auto* g = std::get_if<GeometricOffsetP>(&p))
    return json{{"kind", "geometric_offset"}, {"c", g->c}, {"ratio", g->ratio}};
  if (const auto* w = std::get_if<PowerOffsetP>(&p))
    return json{{"kind", "power_offset"}, {"c", w->c}, {"alpha", w->alpha}};
  return json{{"kind", "constructed"}};
}

PRule p_rule_from_json(const json& doc, const std::string& where) {
  const std::string kind = require_string(doc, "kind", where);
  if (kind == "constant")
    return ConstantP{require_number(doc, "value", where)};
  if (kind == "geometric_offset")
    return GeometricOffsetP{require_number(doc, "c", where),
                            require_number(doc, "ratio", where)};
  if (kind == "power_offset")
    return PowerOffsetP{require_number(doc, "c", where),
                        require_number(doc, "alpha", where)};
  if (kind == "constructed") return ConstructedP{};
  bad(where, "unknown p rule kind '" + kind + "'");
}

json schedule_to_json(const ScheduleRule& s) {
  if (const auto* a = std::get_if<AffineSchedule>(&s))
    return json{{"kind", "affine"}, {"stride", a->stride},
                {"plateau", a->plateau}};
  if (const auto* e = std::get_if<ExplicitSchedule>(&s))
    return json{{"kind", "explicit"}, {"m", e->M}, {"n", e->N}};
  return json{{"kind", "constructed"}};
}

ScheduleRule schedule_from_json(const json& doc, const std::string& where) {
  const std::string kind = require_string(doc, "kind", where);
  if (kind == "affine")
    return AffineSchedule{require_integer(doc, "stride", where),
                          require_integer(doc, "plateau", where)};
  if (kind == "explicit") {
    ExplicitSchedule e;
    for (const json& v : require(doc, "m", where))
      e.M.push_back(v.get<std::int64_t>());
    for (const json& v : require(doc, "n", where))
      e.N.push_back(v.get<std::int64_t>());
    return e;
  }
  if (kind == "constructed") return ConstructedSchedule{};
  bad(where, "unknown schedule kind '" + kind + "'");
}

json budget_to_json(const SummableRule& r) {
  if (const auto* g = std::get_if<GeometricBound>(&r))
    return json{{"kind", "geometric"}, {"c", g->c}, {"ratio", g->ratio}};
  const auto& p = std::get<PowerBound>(r);
  return json{{"kind", "power"}, {"c", p.c}, {"alpha", p.alpha}};
}

SummableRule budget_from_json(const json& doc, const std::string& where) {
  const std::string kind = require_string(doc, "kind", where);
  if (kind == "geometric")
    return GeometricBound{require_number(doc, "c", where),
                          require_number(doc, "ratio", where)};
  if (kind == "power")
    return PowerBound{require_number(doc, "c", where),
                      require_number(doc, "alpha", where)};
  bad(where, "unknown budget kind '" + kind + "'");
}

json round_to_json(const ConstructorRound& r) {
  json doc{{"k", r.k},
           {"p", r.p},
           {"eta", r.eta},
           {"xi", r.xi},
           {"inv_xi_level", r.inv_xi.level()},
           {"inv_xi_value", r.inv_xi.value()},
           {"n_level", r.n_mag.level()},
           {"n_value", r.n_mag.value()},
           {"m_level", r.m_mag.level()},
           {"m_value", r.m_mag.value()}};
  doc["n_exact"] = r.n_exact ? json(*r.n_exact) : json();
  doc["m_exact"] = r.m_exact ? json(*r.m_exact) : json();
  return doc;
}

ConstructorRound round_from_json(const json& doc, const std::string& where) {
  ConstructorRound r;
  r.k = require_integer(doc, "k", where);
  r.p = require_number(doc, "p", where);
  r.eta = require_number(doc, "eta", where);
  r.xi = require_number(doc, "xi", where);
  r.inv_xi = TowerReal(static_cast<int>(require_integer(doc, "inv_xi_level", where)),
                       require_number(doc, "inv_xi_value", where));
  const json& ne = require(doc, "n_exact", where);
  if (!ne.is_null()) r.n_exact = ne.get<std::int64_t>();
  const json& me = require(doc, "m_exact", where);
  if (!me.is_null()) r.m_exact = me.get<std::int64_t>();
  r.n_mag = TowerReal(static_cast<int>(require_integer(doc, "n_level", where)),
                      require_number(doc, "n_value", where));
  r.m_mag = TowerReal(static_cast<int>(require_integer(doc, "m_level", where)),
                      require_number(doc, "m_value", where));
  return r;
}

json right_tail_to_json(const RightTail& t) {
  if (const auto* m = std::get_if<Matrix>(&t))
    return json{{"kind", "constant"}, {"rows", matrix_to_json(*m)}};
  if (const auto* p = std::get_if<PlateauTail>(&t))
    return json{{"kind", "plateau"},
                {"family", family_name(p->family)},
                {"input", example_input_to_json(p->input)}};
  if (const auto* a = std::get_if<AlternatingTail>(&t))
    return json{{"kind", "alternating"},
                {"even", matrix_to_json(a->even_blocks)},
                {"odd", matrix_to_json(a->odd_blocks)}};
  const auto& c = std::get<CycleTail>(t);
  json cycle = json::array();
  for (const Matrix& m : c.cycle) cycle.push_back(matrix_to_json(m));
  return json{{"kind", "cycle"}, {"matrices", cycle}};
}

RightTail right_tail_from_json(const json& doc, const std::string& where) {
  const std::string kind = require_string(doc, "kind", where);
  if (kind == "constant")
    return matrix_from_json(require(doc, "rows", where), where + ".rows");
  if (kind == "plateau") {
    PlateauTail p;
    p.family = family_from_name(require_string(doc, "family", where),
                                where + ".family");
    p.input = example_input_from_json(require(doc, "input", where),
                                      where + ".input");
    return p;
  }
  if (kind == "alternating") {
    AlternatingTail a;
    a.even_blocks =
        matrix_from_json(require(doc, "even", where), where + ".even");
    a.odd_blocks = matrix_from_json(require(doc, "odd", where), where + ".odd");
    return a;
  }
  if (kind == "cycle") {
    CycleTail c;
    const json& mats = require(doc, "matrices", where);
    if (!mats.is_array() || mats.empty())
      bad(where + ".matrices", "expected a nonempty array");
    for (std::size_t i = 0; i < mats.size(); ++i)
      c.cycle.push_back(matrix_from_json(
          mats[i], where + ".matrices[" + std::to_string(i) + "]"));
    return c;
  }
  bad(where, "unknown right tail kind '" + kind +
                 "' (constant | plateau | alternating | cycle)");
}

json measure_spec_to_json(const MeasureSpec& m) {
  json doc{{"left_tail", matrix_to_json(m.left_tail)},
           {"left_cutoff", m.left_cutoff},
           {"right_start", m.right_start},
           {"right_tail", right_tail_to_json(m.right_tail)}};
  json segments = json::array();
  for (const Segment& s : m.segments) segments.push_back(segment_to_json(s));
  doc["segments"] = segments;
  if (m.anchor) doc["anchor"] = vector_to_json(*m.anchor);
  return doc;
}

MeasureSpec measure_spec_from_json(const json& doc, const std::string& where) {
  MeasureSpec m;
  m.left_tail = matrix_from_json(require(doc, "left_tail", where),
                                 where + ".left_tail");
  m.left_cutoff = require_integer(doc, "left_cutoff", where);
  m.right_start = require_integer(doc, "right_start", where);
  m.right_tail = right_tail_from_json(require(doc, "right_tail", where),
                                      where + ".right_tail");
  if (doc.contains("segments")) {
    const json& segs = doc.at("segments");
    if (!segs.is_array()) bad(where + ".segments", "expected an array");
    for (std::size_t i = 0; i < segs.size(); ++i)
      m.segments.push_back(segment_from_json(
          segs[i], where + ".segments[" + std::to_string(i) + "]"));
  }
  if (doc.contains("anchor"))
    m.anchor = vector_from_json(doc.at("anchor"), where + ".anchor");
  return m;
}

json constructor_spec_to_json(const ConstructorSpec& c) {
  return json{{"budget", budget_to_json(c.budget)},
              {"seeds",
               json{{"p1", c.seeds.p1},
                    {"m0", c.seeds.m0},
                    {"n1", c.seeds.n1},
                    {"m1", c.seeds.m1},
                    {"q", c.seeds.q}}},
              {"rounds", c.rounds}};
}

ConstructorSpec constructor_spec_from_json(const json& doc,
                                           const std::string& where) {
  ConstructorSpec c;
  c.budget = budget_from_json(require(doc, "budget", where), where + ".budget");
  const json& seeds = require(doc, "seeds", where);
  const std::string sw = where + ".seeds";
  c.seeds.p1 = require_number(seeds, "p1", sw);
  c.seeds.m0 = require_integer(seeds, "m0", sw);
  c.seeds.n1 = require_integer(seeds, "n1", sw);
  c.seeds.m1 = require_integer(seeds, "m1", sw);
  c.seeds.q = require_number(seeds, "q", sw);
  c.rounds = require_integer(doc, "rounds", where);
  return c;
}

json example_spec_to_json(const ExampleSpec& e) {
  json doc{{"family", family_name(e.family)}};
  if (e.input) doc["input"] = example_input_to_json(*e.input);
  if (e.constructor_spec)
    doc["constructor"] = constructor_spec_to_json(*e.constructor_spec);
  return doc;
}

ExampleSpec example_spec_from_json(const json& doc, const std::string& where) {
  ExampleSpec e;
  e.family =
      family_from_name(require_string(doc, "family", where), where + ".family");
  if (doc.contains("input"))
    e.input = example_input_from_json(doc.at("input"), where + ".input");
  if (doc.contains("constructor"))
    e.constructor_spec = constructor_spec_from_json(doc.at("constructor"),
                                                    where + ".constructor");
  if (e.input.has_value() == e.constructor_spec.has_value())
    bad(where, "exactly one of 'input' and 'constructor' is required");
  return e;
}

json run_to_json(const RunOptions& r) {
  return json{{"horizon", r.horizon},
              {"seed", r.seed},
              {"samples", r.samples},
              {"rounds", r.rounds},
              {"tolerance", r.tolerance}};
}

RunOptions run_from_json(const json& doc, const std::string& where) {
  RunOptions r;
  if (!doc.is_object()) bad(where, "expected an object");
  if (doc.contains("horizon")) r.horizon = require_integer(doc, "horizon", where);
  if (doc.contains("seed"))
    r.seed = static_cast<std::uint64_t>(require_integer(doc, "seed", where));
  if (doc.contains("samples")) r.samples = require_integer(doc, "samples", where);
  if (doc.contains("rounds")) r.rounds = require_integer(doc, "rounds", where);
  if (doc.contains("tolerance"))
    r.tolerance = require_number(doc, "tolerance", where);
  return r;
}

// ------------------------------------------------------------ json writer

std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string format_scalar(const json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_number_unsigned()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%" PRIu64,
                  static_cast<std::uint64_t>(v.get<std::uint64_t>()));
    return buf;
  }
  if (v.is_number_integer()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%" PRId64,
                  static_cast<std::int64_t>(v.get<std::int64_t>()));
    return buf;
  }
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "null";
  return json(v.get<std::string>()).dump();  // quoted + escaped
}

void emit(const json& v, std::string& out, int depth) {
  const std::string pad(2 * static_cast<std::size_t>(depth), ' ');
  const std::string inner(2 * static_cast<std::size_t>(depth + 1), ' ');
  if (v.is_object()) {
    if (v.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (const auto& [key, value] : v.items()) {
      if (!first) out += ",\n";
      first = false;
      out += inner + json(key).dump() + ": ";
      emit(value, out, depth + 1);
    }
    out += "\n" + pad + "}";
  } else if (v.is_array()) {
    if (v.empty()) {
      out += "[]";
      return;
    }
    out += "[\n";
    bool first = true;
    for (const json& item : v) {
      if (!first) out += ",\n";
      first = false;
      out += inner;
      emit(item, out, depth + 1);
    }
    out += "\n" + pad + "]";
  } else {
    out += format_scalar(v);
  }
}

// ------------------------------------------------------------ csv helpers

void csv_row(std::string& out, const std::string& statistic, const json& n,
             const json& value, const json& se) {
  out += statistic + "," + format_scalar(n) + "," + format_scalar(value) + "," +
         format_scalar(se) + "\n";
}

void flatten_scalars(const json& doc, const std::string& prefix,
                     std::string& out) {
  for (const auto& [key, value] : doc.items()) {
    if (key == "schema") continue;
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      flatten_scalars(value, name, out);
    } else if (value.is_array()) {
      for (std::size_t i = 0; i < value.size(); ++i)
        if (!value[i].is_structured())
          csv_row(out, name, json(i), value[i], json(0));
    } else {
      csv_row(out, name, json(0), value, json(0));
    }
  }
}

}  // namespace

// -------------------------------------------------------------- matrices

nlohmann::json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& doc, const std::string& where) {
  if (!doc.is_array() || doc.empty())
    bad(where, "expected a nonempty array of rows");
  const std::size_t rows = doc.size();
  if (!doc[0].is_array() || doc[0].empty())
    bad(where, "expected rows to be nonempty arrays");
  const std::size_t cols = doc[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!doc[r].is_array() || doc[r].size() != cols)
      bad(where, "rows must all have length " + std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) {
      if (!doc[r][c].is_number())
        bad(where, "entries must be numbers");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          doc[r][c].get<double>();
    }
  }
  return m;
}

nlohmann::json vector_to_json(const RowVector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

RowVector vector_from_json(const nlohmann::json& doc, const std::string& where) {
  if (!doc.is_array() || doc.empty()) bad(where, "expected a nonempty array");
  RowVector v(static_cast<Eigen::Index>(doc.size()));
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (!doc[i].is_number()) bad(where, "entries must be numbers");
    v(static_cast<Eigen::Index>(i)) = doc[i].get<double>();
  }
  return v;
}

// ---------------------------------------------------------- example input

nlohmann::json example_input_to_json(const ExampleInput& in) {
  json doc{{"q", in.q},
           {"p", p_rule_to_json(in.p)},
           {"schedule", schedule_to_json(in.schedule)},
           {"budget", budget_to_json(in.r)}};
  if (!in.rounds.empty()) {
    json rounds = json::array();
    for (const ConstructorRound& r : in.rounds) rounds.push_back(round_to_json(r));
    doc["rounds"] = std::move(rounds);
  }
  return doc;
}

ExampleInput example_input_from_json(const nlohmann::json& doc,
                                     const std::string& where) {
  ExampleInput in;
  in.q = require_number(doc, "q", where);
  in.p = p_rule_from_json(require(doc, "p", where), where + ".p");
  in.schedule =
      schedule_from_json(require(doc, "schedule", where), where + ".schedule");
  in.r = budget_from_json(require(doc, "budget", where), where + ".budget");
  if (doc.contains("rounds")) {
    const json& rounds = doc.at("rounds");
    if (!rounds.is_array()) bad(where + ".rounds", "expected an array");
    for (std::size_t i = 0; i < rounds.size(); ++i)
      in.rounds.push_back(round_from_json(
          rounds[i], where + ".rounds[" + std::to_string(i) + "]"));
  }
  return in;
}

nlohmann::json construction_to_json(const ExampleInput& in) {
  if (!in.constructed() || in.rounds.empty())
    throw Error(Err::InvalidInput,
                "construction_to_json requires a constructed input");
  json rounds = json::array();
  for (const ConstructorRound& r : in.rounds) rounds.push_back(round_to_json(r));
  return json{{"budget", budget_to_json(in.r)},
              {"p1", in.rounds.front().p},
              {"q", in.q},
              {"rounds", std::move(rounds)}};
}

// ----------------------------------------------------------------- config

Config parse_config(const nlohmann::json& doc) {
  const std::string where = "config";
  if (!doc.is_object()) bad(where, "expected an object");
  if (doc.contains("schema")) {
    const json& tag = doc.at("schema");
    if (!tag.is_string() || tag.get<std::string>() != kSchemaTag)
      bad(where + ".schema", std::string("expected \"") + kSchemaTag + "\"");
  }
  Config c;
  const json& sft = require(doc, "sft", where);
  const std::int64_t states = require_integer(sft, "states", where + ".sft");
  const Matrix adj = matrix_from_json(require(sft, "adjacency", where + ".sft"),
                                      where + ".sft.adjacency");
  if (adj.rows() != states)
    bad(where + ".sft", "states does not match the adjacency size");
  Eigen::MatrixXi a(adj.rows(), adj.cols());
  for (Eigen::Index r = 0; r < adj.rows(); ++r)
    for (Eigen::Index col = 0; col < adj.cols(); ++col) {
      const double e = adj(r, col);
      if (e != 0.0 && e != 1.0)
        bad(where + ".sft.adjacency", "entries must be 0 or 1");
      a(r, col) = static_cast<int>(e);
    }
  c.sft = make_adjacency(a);
  if (doc.contains("measure"))
    c.measure = measure_spec_from_json(doc.at("measure"), where + ".measure");
  if (doc.contains("example"))
    c.example = example_spec_from_json(doc.at("example"), where + ".example");
  if (c.measure && c.example)
    bad(where, "at most one of 'measure' and 'example' is allowed");
  if (doc.contains("run")) c.run = run_from_json(doc.at("run"), where + ".run");
  return c;
}

nlohmann::json config_to_json(const Config& config) {
  json doc{{"schema", kSchemaTag}};
  json sft{{"states", config.sft.size()}};
  json rows = json::array();
  for (int r = 0; r < config.sft.size(); ++r) {
    json row = json::array();
    for (int c = 0; c < config.sft.size(); ++c)
      row.push_back(config.sft.a(r, c));
    rows.push_back(std::move(row));
  }
  sft["adjacency"] = std::move(rows);
  doc["sft"] = std::move(sft);
  if (config.measure) doc["measure"] = measure_spec_to_json(*config.measure);
  if (config.example) doc["example"] = example_spec_to_json(*config.example);
  doc["run"] = run_to_json(config.run);
  return doc;
}

MarkovMeasure realize_measure(const Config& config) {
  if (config.measure.has_value() == config.example.has_value())
    throw Error(Err::InvalidInput,
                "config: exactly one of 'measure' and 'example' is required "
                "to build a measure");
  if (config.example) {
    const ExampleSpec& e = *config.example;
    if (e.input) return build_example_measure(*e.input, e.family);
    const ConstructorSpec& c = *e.constructor_spec;
    return build_example_measure(
        inductive_construct(c.budget, c.seeds, c.rounds), e.family);
  }
  const MeasureSpec& m = *config.measure;
  std::optional<Matrix> right_constant;
  std::shared_ptr<const TailFamily> right_family;
  if (const auto* cm = std::get_if<Matrix>(&m.right_tail)) {
    right_constant = *cm;
  } else if (const auto* p = std::get_if<PlateauTail>(&m.right_tail)) {
    right_family = std::make_shared<PlateauFamily>(p->family, p->input);
  } else if (const auto* alt = std::get_if<AlternatingTail>(&m.right_tail)) {
    right_family = std::make_shared<AlternatingFamily>(
        config.sft, alt->even_blocks, alt->odd_blocks);
  } else {
    right_family = std::make_shared<OpaqueCycle>(
        config.sft, std::get<CycleTail>(m.right_tail).cycle);
  }
  TransitionSequence seq = make_transition_sequence(
      config.sft, m.left_tail, m.left_cutoff, m.segments, m.right_start,
      std::move(right_constant), std::move(right_family));
  return make_measure(config.sft, std::move(seq), m.anchor);
}

// ---------------------------------------------------------------- reports

nlohmann::json series_verdict_to_json(const SeriesVerdict& v) {
  json residuals = json::object();
  for (const auto& [key, value] : v.residuals) residuals[key] = value;
  return json{{"status", series_status_name(v.status)},
              {"partial_sum", v.partial_sum},
              {"terms_used", v.terms_used},
              {"basis", basis_name(v.basis)},
              {"basis_detail", v.basis_detail},
              {"residuals", std::move(residuals)}};
}

nlohmann::json krieger_verdict_to_json(const KriegerVerdict& v) {
  json doc{{"verdict", verdict_name(v.kind)}, {"scope", scope_name(v.scope_note)}};
  if (!v.reason.empty()) doc["reason"] = v.reason;
  if (!v.reasons.empty()) doc["reasons"] = v.reasons;
  if (v.limit_matrix) doc["limit_matrix"] = matrix_to_json(*v.limit_matrix);
  if (v.stationary) doc["stationary"] = vector_to_json(*v.stationary);
  if (v.series) doc["series"] = series_verdict_to_json(*v.series);
  return doc;
}

nlohmann::json probe_report_to_json(const ProbeReport& r) {
  json stats = json::array();
  for (const ProbeStatistic& s : r.statistics)
    stats.push_back(json{{"name", s.name},
                         {"empirical", s.empirical},
                         {"predicted", s.predicted},
                         {"standard_error", s.standard_error},
                         {"allowance", s.allowance},
                         {"within", s.within}});
  json doc{{"probe", r.probe},
           {"verdict", r.verdict},
           {"pass", r.pass},
           {"sigma_threshold", r.sigma_threshold},
           {"distance_threshold", r.distance_threshold},
           {"horizon", r.horizon},
           {"samples", r.samples},
           {"seed", r.seed},
           {"statistics", std::move(stats)}};
  if (!r.trace_grid.empty())
    doc["trace"] = json{{"grid", r.trace_grid}, {"series", r.series_trace}};
  return doc;
}

// ----------------------------------------------------------------- output

std::string emit_json(const nlohmann::json& doc) {
  std::string out;
  emit(doc, out, 0);
  out += "\n";
  return out;
}

std::string report_to_csv(const nlohmann::json& report) {
  std::string out = "statistic,n,value,se\n";
  bool structured = false;
  if (report.contains("statistics") && report.at("statistics").is_array()) {
    structured = true;
    const json n = report.contains("samples") ? report.at("samples") : json(0);
    for (const json& s : report.at("statistics"))
      csv_row(out, s.at("name").get<std::string>(), n, s.at("empirical"),
              s.at("standard_error"));
  }
  if (report.contains("trace") && report.at("trace").is_object()) {
    structured = true;
    const json& grid = report.at("trace").at("grid");
    const json& series = report.at("trace").at("series");
    for (std::size_t i = 0; i < grid.size() && i < series.size(); ++i)
      csv_row(out, "trace", grid[i], series[i], json(0));
  }
  if (report.contains("terms") && report.at("terms").is_array()) {
    structured = true;
    for (const json& t : report.at("terms"))
      csv_row(out, "dn2_term", t.at("n"), t.at("value"), json(0));
  }
  if (!structured) flatten_scalars(report, "", out);
  return out;
}

}  // namespace mk
