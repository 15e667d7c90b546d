// JSON configuration and report layer for the command-line front end: a
// declarative Config model covering the adjacency, an explicit transition
// sequence (any of the four right-tail structures) or an example-family
// description, and run options; parsers that reject malformed documents
// with machine-readable reasons; serializers for every report the commands
// emit; and a deterministic JSON writer that prints every float with 17
// significant digits so emitted documents re-parse to bit-identical values.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "markov_krieger/classifier.hpp"
#include "markov_krieger/equivalence.hpp"
#include "markov_krieger/examples.hpp"
#include "markov_krieger/measure.hpp"
#include "markov_krieger/simulate.hpp"

namespace mk {

// Schema tag stamped on every config and report document.
inline constexpr const char* kSchemaTag = "markov-krieger/1";

// ------------------------------------------------------------ config model

// Shared run options; command-line flags override individual fields.
struct RunOptions {
  std::int64_t horizon = 2000;   // series / trajectory horizon
  std::uint64_t seed = 1;        // probe RNG seed
  std::int64_t samples = 200;    // Monte Carlo sample count
  std::int64_t rounds = 50;      // constructor / swap-sum round count
  double tolerance = 1e-9;       // report-level spot-check tolerance
};

// Right-tail structure of an explicit measure description. Exactly one of
// the four kinds, mirroring the TailFamily implementations.
struct PlateauTail {
  ExampleFamily family = ExampleFamily::Fullshift2;
  ExampleInput input;
};
struct AlternatingTail {
  Matrix even_blocks;
  Matrix odd_blocks;
};
struct CycleTail {
  std::vector<Matrix> cycle;
};
using RightTail = std::variant<Matrix, PlateauTail, AlternatingTail, CycleTail>;

// Explicit transition-sequence description.
struct MeasureSpec {
  Matrix left_tail;
  std::int64_t left_cutoff = 0;
  std::vector<Segment> segments;
  std::int64_t right_start = 1;
  RightTail right_tail;
  std::optional<RowVector> anchor;  // expected-anchor override (checked)
};

// Inductive-constructor invocation.
struct ConstructorSpec {
  SummableRule budget = GeometricBound{1.0, 0.5};
  ConstructorSeeds seeds{0.7, 1, 2, 3, 0.6};
  std::int64_t rounds = 50;
};

// Example-family description: either closed-form rules or constructor
// seeds (exactly one).
struct ExampleSpec {
  ExampleFamily family = ExampleFamily::Fullshift2;
  std::optional<ExampleInput> input;
  std::optional<ConstructorSpec> constructor_spec;
};

// A parsed configuration document. Exactly one of measure/example carries
// the measure for commands that need one; cmd_example requires a
// constructor-backed example.
struct Config {
  Adjacency sft;
  std::optional<MeasureSpec> measure;
  std::optional<ExampleSpec> example;
  RunOptions run;
};

// ------------------------------------------------------------- converters

// Throws Error(InvalidInput) with a path-qualified message on any schema
// violation; unknown "schema" values are rejected, a missing tag is
// tolerated on input.
Config parse_config(const nlohmann::json& doc);
nlohmann::json config_to_json(const Config& config);

// Builds the measure a command operates on (explicit spec or example
// family). Throws Error(InvalidInput) unless exactly one source is present.
MarkovMeasure realize_measure(const Config& config);

// Matrices as arrays of row arrays; vectors as arrays.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& doc, const std::string& where);
nlohmann::json vector_to_json(const RowVector& v);
RowVector vector_from_json(const nlohmann::json& doc, const std::string& where);

// Example-input round-trip (closed-form rules and constructed rounds).
nlohmann::json example_input_to_json(const ExampleInput& in);
ExampleInput example_input_from_json(const nlohmann::json& doc,
                                     const std::string& where);

// Constructor output in the golden-fixture shape:
// {"budget": {...}, "p1": ..., "q": ..., "rounds": [{k, p, eta, xi,
//  inv_xi_level, inv_xi_value, n_exact, m_exact, n_level, n_value,
//  m_level, m_value}, ...]}. Requires a constructed input.
nlohmann::json construction_to_json(const ExampleInput& in);

// --------------------------------------------------------------- reports

nlohmann::json series_verdict_to_json(const SeriesVerdict& v);
nlohmann::json krieger_verdict_to_json(const KriegerVerdict& v);
nlohmann::json probe_report_to_json(const ProbeReport& r);

// ----------------------------------------------------------------- output

// Deterministic writer: objects in sorted key order, two-space indent,
// every finite double printed with 17 significant digits (%.17g), so the
// printed value re-parses to the identical bits; non-finite doubles become
// null. Trailing newline included.
std::string emit_json(const nlohmann::json& doc);

// Plot-ready flattening with header "statistic,n,value,se": probe
// statistics rows (name, samples, empirical, standard_error), trace rows
// ("trace", grid[i], series[i], 0), equivalence term rows ("dn2_term", n,
// value, 0); reports without those arrays flatten their scalar fields as
// (dotted.name, 0, value, 0). Floats use 17 significant digits.
std::string report_to_csv(const nlohmann::json& report);

}  // namespace mk
