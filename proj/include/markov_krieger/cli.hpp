// Command dispatch for the command-line front end. Each command is an
// in-process function taking a parsed Config and returning a JSON report
// plus a process exit code, so tests drive them without spawning
// processes; run_cli adds flag parsing, config-file loading, flag
// overrides, and report emission on top.
//
// Exit codes: 0 = command ran and passed; 2 = invalid input (schema,
// validation, or domain errors); 3 = inconclusive (the declared structure
// cannot answer, or a probe completed without passing); 4 = internal
// invariant violation.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "markov_krieger/errors.hpp"
#include "markov_krieger/serialize.hpp"

namespace mk {

struct CommandResult {
  int exit_code = 0;
  nlohmann::json report;
};

// The exit-code mapping for thrown domain errors: outcomes that mean "the
// question cannot be answered for this input" (TailsUnknown, TailsEqual,
// NotApplicable, DegenerateVariance, NoneFoundWithinLen) are inconclusive
// (3); violated internal guarantees (InequalityViolated, InternalInvariant)
// are bugs (4); everything else is invalid input (2).
int exit_code_for(const Error& e);

// Doeblin constant, primitivity exponent, mixing constant, anchor, and
// exhaustive marginal/mixing spot checks on a small window.
CommandResult cmd_validate(const Config& config);

// Krieger-type classification; exit 3 when the verdict is Inconclusive.
CommandResult cmd_classify(const Config& config);

// Equivalence series between the two configured measures, with a term
// trace for plotting.
CommandResult cmd_equiv(const Config& a, const Config& b);

// Runs the inductive constructor from config.example.constructor, emits
// the rounds, the post-hoc audit, and the three condition checks.
CommandResult cmd_example(const Config& config);

// Monte Carlo probes: kind is one of "lln", "conservativeness", "clt",
// "divergence". Exit 3 when the probe completes without passing.
CommandResult cmd_probe(const std::string& kind, const Config& config);

// Full front end: subcommands validate | classify | equiv | example |
// probe, flags --config PATH (--config-b for equiv), --horizon, --seed,
// --samples, --rounds, --out PATH, --format {json,csv}. The report goes to
// `out` (and to --out when given); diagnostics go to `err`. Returns the
// exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace mk
