#include "markov_krieger/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <utility>
#include <variant>

#include "CLI11.hpp"
#include "markov_krieger/cocycles.hpp"
#include "markov_krieger/simulate.hpp"

namespace mk {
namespace {

using nlohmann::json;

json error_to_json(const Error& e) {
  json doc{{"code", to_string(e.code)}, {"message", e.what()}};
  if (e.index != kNoIndex) doc["index"] = e.index;
  return doc;
}

json envelope(const char* command) {
  return json{{"schema", kSchemaTag}, {"command", command}};
}

// Shared catch scaffolding: runs `body` against the envelope, converting
// thrown errors into machine-readable failure reports.
template <typename Fn>
CommandResult guarded(const char* command, Fn&& body) {
  CommandResult res;
  res.report = envelope(command);
  try {
    res.exit_code = body(res.report);
  } catch (const Error& e) {
    res.report["pass"] = false;
    res.report["error"] = error_to_json(e);
    res.exit_code = exit_code_for(e);
  } catch (const std::exception& e) {
    res.report["pass"] = false;
    res.report["error"] = json{{"code", "InternalInvariant"},
                               {"message", e.what()}};
    res.exit_code = 4;
  }
  return res;
}

std::string series_class_name(SeriesClass c) {
  switch (c) {
    case SeriesClass::ConvergesCertified: return "converges-certified";
    case SeriesClass::DivergesCertified: return "diverges-certified";
    case SeriesClass::Unknown: return "unknown";
  }
  return "unknown";
}

ConfigurationFamily pick_configuration_family(const Adjacency& adj) {
  if (adj.size() == 2) {
    return adj.a.minCoeff() > 0 ? ConfigurationFamily::TwoStateFullshift
                                : ConfigurationFamily::TwoStateSparse;
  }
  const Adjacency gm = golden_mean_shift();
  if (adj.size() == 3 && (adj.a.array() == gm.a.array()).all()) {
    return ConfigurationFamily::GoldenMean;
  }
  throw Error(Err::NotApplicable,
              "no built-in admissible-configuration family for this adjacency");
}

int probe_exit(json& doc, const ProbeReport& report) {
  doc.update(probe_report_to_json(report));
  doc["pass"] = report.pass;
  return report.pass ? 0 : 3;
}

}  // namespace

int exit_code_for(const Error& e) {
  switch (e.code) {
    case Err::TailsUnknown:
    case Err::TailsEqual:
    case Err::NotApplicable:
    case Err::DegenerateVariance:
    case Err::NoneFoundWithinLen:
      return 3;
    case Err::InequalityViolated:
    case Err::InternalInvariant:
      return 4;
    default:
      return 2;
  }
}

CommandResult cmd_validate(const Config& config) {
  return guarded("validate", [&](json& doc) {
    const MarkovMeasure mu = realize_measure(config);
    const MixingConstant c = mixing_constant(mu.doeblin, mu.mixing_exponent);
    doc["states"] = mu.states();
    doc["doeblin"] = mu.doeblin;
    doc["mixing_exponent"] = mu.mixing_exponent;
    doc["mixing_constant"] = json{{"delta", c.delta},
                                  {"exponent", c.exponent},
                                  {"value", c.value},
                                  {"contractive", c.contractive}};
    doc["anchor"] = vector_to_json(mu.anchor);
    if (config.measure && config.measure->anchor) {
      const double gap =
          (mu.anchor - *config.measure->anchor).cwiseAbs().maxCoeff();
      doc["anchor_gap"] = gap;
      doc["anchor_matches"] = gap <= config.run.tolerance;
    }
    // Exhaustive marginal and mixing-sandwich checks on a small window; a
    // violation throws InequalityViolated (an internal bug, exit 4).
    const MixingReport spot = check_mixing_inequalities(mu, -3, 3);
    doc["marginal_checks"] = json{{"window", json::array({-3, 3})},
                                  {"worst_pi_low", spot.worst_pi_low},
                                  {"worst_pi_high", spot.worst_pi_high},
                                  {"worst_lower_ratio", spot.worst_lower_ratio},
                                  {"worst_upper_ratio", spot.worst_upper_ratio},
                                  {"events_checked", spot.events_checked}};
    doc["pass"] = true;
    return 0;
  });
}

CommandResult cmd_classify(const Config& config) {
  return guarded("classify", [&](json& doc) {
    const MarkovMeasure mu = realize_measure(config);
    const KriegerVerdict v = classify(mu, {}, config.run.horizon);
    doc.update(krieger_verdict_to_json(v));
    doc["pass"] = v.kind != VerdictKind::Inconclusive;
    return v.kind == VerdictKind::Inconclusive ? 3 : 0;
  });
}

CommandResult cmd_equiv(const Config& a, const Config& b) {
  return guarded("equiv", [&](json& doc) {
    const MarkovMeasure nu = realize_measure(a);
    const MarkovMeasure mu = realize_measure(b);
    const SeriesVerdict v = equivalence_test(nu, mu, a.run.horizon);
    doc.update(series_verdict_to_json(v));
    json terms = json::array();
    const std::int64_t trace = std::min<std::int64_t>(a.run.horizon, 256);
    for (std::int64_t n = 1; n <= trace; ++n) {
      const CoefficientTerm t = dn2_term(nu, mu, n);
      terms.push_back(json{{"n", t.n}, {"value", t.value}});
    }
    doc["terms"] = std::move(terms);
    doc["pass"] = v.status != SeriesStatus::Inconclusive;
    return v.status == SeriesStatus::Inconclusive ? 3 : 0;
  });
}

CommandResult cmd_example(const Config& config) {
  return guarded("example", [&](json& doc) {
    if (!config.example || !config.example->constructor_spec) {
      throw Error(Err::InvalidInput,
                  "the example command requires example.constructor "
                  "(budget, seeds, rounds)");
    }
    const ConstructorSpec& spec = *config.example->constructor_spec;
    const ExampleInput in =
        inductive_construct(spec.budget, spec.seeds, spec.rounds);
    doc["construction"] = construction_to_json(in);

    const ConstructionAudit audit = audit_construction(in);
    json audited = json::array();
    for (const RoundAudit& r : audit.rounds) {
      if (audited.size() == 64) break;
      audited.push_back(json{{"k", r.k},
                             {"exact", r.exact},
                             {"weight_ok", r.weight_ok},
                             {"plateau_ok", r.plateau_ok},
                             {"gap_ok", r.gap_ok},
                             {"weight_margin", r.weight_margin},
                             {"plateau_margin", r.plateau_margin},
                             {"gap_margin", r.gap_margin}});
    }
    doc["audit"] = json{{"all_ok", audit.all_ok},
                        {"rounds_checked", audit.rounds.size()},
                        {"rounds", std::move(audited)}};

    const ConservativenessReport cons = check_conservativeness_conditions(in);
    doc["conditions"] =
        json{{"nonsingularity",
              series_verdict_to_json(check_nonsingularity_condition(in))},
             {"nonequivalence",
              series_verdict_to_json(check_nonequivalence_condition(in))},
             {"conservativeness",
              json{{"weights_pass", cons.weights_pass},
                   {"weights_detail", cons.weights_detail},
                   {"return_series",
                    series_verdict_to_json(cons.return_series)}}}};
    doc["pass"] = audit.all_ok;
    if (!audit.all_ok) {
      throw Error(Err::InternalInvariant,
                  "constructor output failed its post-hoc audit");
    }
    return 0;
  });
}

CommandResult cmd_probe(const std::string& kind, const Config& config) {
  return guarded("probe", [&](json& doc) {
    doc["kind"] = kind;
    const MarkovMeasure mu = realize_measure(config);
    const RunOptions& run = config.run;
    if (kind == "lln") {
      PairFunction f;
      f.table = Matrix::Zero(mu.states(), mu.states());
      f.table(0, 0) = 1.0;
      doc["pair"] = json::array({0, 0});
      return probe_exit(
          doc, lln_probe(mu, f, run.horizon, run.samples, run.seed));
    }
    if (kind == "conservativeness") {
      const IndicatorSpec spec = obstruction_indicator(mu);
      if (const auto* site = std::get_if<SiteIndicator>(&spec)) {
        doc["indicator"] = json{{"kind", "site"}, {"state", site->state}};
      } else {
        const auto& pair = std::get<PairIndicator>(spec);
        doc["indicator"] =
            json{{"kind", "pair"}, {"from", pair.from}, {"to", pair.to}};
      }
      return probe_exit(doc, conservativeness_probe(mu, spec, run.horizon,
                                                    run.samples, run.seed));
    }
    if (kind == "clt") {
      const ConfigurationFamily family =
          pick_configuration_family(mu.adjacency);
      const BuiltConfiguration built =
          build_configuration(mu, family, run.rounds);
      doc["series_certificate"] = series_class_name(built.certificate);
      return probe_exit(doc, clt_probe(built.configuration, mu, run.rounds,
                                       run.samples, run.seed));
    }
    if (kind == "divergence") {
      // Pair-return events A_n = {X_{-(n-1)} = 0, X_{n+1} = 0}. The mixing
      // sandwich mu(EF) >= C mu(E) mu(F) needs a gap >= M between the two
      // coordinates, i.e. 2n - 1 >= M, and each marginal is >= delta^M, so
      // nu(A_n) >= C delta^(2M) for every usable n: unit weights give a
      // certified-divergent weighted series with a positive liminf.
      const MixingConstant c =
          mixing_constant(mu.doeblin, mu.mixing_exponent);
      const double floor =
          c.value * std::pow(mu.doeblin, 2.0 * mu.mixing_exponent);
      const std::int64_t first = (mu.mixing_exponent + 2) / 2;  // 2n-1 >= M
      const std::int64_t count =
          std::clamp<std::int64_t>(run.horizon, 4, 48);
      const std::int64_t last = first + count - 1;
      const std::int64_t rows = std::max<std::int64_t>(run.samples, 2);
      const std::vector<double> weights(static_cast<std::size_t>(count), 1.0);
      std::vector<std::vector<int>> events(
          static_cast<std::size_t>(rows),
          std::vector<int>(static_cast<std::size_t>(count), 0));
      for (std::int64_t t = 0; t < rows; ++t) {
        const Word w = sample_window(mu, -(last - 1), last + 1, run.seed,
                                     static_cast<std::uint64_t>(t));
        for (std::int64_t n = first; n <= last; ++n) {
          events[static_cast<std::size_t>(t)]
                [static_cast<std::size_t>(n - first)] =
                    (w.at(-(n - 1)) == 0 && w.at(n + 1) == 0) ? 1 : 0;
        }
      }
      doc["events"] = json{{"kind", "pair-return"},
                           {"state", 0},
                           {"first", first},
                           {"count", count},
                           {"predicted_liminf", floor}};
      return probe_exit(doc, divergence_probe(weights, events, rows, floor));
    }
    throw Error(Err::InvalidInput,
                "unknown probe kind '" + kind +
                    "' (lln | conservativeness | clt | divergence)");
  });
}

namespace {

Config load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f.good()) {
    throw Error(Err::InvalidInput, "cannot open config file: " + path);
  }
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw Error(Err::InvalidInput,
                "config file " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

struct CliState {
  std::string config_path;
  std::string config_b_path;
  std::string out_path;
  std::string format = "json";
  std::string probe_kind;
  std::int64_t horizon = 0;
  std::uint64_t seed = 0;
  std::int64_t samples = 0;
  std::int64_t rounds = 0;
};

void add_common_options(CLI::App* sub, CliState& state) {
  sub->add_option("--config", state.config_path, "Config JSON file")
      ->required();
  sub->add_option("--out", state.out_path, "Also write the report here");
  sub->add_option("--format", state.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--horizon", state.horizon, "Override run.horizon");
  sub->add_option("--seed", state.seed, "Override run.seed");
  sub->add_option("--samples", state.samples, "Override run.samples");
  sub->add_option("--rounds", state.rounds, "Override run.rounds");
}

void apply_overrides(const CLI::App* sub, const CliState& state, Config& cfg) {
  if (sub->count("--horizon") > 0) cfg.run.horizon = state.horizon;
  if (sub->count("--seed") > 0) cfg.run.seed = state.seed;
  if (sub->count("--samples") > 0) cfg.run.samples = state.samples;
  if (sub->count("--rounds") > 0) cfg.run.rounds = state.rounds;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Non-homogeneous Markov measures on subshifts of finite type: "
               "validation, Krieger classification, equivalence series, the "
               "inductive example constructor, and Monte Carlo probes"};
  app.require_subcommand(1);
  CliState state;

  CLI::App* validate = app.add_subcommand("validate", "Doeblin and mixing checks");
  CLI::App* classify = app.add_subcommand("classify", "Krieger-type classification");
  CLI::App* equiv = app.add_subcommand("equiv", "Equivalence series between two measures");
  CLI::App* example = app.add_subcommand("example", "Run the inductive constructor");
  CLI::App* probe = app.add_subcommand("probe", "Monte Carlo probes");
  for (CLI::App* sub : {validate, classify, equiv, example, probe}) {
    add_common_options(sub, state);
  }
  equiv->add_option("--config-b", state.config_b_path,
                    "Config JSON file for the second measure")
      ->required();
  probe->add_option("kind", state.probe_kind,
                    "lln | conservativeness | clt | divergence")
      ->required();

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("markov-krieger");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  CommandResult result;
  try {
    Config cfg = load_config(state.config_path);
    const CLI::App* sub = app.get_subcommands().front();
    apply_overrides(sub, state, cfg);
    if (validate->parsed()) {
      result = cmd_validate(cfg);
    } else if (classify->parsed()) {
      result = cmd_classify(cfg);
    } else if (equiv->parsed()) {
      Config cfg_b = load_config(state.config_b_path);
      apply_overrides(sub, state, cfg_b);
      result = cmd_equiv(cfg, cfg_b);
    } else if (example->parsed()) {
      if (sub->count("--rounds") > 0 && cfg.example &&
          cfg.example->constructor_spec) {
        cfg.example->constructor_spec->rounds = state.rounds;
      }
      result = cmd_example(cfg);
    } else {
      result = cmd_probe(state.probe_kind, cfg);
    }
  } catch (const Error& e) {
    result.report = envelope(app.get_subcommands().front()->get_name().c_str());
    result.report["pass"] = false;
    result.report["error"] = error_to_json(e);
    result.exit_code = exit_code_for(e);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return 4;
  }

  const std::string text = state.format == "csv"
                               ? report_to_csv(result.report)
                               : emit_json(result.report);
  out << text;
  if (!state.out_path.empty()) {
    std::ofstream f(state.out_path);
    if (!f.good()) {
      err << "cannot write report to " << state.out_path << "\n";
      return 2;
    }
    f << text;
  }
  return result.exit_code;
}

}  // namespace mk
