// Command-line front end: loads models/distributions/records, evaluates the
// effect measures and bounds, and emits deterministic text or JSON reports.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <medfx/medfx.hpp>

namespace {

using medfx::Assignment;
using medfx::Error;
using medfx::FiniteDistribution;
using medfx::MeasureRequest;
using medfx::StructuralModel;
using nlohmann::json;

struct ContrastArg {
  std::string name;
  std::string level;
  std::string ref;
  bool designated = false;
};

// NAME or NAME=level/reference.
ContrastArg parse_contrast(const std::string& text, const std::string& flag) {
  ContrastArg out;
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    out.name = text;
    if (out.name.empty()) throw Error(flag + " needs a variable name");
    return out;
  }
  const auto slash = text.find('/', eq + 1);
  if (slash == std::string::npos) {
    throw Error(flag + " expects NAME=level/reference, e.g. " + flag + " X=1/0");
  }
  out.name = text.substr(0, eq);
  out.level = text.substr(eq + 1, slash - eq - 1);
  out.ref = text.substr(slash + 1);
  out.designated = true;
  if (out.name.empty() || out.level.empty() || out.ref.empty()) {
    throw Error(flag + " expects NAME=level/reference, e.g. " + flag + " X=1/0");
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

Assignment parse_assign_list(const std::string& body, const std::string& context) {
  Assignment out;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const auto comma = body.find(',', pos);
    const std::string item =
        trim(comma == std::string::npos ? body.substr(pos) : body.substr(pos, comma - pos));
    if (!item.empty()) {
      const auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
        throw Error(context + ": expected VAR=LEVEL, got '" + item + "'");
      }
      const std::string var = trim(item.substr(0, eq));
      if (out.count(var)) throw Error(context + ": variable '" + var + "' assigned twice");
      out[var] = trim(item.substr(eq + 1));
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

// Grammar: OUTCOME [ '|' clause (';' clause)* ] where a clause is either
// do(VAR=LEVEL, ...) for the base world, or VAR@do(...) / VAR@natural for a
// value imported from another world.
medfx::CounterfactualTerm parse_term(const std::string& text) {
  medfx::CounterfactualTerm term;
  const auto bar = text.find('|');
  term.outcome = trim(text.substr(0, bar));
  if (term.outcome.empty()) throw Error("--term: missing outcome before '|'");
  if (bar == std::string::npos) return term;

  bool have_world = false;
  std::size_t pos = bar + 1;
  while (pos <= text.size()) {
    const auto semi = text.find(';', pos);
    const std::string clause =
        trim(semi == std::string::npos ? text.substr(pos) : text.substr(pos, semi - pos));
    if (!clause.empty()) {
      const auto at = clause.find('@');
      if (at == std::string::npos) {
        if (clause.substr(0, 3) != "do(" || clause.back() != ')') {
          throw Error("--term: clause '" + clause + "' must be do(...) or VAR@do(...)");
        }
        if (have_world) throw Error("--term: more than one base do(...) clause");
        have_world = true;
        term.world = parse_assign_list(clause.substr(3, clause.size() - 4), "--term");
      } else {
        const std::string var = trim(clause.substr(0, at));
        const std::string spec = trim(clause.substr(at + 1));
        if (var.empty()) throw Error("--term: substitution clause '" + clause + "' misses a variable");
        if (spec == "natural") {
          term.substitutions.emplace_back(var, Assignment{});
        } else if (spec.substr(0, 3) == "do(" && spec.back() == ')') {
          term.substitutions.emplace_back(var,
                                          parse_assign_list(spec.substr(3, spec.size() - 4), "--term"));
        } else {
          throw Error("--term: substitution '" + clause + "' must use @do(...) or @natural");
        }
      }
    }
    if (semi == std::string::npos) break;
    pos = semi + 1;
  }
  return term;
}

struct LoadedInput {
  json root;
  medfx::report::InputDigest digest;
};

LoadedInput load_input(const std::string& path) {
  const std::string text = medfx::io::detail::read_file(path);
  return LoadedInput{medfx::io::detail::parse_json_text(text, path),
                     {path, medfx::report::digest(text)}};
}

void emit(const medfx::report::RunReport& r, bool json_mode) {
  if (json_mode) {
    std::cout << medfx::report::to_json(r).dump(2) << "\n";
  } else {
    std::cout << medfx::report::render_text(r);
  }
}

// Either a raw joint/factored distribution or a structural model whose
// observational joint is taken.
FiniteDistribution distribution_from_input(const LoadedInput& in,
                                           std::vector<std::string>* warnings) {
  if (in.root.contains("exogenous")) {
    const StructuralModel scm = medfx::io::parse_scm(in.root, in.digest.path);
    if (warnings) {
      warnings->push_back("input is a structural model; using its observational joint");
    }
    return scm.observational_distribution();
  }
  return medfx::io::parse_distribution(in.root, in.digest.path);
}

int run_effects(const std::vector<std::string>& argv, const std::string& input,
                const ContrastArg& exposure, const ContrastArg& mediator,
                const std::string& outcome, bool json_mode) {
  if (!exposure.designated) {
    throw Error("--exposure must designate levels as NAME=level/reference");
  }
  medfx::report::RunReport rep;
  rep.command = "effects";
  rep.argv = argv;
  const LoadedInput in = load_input(input);
  rep.inputs.push_back(in.digest);
  const FiniteDistribution dist = distribution_from_input(in, &rep.warnings);

  MeasureRequest req;
  req.exposure = exposure.name;
  req.exposure_level = exposure.level;
  req.exposure_ref = exposure.ref;
  req.mediator = mediator.name;
  req.outcome = outcome;
  if (mediator.designated) {
    req.mediator_level = mediator.level;
    req.mediator_ref = mediator.ref;
  }

  const auto add = [&](const medfx::EffectReport& e) {
    rep.results.push_back(medfx::report::to_json(e));
  };
  const auto te_rep = medfx::te(dist, req);
  const auto de_rep = medfx::de(dist, req);
  const auto ie_rep = medfx::ie(dist, req);
  add(te_rep);
  add(de_rep);
  add(ie_rep);
  add(medfx::nde(dist, req));
  add(medfx::nie(dist, req));
  add(medfx::tde(dist, req));
  add(medfx::tie(dist, req));
  for (const auto& lvl : dist.variable(mediator.name).levels) {
    MeasureRequest creq = req;
    creq.controlled_level = lvl;
    medfx::EffectReport ce = medfx::cde(dist, creq);
    ce.measure = "CDE(" + mediator.name + "=" + lvl + ")";
    add(ce);
  }
  add(medfx::piie(dist, req));
  add(medfx::EffectReport{"TE-DE-IE", te_rep.value - de_rep.value - ie_rep.value, "TE - DE - IE",
                          "residual between the total effect and the direct+indirect split; "
                          "nonzero in general because the two measures interact"});
  if (dist.variable(mediator.name).is_binary()) {
    rep.results.push_back(medfx::report::to_json(medfx::ie_factored(dist, req)));
  }
  emit(rep, json_mode);
  return 0;
}

int run_bounds_px(const std::vector<std::string>& argv, const std::string& input,
                  const ContrastArg& exposure, const std::string& mediator,
                  const std::string& outcome, std::optional<double> te_value, bool json_mode) {
  if (!exposure.designated) {
    throw Error("--exposure must designate levels as NAME=level/reference");
  }
  medfx::report::RunReport rep;
  rep.command = "bounds-px";
  rep.argv = argv;
  const LoadedInput in = load_input(input);
  rep.inputs.push_back(in.digest);

  MeasureRequest req;
  req.exposure = exposure.name;
  req.exposure_level = exposure.level;
  req.exposure_ref = exposure.ref;
  req.mediator = mediator;
  req.outcome = outcome;

  const medfx::MediationConditionals cond =
      medfx::io::parse_conditionals(in.root, req, in.digest.path);
  if (in.root.contains("factors")) {
    for (const auto& f : in.root["factors"]) {
      if (f.value("target", "") == exposure.name) {
        rep.warnings.push_back("input also provides p(" + exposure.name +
                               "); the interval analysis ignores it");
      }
    }
  }

  const auto de_aff = medfx::affine_in_px(cond, "DE");
  const auto ie_aff = medfx::affine_in_px(cond, "IE");
  rep.results.push_back(medfx::report::to_json(de_aff));
  rep.results.push_back(medfx::report::to_json(ie_aff));
  if (te_value) {
    rep.results.push_back(
        medfx::report::reduction_to_json("DE", *te_value, medfx::reduction_interval(de_aff, *te_value)));
    rep.results.push_back(
        medfx::report::reduction_to_json("IE", *te_value, medfx::reduction_interval(ie_aff, *te_value)));
  }
  emit(rep, json_mode);
  return 0;
}

int run_bounds_proxy(const std::vector<std::string>& argv, const std::string& input,
                     const ContrastArg& exposure, const std::string& mediator,
                     const std::string& outcome, const std::string& proxy, bool allow_wide,
                     bool require_determinate, bool json_mode) {
  if (!exposure.designated) {
    throw Error("--exposure must designate levels as NAME=level/reference");
  }
  medfx::report::RunReport rep;
  rep.command = "bounds-proxy";
  rep.argv = argv;
  const LoadedInput in = load_input(input);
  rep.inputs.push_back(in.digest);
  const FiniteDistribution dist = distribution_from_input(in, &rep.warnings);

  medfx::ProxyQuery q{exposure.name, exposure.level, exposure.ref, mediator, outcome, proxy};
  const medfx::BoundResult b = medfx::proxy_de_bound(dist, q, allow_wide);
  rep.results.push_back(medfx::report::to_json(b));
  emit(rep, json_mode);
  return require_determinate && b.relation == medfx::BoundRelation::Indeterminate ? 3 : 0;
}

int run_bounds_longterm(const std::vector<std::string>& argv, const std::string& input,
                        double te_xz, const ContrastArg& mediator, const std::string& outcome,
                        const std::string& proxy, bool require_determinate, bool json_mode) {
  medfx::report::RunReport rep;
  rep.command = "bounds-longterm";
  rep.argv = argv;
  const LoadedInput in = load_input(input);
  rep.inputs.push_back(in.digest);
  const FiniteDistribution dist = distribution_from_input(in, &rep.warnings);

  medfx::LongtermQuery q;
  q.mediator = mediator.name;
  q.outcome = outcome;
  q.proxy = proxy;
  if (mediator.designated) {
    q.mediator_level = mediator.level;
    q.mediator_ref = mediator.ref;
  }
  const medfx::BoundResult b = medfx::longterm_ie_bound(te_xz, dist, q);
  rep.results.push_back(medfx::report::to_json(b));
  emit(rep, json_mode);
  return require_determinate && b.relation == medfx::BoundRelation::Indeterminate ? 3 : 0;
}

int run_oracle(const std::vector<std::string>& argv, const std::string& input,
               const std::string& measure, const std::string& term_text,
               const ContrastArg& exposure, const ContrastArg& mediator,
               const std::string& outcome, const std::string& controlled,
               const std::string& confounder, bool json_mode) {
  medfx::report::RunReport rep;
  rep.command = "oracle";
  rep.argv = argv;
  const LoadedInput in = load_input(input);
  rep.inputs.push_back(in.digest);
  const StructuralModel scm = medfx::io::parse_scm(in.root, in.digest.path);

  if (measure.empty() == term_text.empty()) {
    throw Error("oracle needs exactly one of --measure or --term");
  }

  if (!term_text.empty()) {
    const double v = scm.counterfactual_mean(parse_term(term_text));
    rep.results.push_back(json{{"kind", "oracle"}, {"label", "E[" + term_text + "]"}, {"value", v}});
    emit(rep, json_mode);
    return 0;
  }

  const auto m = medfx::oracle_measure_from_string(measure);
  if (!m) throw Error("unknown oracle measure '" + measure + "'");
  if (!exposure.designated) {
    throw Error("--exposure must designate levels as NAME=level/reference");
  }
  if (mediator.name.empty() && *m != medfx::OracleMeasure::TE) {
    throw Error("--mediator is required for measure " + measure);
  }
  medfx::OracleQuery q;
  q.exposure = exposure.name;
  q.exposure_level = exposure.level;
  q.exposure_ref = exposure.ref;
  q.mediator = mediator.name;
  q.outcome = outcome;
  if (mediator.designated) {
    q.mediator_level = mediator.level;
    q.mediator_ref = mediator.ref;
  }
  if (!controlled.empty()) q.controlled_level = controlled;
  if (!confounder.empty()) q.confounder = confounder;
  const double v = medfx::oracle_effect(scm, *m, q);
  rep.results.push_back(json{{"kind", "oracle"}, {"label", measure}, {"value", v}});
  emit(rep, json_mode);
  return 0;
}

int run_estimate(const std::vector<std::string>& argv, const std::string& records,
                 const std::string& schema_path, double alpha, const std::string& out_path,
                 bool json_mode) {
  medfx::report::RunReport rep;
  rep.command = "estimate";
  rep.argv = argv;
  const std::string schema_text = medfx::io::detail::read_file(schema_path);
  const std::string records_text = medfx::io::detail::read_file(records);
  rep.inputs.push_back({records, medfx::report::digest(records_text)});
  rep.inputs.push_back({schema_path, medfx::report::digest(schema_text)});

  const auto schema = medfx::io::load_schema(schema_path);
  const auto batch = medfx::io::load_records_csv(records, schema);
  const FiniteDistribution d = medfx::io::estimate_joint(batch, alpha);
  medfx::io::save_distribution(d, out_path);

  double total = 0.0;
  for (std::size_t i = 0; i < batch.rows.size(); ++i) total += batch.counts[i];
  rep.results.push_back(json{{"kind", "estimate"},
                             {"cells", d.cell_count()},
                             {"records", total},
                             {"alpha", alpha},
                             {"out", out_path}});
  emit(rep, json_mode);
  return 0;
}

int run_validate(const std::vector<std::string>& argv, const std::string& input,
                 const std::string& schema_path, bool json_mode) {
  medfx::report::RunReport rep;
  rep.command = "validate";
  rep.argv = argv;

  std::string what;
  std::vector<std::string> problems;
  try {
    if (!schema_path.empty()) {
      what = "records";
      const std::string schema_text = medfx::io::detail::read_file(schema_path);
      rep.inputs.push_back({schema_path, medfx::report::digest(schema_text)});
      const std::string text = medfx::io::detail::read_file(input);
      rep.inputs.push_back({input, medfx::report::digest(text)});
      (void)medfx::io::load_records_csv(input, medfx::io::load_schema(schema_path));
    } else {
      const LoadedInput in = load_input(input);
      rep.inputs.push_back(in.digest);
      if (in.root.contains("exogenous")) {
        what = "structural model";
        (void)medfx::io::parse_scm(in.root, input);
      } else {
        what = "distribution";
        (void)medfx::io::parse_distribution(in.root, input);
      }
    }
  } catch (const medfx::ValidationError& e) {
    problems = e.problems();
    if (problems.empty()) problems.push_back(e.what());
  } catch (const medfx::Error& e) {
    problems.push_back(e.what());
  }

  rep.results.push_back(json{{"kind", "validation"},
                             {"what", what},
                             {"valid", problems.empty()},
                             {"problems", problems}});
  emit(rep, json_mode);
  return problems.empty() ? 0 : 2;
}

// Quick self-checks over freshly sampled models; seed overridable through
// MEDFX_SEED for soak runs.
int run_dev_props(bool json_mode) {
  std::uint64_t base = 20240401;
  if (const char* env = std::getenv("MEDFX_SEED")) {
    base = std::strtoull(env, nullptr, 10);
  }
  MeasureRequest req;
  req.exposure = "X";
  req.exposure_level = "1";
  req.exposure_ref = "0";
  req.mediator = "Z";
  req.outcome = "Y";
  medfx::OracleQuery q;
  q.exposure = "X";
  q.exposure_level = "1";
  q.exposure_ref = "0";
  q.mediator = "Z";
  q.outcome = "Y";

  int failures = 0;
  json results = json::array();
  const auto run_family = [&](medfx::GraphFamily fam, auto&& check) {
    int bad = 0;
    for (std::uint64_t s = 0; s < 25; ++s) {
      if (!check(medfx::random_scm(fam, base + s))) ++bad;
    }
    failures += bad;
    results.push_back(json{{"kind", "property"},
                           {"family", medfx::to_string(fam)},
                           {"models", 25},
                           {"failures", bad}});
  };

  run_family(medfx::GraphFamily::Mediation, [&](const StructuralModel& m) {
    const auto d = m.observational_distribution();
    const double lhs = medfx::te(d, req).value;
    const double rhs = medfx::oracle_effect(m, medfx::OracleMeasure::TE, q);
    return std::abs(lhs - rhs) <= 1e-9;
  });
  run_family(medfx::GraphFamily::ConfoundedFrontdoor, [&](const StructuralModel& m) {
    const auto d = m.observational_distribution();
    return std::abs(medfx::ie(d, req).value -
                    medfx::oracle_effect(m, medfx::OracleMeasure::TE, q)) <= 1e-9;
  });
  run_family(medfx::GraphFamily::Reversed, [&](const StructuralModel& m) {
    const auto d = m.observational_distribution();
    return std::abs(medfx::de(d, req).value -
                    medfx::oracle_effect(m, medfx::OracleMeasure::TE, q)) <= 1e-9;
  });

  medfx::report::RunReport rep;
  rep.command = "dev-props";
  rep.argv = {"medfx", "dev-props"};
  rep.results = results;
  emit(rep, json_mode);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete mediation effect measures, counterfactual oracles, and "
               "partial-identification bounds"};
  app.require_subcommand(1);
  app.fallthrough();

  bool json_mode = false;
  bool require_determinate = false;
  app.add_flag("--json", json_mode, "emit the machine-readable report");
  app.add_flag("--require-determinate", require_determinate,
               "exit with status 3 when a requested bound is indeterminate");

  std::string input, exposure_s, mediator_s, outcome, proxy, schema_path, out_path;
  std::string measure_s, term_s, controlled, confounder, records_path;
  double te_value = 0.0, te_xz = 0.0, alpha = 0.0;
  bool allow_wide = false;

  auto* c_eff = app.add_subcommand("effects", "evaluate all effect measures on a joint");
  c_eff->add_option("input", input, "distribution or structural-model JSON file")->required();
  c_eff->add_option("--exposure", exposure_s, "exposure as NAME=level/reference")->required();
  c_eff->add_option("--mediator", mediator_s, "mediator name (optionally NAME=level/reference)")
      ->required();
  c_eff->add_option("--outcome", outcome, "outcome variable name")->required();

  auto* c_px = app.add_subcommand("bounds-px", "intervals over the unknown exposure prevalence");
  c_px->add_option("input", input, "factored conditionals JSON file")->required();
  c_px->add_option("--exposure", exposure_s, "exposure as NAME=level/reference")->required();
  c_px->add_option("--mediator", mediator_s, "mediator name")->required();
  c_px->add_option("--outcome", outcome, "outcome variable name")->required();
  auto* te_opt = c_px->add_option("--te", te_value, "total effect for relative-reduction intervals");

  auto* c_proxy = app.add_subcommand("bounds-proxy", "one-sided direct-effect bound via a proxy");
  c_proxy->add_option("input", input, "distribution JSON over exposure, proxy, mediator, outcome")
      ->required();
  c_proxy->add_option("--exposure", exposure_s, "exposure as NAME=level/reference")->required();
  c_proxy->add_option("--mediator", mediator_s, "mediator name")->required();
  c_proxy->add_option("--outcome", outcome, "outcome variable name")->required();
  c_proxy->add_option("--proxy", proxy, "proxy variable name")->required();
  c_proxy->add_flag("--allow-wide-proxy", allow_wide,
                    "accept a proxy with more than two levels (heuristic)");

  auto* c_lt = app.add_subcommand("bounds-longterm",
                                  "one-sided long-horizon indirect-effect bound");
  c_lt->add_option("input", input, "distribution JSON over proxy, mediator, outcome")->required();
  c_lt->add_option("--te-xz", te_xz, "experimental exposure->mediator contrast")->required();
  c_lt->add_option("--mediator", mediator_s, "mediator name (optionally NAME=level/reference)")
      ->required();
  c_lt->add_option("--outcome", outcome, "outcome variable name")->required();
  c_lt->add_option("--proxy", proxy, "proxy variable name")->required();

  auto* c_orc = app.add_subcommand("oracle", "exact counterfactual evaluation on a model");
  c_orc->add_option("input", input, "structural-model JSON file")->required();
  c_orc->add_option("--measure", measure_s, "one of TE NDE NIE TDE TIE CDE PIIE TE_XZ TE_ZY "
                                            "DE_TRUE IE_TRUE");
  c_orc->add_option("--term", term_s, "counterfactual term, e.g. \"Y | do(X=0); Z@do(X=1)\"");
  c_orc->add_option("--exposure", exposure_s, "exposure as NAME=level/reference");
  c_orc->add_option("--mediator", mediator_s, "mediator name (optionally NAME=level/reference)");
  c_orc->add_option("--outcome", outcome, "outcome variable name");
  c_orc->add_option("--controlled", controlled, "mediator level held fixed (CDE)");
  c_orc->add_option("--confounder", confounder, "latent confounder name (DE_TRUE)");

  auto* c_est = app.add_subcommand("estimate", "estimate a joint from CSV records");
  c_est->add_option("--records", records_path, "CSV file of observations")->required();
  c_est->add_option("--schema", schema_path, "JSON file declaring the variables")->required();
  c_est->add_option("--alpha", alpha, "additive smoothing (default 0)");
  c_est->add_option("--out", out_path, "where to write the estimated distribution")->required();

  auto* c_val = app.add_subcommand("validate", "check a distribution/model/records file");
  c_val->add_option("input", input, "file to check")->required();
  c_val->add_option("--schema", schema_path, "schema JSON (validates CSV records)");

  auto* c_dev = app.add_subcommand("dev-props", "internal property sweep");
  c_dev->group("");

  std::vector<std::string> argv_echo(argv, argv + argc);

  try {
    app.parse(argc, argv);

    if (*c_eff) {
      return run_effects(argv_echo, input, parse_contrast(exposure_s, "--exposure"),
                         parse_contrast(mediator_s, "--mediator"), outcome, json_mode);
    }
    if (*c_px) {
      std::optional<double> te_arg;
      if (te_opt->count() > 0) te_arg = te_value;
      return run_bounds_px(argv_echo, input, parse_contrast(exposure_s, "--exposure"), mediator_s,
                           outcome, te_arg, json_mode);
    }
    if (*c_proxy) {
      return run_bounds_proxy(argv_echo, input, parse_contrast(exposure_s, "--exposure"),
                              mediator_s, outcome, proxy, allow_wide, require_determinate,
                              json_mode);
    }
    if (*c_lt) {
      return run_bounds_longterm(argv_echo, input, te_xz,
                                 parse_contrast(mediator_s, "--mediator"), outcome, proxy,
                                 require_determinate, json_mode);
    }
    if (*c_orc) {
      return run_oracle(argv_echo, input, measure_s, term_s,
                        exposure_s.empty() ? ContrastArg{} : parse_contrast(exposure_s, "--exposure"),
                        mediator_s.empty() ? ContrastArg{} : parse_contrast(mediator_s, "--mediator"),
                        outcome, controlled, confounder, json_mode);
    }
    if (*c_est) {
      return run_estimate(argv_echo, records_path, schema_path, alpha, out_path, json_mode);
    }
    if (*c_val) {
      return run_validate(argv_echo, input, schema_path, json_mode);
    }
    if (*c_dev) {
      return run_dev_props(json_mode);
    }
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const medfx::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
