#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "medfx/bounds.hpp"
#include "medfx/dist.hpp"
#include "medfx/errors.hpp"
#include "medfx/scm.hpp"

namespace medfx::io {

using nlohmann::json;

namespace detail {

inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline const json& field(const json& obj, const char* key, const std::string& context) {
  if (!obj.is_object()) throw ParseError(context + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(context + ": missing field '" + std::string(key) + "'");
  return *it;
}

inline std::string string_field(const json& obj, const char* key, const std::string& context) {
  const json& v = field(obj, key, context);
  if (!v.is_string()) throw ParseError(context + ": field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

inline std::vector<std::string> string_array(const json& v, const std::string& context) {
  if (!v.is_array()) throw ParseError(context + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw ParseError(context + ": expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline std::vector<double> number_array(const json& v, const std::string& context) {
  if (!v.is_array()) throw ParseError(context + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ParseError(context + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline VariableSpec parse_variable(const json& v, const std::string& context) {
  VariableSpec spec;
  spec.name = string_field(v, "name", context);
  spec.levels = string_array(field(v, "levels", context), context + " levels of '" + spec.name + "'");
  if (v.contains("values")) {
    spec.values = number_array(v["values"], context + " values of '" + spec.name + "'");
  }
  auto problems = spec.check();
  if (!problems.empty()) throw ValidationError("invalid variable '" + spec.name + "'", problems);
  return spec;
}

inline std::vector<VariableSpec> parse_variables(const json& root, const std::string& context) {
  const json& arr = field(root, "variables", context);
  if (!arr.is_array() || arr.empty()) {
    throw ParseError(context + ": 'variables' must be a non-empty array");
  }
  std::vector<VariableSpec> out;
  std::set<std::string> seen;
  for (const auto& v : arr) {
    out.push_back(parse_variable(v, context));
    if (!seen.insert(out.back().name).second) {
      throw ParseError(context + ": duplicate variable '" + out.back().name + "'");
    }
  }
  return out;
}

inline Assignment parse_assignment(const json& v, const std::string& context) {
  if (!v.is_object()) throw ParseError(context + ": expected an assignment object");
  Assignment a;
  for (const auto& [key, val] : v.items()) {
    if (!val.is_string()) {
      throw ParseError(context + ": level of '" + key + "' must be a string");
    }
    a[key] = val.get<std::string>();
  }
  return a;
}

// One conditional factor of a factored distribution file.
struct Factor {
  std::string target;
  std::vector<std::string> given;
  std::vector<double> table;  // row-major over given domains, target fastest
};

inline std::vector<Factor> parse_factors(const json& root, const std::string& context) {
  const json& arr = field(root, "factors", context);
  if (!arr.is_array() || arr.empty()) {
    throw ParseError(context + ": 'factors' must be a non-empty array");
  }
  std::vector<Factor> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string fctx = context + " factor #" + std::to_string(i);
    Factor f;
    f.target = string_field(arr[i], "target", fctx);
    f.given = string_array(field(arr[i], "given", fctx), fctx + " 'given'");
    f.table = number_array(field(arr[i], "table", fctx), fctx + " 'table'");
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace detail

// --- Distributions -------------------------------------------------------------

inline FiniteDistribution parse_distribution(const json& root, const std::string& origin) {
  const std::vector<VariableSpec> vars = detail::parse_variables(root, origin);

  if (root.contains("joint")) {
    const json& arr = root["joint"];
    if (!arr.is_array()) throw ParseError(origin + ": 'joint' must be an array");
    std::vector<std::pair<Assignment, double>> cells;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string cctx = origin + " joint cell #" + std::to_string(i);
      const json& p = detail::field(arr[i], "p", cctx);
      if (!p.is_number()) throw ParseError(cctx + ": field 'p' must be a number");
      cells.emplace_back(detail::parse_assignment(detail::field(arr[i], "assign", cctx), cctx),
                         p.get<double>());
    }
    FiniteDistribution d = FiniteDistribution::from_cells(vars, cells);
    auto problems = d.validate();
    if (!problems.empty()) throw ValidationError(origin + ": invalid distribution", problems);
    return d;
  }

  if (root.contains("factors")) {
    const auto factors = detail::parse_factors(root, origin);
    std::map<std::string, std::size_t> var_index;
    for (std::size_t i = 0; i < vars.size(); ++i) var_index[vars[i].name] = i;

    std::set<std::string> targets;
    for (const auto& f : factors) targets.insert(f.target);

    std::set<std::string> defined;
    std::vector<std::size_t> factor_of(vars.size(), VariableSpec::npos);
    for (std::size_t fi = 0; fi < factors.size(); ++fi) {
      const auto& f = factors[fi];
      const auto it = var_index.find(f.target);
      if (it == var_index.end()) {
        throw ParseError(origin + ": factor target '" + f.target + "' is not a declared variable");
      }
      if (factor_of[it->second] != VariableSpec::npos) {
        throw ParseError(origin + ": variable '" + f.target + "' has more than one factor");
      }
      for (const auto& g : f.given) {
        if (!var_index.count(g)) {
          throw ParseError(origin + ": factor for '" + f.target + "' conditions on unknown '" + g +
                           "'");
        }
        // A given with no factor at all is a missing root, not a misordering.
        if (!targets.count(g)) {
          throw Error("p(" + g + ") required for joint; use bounds mode");
        }
        if (!defined.count(g)) {
          throw ValidationError(
              origin + ": factors are not ancestrally ordered",
              {"factor for '" + f.target + "' conditions on '" + g +
               "' before any factor defines it"});
        }
      }
      std::size_t expect = vars[it->second].arity();
      for (const auto& g : f.given) expect *= vars[var_index[g]].arity();
      if (f.table.size() != expect) {
        throw ValidationError(origin + ": invalid factor for '" + f.target + "'",
                              {"table has " + std::to_string(f.table.size()) + " entries, expected " +
                               std::to_string(expect)});
      }
      defined.insert(f.target);
      factor_of[it->second] = fi;
    }
    for (const auto& v : vars) {
      if (!defined.count(v.name)) {
        throw Error("p(" + v.name + ") required for joint; use bounds mode");
      }
    }

    // Row sums first, cell products second: a factored file is rejected as a
    // set of conditionals before any joint arithmetic happens.
    std::vector<std::string> problems;
    for (const auto& f : factors) {
      const std::size_t t_arity = vars[var_index[f.target]].arity();
      for (std::size_t row = 0; row * t_arity < f.table.size(); ++row) {
        double mass = 0.0;
        for (std::size_t y = 0; y < t_arity; ++y) {
          const double p = f.table[row * t_arity + y];
          if (p < 0.0) problems.push_back("factor for '" + f.target + "' has a negative entry");
          mass += p;
        }
        if (std::abs(mass - 1.0) > kMassTolerance) {
          problems.push_back("factor for '" + f.target + "' row " + std::to_string(row) +
                             " sums to " + std::to_string(mass));
        }
      }
    }
    if (!problems.empty()) throw ValidationError(origin + ": invalid factors", problems);

    std::vector<double> table;
    table.reserve([&] {
      std::size_t n = 1;
      for (const auto& v : vars) n *= v.arity();
      return n;
    }());
    std::vector<std::size_t> idx(vars.size(), 0);
    while (true) {
      double p = 1.0;
      for (std::size_t vi = 0; vi < vars.size(); ++vi) {
        const auto& f = factors[factor_of[vi]];
        std::size_t flat = 0;
        for (const auto& g : f.given) {
          const std::size_t gi = var_index[g];
          flat = flat * vars[gi].arity() + idx[gi];
        }
        flat = flat * vars[vi].arity() + idx[vi];
        p *= f.table[flat];
      }
      table.push_back(p);
      std::size_t k = vars.size();
      while (k-- > 0) {
        if (++idx[k] < vars[k].arity()) break;
        idx[k] = 0;
      }
      if (k == static_cast<std::size_t>(-1)) break;
    }
    FiniteDistribution d(vars, std::move(table));
    auto dp = d.validate();
    if (!dp.empty()) throw ValidationError(origin + ": invalid distribution", dp);
    return d;
  }

  throw ParseError(origin + ": expected either a 'joint' or a 'factors' section");
}

inline FiniteDistribution load_distribution(const std::string& path) {
  return parse_distribution(detail::parse_json_text(detail::read_file(path), path), path);
}

inline json variables_to_json(const std::vector<VariableSpec>& vars) {
  json arr = json::array();
  for (const auto& v : vars) {
    json jv{{"name", v.name}, {"levels", v.levels}};
    if (v.values) jv["values"] = *v.values;
    arr.push_back(std::move(jv));
  }
  return arr;
}

inline json distribution_to_json(const FiniteDistribution& d) {
  json root;
  root["variables"] = variables_to_json(d.variables());
  json cells = json::array();
  d.for_each_cell([&](const std::vector<std::size_t>& idx, double p) {
    json assign = json::object();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      assign[d.variables()[i].name] = d.variables()[i].levels[idx[i]];
    }
    cells.push_back(json{{"assign", std::move(assign)}, {"p", p}});
  });
  root["joint"] = std::move(cells);
  return root;
}

inline void save_distribution(const FiniteDistribution& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file '" + path + "'");
  out << distribution_to_json(d).dump(2) << "\n";
}

// Factored-form reader for the interval analysis: requires the mediator and
// outcome factors but not p(exposure).
inline MediationConditionals parse_conditionals(const json& root, const MeasureRequest& r,
                                                const std::string& origin) {
  const std::vector<VariableSpec> vars = detail::parse_variables(root, origin);
  const auto factors = detail::parse_factors(root, origin);
  const auto var_of = [&](const std::string& name) -> const VariableSpec& {
    for (const auto& v : vars) {
      if (v.name == name) return v;
    }
    throw ParseError(origin + ": variable '" + name + "' is not declared");
  };

  MediationConditionals c;
  c.exposure = var_of(r.exposure);
  c.mediator = var_of(r.mediator);
  c.outcome = var_of(r.outcome);
  c.exposure_level = r.exposure_level;
  c.exposure_ref = r.exposure_ref;
  c.pz.assign(c.exposure.arity(), std::vector<double>(c.mediator.arity(), 0.0));
  c.py.assign(c.exposure.arity(),
              std::vector<std::vector<double>>(c.mediator.arity(),
                                               std::vector<double>(c.outcome.arity(), 0.0)));

  const detail::Factor* fz = nullptr;
  const detail::Factor* fy = nullptr;
  for (const auto& f : factors) {
    if (f.target == r.mediator) fz = &f;
    if (f.target == r.outcome) fy = &f;
  }
  if (!fz || fz->given != std::vector<std::string>{r.exposure}) {
    throw ParseError(origin + ": need a factor for '" + r.mediator + "' given ['" + r.exposure +
                     "']");
  }
  if (!fy || fy->given.size() != 2 ||
      std::set<std::string>(fy->given.begin(), fy->given.end()) !=
          std::set<std::string>{r.exposure, r.mediator}) {
    throw ParseError(origin + ": need a factor for '" + r.outcome + "' given ['" + r.exposure +
                     "', '" + r.mediator + "']");
  }
  if (fz->table.size() != c.exposure.arity() * c.mediator.arity()) {
    throw ValidationError(origin + ": invalid factor for '" + r.mediator + "'",
                          {"table size mismatch"});
  }
  if (fy->table.size() != c.exposure.arity() * c.mediator.arity() * c.outcome.arity()) {
    throw ValidationError(origin + ": invalid factor for '" + r.outcome + "'",
                          {"table size mismatch"});
  }

  for (std::size_t x = 0; x < c.exposure.arity(); ++x) {
    for (std::size_t z = 0; z < c.mediator.arity(); ++z) {
      c.pz[x][z] = fz->table[x * c.mediator.arity() + z];
      // The outcome factor's given order decides its row-major layout.
      const bool x_first = fy->given[0] == r.exposure;
      const std::size_t row = x_first ? x * c.mediator.arity() + z : z * c.exposure.arity() + x;
      for (std::size_t y = 0; y < c.outcome.arity(); ++y) {
        c.py[x][z][y] = fy->table[row * c.outcome.arity() + y];
      }
    }
  }
  c.require_valid();
  return c;
}

inline MediationConditionals load_conditionals(const std::string& path, const MeasureRequest& r) {
  return parse_conditionals(detail::parse_json_text(detail::read_file(path), path), r, path);
}

// --- Structural models -----------------------------------------------------------

inline StructuralModel parse_scm(const json& root, const std::string& origin) {
  const json& exo_arr = detail::field(root, "exogenous", origin);
  const json& endo_arr = detail::field(root, "endogenous", origin);
  if (!exo_arr.is_array() || !endo_arr.is_array()) {
    throw ParseError(origin + ": 'exogenous' and 'endogenous' must be arrays");
  }

  std::set<std::string> all_names;
  const auto scan_name = [&](const json& v, const std::string& ctx) {
    all_names.insert(detail::string_field(v, "name", ctx));
  };
  for (const auto& v : exo_arr) scan_name(v, origin + " exogenous");
  for (const auto& v : endo_arr) scan_name(v, origin + " endogenous");

  std::vector<ExogenousVariable> exo;
  std::map<std::string, VariableSpec> known;
  for (const auto& v : exo_arr) {
    ExogenousVariable e;
    e.spec = detail::parse_variable(v, origin + " exogenous");
    e.probs = detail::number_array(detail::field(v, "probs", origin + " exogenous"),
                                   origin + " probs of '" + e.spec.name + "'");
    known[e.spec.name] = e.spec;
    exo.push_back(std::move(e));
  }

  std::vector<EndogenousVariable> endo;
  for (const auto& v : endo_arr) {
    const std::string name = detail::string_field(v, "name", origin + " endogenous");
    const std::string ctx = origin + " endogenous '" + name + "'";
    EndogenousVariable node;
    node.parents = detail::string_array(detail::field(v, "parents", ctx), ctx + " parents");

    std::vector<VariableSpec> pspecs;
    for (const auto& p : node.parents) {
      const auto it = known.find(p);
      if (it == known.end()) {
        if (all_names.count(p)) {
          throw ValidationError(origin + ": not topologically ordered",
                                {"'" + name + "' uses parent '" + p +
                                 "' declared later in the file (reorder, or break the cycle)"});
        }
        throw ParseError(ctx + ": unknown parent '" + p + "'");
      }
      pspecs.push_back(it->second);
    }

    const json& mech = detail::field(v, "mechanism", ctx);
    if (!mech.is_array() || mech.empty()) {
      throw ParseError(ctx + ": 'mechanism' must be a non-empty array");
    }

    node.spec.name = name;
    if (v.contains("levels")) {
      node.spec.levels = detail::string_array(v["levels"], ctx + " levels");
    } else {
      // Domain defaults to the distinct mechanism outputs in order of first
      // appearance.
      for (const auto& row : mech) {
        const std::string val = detail::string_field(row, "value", ctx + " mechanism");
        if (node.spec.level_index(val) == VariableSpec::npos) node.spec.levels.push_back(val);
      }
    }
    if (v.contains("values")) {
      node.spec.values = detail::number_array(v["values"], ctx + " values");
    }
    auto sp = node.spec.check();
    if (!sp.empty()) throw ValidationError(origin + ": invalid variable '" + name + "'", sp);

    std::size_t combos = 1;
    for (const auto& ps : pspecs) combos *= ps.arity();
    node.outputs.assign(combos, VariableSpec::npos);
    for (std::size_t ri = 0; ri < mech.size(); ++ri) {
      const std::string rctx = ctx + " mechanism row #" + std::to_string(ri);
      const Assignment pa =
          detail::parse_assignment(detail::field(mech[ri], "parents", rctx), rctx);
      if (pa.size() != node.parents.size()) {
        throw ParseError(rctx + ": must assign exactly the declared parents");
      }
      std::size_t flat = 0;
      for (std::size_t pi = 0; pi < node.parents.size(); ++pi) {
        const auto it = pa.find(node.parents[pi]);
        if (it == pa.end()) throw ParseError(rctx + ": missing parent '" + node.parents[pi] + "'");
        flat = flat * pspecs[pi].arity() + pspecs[pi].require_level(it->second);
      }
      if (node.outputs[flat] != VariableSpec::npos) {
        throw ValidationError(ctx + ": duplicate mechanism row",
                              {"parent combination " + to_string(pa) + " appears twice"});
      }
      node.outputs[flat] =
          node.spec.require_level(detail::string_field(mech[ri], "value", rctx));
    }
    for (std::size_t flat = 0; flat < combos; ++flat) {
      if (node.outputs[flat] != VariableSpec::npos) continue;
      Assignment missing;
      std::size_t rem = flat;
      for (std::size_t pi = node.parents.size(); pi-- > 0;) {
        missing[node.parents[pi]] = pspecs[pi].levels[rem % pspecs[pi].arity()];
        rem /= pspecs[pi].arity();
      }
      throw ValidationError(ctx + ": mechanism is not total",
                            {"no row for parent combination " + to_string(missing)});
    }
    known[name] = node.spec;
    endo.push_back(std::move(node));
  }
  return StructuralModel(std::move(exo), std::move(endo));
}

inline StructuralModel load_scm(const std::string& path) {
  return parse_scm(detail::parse_json_text(detail::read_file(path), path), path);
}

inline json scm_to_json(const StructuralModel& m) {
  json root;
  json exo = json::array();
  for (const auto& e : m.exogenous()) {
    json je{{"name", e.spec.name}, {"levels", e.spec.levels}, {"probs", e.probs}};
    if (e.spec.values) je["values"] = *e.spec.values;
    exo.push_back(std::move(je));
  }
  root["exogenous"] = std::move(exo);

  json endo = json::array();
  for (const auto& v : m.endogenous()) {
    json jv{{"name", v.spec.name}, {"levels", v.spec.levels}, {"parents", v.parents}};
    if (v.spec.values) jv["values"] = *v.spec.values;
    std::vector<const VariableSpec*> pspecs;
    for (const auto& p : v.parents) {
      pspecs.push_back(m.is_exogenous(p) ? nullptr : &m.endogenous_spec(p));
      if (!pspecs.back()) {
        for (const auto& e : m.exogenous()) {
          if (e.spec.name == p) pspecs.back() = &e.spec;
        }
      }
    }
    json mech = json::array();
    for (std::size_t flat = 0; flat < v.outputs.size(); ++flat) {
      json pa = json::object();
      std::size_t rem = flat;
      for (std::size_t pi = v.parents.size(); pi-- > 0;) {
        pa[v.parents[pi]] = pspecs[pi]->levels[rem % pspecs[pi]->arity()];
        rem /= pspecs[pi]->arity();
      }
      mech.push_back(json{{"parents", std::move(pa)}, {"value", v.spec.levels[v.outputs[flat]]}});
    }
    jv["mechanism"] = std::move(mech);
    endo.push_back(std::move(jv));
  }
  root["endogenous"] = std::move(endo);
  return root;
}

inline void save_scm(const StructuralModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file '" + path + "'");
  out << scm_to_json(m).dump(2) << "\n";
}

// --- Records and estimation --------------------------------------------------------

struct RecordBatch {
  std::vector<VariableSpec> schema;
  std::vector<std::vector<std::size_t>> rows;  // level indices in schema order
  std::vector<double> counts;                  // per-row multiplicity
};

inline std::vector<VariableSpec> load_schema(const std::string& path) {
  return detail::parse_variables(detail::parse_json_text(detail::read_file(path), path), path);
}

inline RecordBatch load_records_csv(const std::string& path,
                                    const std::vector<VariableSpec>& schema) {
  const std::string text = detail::read_file(path);
  std::istringstream in(text);
  std::string line;

  const auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (const char ch : s) {
      if (ch == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur += ch;
      }
    }
    out.push_back(cur);
    for (auto& f : out) {
      const auto b = f.find_first_not_of(" \t");
      const auto e = f.find_last_not_of(" \t");
      f = b == std::string::npos ? "" : f.substr(b, e - b + 1);
    }
    return out;
  };

  if (!std::getline(in, line)) throw ParseError(path + ": empty file, expected a header row");
  const auto header = split(line);
  std::vector<std::size_t> col_to_var(header.size(), VariableSpec::npos);
  std::size_t count_col = VariableSpec::npos;
  std::vector<bool> covered(schema.size(), false);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "count") {
      if (count_col != VariableSpec::npos) throw ParseError(path + ": duplicate 'count' column");
      count_col = c;
      continue;
    }
    bool found = false;
    for (std::size_t vi = 0; vi < schema.size(); ++vi) {
      if (schema[vi].name == header[c]) {
        if (covered[vi]) throw ParseError(path + ": duplicate column '" + header[c] + "'");
        covered[vi] = true;
        col_to_var[c] = vi;
        found = true;
        break;
      }
    }
    if (!found) throw ParseError(path + ": column '" + header[c] + "' is not in the schema");
  }
  for (std::size_t vi = 0; vi < schema.size(); ++vi) {
    if (!covered[vi]) throw ParseError(path + ": schema variable '" + schema[vi].name +
                                       "' has no column");
  }

  RecordBatch batch;
  batch.schema = schema;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw ParseError(path + ": line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    std::vector<std::size_t> row(schema.size(), 0);
    double count = 1.0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == count_col) {
        try {
          count = std::stod(fields[c]);
        } catch (const std::exception&) {
          throw ParseError(path + ": line " + std::to_string(line_no) +
                           ": count '" + fields[c] + "' is not a number");
        }
        if (count < 0.0) {
          throw ParseError(path + ": line " + std::to_string(line_no) + ": negative count");
        }
        continue;
      }
      const std::size_t vi = col_to_var[c];
      const std::size_t li = schema[vi].level_index(fields[c]);
      if (li == VariableSpec::npos) {
        throw ParseError(path + ": line " + std::to_string(line_no) + ": '" + fields[c] +
                         "' is not a level of '" + schema[vi].name + "'");
      }
      row[vi] = li;
    }
    batch.rows.push_back(std::move(row));
    batch.counts.push_back(count);
  }
  return batch;
}

// Cell probability (count + alpha) / (N + alpha * cells); alpha 0 is the
// relative-frequency estimate.
inline FiniteDistribution estimate_joint(const RecordBatch& batch, double alpha = 0.0) {
  if (batch.rows.empty()) throw Error("record batch is empty; need at least one observation");
  if (alpha < 0.0) throw Error("smoothing must be nonnegative");
  std::size_t cells = 1;
  for (const auto& v : batch.schema) cells *= v.arity();
  std::vector<double> table(cells, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < batch.rows.size(); ++r) {
    std::size_t flat = 0;
    for (std::size_t vi = 0; vi < batch.schema.size(); ++vi) {
      flat = flat * batch.schema[vi].arity() + batch.rows[r][vi];
    }
    const double c = batch.counts.empty() ? 1.0 : batch.counts[r];
    table[flat] += c;
    total += c;
  }
  if (total <= 0.0) throw Error("record batch has zero total count");
  const double denom = total + alpha * static_cast<double>(cells);
  for (double& cell : table) cell = (cell + alpha) / denom;
  return FiniteDistribution(batch.schema, std::move(table));
}

}  // namespace medfx::io
