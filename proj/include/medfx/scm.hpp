#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "medfx/dist.hpp"
#include "medfx/errors.hpp"

namespace medfx {

// Root variable with its own finite distribution. Exogenous variables are
// mutually independent; shared confounding is modeled by a shared exogenous
// parent feeding both endpoints.
struct ExogenousVariable {
  VariableSpec spec;
  std::vector<double> probs;  // one per level

  friend bool operator==(const ExogenousVariable&, const ExogenousVariable&) = default;
};

// Deterministic mechanism: level index per parent-assignment combination,
// stored row-major over the parent domains in declaration order.
struct EndogenousVariable {
  VariableSpec spec;
  std::vector<std::string> parents;
  std::vector<std::size_t> outputs;

  friend bool operator==(const EndogenousVariable&, const EndogenousVariable&) = default;
};

// Nested potential-outcome expression: the outcome evaluated under a base
// intervention, with some variables pinned to the value they take under a
// different intervention world (an empty world means the natural value).
struct CounterfactualTerm {
  std::string outcome;
  Assignment world;  // base intervention; empty = natural world
  std::vector<std::pair<std::string, Assignment>> substitutions;
};

// Finite structural causal model. Endogenous variables are declared in a
// topological order; evaluation is exact enumeration over the joint
// exogenous state space (no sampling).
class StructuralModel {
 public:
  static constexpr std::uint64_t kDefaultStateBudget = 10'000'000;

  StructuralModel(std::vector<ExogenousVariable> exogenous,
                  std::vector<EndogenousVariable> endogenous,
                  std::uint64_t state_budget = kDefaultStateBudget)
      : exogenous_(std::move(exogenous)),
        endogenous_(std::move(endogenous)),
        state_budget_(state_budget) {
    validate_();
    resolve_parents_();
  }

  const std::vector<ExogenousVariable>& exogenous() const { return exogenous_; }
  const std::vector<EndogenousVariable>& endogenous() const { return endogenous_; }
  std::uint64_t state_budget() const { return state_budget_; }

  bool is_endogenous(const std::string& name) const {
    return endo_index_(name) != VariableSpec::npos;
  }
  bool is_exogenous(const std::string& name) const {
    return exo_index_(name) != VariableSpec::npos;
  }

  const VariableSpec& endogenous_spec(const std::string& name) const {
    const std::size_t i = endo_index_(name);
    if (i == VariableSpec::npos) throw Error("unknown endogenous variable '" + name + "'");
    return endogenous_[i].spec;
  }

  // Graph mutilation: mechanisms of intervened variables become constants.
  StructuralModel intervene(const Assignment& do_assign) const {
    StructuralModel out = *this;
    for (const auto& [name, label] : do_assign) {
      const std::size_t i = endo_index_(name);
      if (i == VariableSpec::npos) {
        if (is_exogenous(name)) {
          throw Error("cannot intervene on exogenous variable '" + name + "'");
        }
        throw Error("cannot intervene on unknown variable '" + name + "'");
      }
      EndogenousVariable& v = out.endogenous_[i];
      const std::size_t level = v.spec.require_level(label);
      std::fill(v.outputs.begin(), v.outputs.end(), level);
    }
    return out;
  }

  // Exact joint over the endogenous variables.
  FiniteDistribution observational_distribution() const { return joint_with({}); }

  // Exact joint over the endogenous variables plus the listed exogenous
  // ones (needed when an oracle formula refers to a latent confounder).
  FiniteDistribution joint_with(const std::vector<std::string>& extra_exogenous) const {
    std::vector<VariableSpec> vars;
    std::vector<std::size_t> extra_idx;
    for (const auto& name : extra_exogenous) {
      const std::size_t i = exo_index_(name);
      if (i == VariableSpec::npos) throw Error("unknown exogenous variable '" + name + "'");
      vars.push_back(exogenous_[i].spec);
      extra_idx.push_back(i);
    }
    for (const auto& v : endogenous_) vars.push_back(v.spec);

    FiniteDistribution out(vars, std::vector<double>(table_size_(vars), 0.0));
    std::vector<double> table(out.cell_count(), 0.0);
    enumerate_units_([&](const std::vector<std::size_t>& unit, double w) {
      const std::vector<std::size_t> endo = propagate_(unit, {}, {});
      std::size_t flat = 0;
      std::size_t k = 0;
      for (const std::size_t ei : extra_idx) {
        flat = flat * vars[k++].arity() + unit[ei];
      }
      for (std::size_t j = 0; j < endogenous_.size(); ++j) {
        flat = flat * vars[k++].arity() + endo[j];
      }
      table[flat] += w;
    });
    return FiniteDistribution(vars, std::move(table));
  }

  // Exogenous-probability-weighted mean of a nested counterfactual. Each
  // substitution is evaluated in its own intervention world for the same
  // unit; the substituted values are then held fixed while the outcome is
  // evaluated under the base intervention.
  double counterfactual_mean(const CounterfactualTerm& term) const {
    check_term_(term);
    const std::size_t out_idx = endo_index_(term.outcome);
    const VariableSpec& out_spec = endogenous_[out_idx].spec;
    if (!out_spec.has_numeric_values()) {
      throw NonNumericTarget("counterfactual outcome '" + term.outcome +
                             "' has no numeric level values");
    }
    const auto base = do_indices_(term.world);
    std::vector<std::pair<std::size_t, std::vector<std::size_t>>> subs;
    subs.reserve(term.substitutions.size());
    for (const auto& [name, world] : term.substitutions) {
      subs.emplace_back(endo_index_(name), do_indices_(world));
    }

    double acc = 0.0;
    std::vector<std::size_t> pinned(endogenous_.size(), VariableSpec::npos);
    enumerate_units_([&](const std::vector<std::size_t>& unit, double w) {
      std::fill(pinned.begin(), pinned.end(), VariableSpec::npos);
      for (const auto& [var_idx, sub_world] : subs) {
        pinned[var_idx] = propagate_(unit, sub_world, {})[var_idx];
      }
      const auto endo = propagate_(unit, base, pinned);
      acc += w * out_spec.numeric_value(endo[out_idx]);
    });
    return acc;
  }

  // E[Y_x - Y_xbar | X = factual]: the unit-level exposure contrast averaged
  // over the subpopulation whose natural exposure equals `factual`.
  double counterfactual_contrast_among(const std::string& exposure, const std::string& level_x,
                                       const std::string& level_xbar, const std::string& outcome,
                                       const std::string& factual) const {
    const std::size_t xi = endo_index_checked_(exposure);
    const std::size_t yi = endo_index_checked_(outcome);
    const VariableSpec& out_spec = endogenous_[yi].spec;
    const std::size_t fl = endogenous_[xi].spec.require_level(factual);
    const auto world_x = do_indices_({{exposure, level_x}});
    const auto world_xbar = do_indices_({{exposure, level_xbar}});

    double acc = 0.0;
    double mass = 0.0;
    enumerate_units_([&](const std::vector<std::size_t>& unit, double w) {
      if (propagate_(unit, {}, {})[xi] != fl) return;
      mass += w;
      const double yx = out_spec.numeric_value(propagate_(unit, world_x, {})[yi]);
      const double yxbar = out_spec.numeric_value(propagate_(unit, world_xbar, {})[yi]);
      acc += w * (yx - yxbar);
    });
    if (mass <= 0.0) {
      throw ZeroProbabilityCondition("subpopulation " + exposure + "=" + factual +
                                     " has zero probability");
    }
    return acc / mass;
  }

  // Draws observation rows (endogenous level indices) by forward sampling.
  // Reproducible: the generator stream is fixed, not implementation-defined.
  std::vector<std::vector<std::size_t>> sample_observations(std::size_t n, std::uint64_t seed) const;

  friend bool operator==(const StructuralModel& a, const StructuralModel& b) {
    return a.exogenous_ == b.exogenous_ && a.endogenous_ == b.endogenous_;
  }

 private:
  void validate_() {
    std::vector<std::string> problems;
    std::set<std::string> names;
    for (const auto& e : exogenous_) {
      auto vp = e.spec.check();
      problems.insert(problems.end(), vp.begin(), vp.end());
      if (!names.insert(e.spec.name).second) {
        problems.push_back("duplicate variable name '" + e.spec.name + "'");
      }
      if (e.probs.size() != e.spec.arity()) {
        problems.push_back("exogenous '" + e.spec.name + "' has " + std::to_string(e.probs.size()) +
                           " probabilities for " + std::to_string(e.spec.arity()) + " levels");
      } else {
        double mass = 0.0;
        for (double p : e.probs) {
          if (p < 0.0) problems.push_back("exogenous '" + e.spec.name + "' has a negative probability");
          mass += p;
        }
        if (std::abs(mass - 1.0) > kMassTolerance) {
          problems.push_back("exogenous '" + e.spec.name + "' mass " + std::to_string(mass) + " != 1");
        }
      }
    }
    for (const auto& v : endogenous_) {
      auto vp = v.spec.check();
      problems.insert(problems.end(), vp.begin(), vp.end());
      if (!names.insert(v.spec.name).second) {
        problems.push_back("variable '" + v.spec.name +
                           "' declared after a variable of the same name (or duplicated)");
      }
      std::size_t combos = 1;
      for (const auto& p : v.parents) {
        if (!names.count(p)) {
          problems.push_back("'" + v.spec.name + "' lists parent '" + p +
                             "' that is not declared earlier (not topologically ordered)");
          combos = 0;
          break;
        }
        combos *= arity_of_(p);
      }
      if (combos > 0 && v.outputs.size() != combos) {
        problems.push_back("mechanism of '" + v.spec.name + "' covers " +
                           std::to_string(v.outputs.size()) + " of " + std::to_string(combos) +
                           " parent combinations");
      }
      for (std::size_t o : v.outputs) {
        if (o >= v.spec.arity()) {
          problems.push_back("mechanism of '" + v.spec.name + "' outputs level index " +
                             std::to_string(o) + " beyond its domain");
          break;
        }
      }
    }
    std::uint64_t states = 1;
    bool overflow = false;
    for (const auto& e : exogenous_) {
      if (states > state_budget_ / std::max<std::uint64_t>(1, e.spec.arity())) overflow = true;
      states *= e.spec.arity();
    }
    if (!problems.empty()) throw ValidationError("invalid structural model", problems);
    if (overflow || states > state_budget_) {
      throw BudgetExceeded("joint exogenous state space exceeds the budget of " +
                           std::to_string(state_budget_) + " states");
    }
  }

  void resolve_parents_() {
    parent_refs_.clear();
    parent_refs_.resize(endogenous_.size());
    for (std::size_t i = 0; i < endogenous_.size(); ++i) {
      for (const auto& p : endogenous_[i].parents) {
        const std::size_t e = exo_index_(p);
        if (e != VariableSpec::npos) {
          parent_refs_[i].push_back({true, e});
        } else {
          parent_refs_[i].push_back({false, endo_index_(p)});
        }
      }
    }
  }

  std::size_t arity_of_(const std::string& name) const {
    const std::size_t e = exo_index_(name);
    if (e != VariableSpec::npos) return exogenous_[e].spec.arity();
    const std::size_t i = endo_index_(name);
    if (i != VariableSpec::npos) return endogenous_[i].spec.arity();
    throw Error("unknown variable '" + name + "'");
  }

  std::size_t exo_index_(const std::string& name) const {
    for (std::size_t i = 0; i < exogenous_.size(); ++i) {
      if (exogenous_[i].spec.name == name) return i;
    }
    return VariableSpec::npos;
  }

  std::size_t endo_index_(const std::string& name) const {
    for (std::size_t i = 0; i < endogenous_.size(); ++i) {
      if (endogenous_[i].spec.name == name) return i;
    }
    return VariableSpec::npos;
  }

  std::size_t endo_index_checked_(const std::string& name) const {
    const std::size_t i = endo_index_(name);
    if (i == VariableSpec::npos) throw Error("unknown endogenous variable '" + name + "'");
    return i;
  }

  // do-map as level indices per endogenous variable (npos = untouched).
  std::vector<std::size_t> do_indices_(const Assignment& a) const {
    std::vector<std::size_t> idx(endogenous_.size(), VariableSpec::npos);
    for (const auto& [name, label] : a) {
      const std::size_t i = endo_index_(name);
      if (i == VariableSpec::npos) {
        if (is_exogenous(name)) throw Error("cannot intervene on exogenous variable '" + name + "'");
        throw Error("cannot intervene on unknown variable '" + name + "'");
      }
      idx[i] = endogenous_[i].spec.require_level(label);
    }
    return idx;
  }

  void check_term_(const CounterfactualTerm& term) const {
    if (endo_index_(term.outcome) == VariableSpec::npos) {
      throw Error("counterfactual outcome '" + term.outcome + "' is not endogenous");
    }
    if (term.world.count(term.outcome)) {
      throw Error("counterfactual outcome '" + term.outcome + "' must not be intervened on");
    }
    std::set<std::string> sub_names;
    for (const auto& [name, world] : term.substitutions) {
      if (endo_index_(name) == VariableSpec::npos) {
        throw Error("substituted variable '" + name + "' is not endogenous");
      }
      if (name == term.outcome) {
        throw Error("counterfactual outcome '" + term.outcome + "' cannot also be substituted");
      }
      if (term.world.count(name)) {
        throw Error("substituted variable '" + name + "' also appears in the base intervention");
      }
      if (!sub_names.insert(name).second) {
        throw Error("variable '" + name + "' substituted more than once");
      }
      (void)world;
    }
  }

  static std::size_t table_size_(const std::vector<VariableSpec>& vars) {
    std::size_t n = 1;
    for (const auto& v : vars) n *= v.arity();
    return n;
  }

  // Deterministic evaluation of one unit: `dos` pins mechanisms, `pinned`
  // holds cross-world substituted values fixed. Empty vectors mean none.
  std::vector<std::size_t> propagate_(const std::vector<std::size_t>& unit,
                                      const std::vector<std::size_t>& dos,
                                      const std::vector<std::size_t>& pinned) const {
    std::vector<std::size_t> endo(endogenous_.size());
    for (std::size_t i = 0; i < endogenous_.size(); ++i) {
      if (!dos.empty() && dos[i] != VariableSpec::npos) {
        endo[i] = dos[i];
        continue;
      }
      if (!pinned.empty() && pinned[i] != VariableSpec::npos) {
        endo[i] = pinned[i];
        continue;
      }
      const EndogenousVariable& v = endogenous_[i];
      std::size_t flat = 0;
      for (std::size_t k = 0; k < parent_refs_[i].size(); ++k) {
        const auto& [is_exo, idx] = parent_refs_[i][k];
        const std::size_t card = is_exo ? exogenous_[idx].spec.arity() : endogenous_[idx].spec.arity();
        const std::size_t val = is_exo ? unit[idx] : endo[idx];
        flat = flat * card + val;
      }
      endo[i] = v.outputs[flat];
    }
    return endo;
  }

  // Visits every joint exogenous configuration with its probability.
  template <typename Fn>
  void enumerate_units_(Fn&& fn) const {
    std::vector<std::size_t> unit(exogenous_.size(), 0);
    while (true) {
      double w = 1.0;
      for (std::size_t i = 0; i < exogenous_.size(); ++i) w *= exogenous_[i].probs[unit[i]];
      if (w > 0.0) fn(static_cast<const std::vector<std::size_t>&>(unit), w);
      std::size_t k = exogenous_.size();
      while (k-- > 0) {
        if (++unit[k] < exogenous_[k].spec.arity()) break;
        unit[k] = 0;
      }
      if (k == static_cast<std::size_t>(-1)) break;
    }
  }

  std::vector<ExogenousVariable> exogenous_;
  std::vector<EndogenousVariable> endogenous_;
  std::uint64_t state_budget_;
  std::vector<std::vector<std::pair<bool, std::size_t>>> parent_refs_;
};

// --- Oracle effect measures -------------------------------------------------

enum class OracleMeasure { TE, NDE, NIE, TDE, TIE, CDE, PIIE, TE_XZ, TE_ZY, DE_TRUE, IE_TRUE };

inline const char* to_string(OracleMeasure m) {
  switch (m) {
    case OracleMeasure::TE: return "TE";
    case OracleMeasure::NDE: return "NDE";
    case OracleMeasure::NIE: return "NIE";
    case OracleMeasure::TDE: return "TDE";
    case OracleMeasure::TIE: return "TIE";
    case OracleMeasure::CDE: return "CDE";
    case OracleMeasure::PIIE: return "PIIE";
    case OracleMeasure::TE_XZ: return "TE_XZ";
    case OracleMeasure::TE_ZY: return "TE_ZY";
    case OracleMeasure::DE_TRUE: return "DE_TRUE";
    case OracleMeasure::IE_TRUE: return "IE_TRUE";
  }
  return "?";
}

inline std::optional<OracleMeasure> oracle_measure_from_string(const std::string& s) {
  static const std::map<std::string, OracleMeasure> table = {
      {"TE", OracleMeasure::TE},         {"NDE", OracleMeasure::NDE},
      {"NIE", OracleMeasure::NIE},       {"TDE", OracleMeasure::TDE},
      {"TIE", OracleMeasure::TIE},       {"CDE", OracleMeasure::CDE},
      {"PIIE", OracleMeasure::PIIE},     {"TE_XZ", OracleMeasure::TE_XZ},
      {"TE_ZY", OracleMeasure::TE_ZY},   {"DE_TRUE", OracleMeasure::DE_TRUE},
      {"IE_TRUE", OracleMeasure::IE_TRUE}};
  const auto it = table.find(s);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

// Names and designated levels for an effect query. The exposure contrast is
// level_x vs reference level_xbar; mediator levels default to (second, first)
// in domain order when not designated explicitly.
struct OracleQuery {
  std::string exposure;
  std::string exposure_level;  // x
  std::string exposure_ref;    // xbar
  std::string mediator;
  std::string outcome;
  std::optional<std::string> mediator_level;    // z
  std::optional<std::string> mediator_ref;      // zbar
  std::optional<std::string> controlled_level;  // z' for CDE
  std::optional<std::string> confounder;        // latent V for DE_TRUE

  std::pair<std::string, std::string> mediator_contrast(const VariableSpec& z) const {
    std::string hi = mediator_level.value_or(z.levels.size() > 1 ? z.levels[1] : z.levels[0]);
    std::string lo = mediator_ref.value_or(z.levels[0]);
    return {hi, lo};
  }
};

inline double oracle_effect(const StructuralModel& scm, OracleMeasure measure, const OracleQuery& q) {
  const std::string& X = q.exposure;
  const std::string& Y = q.outcome;
  const std::string& Z = q.mediator;
  const Assignment do_x = {{X, q.exposure_level}};
  const Assignment do_xbar = {{X, q.exposure_ref}};
  const auto mean = [&](const CounterfactualTerm& t) { return scm.counterfactual_mean(t); };

  switch (measure) {
    case OracleMeasure::TE:
      return mean({Y, do_x, {}}) - mean({Y, do_xbar, {}});
    case OracleMeasure::NDE:
      return mean({Y, do_x, {{Z, do_xbar}}}) - mean({Y, do_xbar, {}});
    case OracleMeasure::NIE:
      return mean({Y, do_xbar, {{Z, do_x}}}) - mean({Y, do_xbar, {}});
    case OracleMeasure::TDE:
      return mean({Y, do_x, {}}) - mean({Y, do_xbar, {{Z, do_x}}});
    case OracleMeasure::TIE:
      return mean({Y, do_x, {}}) - mean({Y, do_x, {{Z, do_xbar}}});
    case OracleMeasure::CDE: {
      if (!q.controlled_level) throw Error("CDE needs a controlled mediator level");
      Assignment wx = do_x, wxbar = do_xbar;
      wx[Z] = *q.controlled_level;
      wxbar[Z] = *q.controlled_level;
      return mean({Y, wx, {}}) - mean({Y, wxbar, {}});
    }
    case OracleMeasure::PIIE:
      // Natural world against the world where only the mediator is switched
      // to its no-exposure value; the exposure keeps its natural value.
      return mean({Y, {}, {}}) - mean({Y, {}, {{Z, do_xbar}}});
    case OracleMeasure::TE_XZ:
      return mean({Z, do_x, {}}) - mean({Z, do_xbar, {}});
    case OracleMeasure::TE_ZY: {
      const auto [z_hi, z_lo] = q.mediator_contrast(scm.endogenous_spec(Z));
      return mean({Y, {{Z, z_hi}}, {}}) - mean({Y, {{Z, z_lo}}, {}});
    }
    case OracleMeasure::DE_TRUE: {
      if (!q.confounder) throw Error("DE_TRUE needs the confounder variable name");
      const std::string& V = *q.confounder;
      FiniteDistribution joint = scm.is_exogenous(V) ? scm.joint_with({V})
                                                     : scm.observational_distribution();
      joint = joint.marginal({V, X, Z, Y});
      const VariableSpec& zspec = joint.variable(Z);
      const VariableSpec& vspec = joint.variable(V);
      double de = 0.0;
      for (const auto& z : zspec.levels) {
        const double pz = joint.mass({{Z, z}});
        if (pz <= 0.0) continue;
        double stratum = 0.0;
        for (const auto& v : vspec.levels) {
          const double pv_z = joint.conditional_prob({{V, v}}, {{Z, z}});
          if (pv_z <= 0.0) continue;
          stratum += pv_z * (joint.expectation(Y, {{X, q.exposure_level}, {Z, z}, {V, v}}) -
                             joint.expectation(Y, {{X, q.exposure_ref}, {Z, z}, {V, v}}));
        }
        de += pz * stratum;
      }
      return de;
    }
    case OracleMeasure::IE_TRUE: {
      const VariableSpec& zspec = scm.endogenous_spec(Z);
      if (!zspec.is_binary()) {
        throw NonBinaryMediator("IE_TRUE factorization needs a binary mediator; '" + Z +
                                "' has " + std::to_string(zspec.arity()) + " levels");
      }
      return oracle_effect(scm, OracleMeasure::TE_XZ, q) *
             oracle_effect(scm, OracleMeasure::TE_ZY, q);
    }
  }
  throw Error("unsupported oracle measure");
}

// --- Forward sampling --------------------------------------------------------

namespace detail {
// 53-bit uniform in [0,1) from a fixed-stream 64-bit generator state.
inline double unit_uniform(std::uint64_t raw) {
  return static_cast<double>(raw >> 11) * 0x1.0p-53;
}
}  // namespace detail

}  // namespace medfx

#include <random>

namespace medfx {

inline std::vector<std::vector<std::size_t>> StructuralModel::sample_observations(
    std::size_t n, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> rows;
  rows.reserve(n);
  std::vector<std::size_t> unit(exogenous_.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < exogenous_.size(); ++i) {
      const double u = detail::unit_uniform(rng());
      double cum = 0.0;
      std::size_t pick = exogenous_[i].spec.arity() - 1;
      for (std::size_t l = 0; l < exogenous_[i].probs.size(); ++l) {
        cum += exogenous_[i].probs[l];
        if (u < cum) {
          pick = l;
          break;
        }
      }
      unit[i] = pick;
    }
    rows.push_back(propagate_(unit, {}, {}));
  }
  return rows;
}

}  // namespace medfx
