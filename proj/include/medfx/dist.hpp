#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "medfx/errors.hpp"

namespace medfx {

// Absolute tolerance used for all probability-mass equality checks.
inline constexpr double kMassTolerance = 1e-9;

// A named finite-domain variable. Level order is the declaration order;
// for binary variables the first-listed level is the reference level and
// numeric values default to 0/1 in domain order.
struct VariableSpec {
  std::string name;
  std::vector<std::string> levels;
  std::optional<std::vector<double>> values;  // numeric value per level

  friend bool operator==(const VariableSpec&, const VariableSpec&) = default;

  std::size_t arity() const { return levels.size(); }

  bool is_binary() const { return levels.size() == 2; }

  // Index of a level label, or npos when absent.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t level_index(const std::string& label) const {
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (levels[i] == label) return i;
    }
    return npos;
  }

  std::size_t require_level(const std::string& label) const {
    const std::size_t i = level_index(label);
    if (i == npos) {
      throw Error("variable '" + name + "' has no level '" + label + "'");
    }
    return i;
  }

  bool has_numeric_values() const { return values.has_value() || is_binary(); }

  // Numeric value of level i: explicit values when given, 0/1 for binary.
  double numeric_value(std::size_t i) const {
    if (values) return (*values)[i];
    if (is_binary()) return static_cast<double>(i);
    throw NonNumericTarget("variable '" + name +
                           "' has no numeric level values and is not binary");
  }

  std::vector<std::string> check() const {
    std::vector<std::string> problems;
    // A single level is legal: such a variable is constant and adjusting for
    // it is vacuous. Zero levels would make the domain empty.
    if (levels.empty()) {
      problems.push_back("variable '" + name + "' needs at least 1 level");
    }
    std::set<std::string> seen;
    for (const auto& l : levels) {
      if (!seen.insert(l).second) {
        problems.push_back("variable '" + name + "' has duplicate level '" + l + "'");
      }
    }
    if (values && values->size() != levels.size()) {
      problems.push_back("variable '" + name + "' declares " +
                         std::to_string(values->size()) + " numeric values for " +
                         std::to_string(levels.size()) + " levels");
    }
    return problems;
  }
};

// Map from variable name to level label.
using Assignment = std::map<std::string, std::string>;

inline std::string to_string(const Assignment& a) {
  std::string s;
  for (const auto& [k, v] : a) {
    if (!s.empty()) s += ", ";
    s += k + "=" + v;
  }
  return s.empty() ? "{}" : s;
}

// Exact joint probability table over an ordered list of finite variables.
// Cells are stored densely in row-major order (first variable slowest), so
// the table always covers the full Cartesian product of the domains.
// Immutable after construction; all operations are pure.
class FiniteDistribution {
 public:
  FiniteDistribution(std::vector<VariableSpec> variables, std::vector<double> table)
      : variables_(std::move(variables)), table_(std::move(table)) {
    std::vector<std::string> problems;
    std::set<std::string> names;
    for (const auto& v : variables_) {
      auto vp = v.check();
      problems.insert(problems.end(), vp.begin(), vp.end());
      if (!names.insert(v.name).second) {
        problems.push_back("duplicate variable name '" + v.name + "'");
      }
    }
    if (!problems.empty()) {
      throw ValidationError("invalid variable specs", problems);
    }
    if (table_.size() != cell_count_()) {
      throw Error("table has " + std::to_string(table_.size()) + " cells, domain product is " +
                  std::to_string(cell_count_()));
    }
  }

  // Builds a table from explicit (assignment, probability) cells. Every cell
  // of the Cartesian product must appear exactly once; missing cells are an
  // error, never implicit zeros.
  static FiniteDistribution from_cells(std::vector<VariableSpec> variables,
                                       const std::vector<std::pair<Assignment, double>>& cells) {
    FiniteDistribution proto(variables, std::vector<double>(product_size(variables), 0.0));
    std::vector<char> seen(proto.table_.size(), 0);
    for (const auto& [assign, p] : cells) {
      const std::size_t idx = proto.flat_index(proto.full_indices(assign));
      if (seen[idx]) {
        throw ValidationError("duplicate table cell", {"cell {" + to_string(assign) + "} appears more than once"});
      }
      seen[idx] = 1;
      proto.table_[idx] = p;
    }
    std::vector<std::string> missing;
    for (std::size_t idx = 0; idx < seen.size(); ++idx) {
      if (!seen[idx]) {
        missing.push_back("missing table cell {" + to_string(proto.assignment_at(idx)) + "}");
        if (missing.size() >= 8) {
          missing.push_back("...");
          break;
        }
      }
    }
    if (!missing.empty()) {
      throw ValidationError("table does not cover the full domain product", missing);
    }
    return proto;
  }

  const std::vector<VariableSpec>& variables() const { return variables_; }
  const std::vector<double>& table() const { return table_; }
  std::size_t cell_count() const { return table_.size(); }

  bool has_variable(const std::string& name) const {
    return index_of_(name) != VariableSpec::npos;
  }

  const VariableSpec& variable(const std::string& name) const {
    const std::size_t i = index_of_(name);
    if (i == VariableSpec::npos) {
      throw Error("unknown variable '" + name + "'");
    }
    return variables_[i];
  }

  // All invariant violations; an empty result means the table is valid.
  std::vector<std::string> validate() const {
    std::vector<std::string> problems;
    double mass = 0.0;
    for (std::size_t idx = 0; idx < table_.size(); ++idx) {
      const double p = table_[idx];
      if (p < 0.0) {
        std::ostringstream os;
        os << "negative probability " << p << " at cell {" << to_string(assignment_at(idx)) << "}";
        problems.push_back(os.str());
      }
      if (p > 1.0 + kMassTolerance) {
        std::ostringstream os;
        os << "probability " << p << " > 1 at cell {" << to_string(assignment_at(idx)) << "}";
        problems.push_back(os.str());
      }
      mass += p;
    }
    if (std::abs(mass - 1.0) > kMassTolerance) {
      std::ostringstream os;
      os << "mass " << mass << " != 1 (tolerance " << kMassTolerance << ")";
      problems.push_back(os.str());
    }
    return problems;
  }

  double prob(const Assignment& full) const { return table_[flat_index(full_indices(full))]; }

  // Probability of a partial event (sum over matching cells).
  double mass(const Assignment& partial) const {
    const auto constraint = partial_indices(partial);
    double total = 0.0;
    for_each_cell([&](const std::vector<std::size_t>& idx, double p) {
      if (matches_(idx, constraint)) total += p;
    });
    return total;
  }

  // Sums out every variable not in `keep`; result variable order follows the
  // original declaration order.
  FiniteDistribution marginal(const std::vector<std::string>& keep) const {
    std::vector<char> kept(variables_.size(), 0);
    for (const auto& name : keep) {
      const std::size_t i = index_of_(name);
      if (i == VariableSpec::npos) {
        throw Error("unknown variable '" + name + "' in marginal");
      }
      kept[i] = 1;
    }
    std::vector<VariableSpec> out_vars;
    std::vector<std::size_t> out_pos;  // position in the original variable list
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (kept[i]) {
        out_vars.push_back(variables_[i]);
        out_pos.push_back(i);
      }
    }
    FiniteDistribution out(out_vars, std::vector<double>(product_size(out_vars), 0.0));
    for_each_cell([&](const std::vector<std::size_t>& idx, double p) {
      std::size_t flat = 0;
      for (std::size_t k = 0; k < out_pos.size(); ++k) {
        flat = flat * out_vars[k].arity() + idx[out_pos[k]];
      }
      out.table_[flat] += p;
    });
    return out;
  }

  // Renormalized distribution over the remaining variables given an event.
  // Conditioning on a zero-mass event is an error, never a silent zero.
  FiniteDistribution condition(const Assignment& given) const {
    const auto constraint = partial_indices(given);
    std::vector<VariableSpec> out_vars;
    std::vector<std::size_t> out_pos;
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (constraint[i] == VariableSpec::npos) {
        out_vars.push_back(variables_[i]);
        out_pos.push_back(i);
      }
    }
    FiniteDistribution out(out_vars, std::vector<double>(product_size(out_vars), 0.0));
    double mass = 0.0;
    for_each_cell([&](const std::vector<std::size_t>& idx, double p) {
      if (!matches_(idx, constraint)) return;
      mass += p;
      std::size_t flat = 0;
      for (std::size_t k = 0; k < out_pos.size(); ++k) {
        flat = flat * out_vars[k].arity() + idx[out_pos[k]];
      }
      out.table_[flat] += p;
    });
    if (mass <= 0.0) {
      throw ZeroProbabilityCondition("conditioning event {" + to_string(given) +
                                     "} has zero probability");
    }
    for (double& p : out.table_) p /= mass;
    return out;
  }

  // E[target | given] using the target's numeric level values.
  double expectation(const std::string& target, const Assignment& given = {}) const {
    const VariableSpec& t = variable(target);
    if (!t.has_numeric_values()) {
      throw NonNumericTarget("E[" + target + "|...] needs numeric level values on '" + target + "'");
    }
    if (given.count(target)) {
      throw Error("expectation target '" + target + "' also appears in the conditioning event");
    }
    const auto constraint = partial_indices(given);
    const std::size_t tpos = index_of_(target);
    double mass = 0.0;
    double acc = 0.0;
    for_each_cell([&](const std::vector<std::size_t>& idx, double p) {
      if (!matches_(idx, constraint)) return;
      mass += p;
      acc += p * t.numeric_value(idx[tpos]);
    });
    if (mass <= 0.0) {
      throw ZeroProbabilityCondition("E[" + target + " | " + to_string(given) +
                                     "] undefined: conditioning event has zero probability");
    }
    return acc / mass;
  }

  // Conditional probability of a single event given another, e.g. p(z|x).
  double conditional_prob(const Assignment& event, const Assignment& given) const {
    Assignment both = given;
    for (const auto& [k, v] : event) both[k] = v;
    const double denom = mass(given);
    if (denom <= 0.0) {
      throw ZeroProbabilityCondition("p(" + to_string(event) + " | " + to_string(given) +
                                     ") undefined: conditioning event has zero probability");
    }
    return mass(both) / denom;
  }

  // Returns a copy with one variable's numeric values replaced.
  FiniteDistribution with_values(const std::string& name, std::vector<double> values) const {
    std::vector<VariableSpec> vars = variables_;
    vars[index_of_checked_(name)].values = std::move(values);
    return FiniteDistribution(std::move(vars), table_);
  }

  template <typename Fn>
  void for_each_cell(Fn&& fn) const {
    std::vector<std::size_t> idx(variables_.size(), 0);
    for (std::size_t flat = 0; flat < table_.size(); ++flat) {
      fn(static_cast<const std::vector<std::size_t>&>(idx), table_[flat]);
      for (std::size_t k = variables_.size(); k-- > 0;) {
        if (++idx[k] < variables_[k].arity()) break;
        idx[k] = 0;
      }
    }
  }

  Assignment assignment_at(std::size_t flat) const {
    Assignment a;
    for (std::size_t k = variables_.size(); k-- > 0;) {
      const std::size_t card = variables_[k].arity();
      a[variables_[k].name] = variables_[k].levels[flat % card];
      flat /= card;
    }
    return a;
  }

  std::size_t flat_index(const std::vector<std::size_t>& idx) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < variables_.size(); ++k) {
      flat = flat * variables_[k].arity() + idx[k];
    }
    return flat;
  }

  // Level indices for a full assignment; every variable must be named.
  std::vector<std::size_t> full_indices(const Assignment& a) const {
    if (a.size() != variables_.size()) {
      throw Error("assignment {" + to_string(a) + "} does not cover all " +
                  std::to_string(variables_.size()) + " variables");
    }
    return partial_to_indices_(a, /*allow_missing=*/false);
  }

  // Level indices for a partial assignment; npos marks free variables.
  std::vector<std::size_t> partial_indices(const Assignment& a) const {
    return partial_to_indices_(a, /*allow_missing=*/true);
  }

 private:
  static std::size_t product_size(const std::vector<VariableSpec>& vars) {
    std::size_t n = 1;
    for (const auto& v : vars) n *= v.arity();
    return n;
  }

  std::size_t cell_count_() const { return product_size(variables_); }

  std::size_t index_of_(const std::string& name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (variables_[i].name == name) return i;
    }
    return VariableSpec::npos;
  }

  std::size_t index_of_checked_(const std::string& name) const {
    const std::size_t i = index_of_(name);
    if (i == VariableSpec::npos) throw Error("unknown variable '" + name + "'");
    return i;
  }

  std::vector<std::size_t> partial_to_indices_(const Assignment& a, bool allow_missing) const {
    std::vector<std::size_t> idx(variables_.size(), VariableSpec::npos);
    for (const auto& [name, label] : a) {
      const std::size_t i = index_of_checked_(name);
      idx[i] = variables_[i].require_level(label);
    }
    if (!allow_missing) {
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] == VariableSpec::npos) {
          throw Error("assignment misses variable '" + variables_[i].name + "'");
        }
      }
    }
    return idx;
  }

  static bool matches_(const std::vector<std::size_t>& idx, const std::vector<std::size_t>& constraint) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (constraint[i] != VariableSpec::npos && constraint[i] != idx[i]) return false;
    }
    return true;
  }

  std::vector<VariableSpec> variables_;
  std::vector<double> table_;
};

}  // namespace medfx
