#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "medfx/dist.hpp"
#include "medfx/effects.hpp"
#include "medfx/errors.hpp"

namespace medfx {

// Differences smaller than this count as zero when classifying a table as
// monotone; generated fixtures keep real trends orders of magnitude larger.
inline constexpr double kMonotoneTolerance = 1e-12;

// A measure that is linear in one unknown scalar parameter, together with
// the interval it sweeps as the parameter runs over [0,1].
struct AffineEffect {
  std::string measure;
  std::string parameter;
  double intercept = 0.0;
  double slope = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  double at(double q) const { return intercept + slope * q; }

  static AffineEffect make(std::string measure, std::string parameter, double intercept,
                           double slope) {
    AffineEffect a{std::move(measure), std::move(parameter), intercept, slope, 0.0, 0.0};
    a.lo = std::min(intercept, intercept + slope);
    a.hi = std::max(intercept, intercept + slope);
    return a;
  }
};

// Mediation inputs that survive when p(X) is unknown: the mediator law per
// exposure arm and the full outcome law per (exposure, mediator) stratum.
struct MediationConditionals {
  VariableSpec exposure;  // binary
  VariableSpec mediator;
  VariableSpec outcome;
  std::string exposure_level;  // x
  std::string exposure_ref;    // xbar
  std::vector<std::vector<double>> pz;               // [x'][z]
  std::vector<std::vector<std::vector<double>>> py;  // [x'][z][y]

  std::size_t xi() const { return exposure.require_level(exposure_level); }
  std::size_t ri() const { return exposure.require_level(exposure_ref); }

  double ey(std::size_t x_idx, std::size_t z_idx) const {
    double acc = 0.0;
    for (std::size_t y = 0; y < outcome.arity(); ++y) {
      acc += py[x_idx][z_idx][y] * outcome.numeric_value(y);
    }
    return acc;
  }

  std::vector<std::string> check() const {
    std::vector<std::string> problems;
    for (const auto& s : {exposure, mediator, outcome}) {
      auto vp = s.check();
      problems.insert(problems.end(), vp.begin(), vp.end());
    }
    if (!exposure.is_binary()) problems.push_back("exposure '" + exposure.name + "' is not binary");
    if (!outcome.has_numeric_values()) {
      problems.push_back("outcome '" + outcome.name + "' has no numeric level values");
    }
    if (exposure.level_index(exposure_level) == VariableSpec::npos ||
        exposure.level_index(exposure_ref) == VariableSpec::npos ||
        exposure_level == exposure_ref) {
      problems.push_back("exposure contrast levels must be two distinct domain levels");
    }
    const auto check_rows = [&](const auto& rows, const std::string& what, std::size_t inner) {
      if (rows.size() != exposure.arity()) {
        problems.push_back(what + " needs one row per exposure level");
        return false;
      }
      for (const auto& row : rows) {
        if (row.size() != inner) {
          problems.push_back(what + " row length mismatch");
          return false;
        }
      }
      return true;
    };
    if (check_rows(pz, "p(z|x')", mediator.arity())) {
      for (std::size_t x = 0; x < pz.size(); ++x) {
        double mass = 0.0;
        for (double p : pz[x]) {
          if (p < 0.0) problems.push_back("p(z|x') has a negative entry");
          mass += p;
        }
        if (std::abs(mass - 1.0) > kMassTolerance) {
          problems.push_back("p(z|" + exposure.levels[x] + ") does not sum to 1");
        }
      }
    }
    if (check_rows(py, "p(y|x',z)", mediator.arity())) {
      for (std::size_t x = 0; x < py.size(); ++x) {
        for (std::size_t z = 0; z < py[x].size(); ++z) {
          if (py[x][z].size() != outcome.arity()) {
            problems.push_back("p(y|x',z) row length mismatch");
            continue;
          }
          double mass = 0.0;
          for (double p : py[x][z]) {
            if (p < 0.0) problems.push_back("p(y|x',z) has a negative entry");
            mass += p;
          }
          if (std::abs(mass - 1.0) > kMassTolerance) {
            problems.push_back("p(y|" + exposure.levels[x] + "," + mediator.levels[z] +
                               ") does not sum to 1");
          }
        }
      }
    }
    return problems;
  }

  void require_valid() const {
    auto problems = check();
    if (!problems.empty()) throw ValidationError("invalid mediation conditionals", problems);
  }

  // Extracts the conditionals from a full joint, discarding p(X).
  static MediationConditionals from_distribution(const FiniteDistribution& dist,
                                                 const MeasureRequest& r) {
    const FiniteDistribution d = dist.marginal({r.exposure, r.mediator, r.outcome});
    MediationConditionals c;
    c.exposure = d.variable(r.exposure);
    c.mediator = d.variable(r.mediator);
    c.outcome = d.variable(r.outcome);
    c.exposure_level = r.exposure_level;
    c.exposure_ref = r.exposure_ref;
    c.pz.assign(c.exposure.arity(), std::vector<double>(c.mediator.arity(), 0.0));
    c.py.assign(c.exposure.arity(),
                std::vector<std::vector<double>>(c.mediator.arity(),
                                                 std::vector<double>(c.outcome.arity(), 0.0)));
    for (std::size_t x = 0; x < c.exposure.arity(); ++x) {
      const std::string& xl = c.exposure.levels[x];
      for (std::size_t z = 0; z < c.mediator.arity(); ++z) {
        const std::string& zl = c.mediator.levels[z];
        c.pz[x][z] = d.conditional_prob({{r.mediator, zl}}, {{r.exposure, xl}});
        for (std::size_t y = 0; y < c.outcome.arity(); ++y) {
          c.py[x][z][y] = d.conditional_prob({{r.outcome, c.outcome.levels[y]}},
                                             {{r.exposure, xl}, {r.mediator, zl}});
        }
      }
    }
    c.require_valid();
    return c;
  }

  // Rebuilds the full joint for a hypothesized p(X = exposure_level) = q.
  FiniteDistribution build_joint(double q) const {
    require_valid();
    if (q < 0.0 || q > 1.0) throw Error("p(x) must lie in [0,1]");
    std::vector<double> px(exposure.arity(), 0.0);
    px[xi()] = q;
    px[ri()] = 1.0 - q;
    std::vector<VariableSpec> vars = {exposure, mediator, outcome};
    std::vector<double> table;
    table.reserve(exposure.arity() * mediator.arity() * outcome.arity());
    for (std::size_t x = 0; x < exposure.arity(); ++x) {
      for (std::size_t z = 0; z < mediator.arity(); ++z) {
        for (std::size_t y = 0; y < outcome.arity(); ++y) {
          table.push_back(px[x] * pz[x][z] * py[x][z][y]);
        }
      }
    }
    return FiniteDistribution(vars, std::move(table));
  }
};

// Both measures are linear in p(x): the mediator marginal and the mixed
// outcome term are affine in it, and each formula is linear in those.
inline AffineEffect affine_in_px(const MediationConditionals& c, const std::string& measure) {
  c.require_valid();
  const std::size_t xi = c.xi();
  const std::size_t ri = c.ri();
  double slope = 0.0;
  double de_intercept = 0.0;
  double ie_intercept = 0.0;
  for (std::size_t z = 0; z < c.mediator.arity(); ++z) {
    const double shift = c.pz[xi][z] - c.pz[ri][z];
    const double contrast = c.ey(xi, z) - c.ey(ri, z);
    slope += contrast * shift;
    de_intercept += contrast * c.pz[ri][z];
    ie_intercept += shift * c.ey(ri, z);
  }
  const std::string parameter =
      "p(" + c.exposure.name + "=" + c.exposure_level + ")";
  if (measure == "DE") return AffineEffect::make("DE", parameter, de_intercept, slope);
  if (measure == "IE") return AffineEffect::make("IE", parameter, ie_intercept, slope);
  throw Error("affine form is available for measures DE and IE, not '" + measure + "'");
}

// Range of the relative reduction 1 - measure/te as the unknown parameter
// sweeps [0,1].
inline std::pair<double, double> reduction_interval(const AffineEffect& affine, double te) {
  if (te == 0.0) throw ZeroTotalEffect("relative reduction is undefined when the total effect is 0");
  const double a = 1.0 - affine.at(0.0) / te;
  const double b = 1.0 - affine.at(1.0) / te;
  return {std::min(a, b), std::max(a, b)};
}

// --- Monotonicity screening ---------------------------------------------------

enum class MonotoneDirection { Nondecreasing, Nonincreasing, Constant, Neither };

inline const char* to_string(MonotoneDirection d) {
  switch (d) {
    case MonotoneDirection::Nondecreasing: return "nondecreasing";
    case MonotoneDirection::Nonincreasing: return "nonincreasing";
    case MonotoneDirection::Constant: return "constant";
    case MonotoneDirection::Neither: return "neither";
  }
  return "?";
}

struct StratumEvidence {
  Assignment stratum;
  std::vector<double> means;        // E[target | stratum, w] per ordered proxy level
  std::vector<double> differences;  // consecutive steps across the proxy
};

struct MonotoneVerdict {
  MonotoneDirection direction = MonotoneDirection::Constant;
  std::string target;
  std::string proxy;
  std::vector<StratumEvidence> evidence;
};

// Classifies E[target | stratum, w] as the proxy w runs through its ordered
// levels, jointly across every stratum of the given variables.
inline MonotoneVerdict monotone_direction(const FiniteDistribution& dist, const std::string& target,
                                          const std::vector<std::string>& strata,
                                          const std::string& proxy) {
  std::vector<std::string> keep = strata;
  keep.push_back(proxy);
  keep.push_back(target);
  const FiniteDistribution d = dist.marginal(keep);
  const VariableSpec& w = d.variable(proxy);
  if (!d.variable(target).has_numeric_values()) {
    throw NonNumericTarget("monotonicity target '" + target + "' has no numeric level values");
  }

  MonotoneVerdict out;
  out.target = target;
  out.proxy = proxy;
  bool up = false;
  bool down = false;

  std::vector<const VariableSpec*> svars;
  for (const auto& s : strata) svars.push_back(&d.variable(s));
  std::vector<std::size_t> idx(strata.size(), 0);
  while (true) {
    StratumEvidence ev;
    for (std::size_t i = 0; i < strata.size(); ++i) {
      ev.stratum[strata[i]] = svars[i]->levels[idx[i]];
    }
    for (const auto& wl : w.levels) {
      Assignment given = ev.stratum;
      given[proxy] = wl;
      ev.means.push_back(d.expectation(target, given));
    }
    for (std::size_t i = 0; i + 1 < ev.means.size(); ++i) {
      const double diff = ev.means[i + 1] - ev.means[i];
      ev.differences.push_back(diff);
      if (diff > kMonotoneTolerance) up = true;
      if (diff < -kMonotoneTolerance) down = true;
    }
    out.evidence.push_back(std::move(ev));

    std::size_t k = strata.size();
    while (k-- > 0) {
      if (++idx[k] < svars[k]->arity()) break;
      idx[k] = 0;
    }
    if (strata.empty() || k == static_cast<std::size_t>(-1)) break;
  }

  if (up && down) {
    out.direction = MonotoneDirection::Neither;
  } else if (up) {
    out.direction = MonotoneDirection::Nondecreasing;
  } else if (down) {
    out.direction = MonotoneDirection::Nonincreasing;
  } else {
    out.direction = MonotoneDirection::Constant;
  }
  return out;
}

// --- Indicator bounds ----------------------------------------------------------

enum class BoundRelation { GreaterEqual, LessEqual, Indeterminate };

inline const char* to_string(BoundRelation r) {
  switch (r) {
    case BoundRelation::GreaterEqual: return ">=";
    case BoundRelation::LessEqual: return "<=";
    case BoundRelation::Indeterminate: return "indeterminate";
  }
  return "?";
}

struct BoundResult {
  std::string target;
  double bound_value = 0.0;
  BoundRelation relation = BoundRelation::Indeterminate;
  std::optional<int> indicator_opposite;  // 1 when the two trends run in opposite directions
  std::optional<int> indicator_nonneg;    // 1 when the experimental factor is >= 0
  std::vector<std::pair<std::string, MonotoneVerdict>> diagnostics;
  std::vector<std::string> notes;
};

struct ProxyQuery {
  std::string exposure;
  std::string exposure_level;  // x
  std::string exposure_ref;    // xbar
  std::string mediator;
  std::string outcome;
  std::string proxy;
};

struct LongtermQuery {
  std::string mediator;
  std::string outcome;
  std::string proxy;
  std::optional<std::string> mediator_level;  // z
  std::optional<std::string> mediator_ref;    // zbar
};

// Partially adjusted exposure contrast inside one mediator stratum: the
// proxy is adjusted for in place of the unobserved confounder.
inline double te_obs_conditional(const FiniteDistribution& dist, const ProxyQuery& q,
                                 const std::string& z) {
  const FiniteDistribution d = dist.marginal({q.exposure, q.proxy, q.mediator, q.outcome});
  d.variable(q.mediator).require_level(z);
  double acc = 0.0;
  for (const auto& wl : d.variable(q.proxy).levels) {
    const double pw_z = d.conditional_prob({{q.proxy, wl}}, {{q.mediator, z}});
    acc += pw_z * (d.expectation(q.outcome, {{q.exposure, q.exposure_level},
                                             {q.mediator, z},
                                             {q.proxy, wl}}) -
                   d.expectation(q.outcome, {{q.exposure, q.exposure_ref},
                                             {q.mediator, z},
                                             {q.proxy, wl}}));
  }
  return acc;
}

namespace detail {

// The opposite-trend indicator is defined only when both verdicts are
// strictly monotone; constant trends carry no sign and non-monotone ones
// violate the antecedent.
inline std::optional<int> opposite_indicator(const MonotoneVerdict& a, const MonotoneVerdict& b,
                                             std::vector<std::string>& notes) {
  const auto strict = [](MonotoneDirection d) {
    return d == MonotoneDirection::Nondecreasing || d == MonotoneDirection::Nonincreasing;
  };
  if (strict(a.direction) && strict(b.direction)) {
    return a.direction == b.direction ? 0 : 1;
  }
  for (const auto* v : {&a, &b}) {
    if (v->direction == MonotoneDirection::Constant) {
      notes.push_back("E[" + v->target + "|...," + v->proxy + "] is constant in " + v->proxy +
                      "; a flat trend carries no direction, so the bound is indeterminate");
    } else if (v->direction == MonotoneDirection::Neither) {
      notes.push_back("E[" + v->target + "|...," + v->proxy + "] is not monotone in " + v->proxy +
                      "; the bound's antecedent fails");
    }
  }
  return std::nullopt;
}

}  // namespace detail

// One-sided bound on the adjusted direct effect when the confounder is only
// seen through a proxy: the partially adjusted contrast bounds the fully
// adjusted one, with the side set by whether the outcome and exposure trends
// in the proxy run in opposite directions.
inline BoundResult proxy_de_bound(const FiniteDistribution& dist, const ProxyQuery& q,
                                  bool allow_wide_proxy = false) {
  const FiniteDistribution d = dist.marginal({q.exposure, q.proxy, q.mediator, q.outcome});
  BoundResult out;
  out.target = "DE";

  const VariableSpec& w = d.variable(q.proxy);
  if (!w.is_binary()) {
    if (!allow_wide_proxy) {
      throw NonBinaryProxy("proxy '" + q.proxy + "' has " + std::to_string(w.arity()) +
                           " levels; the bound is stated for a binary proxy");
    }
    out.notes.push_back("WARNING: proxy '" + q.proxy + "' has " + std::to_string(w.arity()) +
                        " levels; the supporting argument covers a binary proxy, treat this "
                        "bound as heuristic");
  }
  const VariableSpec& xs = d.variable(q.exposure);
  if (!xs.is_binary()) {
    throw Error("exposure '" + q.exposure + "' must be binary");
  }
  xs.require_level(q.exposure_level);
  xs.require_level(q.exposure_ref);

  const MonotoneVerdict vy = monotone_direction(d, q.outcome, {q.exposure, q.mediator}, q.proxy);
  const MonotoneVerdict vx = monotone_direction(d, q.exposure, {q.mediator}, q.proxy);
  out.diagnostics.emplace_back("outcome trend across the proxy within (exposure, mediator) strata",
                               vy);
  out.diagnostics.emplace_back("exposure trend across the proxy within mediator strata", vx);
  out.indicator_opposite = detail::opposite_indicator(vy, vx, out.notes);

  double value = 0.0;
  for (const auto& zl : d.variable(q.mediator).levels) {
    value += te_obs_conditional(d, q, zl) * d.mass({{q.mediator, zl}});
  }
  out.bound_value = value;
  out.notes.push_back("assumes the unobserved confounder behind the proxy is binary "
                      "(not testable from the observed joint)");

  if (!out.indicator_opposite) {
    out.relation = BoundRelation::Indeterminate;
  } else {
    out.relation = *out.indicator_opposite == 1 ? BoundRelation::GreaterEqual
                                                : BoundRelation::LessEqual;
  }
  return out;
}

// Partially adjusted mediator -> outcome contrast, adjusting for the proxy.
inline double te_obs_zy(const FiniteDistribution& dist, const LongtermQuery& q) {
  const FiniteDistribution d = dist.marginal({q.proxy, q.mediator, q.outcome});
  const VariableSpec& zs = d.variable(q.mediator);
  const std::string z_hi = q.mediator_level.value_or(zs.levels.size() > 1 ? zs.levels[1]
                                                                          : zs.levels[0]);
  const std::string z_lo = q.mediator_ref.value_or(zs.levels[0]);
  zs.require_level(z_hi);
  zs.require_level(z_lo);
  double acc = 0.0;
  for (const auto& wl : d.variable(q.proxy).levels) {
    const double pw = d.mass({{q.proxy, wl}});
    if (pw <= 0.0) {
      throw ZeroProbabilityCondition("stratum " + to_string(Assignment{{q.proxy, wl}}) +
                                     " has zero probability");
    }
    acc += pw * (d.expectation(q.outcome, {{q.mediator, z_hi}, {q.proxy, wl}}) -
                 d.expectation(q.outcome, {{q.mediator, z_lo}, {q.proxy, wl}}));
  }
  return acc;
}

// Long-horizon indirect effect bounded by an experimental short-term factor
// times the partially adjusted mediator -> outcome contrast. The side is the
// product of the opposite-trend indicator and the sign of the experimental
// factor.
inline BoundResult longterm_ie_bound(double te_xz, const FiniteDistribution& dist,
                                     const LongtermQuery& q) {
  const FiniteDistribution d = dist.marginal({q.proxy, q.mediator, q.outcome});
  BoundResult out;
  out.target = "IE";

  const VariableSpec& zs = d.variable(q.mediator);
  if (!zs.is_binary()) {
    throw NonBinaryMediator("mediator '" + q.mediator + "' must be binary for the factorized "
                            "bound, has " + std::to_string(zs.arity()) + " levels");
  }

  const MonotoneVerdict vy = monotone_direction(d, q.outcome, {q.mediator}, q.proxy);
  const MonotoneVerdict vz = monotone_direction(d, q.mediator, {}, q.proxy);
  out.diagnostics.emplace_back("outcome trend across the proxy within mediator strata", vy);
  out.diagnostics.emplace_back("mediator trend across the proxy", vz);
  out.indicator_opposite = detail::opposite_indicator(vy, vz, out.notes);
  out.indicator_nonneg = te_xz >= 0.0 ? 1 : 0;
  out.bound_value = te_xz * te_obs_zy(d, q);

  if (te_xz == 0.0) {
    out.notes.push_back("the experimental factor is exactly 0, so with a binary mediator the "
                        "indirect effect factorizes to exactly 0");
  }

  if (!out.indicator_opposite) {
    out.relation = BoundRelation::Indeterminate;
  } else {
    const int s = (2 * *out.indicator_opposite - 1) * (2 * *out.indicator_nonneg - 1);
    out.relation = s == 1 ? BoundRelation::GreaterEqual : BoundRelation::LessEqual;
  }
  return out;
}

}  // namespace medfx
