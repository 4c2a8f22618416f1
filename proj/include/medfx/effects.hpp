#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "medfx/dist.hpp"
#include "medfx/errors.hpp"

namespace medfx {

// Names the exposure contrast (level vs reference) and the mediation triple
// a measure is computed over. Mediator level designation is optional; by
// default the second domain level plays "present" and the first "absent".
struct MeasureRequest {
  std::string measure;
  std::string exposure;
  std::string exposure_level;  // x
  std::string exposure_ref;    // xbar
  std::string mediator;
  std::string outcome;
  std::optional<std::string> mediator_level;
  std::optional<std::string> mediator_ref;
  std::optional<std::string> controlled_level;  // z' for CDE
};

struct EffectReport {
  std::string measure;
  double value = 0.0;
  std::string formula;
  std::string assumptions;
};

// te_xz and te_zy are the two experiment-level factors of the indirect
// effect of a binary mediator; product is their composition.
struct FactoredIE {
  double te_xz = 0.0;
  double te_zy = 0.0;
  double product = 0.0;
};

namespace detail {

struct Frame {
  FiniteDistribution joint;
  std::string X, Y, Z;
  std::string x, xbar;
  std::string z_hi, z_lo;  // designated mediator contrast (binary Z helpers)
};

inline void require_positive(const FiniteDistribution& d, const Assignment& event) {
  if (d.mass(event) <= 0.0) {
    throw ZeroProbabilityCondition("stratum " + to_string(event) + " has zero probability");
  }
}

inline Frame make_frame(const FiniteDistribution& dist, const MeasureRequest& r) {
  if (r.exposure.empty() || r.outcome.empty()) {
    throw Error("measure request must name an exposure and an outcome");
  }
  std::vector<std::string> keep = {r.exposure, r.outcome};
  if (!r.mediator.empty()) keep.insert(keep.begin() + 1, r.mediator);
  Frame f{dist.marginal(keep), r.exposure, r.outcome, r.mediator, r.exposure_level,
          r.exposure_ref, "", ""};

  const VariableSpec& xs = f.joint.variable(f.X);
  if (!xs.is_binary()) {
    throw Error("exposure '" + f.X + "' must be binary, has " + std::to_string(xs.arity()) +
                " levels");
  }
  xs.require_level(f.x);
  xs.require_level(f.xbar);
  if (f.x == f.xbar) throw Error("exposure contrast levels must differ");

  const VariableSpec& ys = f.joint.variable(f.Y);
  if (!ys.has_numeric_values()) {
    throw NonNumericTarget("outcome '" + f.Y + "' has no numeric level values");
  }

  if (!f.Z.empty()) {
    const VariableSpec& zs = f.joint.variable(f.Z);
    f.z_hi = r.mediator_level.value_or(zs.levels.size() > 1 ? zs.levels[1] : zs.levels[0]);
    f.z_lo = r.mediator_ref.value_or(zs.levels[0]);
    zs.require_level(f.z_hi);
    zs.require_level(f.z_lo);
  }

  require_positive(f.joint, {{f.X, f.x}});
  require_positive(f.joint, {{f.X, f.xbar}});
  return f;
}

inline const std::vector<std::string>& mediator_levels(const Frame& f) {
  return f.joint.variable(f.Z).levels;
}

inline EffectReport report(std::string measure, double value, std::string formula,
                           std::string assumptions) {
  if (!std::isfinite(value)) throw Error("measure " + measure + " is not finite");
  return EffectReport{std::move(measure), value, std::move(formula), std::move(assumptions)};
}

}  // namespace detail

// E[Y|x] - E[Y|xbar]: the total effect when every association between the
// exposure and the outcome is causal.
inline EffectReport te(const FiniteDistribution& dist, const MeasureRequest& r) {
  auto f = detail::make_frame(dist, r);
  const double v = f.joint.expectation(f.Y, {{f.X, f.x}}) - f.joint.expectation(f.Y, {{f.X, f.xbar}});
  return detail::report(
      "TE", v, "E[" + f.Y + "|" + f.x + "] - E[" + f.Y + "|" + f.xbar + "]",
      "every path from " + f.X + " to " + f.Y + " is causal (no unmeasured confounding)");
}

// Direct effect by adjusting for the intermediate variable: sums the
// within-stratum exposure contrast weighted by the marginal p(z).
inline EffectReport de(const FiniteDistribution& dist, const MeasureRequest& r) {
  auto f = detail::make_frame(dist, r);
  double v = 0.0;
  for (const auto& z : detail::mediator_levels(f)) {
    const double d = f.joint.expectation(f.Y, {{f.X, f.x}, {f.Z, z}}) -
                     f.joint.expectation(f.Y, {{f.X, f.xbar}, {f.Z, z}});
    v += d * f.joint.mass({{f.Z, z}});
  }
  return detail::report(
      "DE", v,
      "sum_z (E[" + f.Y + "|" + f.x + ",z] - E[" + f.Y + "|" + f.xbar + ",z]) p(z)",
      "adjusts for " + f.Z + "; matches the total effect when " + f.Z + " causes " + f.X +
          " instead of mediating it");
}

// Indirect effect through the intermediate variable, identified by the
// front-door formula (intervention distributions rebuilt from conditionals).
inline EffectReport ie(const FiniteDistribution& dist, const MeasureRequest& r) {
  auto f = detail::make_frame(dist, r);
  const double px = f.joint.mass({{f.X, f.x}});
  const double pxbar = f.joint.mass({{f.X, f.xbar}});
  double v = 0.0;
  for (const auto& z : detail::mediator_levels(f)) {
    const double shift = f.joint.conditional_prob({{f.Z, z}}, {{f.X, f.x}}) -
                         f.joint.conditional_prob({{f.Z, z}}, {{f.X, f.xbar}});
    const double mixed = f.joint.expectation(f.Y, {{f.X, f.x}, {f.Z, z}}) * px +
                         f.joint.expectation(f.Y, {{f.X, f.xbar}, {f.Z, z}}) * pxbar;
    v += shift * mixed;
  }
  return detail::report(
      "IE", v,
      "sum_z (p(z|" + f.x + ") - p(z|" + f.xbar + ")) sum_x' E[" + f.Y + "|x',z] p(x')",
      "front-door identification: " + f.Z + " intercepts the indirect channel and is itself "
      "unconfounded given " + f.X);
}

inline EffectReport nde(const FiniteDistribution& dist, const MeasureRequest& r) {
  auto f = detail::make_frame(dist, r);
  double v = 0.0;
  for (const auto& z : detail::mediator_levels(f)) {
    const double d = f.joint.expectation(f.Y, {{f.X, f.x}, {f.Z, z}}) -
                     f.joint.expectation(f.Y, {{f.X, f.xbar}, {f.Z, z}});
    v += d * f.joint.conditional_prob({{f.Z, z}}, {{f.X, f.xbar}});
  }
  return detail::report(
      "NDE", v,
      "sum_z (E[" + f.Y + "|" + f.x + ",z] - E[" + f.Y + "|" + f.xbar + ",z]) p(z|" + f.xbar + ")",
      "natural direct effect under no unmeasured exposure-mediator or mediator-outcome "
      "confounding");
}

inline EffectReport nie(const FiniteDistribution& dist, const MeasureRequest& r) {
  auto f = detail::make_frame(dist, r);
  double v = 0.0;
  for (const auto& z : detail::mediator_levels(f)) {
    const double shift = f.joint.conditional_prob({{f.Z, z}}, {{f.X, f.x}}) -
                         f.joint.conditional_prob({{f.Z, z}}, {{f.X, f.xbar}});
    v += f.joint.expectation(f.Y, {{f.X, f.xbar}, {f.Z, z}}) * shift;
  }
  return detail::report(
      "NIE", v,
      "sum_z E[" + f.Y + "|" + f.xbar + ",z] (p(z|" + f.x + ") - p(z|" + f.xbar + "))",
      "natural indirect effect under no unmeasured exposure-mediator or mediator-outcome "
      "confounding");
}

inline EffectReport tde(const FiniteDistribution& dist, const MeasureRequest& r) {
  auto f = detail::make_frame(dist, r);
  double v = 0.0;
  for (const auto& z : detail::mediator_levels(f)) {
    const double d = f.joint.expectation(f.Y, {{f.X, f.x}, {f.Z, z}}) -
                     f.joint.expectation(f.Y, {{f.X, f.xbar}, {f.Z, z}});
    v += d * f.joint.conditional_prob({{f.Z, z}}, {{f.X, f.x}});
  }
  return detail::report(
      "TDE", v,
      "sum_z (E[" + f.Y + "|" + f.x + ",z] - E[" + f.Y + "|" + f.xbar + ",z]) p(z|" + f.x + ")",
      "total direct effect under no unmeasured exposure-mediator or mediator-outcome "
      "confounding");
}

inline EffectReport tie(const FiniteDistribution& dist, const MeasureRequest& r) {
  auto f = detail::make_frame(dist, r);
  double v = 0.0;
  for (const auto& z : detail::mediator_levels(f)) {
    const double shift = f.joint.conditional_prob({{f.Z, z}}, {{f.X, f.x}}) -
                         f.joint.conditional_prob({{f.Z, z}}, {{f.X, f.xbar}});
    v += f.joint.expectation(f.Y, {{f.X, f.x}, {f.Z, z}}) * shift;
  }
  return detail::report(
      "TIE", v,
      "sum_z E[" + f.Y + "|" + f.x + ",z] (p(z|" + f.x + ") - p(z|" + f.xbar + "))",
      "total indirect effect under no unmeasured exposure-mediator or mediator-outcome "
      "confounding");
}

// Exposure contrast with the intermediate variable held at one fixed level.
inline EffectReport cde(const FiniteDistribution& dist, const MeasureRequest& r) {
  if (!r.controlled_level) throw Error("CDE needs a controlled mediator level");
  auto f = detail::make_frame(dist, r);
  const std::string& zc = *r.controlled_level;
  f.joint.variable(f.Z).require_level(zc);
  const double v = f.joint.expectation(f.Y, {{f.X, f.x}, {f.Z, zc}}) -
                   f.joint.expectation(f.Y, {{f.X, f.xbar}, {f.Z, zc}});
  return detail::report(
      "CDE", v,
      "E[" + f.Y + "|" + f.x + "," + f.Z + "=" + zc + "] - E[" + f.Y + "|" + f.xbar + "," +
          f.Z + "=" + zc + "]",
      "controlled direct effect with " + f.Z + " held at '" + zc + "'");
}

// Population intervention indirect effect: the natural outcome mean against
// the world where only the mediator is switched to its no-exposure law while
// the exposure keeps its natural value.
inline EffectReport piie(const FiniteDistribution& dist, const MeasureRequest& r) {
  auto f = detail::make_frame(dist, r);
  double counter = 0.0;
  for (const auto& xl : f.joint.variable(f.X).levels) {
    const double px = f.joint.mass({{f.X, xl}});
    if (px <= 0.0) continue;
    double inner = 0.0;
    for (const auto& z : detail::mediator_levels(f)) {
      inner += f.joint.expectation(f.Y, {{f.X, xl}, {f.Z, z}}) *
               f.joint.conditional_prob({{f.Z, z}}, {{f.X, f.xbar}});
    }
    counter += px * inner;
  }
  const double v = f.joint.expectation(f.Y) - counter;
  return detail::report(
      "PIIE", v,
      "E[" + f.Y + "] - sum_x' p(x') sum_z E[" + f.Y + "|x',z] p(z|" + f.xbar + ")",
      "exposure keeps its natural value; only the mediator is moved to its reference law");
}

// Factorizes the indirect effect of a binary mediator into the exposure ->
// mediator contrast times the mediator -> outcome contrast.
inline FactoredIE ie_factored(const FiniteDistribution& dist, const MeasureRequest& r) {
  auto f = detail::make_frame(dist, r);
  const VariableSpec& zs = f.joint.variable(f.Z);
  if (!zs.is_binary()) {
    throw NonBinaryMediator("mediator '" + f.Z + "' must be binary for the factorization, has " +
                            std::to_string(zs.arity()) + " levels");
  }
  FactoredIE out;
  out.te_xz = f.joint.conditional_prob({{f.Z, f.z_hi}}, {{f.X, f.x}}) -
              f.joint.conditional_prob({{f.Z, f.z_hi}}, {{f.X, f.xbar}});
  for (const auto& xl : f.joint.variable(f.X).levels) {
    out.te_zy += (f.joint.expectation(f.Y, {{f.X, xl}, {f.Z, f.z_hi}}) -
                  f.joint.expectation(f.Y, {{f.X, xl}, {f.Z, f.z_lo}})) *
                 f.joint.mass({{f.X, xl}});
  }
  out.product = out.te_xz * out.te_zy;
  return out;
}

// Dispatch by measure id; ids are the uppercase initialisms used throughout.
inline EffectReport evaluate(const FiniteDistribution& dist, const MeasureRequest& r) {
  const std::string& m = r.measure;
  if (m == "TE") return te(dist, r);
  if (m == "DE") return de(dist, r);
  if (m == "IE") return ie(dist, r);
  if (m == "NDE") return nde(dist, r);
  if (m == "NIE") return nie(dist, r);
  if (m == "TDE") return tde(dist, r);
  if (m == "TIE") return tie(dist, r);
  if (m == "CDE") return cde(dist, r);
  if (m == "PIIE") return piie(dist, r);
  throw Error("unknown measure id '" + m + "'");
}

}  // namespace medfx
