#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "medfx/bounds.hpp"
#include "medfx/errors.hpp"
#include "medfx/scm.hpp"

namespace medfx {

enum class GraphFamily { Mediation, ConfoundedFrontdoor, Reversed, Proxy, Longterm };

inline const char* to_string(GraphFamily f) {
  switch (f) {
    case GraphFamily::Mediation: return "MEDIATION";
    case GraphFamily::ConfoundedFrontdoor: return "CONFOUNDED_FRONTDOOR";
    case GraphFamily::Reversed: return "REVERSED";
    case GraphFamily::Proxy: return "PROXY";
    case GraphFamily::Longterm: return "LONGTERM";
  }
  return "?";
}

inline std::optional<GraphFamily> family_from_string(const std::string& s) {
  if (s == "MEDIATION") return GraphFamily::Mediation;
  if (s == "CONFOUNDED_FRONTDOOR") return GraphFamily::ConfoundedFrontdoor;
  if (s == "REVERSED") return GraphFamily::Reversed;
  if (s == "PROXY") return GraphFamily::Proxy;
  if (s == "LONGTERM") return GraphFamily::Longterm;
  return std::nullopt;
}

// Requested relation between the two observable trends a bound screens:
// Opposite makes them run in different directions, Same in the same one.
enum class MonotoneRelation { Opposite, Same };

struct FamilyOptions {
  std::optional<MonotoneRelation> monotone;
  bool longterm_direct_edge = false;  // adds X -> Y to the LONGTERM graph
  std::size_t noise_levels = 10;
  std::size_t max_rejections = 10000;
};

namespace detail {

inline VariableSpec binary_spec(std::string name) {
  return VariableSpec{std::move(name), {"0", "1"}, std::nullopt};
}

inline ExogenousVariable uniform_noise(std::string name, std::size_t k) {
  std::vector<std::string> labels;
  labels.reserve(k);
  for (std::size_t i = 0; i < k; ++i) labels.push_back(std::to_string(i));
  return ExogenousVariable{VariableSpec{std::move(name), std::move(labels), std::nullopt},
                           std::vector<double>(k, 1.0 / static_cast<double>(k))};
}

inline ExogenousVariable binary_latent(std::string name, double p1) {
  return ExogenousVariable{binary_spec(std::move(name)), {1.0 - p1, p1}};
}

// Threshold in 1..9 so every conditional probability sits strictly inside
// (0,1) on a 10-level noise grid (positivity everywhere).
inline std::size_t draw_level9(std::mt19937_64& rng) { return 1 + rng() % 9; }

inline std::vector<std::size_t> draw_distinct9(std::mt19937_64& rng, std::size_t n) {
  std::size_t pool[9] = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng() % (9 - i);
    std::swap(pool[i], pool[j]);
    out[i] = pool[i];
  }
  return out;
}

// Larger threshold = higher success probability; orders a distinct pair so
// the coordinate trends up when sign > 0, down otherwise.
inline std::pair<std::size_t, std::size_t> signed_pair(std::mt19937_64& rng, int sign) {
  auto d = draw_distinct9(rng, 2);
  const std::size_t lo = std::min(d[0], d[1]);
  const std::size_t hi = std::max(d[0], d[1]);
  return sign > 0 ? std::make_pair(lo, hi) : std::make_pair(hi, lo);
}

// Builds the mechanism table of a binary variable whose structural parents
// are listed first and whose final parent is a uniform noise variable: the
// output is 1 exactly when the noise level falls below the per-combination
// threshold.
inline EndogenousVariable threshold_node(std::string name, std::vector<std::string> parents,
                                         std::string noise, const std::vector<std::size_t>& thresholds,
                                         std::size_t noise_levels) {
  parents.push_back(std::move(noise));
  std::vector<std::size_t> outputs;
  outputs.reserve(thresholds.size() * noise_levels);
  for (const std::size_t th : thresholds) {
    for (std::size_t u = 0; u < noise_levels; ++u) outputs.push_back(u < th ? 1 : 0);
  }
  return EndogenousVariable{binary_spec(std::move(name)), std::move(parents), std::move(outputs)};
}

struct ConstrainedDraw {
  StructuralModel model;
  MonotoneDirection expect_a;  // outcome-side trend
  MonotoneDirection expect_b;  // exposure- or mediator-side trend
};

inline MonotoneDirection dir_of(int sign) {
  return sign > 0 ? MonotoneDirection::Nondecreasing : MonotoneDirection::Nonincreasing;
}

inline StructuralModel build_mediation(std::mt19937_64& rng, std::size_t k) {
  const std::size_t kx = draw_level9(rng);
  const std::vector<std::size_t> kz = {draw_level9(rng), draw_level9(rng)};
  const std::vector<std::size_t> ky = {draw_level9(rng), draw_level9(rng), draw_level9(rng),
                                       draw_level9(rng)};
  return StructuralModel(
      {uniform_noise("Ux", k), uniform_noise("Uz", k), uniform_noise("Uy", k)},
      {threshold_node("X", {}, "Ux", {kx}, k), threshold_node("Z", {"X"}, "Uz", kz, k),
       threshold_node("Y", {"X", "Z"}, "Uy", ky, k)});
}

inline StructuralModel build_confounded_frontdoor(std::mt19937_64& rng, std::size_t k) {
  const double pv = draw_level9(rng) / 10.0;
  const std::vector<std::size_t> kx = {draw_level9(rng), draw_level9(rng)};
  const std::vector<std::size_t> kz = {draw_level9(rng), draw_level9(rng)};
  const std::vector<std::size_t> ky = {draw_level9(rng), draw_level9(rng), draw_level9(rng),
                                       draw_level9(rng)};
  return StructuralModel(
      {binary_latent("V", pv), uniform_noise("Ux", k), uniform_noise("Uz", k),
       uniform_noise("Uy", k)},
      {threshold_node("X", {"V"}, "Ux", kx, k), threshold_node("Z", {"X"}, "Uz", kz, k),
       threshold_node("Y", {"V", "Z"}, "Uy", ky, k)});
}

inline StructuralModel build_reversed(std::mt19937_64& rng, std::size_t k) {
  const bool shared_latent = (rng() % 2) == 1;
  const std::vector<std::size_t> ky = {draw_level9(rng), draw_level9(rng), draw_level9(rng),
                                       draw_level9(rng)};
  if (shared_latent) {
    const double ps = draw_level9(rng) / 10.0;
    const std::vector<std::size_t> kz = {draw_level9(rng), draw_level9(rng)};
    const std::vector<std::size_t> kx = {draw_level9(rng), draw_level9(rng)};
    return StructuralModel(
        {binary_latent("S", ps), uniform_noise("Uz", k), uniform_noise("Ux", k),
         uniform_noise("Uy", k)},
        {threshold_node("Z", {"S"}, "Uz", kz, k), threshold_node("X", {"S"}, "Ux", kx, k),
         threshold_node("Y", {"Z", "X"}, "Uy", ky, k)});
  }
  const std::size_t kz = draw_level9(rng);
  const std::vector<std::size_t> kx = {draw_level9(rng), draw_level9(rng)};
  return StructuralModel(
      {uniform_noise("Uz", k), uniform_noise("Ux", k), uniform_noise("Uy", k)},
      {threshold_node("Z", {}, "Uz", {kz}, k), threshold_node("X", {"Z"}, "Ux", kx, k),
       threshold_node("Y", {"Z", "X"}, "Uy", ky, k)});
}

inline StructuralModel build_proxy(std::mt19937_64& rng, std::size_t k, std::optional<int> sy,
                                   std::optional<int> sx) {
  const double pv = draw_level9(rng) / 10.0;
  std::vector<std::size_t> kx(2), kw(2), ky(8);
  if (sx) {
    std::tie(kx[0], kx[1]) = signed_pair(rng, *sx);
  } else {
    kx = {draw_level9(rng), draw_level9(rng)};
  }
  // The proxy reads the latent state in a fixed direction; the observable
  // trends then inherit the latent signs.
  std::tie(kw[0], kw[1]) = signed_pair(rng, +1);
  const std::vector<std::size_t> kz = {draw_level9(rng), draw_level9(rng)};
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t z = 0; z < 2; ++z) {
      std::size_t th0, th1;
      if (sy) {
        std::tie(th0, th1) = signed_pair(rng, *sy);
      } else {
        th0 = draw_level9(rng);
        th1 = draw_level9(rng);
      }
      ky[(0 * 2 + x) * 2 + z] = th0;
      ky[(1 * 2 + x) * 2 + z] = th1;
    }
  }
  return StructuralModel(
      {binary_latent("V", pv), uniform_noise("Ux", k), uniform_noise("Uz", k),
       uniform_noise("Uw", k), uniform_noise("Uy", k)},
      {threshold_node("X", {"V"}, "Ux", kx, k), threshold_node("Z", {"X"}, "Uz", kz, k),
       threshold_node("W", {"V"}, "Uw", kw, k),
       threshold_node("Y", {"V", "X", "Z"}, "Uy", ky, k)});
}

inline StructuralModel build_longterm(std::mt19937_64& rng, std::size_t k, bool direct_edge,
                                      std::optional<int> sy, std::optional<int> sx,
                                      std::optional<int> sz) {
  const double pv = draw_level9(rng) / 10.0;
  std::vector<std::size_t> kx(2), kz(2), kw(2);
  if (sx) {
    std::tie(kx[0], kx[1]) = signed_pair(rng, *sx);
  } else {
    kx = {draw_level9(rng), draw_level9(rng)};
  }
  if (sz) {
    std::tie(kz[0], kz[1]) = signed_pair(rng, *sz);
  } else {
    kz = {draw_level9(rng), draw_level9(rng)};
  }
  std::tie(kw[0], kw[1]) = signed_pair(rng, +1);

  std::vector<EndogenousVariable> endo = {threshold_node("X", {"V"}, "Ux", kx, k),
                                          threshold_node("Z", {"X"}, "Uz", kz, k),
                                          threshold_node("W", {"X"}, "Uw", kw, k)};
  if (!direct_edge) {
    std::vector<std::size_t> ky(4);
    for (std::size_t z = 0; z < 2; ++z) {
      std::size_t th0, th1;
      if (sy) {
        std::tie(th0, th1) = signed_pair(rng, *sy);
      } else {
        th0 = draw_level9(rng);
        th1 = draw_level9(rng);
      }
      ky[0 * 2 + z] = th0;
      ky[1 * 2 + z] = th1;
    }
    endo.push_back(threshold_node("Y", {"V", "Z"}, "Uy", ky, k));
  } else {
    std::vector<std::size_t> ky(8);
    for (std::size_t z = 0; z < 2; ++z) {
      if (sy && sx) {
        // Outcome rises with the latent state per sy and with the exposure
        // per sy*sx, so both channels push E[Y|z,w] the same way across w.
        auto q = draw_distinct9(rng, 4);
        std::sort(q.begin(), q.end());
        const int sdir = (*sy) * (*sx);
        for (std::size_t v = 0; v < 2; ++v) {
          for (std::size_t x = 0; x < 2; ++x) {
            const std::size_t ve = *sy > 0 ? v : 1 - v;
            const std::size_t xe = sdir > 0 ? x : 1 - x;
            ky[(v * 2 + x) * 2 + z] = q[ve * 2 + xe];
          }
        }
      } else {
        for (std::size_t v = 0; v < 2; ++v) {
          for (std::size_t x = 0; x < 2; ++x) ky[(v * 2 + x) * 2 + z] = draw_level9(rng);
        }
      }
    }
    endo.push_back(threshold_node("Y", {"V", "X", "Z"}, "Uy", ky, k));
  }
  return StructuralModel({binary_latent("V", pv), uniform_noise("Ux", k), uniform_noise("Uz", k),
                          uniform_noise("Uw", k), uniform_noise("Uy", k)},
                         std::move(endo));
}

}  // namespace detail

// Reproducible model drawn from one of the benchmark graph shapes. With a
// monotone relation requested (PROXY and LONGTERM only), candidates are
// redrawn until the observable trends screened by the corresponding bound
// are strictly monotone and related as asked; the check runs on the induced
// observational joint, not on the latent tables.
inline StructuralModel random_scm(GraphFamily family, std::uint64_t seed,
                                  const FamilyOptions& options = {}) {
  std::mt19937_64 rng(seed);
  const std::size_t k = options.noise_levels;
  if (k < 2) throw Error("noise_levels must be at least 2");

  if (!options.monotone) {
    switch (family) {
      case GraphFamily::Mediation: return detail::build_mediation(rng, k);
      case GraphFamily::ConfoundedFrontdoor: return detail::build_confounded_frontdoor(rng, k);
      case GraphFamily::Reversed: return detail::build_reversed(rng, k);
      case GraphFamily::Proxy: return detail::build_proxy(rng, k, std::nullopt, std::nullopt);
      case GraphFamily::Longterm:
        return detail::build_longterm(rng, k, options.longterm_direct_edge, std::nullopt,
                                      std::nullopt, std::nullopt);
    }
    throw Error("unknown graph family");
  }

  if (family != GraphFamily::Proxy && family != GraphFamily::Longterm) {
    throw Error("monotone constraints apply to the PROXY and LONGTERM families only");
  }

  for (std::size_t attempt = 0; attempt < options.max_rejections; ++attempt) {
    if (family == GraphFamily::Proxy) {
      const int sy = (rng() % 2) ? +1 : -1;
      const int sx = *options.monotone == MonotoneRelation::Opposite ? -sy : sy;
      StructuralModel m = detail::build_proxy(rng, k, sy, sx);
      const FiniteDistribution joint = m.observational_distribution();
      const MonotoneVerdict vy = monotone_direction(joint, "Y", {"X", "Z"}, "W");
      const MonotoneVerdict vx = monotone_direction(joint, "X", {"Z"}, "W");
      if (vy.direction == detail::dir_of(sy) && vx.direction == detail::dir_of(sx)) return m;
    } else {
      const int sy = (rng() % 2) ? +1 : -1;
      const int sx = (rng() % 2) ? +1 : -1;
      const int sa = sy * sx;  // observable outcome trend across the proxy
      const int sz = *options.monotone == MonotoneRelation::Opposite ? -sa : sa;
      StructuralModel m = detail::build_longterm(rng, k, options.longterm_direct_edge, sy, sx, sz);
      const FiniteDistribution joint = m.observational_distribution();
      const MonotoneVerdict vy = monotone_direction(joint, "Y", {"Z"}, "W");
      const MonotoneVerdict vz = monotone_direction(joint, "Z", {}, "W");
      if (vy.direction == detail::dir_of(sa) && vz.direction == detail::dir_of(sz)) return m;
    }
  }
  throw BudgetExceeded("monotone rejection budget of " + std::to_string(options.max_rejections) +
                       " draws exhausted for family " + to_string(family));
}

// Fixed benchmark model: a two-arm exposure with configurable prevalence, a
// mediator recovering the conditional table p(z|x) = 0.75 / 0.40, and an
// outcome with success rates 0.8, 0.4, 0.3, 0.2 over the (x, z) strata.
inline StructuralModel drug_scm(double px = 0.5) {
  if (px < 0.0 || px > 1.0) throw Error("exposure prevalence must lie in [0,1]");
  ExogenousVariable ux{detail::binary_spec("Ux"), {1.0 - px, px}};
  ExogenousVariable uz = detail::uniform_noise("Uz", 20);
  ExogenousVariable uy = detail::uniform_noise("Uy", 10);

  EndogenousVariable x{detail::binary_spec("X"), {"Ux"}, {0, 1}};
  // p(z|X=0) = 8/20, p(z|X=1) = 15/20.
  EndogenousVariable z = detail::threshold_node("Z", {"X"}, "Uz", {8, 15}, 20);
  // Success rates over (X,Z): 0.2, 0.3, 0.4, 0.8.
  EndogenousVariable y = detail::threshold_node("Y", {"X", "Z"}, "Uy", {2, 3, 4, 8}, 10);
  return StructuralModel({ux, uz, uy}, {x, z, y});
}

}  // namespace medfx
