#include <catch2/catch_amalgamated.hpp>

#include <medfx/effects.hpp>
#include <medfx/families.hpp>

using namespace medfx;

namespace {

MeasureRequest xzy_request() {
  MeasureRequest r;
  r.exposure = "X";
  r.exposure_level = "1";
  r.exposure_ref = "0";
  r.mediator = "Z";
  r.outcome = "Y";
  return r;
}

FiniteDistribution drug_joint(double px) {
  return drug_scm(px).observational_distribution();
}

OracleQuery oracle_query(const MeasureRequest& r) {
  OracleQuery q;
  q.exposure = r.exposure;
  q.exposure_level = r.exposure_level;
  q.exposure_ref = r.exposure_ref;
  q.mediator = r.mediator;
  q.outcome = r.outcome;
  return q;
}

}  // namespace

TEST_CASE("benchmark joint reproduces the frozen measure values") {
  const auto d = drug_joint(0.5);
  const auto r = xzy_request();

  CHECK_THAT(te(d, r).value, Catch::Matchers::WithinAbs(0.46, 1e-12));
  CHECK_THAT(de(d, r).value, Catch::Matchers::WithinAbs(0.3725, 1e-12));
  CHECK_THAT(ie(d, r).value, Catch::Matchers::WithinAbs(0.0875, 1e-12));
  CHECK_THAT(nde(d, r).value, Catch::Matchers::WithinAbs(0.32, 1e-12));
  CHECK_THAT(nie(d, r).value, Catch::Matchers::WithinAbs(0.035, 1e-12));
  CHECK_THAT(tde(d, r).value, Catch::Matchers::WithinAbs(0.425, 1e-12));
  CHECK_THAT(tie(d, r).value, Catch::Matchers::WithinAbs(0.14, 1e-12));
  CHECK_THAT(piie(d, r).value, Catch::Matchers::WithinAbs(0.07, 1e-12));

  MeasureRequest rc = r;
  rc.controlled_level = "1";
  CHECK_THAT(cde(d, rc).value, Catch::Matchers::WithinAbs(0.5, 1e-12));
  rc.controlled_level = "0";
  CHECK_THAT(cde(d, rc).value, Catch::Matchers::WithinAbs(0.2, 1e-12));
  CHECK_THROWS_AS(cde(d, r), Error);

  const auto f = ie_factored(d, r);
  CHECK_THAT(f.te_xz, Catch::Matchers::WithinAbs(0.35, 1e-12));
  CHECK_THAT(f.te_zy, Catch::Matchers::WithinAbs(0.25, 1e-12));
  CHECK_THAT(f.product, Catch::Matchers::WithinAbs(0.0875, 1e-12));

  // The total effect does not depend on the exposure prevalence here, the
  // adjusted and front-door measures do.
  const auto d2 = drug_joint(0.2);
  CHECK_THAT(te(d2, r).value, Catch::Matchers::WithinAbs(0.46, 1e-12));
  CHECK_THAT(de(d2, r).value, Catch::Matchers::WithinAbs(0.32 + 0.105 * 0.2, 1e-12));
  CHECK_THAT(ie(d2, r).value, Catch::Matchers::WithinAbs(0.035 + 0.105 * 0.2, 1e-12));
}

TEST_CASE("dispatch selects measures by id") {
  const auto d = drug_joint(0.5);
  auto r = xzy_request();
  r.measure = "NDE";
  CHECK_THAT(evaluate(d, r).value, Catch::Matchers::WithinAbs(0.32, 1e-12));
  r.measure = "nonsense";
  CHECK_THROWS_AS(evaluate(d, r), Error);
}

TEST_CASE("null associations give zero measures") {
  // X independent of (Z, Y): p = p(x) * p(z) * p(y|z) with shared tables.
  std::vector<VariableSpec> vars = {{"X", {"0", "1"}, std::nullopt},
                                    {"Z", {"0", "1"}, std::nullopt},
                                    {"Y", {"0", "1"}, std::nullopt}};
  std::vector<double> t;
  const double pz[2] = {0.6, 0.4};
  const double py_z[2] = {0.3, 0.8};
  for (int x = 0; x < 2; ++x) {
    for (int z = 0; z < 2; ++z) {
      for (int y = 0; y < 2; ++y) {
        const double pyy = y == 1 ? py_z[z] : 1.0 - py_z[z];
        t.push_back(0.5 * pz[z] * pyy);
      }
    }
  }
  const FiniteDistribution d(vars, t);
  const auto r = xzy_request();
  CHECK_THAT(te(d, r).value, Catch::Matchers::WithinAbs(0.0, 1e-12));
  CHECK_THAT(de(d, r).value, Catch::Matchers::WithinAbs(0.0, 1e-12));
  CHECK_THAT(ie(d, r).value, Catch::Matchers::WithinAbs(0.0, 1e-12));
  CHECK_THAT(piie(d, r).value, Catch::Matchers::WithinAbs(0.0, 1e-12));
  CHECK_THAT(ie_factored(d, r).product, Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("zero-mass strata are reported, never imputed") {
  // p(Z=1 | X=1) = 1 empties the (X=1, Z=0) stratum.
  std::vector<VariableSpec> vars = {{"X", {"0", "1"}, std::nullopt},
                                    {"Z", {"0", "1"}, std::nullopt},
                                    {"Y", {"0", "1"}, std::nullopt}};
  std::vector<double> t;
  for (int x = 0; x < 2; ++x) {
    for (int z = 0; z < 2; ++z) {
      for (int y = 0; y < 2; ++y) {
        const double pzz = x == 1 ? (z == 1 ? 1.0 : 0.0) : 0.5;
        t.push_back(0.5 * pzz * 0.5);
      }
    }
  }
  const FiniteDistribution d(vars, t);
  const auto r = xzy_request();
  CHECK_THROWS_AS(de(d, r), ZeroProbabilityCondition);
  CHECK_THROWS_WITH(de(d, r), Catch::Matchers::ContainsSubstring("X=1") &&
                                  Catch::Matchers::ContainsSubstring("Z=0"));
  CHECK_THROWS_AS(ie(d, r), ZeroProbabilityCondition);
  CHECK_NOTHROW(te(d, r));
}

TEST_CASE("requests are validated before evaluation") {
  const auto d = drug_joint(0.5);
  auto r = xzy_request();

  SECTION("exposure must be binary") {
    std::vector<VariableSpec> v3 = {{"X", {"0", "1", "2"}, std::nullopt},
                                    {"Z", {"0", "1"}, std::nullopt},
                                    {"Y", {"0", "1"}, std::nullopt}};
    std::vector<double> t(12, 1.0 / 12.0);
    const FiniteDistribution d3(v3, t);
    CHECK_THROWS_WITH(te(d3, r), Catch::Matchers::ContainsSubstring("binary"));
  }
  SECTION("levels must exist and differ") {
    r.exposure_level = "9";
    CHECK_THROWS_AS(te(d, r), Error);
    r.exposure_level = "0";
    CHECK_THROWS_AS(te(d, r), Error);
  }
  SECTION("unknown names") {
    r.mediator = "M";
    CHECK_THROWS_AS(de(d, r), Error);
  }
  SECTION("outcome must be numeric") {
    std::vector<VariableSpec> v3 = {{"X", {"0", "1"}, std::nullopt},
                                    {"Z", {"0", "1"}, std::nullopt},
                                    {"Y", {"a", "b", "c"}, std::nullopt}};
    std::vector<double> t(12, 1.0 / 12.0);
    const FiniteDistribution d3(v3, t);
    CHECK_THROWS_AS(te(d3, r), NonNumericTarget);
    // Explicit numeric values repair it.
    const auto d3v = d3.with_values("Y", {0.0, 0.5, 1.0});
    CHECK_NOTHROW(te(d3v, r));
  }
  SECTION("factorization needs a binary mediator") {
    std::vector<VariableSpec> v3 = {{"X", {"0", "1"}, std::nullopt},
                                    {"Z", {"0", "1", "2"}, std::nullopt},
                                    {"Y", {"0", "1"}, std::nullopt}};
    std::vector<double> t(12, 1.0 / 12.0);
    const FiniteDistribution d3(v3, t);
    CHECK_THROWS_AS(ie_factored(d3, r), NonBinaryMediator);
    CHECK_NOTHROW(de(d3, r));  // other measures accept wider mediators
  }
}

TEST_CASE("swapping designated exposure levels negates the contrast measures") {
  const auto d = drug_joint(0.35);
  auto r = xzy_request();
  auto swapped = r;
  std::swap(swapped.exposure_level, swapped.exposure_ref);

  CHECK_THAT(te(d, swapped).value, Catch::Matchers::WithinAbs(-te(d, r).value, 1e-12));
  CHECK_THAT(de(d, swapped).value, Catch::Matchers::WithinAbs(-de(d, r).value, 1e-12));
  CHECK_THAT(ie(d, swapped).value, Catch::Matchers::WithinAbs(-ie(d, r).value, 1e-12));
  auto rc = r;
  auto sc = swapped;
  rc.controlled_level = "1";
  sc.controlled_level = "1";
  CHECK_THAT(cde(d, sc).value, Catch::Matchers::WithinAbs(-cde(d, rc).value, 1e-12));
}

TEST_CASE("front-door equals the oracle total effect under hidden confounding") {
  const auto r = xzy_request();
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const auto m = random_scm(GraphFamily::ConfoundedFrontdoor, seed);
    const auto d = m.observational_distribution();
    const double truth = oracle_effect(m, OracleMeasure::TE, oracle_query(r));
    CHECK_THAT(ie(d, r).value, Catch::Matchers::WithinAbs(truth, 1e-9));
    CHECK_THAT(ie_factored(d, r).product, Catch::Matchers::WithinAbs(ie(d, r).value, 1e-9));
  }
}

TEST_CASE("adjustment equals the oracle total effect when the third variable is causally prior") {
  const auto r = xzy_request();
  for (std::uint64_t seed = 200; seed < 240; ++seed) {
    const auto m = random_scm(GraphFamily::Reversed, seed);
    const auto d = m.observational_distribution();
    const double truth = oracle_effect(m, OracleMeasure::TE, oracle_query(r));
    CHECK_THAT(de(d, r).value, Catch::Matchers::WithinAbs(truth, 1e-9));
  }
}

TEST_CASE("mediation formulas equal oracle counterfactuals without confounding") {
  const auto r = xzy_request();
  for (std::uint64_t seed = 300; seed < 330; ++seed) {
    const auto m = random_scm(GraphFamily::Mediation, seed);
    const auto d = m.observational_distribution();
    const auto q = oracle_query(r);
    CHECK_THAT(nde(d, r).value,
               Catch::Matchers::WithinAbs(oracle_effect(m, OracleMeasure::NDE, q), 1e-9));
    CHECK_THAT(nie(d, r).value,
               Catch::Matchers::WithinAbs(oracle_effect(m, OracleMeasure::NIE, q), 1e-9));
    CHECK_THAT(tde(d, r).value,
               Catch::Matchers::WithinAbs(oracle_effect(m, OracleMeasure::TDE, q), 1e-9));
    CHECK_THAT(tie(d, r).value,
               Catch::Matchers::WithinAbs(oracle_effect(m, OracleMeasure::TIE, q), 1e-9));
    CHECK_THAT(piie(d, r).value,
               Catch::Matchers::WithinAbs(oracle_effect(m, OracleMeasure::PIIE, q), 1e-9));
    auto rc = r;
    rc.controlled_level = "1";
    auto qc = q;
    qc.controlled_level = "1";
    CHECK_THAT(cde(d, rc).value,
               Catch::Matchers::WithinAbs(oracle_effect(m, OracleMeasure::CDE, qc), 1e-9));
  }
}

TEST_CASE("subpopulation correspondences for the classical natural measures") {
  const auto r = xzy_request();
  // Causally prior third variable: the adjusted-direct-effect decomposition
  // member equals the exposure contrast among the unexposed.
  for (std::uint64_t seed = 400; seed < 420; ++seed) {
    const auto m = random_scm(GraphFamily::Reversed, seed);
    const auto d = m.observational_distribution();
    CHECK_THAT(nde(d, r).value,
               Catch::Matchers::WithinAbs(m.counterfactual_contrast_among("X", "1", "0", "Y", "0"),
                                          1e-9));
  }
  // Hidden exposure-outcome confounding with a front-door mediator: the
  // mediator-shift member equals the same subpopulation contrast.
  for (std::uint64_t seed = 500; seed < 520; ++seed) {
    const auto m = random_scm(GraphFamily::ConfoundedFrontdoor, seed);
    const auto d = m.observational_distribution();
    CHECK_THAT(nie(d, r).value,
               Catch::Matchers::WithinAbs(m.counterfactual_contrast_among("X", "1", "0", "Y", "0"),
                                          1e-9));
  }
}

TEST_CASE("reports carry formulas and assumptions") {
  const auto d = drug_joint(0.5);
  const auto r = xzy_request();
  const auto rep = ie(d, r);
  CHECK(rep.measure == "IE");
  CHECK_FALSE(rep.formula.empty());
  CHECK_FALSE(rep.assumptions.empty());
  CHECK(rep.formula.find("p(z|1) - p(z|0)") != std::string::npos);
}
