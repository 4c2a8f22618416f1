#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <medfx/effects.hpp>
#include <medfx/families.hpp>
#include <medfx/io.hpp>

using namespace medfx;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

// Self-cleaning scratch file.
struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& name) : path(fs::temp_directory_path() / name) {}
  ~TempFile() { std::error_code ec; fs::remove(path, ec); }
  std::string str() const { return path.string(); }
  void write(const std::string& text) const {
    std::ofstream out(path, std::ios::binary);
    out << text;
  }
};

json drug_factored_json(bool with_exposure) {
  json root;
  root["variables"] = json::array({{{"name", "X"}, {"levels", {"0", "1"}}},
                                   {{"name", "Z"}, {"levels", {"0", "1"}}},
                                   {{"name", "Y"}, {"levels", {"0", "1"}}}});
  json factors = json::array();
  if (with_exposure) {
    factors.push_back({{"target", "X"}, {"given", json::array()}, {"table", {0.5, 0.5}}});
  }
  factors.push_back({{"target", "Z"}, {"given", {"X"}}, {"table", {0.6, 0.4, 0.25, 0.75}}});
  factors.push_back({{"target", "Y"},
                     {"given", {"X", "Z"}},
                     {"table", {0.8, 0.2, 0.7, 0.3, 0.6, 0.4, 0.2, 0.8}}});
  root["factors"] = std::move(factors);
  return root;
}

MeasureRequest xzy_request() {
  MeasureRequest r;
  r.exposure = "X";
  r.exposure_level = "1";
  r.exposure_ref = "0";
  r.mediator = "Z";
  r.outcome = "Y";
  return r;
}

void check_same_cells(const FiniteDistribution& a, const FiniteDistribution& b, double tol) {
  REQUIRE(a.cell_count() == b.cell_count());
  a.for_each_cell([&](const std::vector<std::size_t>& idx, double p) {
    CHECK_THAT(b.prob(a.assignment_at(a.flat_index(idx))), Catch::Matchers::WithinAbs(p, tol));
  });
}

}  // namespace

TEST_CASE("joint distributions round-trip through json") {
  const auto d = drug_scm(0.5).observational_distribution();
  const json j = io::distribution_to_json(d);
  const auto back = io::parse_distribution(j, "mem");
  check_same_cells(d, back, 0.0);

  TempFile f("medfx_io_joint.json");
  io::save_distribution(d, f.str());
  check_same_cells(d, io::load_distribution(f.str()), 0.0);
}

TEST_CASE("factored distributions multiply out to the declared joint") {
  const auto d = io::parse_distribution(drug_factored_json(true), "mem");
  check_same_cells(drug_scm(0.5).observational_distribution(), d, 1e-12);

  const auto r = xzy_request();
  CHECK_THAT(te(d, r).value, Catch::Matchers::WithinAbs(0.46, 1e-12));
}

TEST_CASE("factored-form failures are specific") {
  SECTION("a missing root factor points at bounds mode") {
    CHECK_THROWS_MATCHES(io::parse_distribution(drug_factored_json(false), "mem"), Error,
                         Catch::Matchers::Message("p(X) required for joint; use bounds mode"));
  }
  SECTION("factors must be ancestrally ordered") {
    json j = drug_factored_json(true);
    std::swap(j["factors"][0], j["factors"][2]);  // Y|X,Z now precedes X and Z
    CHECK_THROWS_AS(io::parse_distribution(j, "mem"), ValidationError);
    CHECK_THROWS_WITH(io::parse_distribution(j, "mem"),
                      Catch::Matchers::ContainsSubstring("not ancestrally ordered"));
  }
  SECTION("one factor per variable") {
    json j = drug_factored_json(true);
    j["factors"].push_back(j["factors"][0]);
    CHECK_THROWS_WITH(io::parse_distribution(j, "mem"),
                      Catch::Matchers::ContainsSubstring("more than one factor"));
  }
  SECTION("rows must be distributions") {
    json j = drug_factored_json(true);
    j["factors"][1]["table"] = {0.6, 0.3, 0.25, 0.75};
    CHECK_THROWS_WITH(io::parse_distribution(j, "mem"),
                      Catch::Matchers::ContainsSubstring("sums to"));
  }
  SECTION("unknown targets and givens") {
    json j = drug_factored_json(true);
    j["factors"][1]["target"] = "M";
    CHECK_THROWS_AS(io::parse_distribution(j, "mem"), ParseError);
    j = drug_factored_json(true);
    j["factors"][1]["given"] = {"M"};
    CHECK_THROWS_AS(io::parse_distribution(j, "mem"), ParseError);
  }
  SECTION("neither joint nor factors") {
    json j;
    j["variables"] = drug_factored_json(true)["variables"];
    CHECK_THROWS_AS(io::parse_distribution(j, "mem"), ParseError);
  }
}

TEST_CASE("mediation conditionals load without an exposure factor") {
  const auto r = xzy_request();
  const auto c = io::parse_conditionals(drug_factored_json(false), r, "mem");
  const auto reference =
      MediationConditionals::from_distribution(drug_scm(0.5).observational_distribution(), r);
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t z = 0; z < 2; ++z) {
      CHECK_THAT(c.pz[x][z], Catch::Matchers::WithinAbs(reference.pz[x][z], 1e-12));
      for (std::size_t y = 0; y < 2; ++y) {
        CHECK_THAT(c.py[x][z][y], Catch::Matchers::WithinAbs(reference.py[x][z][y], 1e-12));
      }
    }
  }

  SECTION("the outcome factor may list its givens in either order") {
    json j = drug_factored_json(false);
    j["factors"][1]["given"] = {"Z", "X"};
    // Row-major over (Z, X) now: rows z0x0, z0x1, z1x0, z1x1.
    j["factors"][1]["table"] = {0.8, 0.2, 0.6, 0.4, 0.7, 0.3, 0.2, 0.8};
    const auto swapped = io::parse_conditionals(j, r, "mem");
    for (std::size_t x = 0; x < 2; ++x) {
      for (std::size_t z = 0; z < 2; ++z) {
        for (std::size_t y = 0; y < 2; ++y) {
          CHECK_THAT(swapped.py[x][z][y], Catch::Matchers::WithinAbs(c.py[x][z][y], 1e-12));
        }
      }
    }
  }
  SECTION("both factors are mandatory") {
    json j = drug_factored_json(false);
    j["factors"].erase(0);
    CHECK_THROWS_AS(io::parse_conditionals(j, r, "mem"), ParseError);
  }
}

TEST_CASE("structural models round-trip through json") {
  const auto m = drug_scm(0.5);
  CHECK(io::parse_scm(io::scm_to_json(m), "mem") == m);

  for (const auto family : {GraphFamily::Mediation, GraphFamily::ConfoundedFrontdoor,
                            GraphFamily::Reversed, GraphFamily::Proxy, GraphFamily::Longterm}) {
    const auto model = random_scm(family, 42);
    CHECK(io::parse_scm(io::scm_to_json(model), "mem") == model);
  }

  TempFile f("medfx_io_scm.json");
  io::save_scm(m, f.str());
  CHECK(io::load_scm(f.str()) == m);
}

TEST_CASE("structural model files are validated on load") {
  json good = io::scm_to_json(drug_scm(0.5));

  SECTION("declaration order must be topological") {
    json j = good;
    std::swap(j["endogenous"][0], j["endogenous"][2]);  // Y now precedes X and Z
    CHECK_THROWS_AS(io::parse_scm(j, "mem"), ValidationError);
    CHECK_THROWS_WITH(io::parse_scm(j, "mem"),
                      Catch::Matchers::ContainsSubstring("not topologically ordered"));
  }
  SECTION("unknown parents are parse errors") {
    json j = good;
    j["endogenous"][1]["parents"] = {"Q", "Uz"};
    CHECK_THROWS_AS(io::parse_scm(j, "mem"), ParseError);
  }
  SECTION("a missing mechanism row names the combination") {
    json j = good;
    auto& mech = j["endogenous"][0]["mechanism"];
    mech.erase(1);
    CHECK_THROWS_WITH(io::parse_scm(j, "mem"),
                      Catch::Matchers::ContainsSubstring("mechanism is not total") &&
                          Catch::Matchers::ContainsSubstring("Ux=1"));
  }
  SECTION("duplicate mechanism rows are rejected") {
    json j = good;
    auto& mech = j["endogenous"][0]["mechanism"];
    mech.push_back(mech[0]);
    CHECK_THROWS_WITH(io::parse_scm(j, "mem"),
                      Catch::Matchers::ContainsSubstring("appears twice"));
  }
  SECTION("exogenous probabilities must match the declared levels") {
    json j = good;
    j["exogenous"][0]["probs"] = {0.5, 0.25, 0.25};
    CHECK_THROWS_AS(io::parse_scm(j, "mem"), ValidationError);
  }
}

TEST_CASE("endogenous domains may be derived from mechanism outputs") {
  const json j = {
      {"exogenous", json::array({{{"name", "U"}, {"levels", {"0", "1"}}, {"probs", {0.4, 0.6}}}})},
      {"endogenous",
       json::array({{{"name", "A"},
                     {"parents", {"U"}},
                     {"mechanism", json::array({{{"parents", {{"U", "0"}}}, {"value", "no"}},
                                                {{"parents", {{"U", "1"}}}, {"value", "yes"}}})}}})}};
  const auto m = io::parse_scm(j, "mem");
  const auto& spec = m.endogenous_spec("A");
  REQUIRE(spec.levels == std::vector<std::string>{"no", "yes"});
  CHECK_THAT(m.observational_distribution().mass({{"A", "yes"}}),
             Catch::Matchers::WithinAbs(0.6, 1e-12));
}

TEST_CASE("csv records") {
  const std::vector<VariableSpec> schema = {{"X", {"0", "1"}, std::nullopt},
                                            {"Z", {"0", "1"}, std::nullopt},
                                            {"Y", {"0", "1"}, std::nullopt}};
  TempFile f("medfx_io_records.csv");

  SECTION("columns map by header name, in any order") {
    f.write("Z,Y,X\n0,1,1\n1,1,0\n");
    const auto batch = io::load_records_csv(f.str(), schema);
    REQUIRE(batch.rows.size() == 2);
    CHECK(batch.rows[0] == std::vector<std::size_t>{1, 0, 1});
    CHECK(batch.rows[1] == std::vector<std::size_t>{0, 1, 1});
    CHECK(batch.counts == std::vector<double>{1.0, 1.0});
  }
  SECTION("a count column weights rows") {
    f.write("X,Z,Y,count\n0,0,0,3\n1,1,1,2\n");
    const auto batch = io::load_records_csv(f.str(), schema);
    REQUIRE(batch.counts == std::vector<double>{3.0, 2.0});
    const auto d = io::estimate_joint(batch);
    CHECK_THAT(d.prob({{"X", "0"}, {"Z", "0"}, {"Y", "0"}}),
               Catch::Matchers::WithinAbs(0.6, 1e-12));
  }
  SECTION("windows line endings and padding are tolerated") {
    f.write("X, Z ,Y\r\n 0 ,1,0\r\n");
    const auto batch = io::load_records_csv(f.str(), schema);
    REQUIRE(batch.rows.size() == 1);
    CHECK(batch.rows[0] == std::vector<std::size_t>{0, 1, 0});
  }
  SECTION("schema violations carry the line number") {
    f.write("X,Z,Y\n0,1,0\n0,2,0\n");
    CHECK_THROWS_WITH(io::load_records_csv(f.str(), schema),
                      Catch::Matchers::ContainsSubstring("line 3") &&
                          Catch::Matchers::ContainsSubstring("'2' is not a level of 'Z'"));
  }
  SECTION("header problems") {
    f.write("X,Z\n0,1\n");
    CHECK_THROWS_WITH(io::load_records_csv(f.str(), schema),
                      Catch::Matchers::ContainsSubstring("'Y' has no column"));
    f.write("X,Z,Y,Q\n0,1,0,0\n");
    CHECK_THROWS_AS(io::load_records_csv(f.str(), schema), ParseError);
    f.write("X,Z,Y,X\n0,1,0,0\n");
    CHECK_THROWS_WITH(io::load_records_csv(f.str(), schema),
                      Catch::Matchers::ContainsSubstring("duplicate column 'X'"));
  }
  SECTION("field-count and count-column problems") {
    f.write("X,Z,Y\n0,1\n");
    CHECK_THROWS_WITH(io::load_records_csv(f.str(), schema),
                      Catch::Matchers::ContainsSubstring("expected 3 fields, got 2"));
    f.write("X,Z,Y,count\n0,1,0,two\n");
    CHECK_THROWS_AS(io::load_records_csv(f.str(), schema), ParseError);
    f.write("X,Z,Y,count\n0,1,0,-1\n");
    CHECK_THROWS_WITH(io::load_records_csv(f.str(), schema),
                      Catch::Matchers::ContainsSubstring("negative count"));
  }
  SECTION("an empty file has no header") {
    f.write("");
    CHECK_THROWS_AS(io::load_records_csv(f.str(), schema), ParseError);
  }
}

TEST_CASE("schema files reuse the variables block") {
  TempFile f("medfx_io_schema.json");
  f.write(R"({"variables": [{"name": "A", "levels": ["0", "1"], "values": [0.0, 2.5]}]})");
  const auto schema = io::load_schema(f.str());
  REQUIRE(schema.size() == 1);
  CHECK(schema[0].name == "A");
  CHECK_THAT(schema[0].numeric_value(1), Catch::Matchers::WithinAbs(2.5, 1e-12));
}

TEST_CASE("joint estimation from records") {
  const std::vector<VariableSpec> schema = {{"A", {"0", "1"}, std::nullopt},
                                            {"B", {"0", "1"}, std::nullopt}};
  io::RecordBatch batch;
  batch.schema = schema;
  batch.rows = {{0, 0}, {0, 0}, {0, 1}, {1, 1}};
  batch.counts = {1.0, 1.0, 1.0, 1.0};

  SECTION("relative frequencies") {
    const auto d = io::estimate_joint(batch);
    CHECK_THAT(d.prob({{"A", "0"}, {"B", "0"}}), Catch::Matchers::WithinAbs(0.5, 1e-12));
    CHECK_THAT(d.prob({{"A", "1"}, {"B", "0"}}), Catch::Matchers::WithinAbs(0.0, 1e-12));
  }
  SECTION("additive smoothing") {
    const auto d = io::estimate_joint(batch, 2.0);
    CHECK_THAT(d.prob({{"A", "0"}, {"B", "0"}}), Catch::Matchers::WithinAbs(4.0 / 12.0, 1e-12));
    CHECK_THAT(d.prob({{"A", "0"}, {"B", "1"}}), Catch::Matchers::WithinAbs(3.0 / 12.0, 1e-12));
    CHECK_THAT(d.prob({{"A", "1"}, {"B", "0"}}), Catch::Matchers::WithinAbs(2.0 / 12.0, 1e-12));
  }
  SECTION("guards") {
    CHECK_THROWS_AS(io::estimate_joint(io::RecordBatch{schema, {}, {}}), Error);
    CHECK_THROWS_AS(io::estimate_joint(batch, -0.5), Error);
    io::RecordBatch zero = batch;
    zero.counts = {0.0, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(io::estimate_joint(zero), Error);
  }
}

TEST_CASE("sampled records recover the benchmark joint approximately") {
  const auto m = drug_scm(0.5);
  const auto truth = m.observational_distribution();
  const auto samples = m.sample_observations(10000, 7);

  io::RecordBatch batch;
  batch.schema = truth.variables();
  batch.rows = samples;
  batch.counts.assign(samples.size(), 1.0);
  const auto est = io::estimate_joint(batch);

  double tv = 0.0;
  truth.for_each_cell([&](const std::vector<std::size_t>& idx, double p) {
    tv += 0.5 * std::abs(p - est.prob(truth.assignment_at(truth.flat_index(idx))));
  });
  CHECK(tv < 0.02);
}
