// Regenerates the committed fixture files. Deterministic: fixed seeds, fixed
// serialization. Usage: gen_fixtures [output-dir]

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <medfx/medfx.hpp>

namespace {

using nlohmann::json;

json binary_var(const std::string& name) {
  return json{{"name", name}, {"levels", json::array({"0", "1"})}};
}

json drug_factored(bool with_px) {
  json root;
  root["variables"] = json::array({binary_var("X"), binary_var("Z"), binary_var("Y")});
  json factors = json::array();
  if (with_px) {
    factors.push_back(json{{"target", "X"}, {"given", json::array()}, {"table", {0.5, 0.5}}});
  }
  factors.push_back(json{{"target", "Z"},
                         {"given", json::array({"X"})},
                         {"table", {0.6, 0.4, 0.25, 0.75}}});
  factors.push_back(json{{"target", "Y"},
                         {"given", json::array({"X", "Z"})},
                         {"table", {0.8, 0.2, 0.7, 0.3, 0.6, 0.4, 0.2, 0.8}}});
  root["factors"] = std::move(factors);
  return root;
}

json null_model() {
  json root;
  root["variables"] = json::array({binary_var("X"), binary_var("Z"), binary_var("Y")});
  root["factors"] = json::array(
      {json{{"target", "X"}, {"given", json::array()}, {"table", {0.5, 0.5}}},
       json{{"target", "Z"}, {"given", json::array({"X"})}, {"table", {0.6, 0.4, 0.6, 0.4}}},
       json{{"target", "Y"},
            {"given", json::array({"X", "Z"})},
            {"table", {0.7, 0.3, 0.7, 0.3, 0.7, 0.3, 0.7, 0.3}}}});
  return root;
}

json empty_stratum() {
  json root;
  root["variables"] = json::array({binary_var("X"), binary_var("Z"), binary_var("Y")});
  root["factors"] = json::array(
      {json{{"target", "X"}, {"given", json::array()}, {"table", {0.5, 0.5}}},
       json{{"target", "Z"}, {"given", json::array({"X"})}, {"table", {0.4, 0.6, 1.0, 0.0}}},
       json{{"target", "Y"},
            {"given", json::array({"X", "Z"})},
            {"table", {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}}}});
  return root;
}

void write(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot write " << path << "\n";
    std::exit(1);
  }
  out << j.dump(2) << "\n";
  std::cout << "wrote " << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "fixtures";
  std::filesystem::create_directories(dir);

  write(dir + "/drug_scm.json", medfx::io::scm_to_json(medfx::drug_scm(0.5)));
  write(dir + "/drug_joint.json", drug_factored(true));
  write(dir + "/drug_conditionals.json", drug_factored(false));
  write(dir + "/null_model.json", null_model());
  write(dir + "/empty_stratum.json", empty_stratum());

  {
    medfx::FamilyOptions opt;
    opt.monotone = medfx::MonotoneRelation::Opposite;
    const auto m = medfx::random_scm(medfx::GraphFamily::Proxy, 101, opt);
    write(dir + "/proxy_demo_ge.json",
          medfx::io::distribution_to_json(m.observational_distribution()));
    opt.monotone = medfx::MonotoneRelation::Same;
    const auto m2 = medfx::random_scm(medfx::GraphFamily::Proxy, 102, opt);
    write(dir + "/proxy_demo_le.json",
          medfx::io::distribution_to_json(m2.observational_distribution()));
  }
  {
    medfx::ProxyQuery q{"X", "1", "0", "Z", "Y", "W"};
    for (std::uint64_t seed = 1000;; ++seed) {
      const auto m = medfx::random_scm(medfx::GraphFamily::Proxy, seed);
      const auto d = m.observational_distribution();
      if (medfx::proxy_de_bound(d, q).relation == medfx::BoundRelation::Indeterminate) {
        write(dir + "/proxy_demo_indet.json", medfx::io::distribution_to_json(d));
        std::cout << "  (proxy indeterminate seed " << seed << ")\n";
        break;
      }
    }
  }
  {
    medfx::FamilyOptions opt;
    opt.monotone = medfx::MonotoneRelation::Opposite;
    const auto m = medfx::random_scm(medfx::GraphFamily::Longterm, 201, opt);
    write(dir + "/longterm_demo.json",
          medfx::io::distribution_to_json(m.observational_distribution().marginal({"Z", "W", "Y"})));
    medfx::OracleQuery q;
    q.exposure = "X";
    q.exposure_level = "1";
    q.exposure_ref = "0";
    q.mediator = "Z";
    q.outcome = "Y";
    std::cout << "  (longterm demo te_xz = "
              << medfx::oracle_effect(m, medfx::OracleMeasure::TE_XZ, q) << ")\n";
  }
  {
    medfx::LongtermQuery q;
    q.mediator = "Z";
    q.outcome = "Y";
    q.proxy = "W";
    for (std::uint64_t seed = 2000;; ++seed) {
      const auto m = medfx::random_scm(medfx::GraphFamily::Longterm, seed);
      const auto d = m.observational_distribution().marginal({"Z", "W", "Y"});
      if (medfx::longterm_ie_bound(0.1, d, q).relation == medfx::BoundRelation::Indeterminate) {
        write(dir + "/longterm_demo_indet.json", medfx::io::distribution_to_json(d));
        std::cout << "  (longterm indeterminate seed " << seed << ")\n";
        break;
      }
    }
  }
  {
    json schema;
    schema["variables"] = json::array({binary_var("X"), binary_var("Z"), binary_var("Y")});
    write(dir + "/schema_demo.json", schema);

    const auto scm = medfx::drug_scm(0.5);
    const auto rows = scm.sample_observations(2000, 7);
    std::ofstream csv(dir + "/records_demo.csv", std::ios::binary);
    if (!csv) {
      std::cerr << "cannot write records_demo.csv\n";
      return 1;
    }
    csv << "X,Z,Y\n";
    for (const auto& row : rows) {
      csv << row[0] << "," << row[1] << "," << row[2] << "\n";
    }
    std::cout << "wrote " << dir << "/records_demo.csv\n";
  }
  return 0;
}
