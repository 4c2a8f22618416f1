#pragma once

#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "medfx/bounds.hpp"
#include "medfx/effects.hpp"

namespace medfx::report {

using nlohmann::json;

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr int kReportFormat = 1;

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string digest(std::string_view bytes) {
  std::ostringstream ss;
  ss << "fnv1a64:" << std::hex << std::setfill('0') << std::setw(16) << fnv1a64(bytes);
  return ss.str();
}

// Six significant digits, %g style; the JSON path keeps full binary64.
inline std::string fmt6(double v) {
  std::ostringstream ss;
  ss << std::setprecision(6) << v;
  return ss.str();
}

inline json to_json(const EffectReport& e) {
  return json{{"kind", "effect"},
              {"measure", e.measure},
              {"value", e.value},
              {"formula", e.formula},
              {"assumptions", e.assumptions}};
}

inline json to_json(const FactoredIE& f) {
  return json{{"kind", "factored_ie"},
              {"te_xz", f.te_xz},
              {"te_zy", f.te_zy},
              {"product", f.product}};
}

inline json to_json(const AffineEffect& a) {
  return json{{"kind", "affine"},
              {"measure", a.measure},
              {"parameter", a.parameter},
              {"intercept", a.intercept},
              {"slope", a.slope},
              {"interval", json::array({a.lo, a.hi})}};
}

inline json reduction_to_json(const std::string& measure, double te,
                              const std::pair<double, double>& interval) {
  return json{{"kind", "reduction"},
              {"measure", measure},
              {"te", te},
              {"interval", json::array({interval.first, interval.second})}};
}

inline json to_json(const MonotoneVerdict& v) {
  json evidence = json::array();
  for (const auto& ev : v.evidence) {
    json stratum = json::object();
    for (const auto& [name, level] : ev.stratum) stratum[name] = level;
    evidence.push_back(json{{"stratum", std::move(stratum)},
                            {"means", ev.means},
                            {"differences", ev.differences}});
  }
  return json{{"direction", to_string(v.direction)},
              {"target", v.target},
              {"proxy", v.proxy},
              {"evidence", std::move(evidence)}};
}

inline json to_json(const BoundResult& b) {
  json indicators = json::object();
  indicators["opposite"] = b.indicator_opposite ? json(*b.indicator_opposite) : json(nullptr);
  indicators["nonneg"] = b.indicator_nonneg ? json(*b.indicator_nonneg) : json(nullptr);
  json diagnostics = json::array();
  for (const auto& [label, verdict] : b.diagnostics) {
    json d = to_json(verdict);
    d["label"] = label;
    diagnostics.push_back(std::move(d));
  }
  return json{{"kind", "bound"},
              {"target", b.target},
              {"relation", to_string(b.relation)},
              {"bound_value", b.bound_value},
              {"indicators", std::move(indicators)},
              {"diagnostics", std::move(diagnostics)},
              {"notes", b.notes}};
}

struct InputDigest {
  std::string path;
  std::string digest;
};

struct RunReport {
  std::string command;
  std::vector<std::string> argv;
  std::vector<InputDigest> inputs;
  json results = json::array();
  std::vector<std::string> warnings;
};

inline json to_json(const RunReport& r) {
  json inputs = json::array();
  for (const auto& in : r.inputs) {
    inputs.push_back(json{{"path", in.path}, {"digest", in.digest}});
  }
  return json{{"command", r.command},
              {"argv", r.argv},
              {"inputs", std::move(inputs)},
              {"results", r.results},
              {"warnings", r.warnings},
              {"versions", json{{"artifact", kArtifactVersion}, {"format", kReportFormat}}}};
}

inline void render_result_text(const json& e, std::ostream& out) {
  const std::string kind = e.value("kind", "");
  if (kind == "effect") {
    out << e["measure"].get<std::string>() << " = " << fmt6(e["value"].get<double>()) << "\n";
    out << "  formula: " << e["formula"].get<std::string>() << "\n";
    out << "  assumes: " << e["assumptions"].get<std::string>() << "\n";
  } else if (kind == "factored_ie") {
    out << "IE factors: te_xz = " << fmt6(e["te_xz"].get<double>())
        << ", te_zy = " << fmt6(e["te_zy"].get<double>())
        << ", product = " << fmt6(e["product"].get<double>()) << "\n";
  } else if (kind == "affine") {
    out << e["measure"].get<std::string>() << "(q) = " << fmt6(e["intercept"].get<double>())
        << " + " << fmt6(e["slope"].get<double>()) << "*q"
        << "  for q = " << e["parameter"].get<std::string>() << " in [0,1]"
        << "  -> interval [" << fmt6(e["interval"][0].get<double>()) << ", "
        << fmt6(e["interval"][1].get<double>()) << "]\n";
  } else if (kind == "reduction") {
    out << "relative reduction of the total effect (" << e["measure"].get<std::string>()
        << ", te = " << fmt6(e["te"].get<double>()) << "): ["
        << fmt6(e["interval"][0].get<double>()) << ", " << fmt6(e["interval"][1].get<double>())
        << "]\n";
  } else if (kind == "bound") {
    const std::string rel = e["relation"].get<std::string>();
    if (rel == "indeterminate") {
      out << e["target"].get<std::string>() << " bound indeterminate (candidate value "
          << fmt6(e["bound_value"].get<double>()) << ")\n";
    } else {
      out << e["target"].get<std::string>() << " " << rel << " "
          << fmt6(e["bound_value"].get<double>()) << "\n";
    }
    const auto& ind = e["indicators"];
    out << "  indicators: opposite-trend = "
        << (ind["opposite"].is_null() ? "undefined" : ind["opposite"].dump())
        << ", nonnegative-factor = "
        << (ind["nonneg"].is_null() ? "n/a" : ind["nonneg"].dump()) << "\n";
    for (const auto& d : e["diagnostics"]) {
      out << "  trend: " << d["label"].get<std::string>() << ": "
          << d["direction"].get<std::string>() << "\n";
    }
    for (const auto& n : e["notes"]) {
      out << "  note: " << n.get<std::string>() << "\n";
    }
  } else if (kind == "oracle") {
    out << e["label"].get<std::string>() << " = " << fmt6(e["value"].get<double>()) << "\n";
  } else if (kind == "estimate") {
    out << "estimated " << e["cells"].get<std::size_t>() << "-cell joint from "
        << fmt6(e["records"].get<double>()) << " records (alpha = "
        << fmt6(e["alpha"].get<double>()) << ") -> " << e["out"].get<std::string>() << "\n";
  } else if (kind == "validation") {
    if (e["valid"].get<bool>()) {
      out << "valid: " << e["what"].get<std::string>() << "\n";
    } else {
      out << "invalid: " << e["what"].get<std::string>() << "\n";
      for (const auto& p : e["problems"]) {
        out << "  problem: " << p.get<std::string>() << "\n";
      }
    }
  } else {
    out << e.dump() << "\n";
  }
}

inline std::string render_text(const RunReport& r) {
  std::ostringstream out;
  out << "medfx " << r.command << " (artifact " << kArtifactVersion << ", format "
      << kReportFormat << ")\n";
  for (const auto& in : r.inputs) {
    out << "input: " << in.path << " (" << in.digest << ")\n";
  }
  for (const auto& w : r.warnings) {
    out << "warning: " << w << "\n";
  }
  out << "--\n";
  for (const auto& e : r.results) {
    render_result_text(e, out);
  }
  return out.str();
}

}  // namespace medfx::report
