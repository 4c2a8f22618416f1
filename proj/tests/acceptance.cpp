// End-to-end acceptance suite. Each check prints one [PASS]/[FAIL] line with
// its runtime; the process exits nonzero when any check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <medfx/medfx.hpp>

namespace {

using namespace medfx;

int g_failures = 0;

void criterion(const std::string& name, const std::function<std::string()>& body,
               double time_limit_secs = 0.0) {
  const auto start = std::chrono::steady_clock::now();
  std::string problem;
  try {
    problem = body();
  } catch (const std::exception& e) {
    problem = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (problem.empty() && time_limit_secs > 0.0 && secs > time_limit_secs) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(2);
    ss << "exceeded the " << time_limit_secs << "s budget";
    problem = ss.str();
  }
  std::ostringstream line;
  line.setf(std::ios::fixed);
  line.precision(2);
  if (problem.empty()) {
    line << "[PASS] " << name << " (" << secs << "s)";
  } else {
    ++g_failures;
    line << "[FAIL] " << name << " (" << secs << "s): " << problem;
  }
  std::cout << line.str() << "\n" << std::flush;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string expect_near(const std::string& label, double got, double want, double tol) {
  if (near(got, want, tol)) return "";
  std::ostringstream ss;
  ss.precision(12);
  ss << label << " = " << got << ", expected " << want;
  return ss.str();
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

OracleQuery xzy_oracle() {
  OracleQuery q;
  q.exposure = "X";
  q.exposure_level = "1";
  q.exposure_ref = "0";
  q.mediator = "Z";
  q.outcome = "Y";
  return q;
}

// The benchmark joint, multiplied out from its conditional tables.
FiniteDistribution benchmark_joint() {
  const double pz[2][2] = {{0.6, 0.4}, {0.25, 0.75}};
  const double py1[2][2] = {{0.2, 0.3}, {0.4, 0.8}};
  std::vector<VariableSpec> vars = {{"X", {"0", "1"}, std::nullopt},
                                    {"Z", {"0", "1"}, std::nullopt},
                                    {"Y", {"0", "1"}, std::nullopt}};
  std::vector<double> t;
  for (int x = 0; x < 2; ++x) {
    for (int z = 0; z < 2; ++z) {
      for (int y = 0; y < 2; ++y) {
        t.push_back(0.5 * pz[x][z] * (y == 1 ? py1[x][z] : 1.0 - py1[x][z]));
      }
    }
  }
  return FiniteDistribution(vars, t);
}

FiniteDistribution random_positive_joint(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<VariableSpec> vars = {{"X", {"0", "1"}, std::nullopt},
                                    {"Z", {"0", "1"}, std::nullopt},
                                    {"Y", {"0", "1"}, std::nullopt}};
  std::vector<double> t(8);
  double total = 0.0;
  for (double& cell : t) {
    cell = 0.05 + static_cast<double>(rng() >> 11) * 0x1.0p-53;
    total += cell;
  }
  for (double& cell : t) cell /= total;
  return FiniteDistribution(vars, t);
}

struct CliRun {
  int exit_code = -1;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + MEDFX_CLI_PATH + "\" " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

int main() {
  criterion("benchmark effect regression", [] {
    const auto d = benchmark_joint();
    const auto r = xzy_request();
    std::string p;
    const auto check = [&](const std::string& label, double got, double want) {
      if (p.empty()) p = expect_near(label, got, want, 1e-9);
    };
    check("TE", te(d, r).value, 0.46);
    check("NDE", nde(d, r).value, 0.32);
    check("NIE", nie(d, r).value, 0.035);
    check("TDE", tde(d, r).value, 0.425);
    check("TIE", tie(d, r).value, 0.14);
    auto rc = r;
    rc.controlled_level = "1";
    check("CDE(Z=1)", cde(d, rc).value, 0.5);
    rc.controlled_level = "0";
    check("CDE(Z=0)", cde(d, rc).value, 0.2);
    return p;
  }, 1.0);

  criterion("benchmark interval regression", [] {
    const auto c = MediationConditionals::from_distribution(benchmark_joint(), xzy_request());
    const auto de_a = affine_in_px(c, "DE");
    const auto ie_a = affine_in_px(c, "IE");
    std::string p;
    const auto check = [&](const std::string& label, double got, double want, double tol) {
      if (p.empty()) p = expect_near(label, got, want, tol);
    };
    check("DE intercept", de_a.intercept, 0.32, 1e-9);
    check("DE slope", de_a.slope, 0.105, 1e-9);
    check("DE lo", de_a.lo, 0.32, 1e-9);
    check("DE hi", de_a.hi, 0.425, 1e-9);
    check("IE intercept", ie_a.intercept, 0.035, 1e-9);
    check("IE slope", ie_a.slope, 0.105, 1e-9);
    check("IE lo", ie_a.lo, 0.035, 1e-9);
    check("IE hi", ie_a.hi, 0.14, 1e-9);
    // Published two-decimal readings of the same interval.
    check("DE hi vs published 0.43", de_a.hi, 0.43, 0.005);
    check("IE lo vs published 0.04", ie_a.lo, 0.04, 0.01);
    check("IE hi vs published 0.15", ie_a.hi, 0.15, 0.01);
    const auto de_red = reduction_interval(de_a, 0.46);
    const auto ie_red = reduction_interval(ie_a, 0.46);
    check("DE reduction lo", de_red.first, 0.076086956521739, 1e-9);
    check("DE reduction hi", de_red.second, 0.304347826086957, 1e-9);
    check("IE reduction lo", ie_red.first, 0.695652173913043, 1e-9);
    check("IE reduction hi", ie_red.second, 0.923913043478261, 1e-9);
    check("DE reduction lo vs published 7%", de_red.first, 0.07, 0.03);
    check("DE reduction hi vs published 30%", de_red.second, 0.30, 0.03);
    check("IE reduction lo vs published 67%", ie_red.first, 0.67, 0.03);
    check("IE reduction hi vs published 91%", ie_red.second, 0.91, 0.03);
    return p;
  }, 1.0);

  criterion("decomposition identities on 500 mediation models", [] {
    const auto r = xzy_request();
    for (std::uint64_t seed = 3000; seed < 3500; ++seed) {
      const auto d = random_scm(GraphFamily::Mediation, seed).observational_distribution();
      const double t = te(d, r).value;
      if (!near(t, nde(d, r).value + tie(d, r).value, 1e-9) ||
          !near(t, tde(d, r).value + nie(d, r).value, 1e-9)) {
        return "identity broken at seed " + std::to_string(seed);
      }
    }
    return std::string();
  }, 30.0);

  criterion("front-door and adjustment match the oracle on 500+500 models", [] {
    const auto r = xzy_request();
    const auto q = xzy_oracle();
    for (std::uint64_t seed = 4000; seed < 4500; ++seed) {
      const auto m = random_scm(GraphFamily::ConfoundedFrontdoor, seed);
      if (!near(ie(m.observational_distribution(), r).value,
                oracle_effect(m, OracleMeasure::TE, q), 1e-9)) {
        return "front-door mismatch at seed " + std::to_string(seed);
      }
    }
    for (std::uint64_t seed = 4500; seed < 5000; ++seed) {
      const auto m = random_scm(GraphFamily::Reversed, seed);
      if (!near(de(m.observational_distribution(), r).value,
                oracle_effect(m, OracleMeasure::TE, q), 1e-9)) {
        return "adjustment mismatch at seed " + std::to_string(seed);
      }
    }
    return std::string();
  }, 60.0);

  criterion("indirect effect factorizes on 500 random joints", [] {
    const auto r = xzy_request();
    for (std::uint64_t seed = 8000; seed < 8500; ++seed) {
      const auto d = random_positive_joint(seed);
      const auto f = ie_factored(d, r);
      if (!near(ie(d, r).value, f.product, 1e-9)) {
        return "factorization broken at seed " + std::to_string(seed);
      }
    }
    return std::string();
  });

  criterion("subpopulation contrast equals the matching formula on 200+200 models", [] {
    const auto r = xzy_request();
    for (std::uint64_t seed = 9000; seed < 9200; ++seed) {
      const auto m = random_scm(GraphFamily::Reversed, seed);
      const double among = m.counterfactual_contrast_among("X", "1", "0", "Y", "0");
      if (!near(nde(m.observational_distribution(), r).value, among, 1e-9)) {
        return "adjusted-direct mismatch at seed " + std::to_string(seed);
      }
    }
    for (std::uint64_t seed = 9200; seed < 9400; ++seed) {
      const auto m = random_scm(GraphFamily::ConfoundedFrontdoor, seed);
      const double among = m.counterfactual_contrast_among("X", "1", "0", "Y", "0");
      if (!near(nie(m.observational_distribution(), r).value, among, 1e-9)) {
        return "mediator-shift mismatch at seed " + std::to_string(seed);
      }
    }
    return std::string();
  });

  criterion("proxy bound sound on 1000 constrained models", [] {
    ProxyQuery pq{"X", "1", "0", "Z", "Y", "W"};
    auto oq = xzy_oracle();
    oq.confounder = "V";
    std::size_t determinate = 0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
      FamilyOptions opt;
      opt.monotone = i < 500 ? MonotoneRelation::Opposite : MonotoneRelation::Same;
      const auto m = random_scm(GraphFamily::Proxy, 10000 + i, opt);
      const auto b = proxy_de_bound(m.observational_distribution(), pq);
      if (b.relation == BoundRelation::Indeterminate) continue;
      ++determinate;
      const double truth = oracle_effect(m, OracleMeasure::DE_TRUE, oq);
      const bool ok = b.relation == BoundRelation::GreaterEqual ? truth >= b.bound_value - 1e-9
                                                                : truth <= b.bound_value + 1e-9;
      if (!ok) return "bound violated at model " + std::to_string(i);
    }
    if (determinate != 1000) {
      return "only " + std::to_string(determinate) + " of 1000 constrained models determinate";
    }
    return std::string();
  }, 300.0);

  criterion("long-term bound sound on 1000 constrained models", [] {
    const LongtermQuery lq{"Z", "Y", "W", std::nullopt, std::nullopt};
    const auto oq = xzy_oracle();
    std::size_t determinate = 0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
      FamilyOptions opt;
      opt.monotone = (i % 2) == 0 ? MonotoneRelation::Opposite : MonotoneRelation::Same;
      opt.longterm_direct_edge = i >= 500;
      const auto m = random_scm(GraphFamily::Longterm, 20000 + i, opt);
      const double te_xz = oracle_effect(m, OracleMeasure::TE_XZ, oq);
      const auto b = longterm_ie_bound(te_xz, m.observational_distribution(), lq);
      if (b.relation == BoundRelation::Indeterminate) continue;
      ++determinate;
      const double truth = oracle_effect(m, OracleMeasure::IE_TRUE, oq);
      const bool ok = b.relation == BoundRelation::GreaterEqual ? truth >= b.bound_value - 1e-9
                                                                : truth <= b.bound_value + 1e-9;
      if (!ok) return "bound violated at model " + std::to_string(i);
    }
    if (determinate != 1000) {
      return "only " + std::to_string(determinate) + " of 1000 constrained models determinate";
    }
    return std::string();
  }, 300.0);

  criterion("population-intervention measure matches the oracle on 200 models", [] {
    const auto r = xzy_request();
    const auto q = xzy_oracle();
    for (std::uint64_t seed = 30000; seed < 30200; ++seed) {
      const auto m = random_scm(GraphFamily::Mediation, seed);
      if (!near(piie(m.observational_distribution(), r).value,
                oracle_effect(m, OracleMeasure::PIIE, q), 1e-9)) {
        return "mismatch at seed " + std::to_string(seed);
      }
    }
    return std::string();
  });

  criterion("repeated cli runs are byte-identical", [] {
    const std::string fixtures = MEDFX_FIXTURES_DIR;
    const std::vector<std::string> commands = {
        "effects \"" + fixtures + "/drug_joint.json\" --exposure X=1/0 --mediator Z --outcome Y "
            "--json",
        "bounds-px \"" + fixtures + "/drug_conditionals.json\" --exposure X=1/0 --mediator Z "
            "--outcome Y --te 0.46 --json",
        "bounds-proxy \"" + fixtures + "/proxy_demo_ge.json\" --exposure X=1/0 --mediator Z "
            "--outcome Y --proxy W --json",
        "oracle \"" + fixtures + "/drug_scm.json\" --measure TE --exposure X=1/0 --outcome Y "
            "--json"};
    for (const auto& cmd : commands) {
      const auto a = run_cli(cmd);
      const auto b = run_cli(cmd);
      if (a.exit_code != 0 || b.exit_code != 0) {
        return "command failed: " + cmd;
      }
      if (a.out.empty() || a.out != b.out) {
        return "outputs differ for: " + cmd;
      }
    }
    return std::string();
  });

  if (g_failures != 0) {
    std::cout << g_failures << " acceptance check(s) failed\n";
    return 1;
  }
  std::cout << "all acceptance checks passed\n";
  return 0;
}
