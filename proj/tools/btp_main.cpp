#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "btp/catalog.hpp"
#include "btp/chart.hpp"
#include "btp/io.hpp"

using btp::Cx;
using btp::Verdict;
using Json = nlohmann::ordered_json;

namespace {

struct Common {
  double tol = 1e-9;
  bool json = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--tol", c.tol, "tolerance band for verdicts")->capture_default_str();
  cmd->add_flag("--json", c.json, "machine readable output");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) btp::fail(btp::ErrorCode::ParseError, "cannot read file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const char* verdict_str(Verdict v) {
  switch (v) {
    case Verdict::True: return "true";
    case Verdict::False: return "false";
    default: return "indeterminate";
  }
}

std::string residual_str(double r) {
  if (r < 0) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", r);
  return buf;
}

std::string cx_str(Cx z) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g%+.6gi", z.real(), z.imag());
  return buf;
}

Json cx_json(Cx z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

void print(const Json& doc, bool as_json, const std::string& text) {
  if (as_json)
    std::cout << doc.dump(2) << "\n";
  else
    std::cout << text;
}

// ------------------------------------------------------------------ //

int run_validate(const std::string& file, const Common& c) {
  btp::StructureEquations S = btp::parse_document(slurp(file));
  const btp::ValidationReport& rep = S.report();
  Json doc{{"name", S.name()},
           {"n", S.n()},
           {"max_d2", rep.max_d2},
           {"validated", rep.passed},
           {"integrable", rep.integrable}};
  std::ostringstream os;
  os << "name: " << S.name() << "\n"
     << "n: " << S.n() << "\n"
     << "max |d^2| coefficient: " << residual_str(rep.max_d2) << "\n"
     << "validated: " << (rep.passed ? "yes" : "no") << "\n"
     << "integrable: " << (rep.integrable ? "yes" : "no") << "\n";
  print(doc, c.json, os.str());
  return rep.passed ? 0 : 1;
}

int run_classify(const std::string& file, const Common& c) {
  btp::StructureEquations S = btp::parse_document(slurp(file));
  const btp::ClassificationReport rep = btp::classify(S, c.tol);
  Json flags = Json::array();
  std::ostringstream os;
  os << "structure: " << rep.name << "  (n = " << rep.n << ")\n"
     << "tolerance: " << rep.tolerance << "\n";
  char line[128];
  std::snprintf(line, sizeof line, "%-28s %-14s %s\n", "flag", "verdict", "residual");
  os << line;
  bool indeterminate = false;
  for (const auto& [key, flag] : rep.flags) {
    indeterminate = indeterminate || flag.verdict == Verdict::Indeterminate;
    flags.push_back(Json{{"name", key},
                         {"verdict", verdict_str(flag.verdict)},
                         {"residual", flag.residual}});
    std::snprintf(line, sizeof line, "%-28s %-14s %s\n", key.c_str(),
                  verdict_str(flag.verdict), residual_str(flag.residual).c_str());
    os << line;
  }
  os << "threefold case: " << btp::threefold_case_name(rep.threefold) << "\n";
  Json doc{{"structure", rep.name},
           {"n", rep.n},
           {"tolerance", rep.tolerance},
           {"flags", flags},
           {"threefold", btp::threefold_case_name(rep.threefold)}};
  if (rep.threefold == btp::ThreefoldCase::Case1 ||
      rep.threefold == btp::ThreefoldCase::Case2 ||
      rep.threefold == btp::ThreefoldCase::Case3) {
    os << "discriminant s: " << cx_str(rep.threefold_s)
       << "   t: " << cx_str(rep.threefold_t) << "\n";
    doc["s"] = cx_json(rep.threefold_s);
    doc["t"] = cx_json(rep.threefold_t);
  }
  os << "lee potential constant: " << cx_str(rep.lp_constant) << "\n";
  doc["lee_potential_constant"] = cx_json(rep.lp_constant);
  print(doc, c.json, os.str());
  return indeterminate ? 1 : 0;
}

int run_identities(const std::string& file, const Common& c) {
  btp::StructureEquations S = btp::parse_document(slurp(file));
  const auto suite = btp::identity_suite(S);
  Json rows = Json::array();
  std::ostringstream os;
  os << "structure: " << S.name() << "  (n = " << S.n() << ")\n";
  char line[96];
  std::snprintf(line, sizeof line, "%-18s %-12s %s\n", "identity", "residual", "pass");
  os << line;
  bool ok = true;
  for (const auto& [key, residual] : suite) {
    const bool pass = residual < c.tol;
    ok = ok && pass;
    rows.push_back(Json{{"name", key}, {"residual", residual}, {"pass", pass}});
    std::snprintf(line, sizeof line, "%-18s %-12s %s\n", key.c_str(),
                  residual_str(residual).c_str(), pass ? "yes" : "no");
    os << line;
  }
  os << "all identities hold: " << (ok ? "yes" : "no") << "\n";
  Json doc{{"structure", S.name()}, {"n", S.n()}, {"tolerance", c.tol},
           {"identities", rows}, {"pass", ok}};
  print(doc, c.json, os.str());
  return ok ? 0 : 1;
}

int run_theorem11(const std::string& file, const Common& c) {
  btp::StructureEquations S = btp::parse_document(slurp(file));
  const btp::Engine e(S);
  const btp::Theorem11Conditions cond = btp::theorem11_conditions(e, c.tol);
  const btp::FlagResult direct = btp::is_btp_direct(e, c.tol);
  const bool agree = cond.verdict == direct.verdict;
  const bool determinate =
      cond.verdict != Verdict::Indeterminate && direct.verdict != Verdict::Indeterminate;
  std::ostringstream os;
  os << "structure: " << S.name() << "  (n = " << S.n() << ")\n"
     << "condition residuals:\n"
     << "  curvature (2,0) part:       " << residual_str(cond.c1) << "\n"
     << "  pair symmetry:              " << residual_str(cond.c2) << "\n"
     << "  parallel Ricci contraction: " << residual_str(cond.c3) << "\n"
     << "  trace alignment:            " << residual_str(cond.c4) << "\n"
     << "combined verdict: " << verdict_str(cond.verdict) << "\n"
     << "direct parallel-torsion residual: " << residual_str(direct.residual)
     << "  verdict: " << verdict_str(direct.verdict) << "\n"
     << "equivalence: " << (agree ? "consistent" : "violated") << "\n";
  Json doc{{"structure", S.name()},
           {"n", S.n()},
           {"tolerance", c.tol},
           {"conditions",
            Json{{"c1", cond.c1}, {"c2", cond.c2}, {"c3", cond.c3}, {"c4", cond.c4}}},
           {"combined_verdict", verdict_str(cond.verdict)},
           {"direct_residual", direct.residual},
           {"direct_verdict", verdict_str(direct.verdict)},
           {"equivalent", agree}};
  print(doc, c.json, os.str());
  return (agree && determinate) ? 0 : 1;
}

int run_threefold(const std::string& file, const Common& c) {
  btp::StructureEquations S = btp::parse_document(slurp(file));
  if (S.n() != 3)
    btp::fail(btp::ErrorCode::NotApplicable, "threefold analysis requires n = 3");
  btp::ThreefoldReport rep;
  try {
    rep = btp::threefold_case(S, c.tol);
  } catch (const btp::Error& e) {
    if (e.code() != btp::ErrorCode::Indeterminate) throw;
    print(Json{{"structure", S.name()}, {"case", "Indeterminate"}}, c.json,
          std::string("case: Indeterminate (discriminant inside the gray band)\n"));
    return 1;
  }
  if (rep.label == btp::ThreefoldCase::NotApplicable)
    btp::fail(btp::ErrorCode::NotApplicable,
              "threefold case labels apply to non-balanced structures only");
  std::ostringstream os;
  os << "structure: " << S.name() << "\n"
     << "case: " << btp::threefold_case_name(rep.label) << "\n"
     << "discriminant s: " << cx_str(rep.s) << "   t: " << cx_str(rep.t) << "\n"
     << "lambda: " << rep.lambda << "\n";
  os << "torsion eigenvalues:";
  for (const Cx& a : rep.a) os << " " << cx_str(a);
  os << "\n"
     << "Kaehler-like flag: " << verdict_str(rep.bkl.verdict)
     << "  (residual " << residual_str(rep.bkl.residual) << ")\n"
     << "first case iff Kaehler-like: " << (rep.case1_matches_bkl ? "consistent" : "violated")
     << "\n";
  Json eig = Json::array();
  for (const Cx& a : rep.a) eig.push_back(cx_json(a));
  Json doc{{"structure", S.name()},
           {"case", btp::threefold_case_name(rep.label)},
           {"s", cx_json(rep.s)},
           {"t", cx_json(rep.t)},
           {"lambda", rep.lambda},
           {"eigenvalues", eig},
           {"bkl_verdict", verdict_str(rep.bkl.verdict)},
           {"bkl_residual", rep.bkl.residual},
           {"case1_matches_bkl", rep.case1_matches_bkl}};
  print(doc, c.json, os.str());
  return rep.case1_matches_bkl ? 0 : 1;
}

int run_catalog_list(const Common& c) {
  Json rows = Json::array();
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-26s %-3s %s\n", "name", "n", "asserted flags");
  os << line;
  for (const auto& entry : btp::standard_catalog()) {
    std::string flags;
    Json ef = Json::object();
    for (const auto& [key, val] : entry.expected) {
      if (!flags.empty()) flags += ", ";
      flags += key + (val ? "" : ": false");
      ef[key] = val;
    }
    rows.push_back(Json{{"name", entry.name},
                        {"n", entry.S.n()},
                        {"expected", ef},
                        {"notes", entry.notes}});
    std::snprintf(line, sizeof line, "%-26s %-3d %s\n", entry.name.c_str(), entry.S.n(),
                  flags.c_str());
    os << line;
  }
  print(Json{{"entries", rows}}, c.json, os.str());
  return 0;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& raw) {
  std::map<std::string, double> out;
  for (const std::string& kv : raw) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      btp::fail(btp::ErrorCode::InvalidParameter, "--param expects key=value, got: " + kv);
    try {
      std::size_t used = 0;
      const std::string val = kv.substr(eq + 1);
      out[kv.substr(0, eq)] = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
    } catch (const std::exception&) {
      btp::fail(btp::ErrorCode::InvalidParameter, "--param value is not a number: " + kv);
    }
  }
  return out;
}

int run_catalog_emit(const std::string& name, const std::vector<std::string>& raw_params) {
  const auto params = parse_params(raw_params);
  auto get = [&params](const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (name == "family") {
    const Cx a(get("a_re", 1), get("a_im", 0)), b(get("b_re", 2), get("b_im", 0));
    std::cout << btp::emit_document(btp::family_ab(a, b).S);
    return 0;
  }
  if (name == "twisted") {
    const Cx kappa(get("kappa_re", 0), get("kappa_im", 1));
    std::cout << btp::emit_document(
        btp::twisted_sasakian_model(get("c1", 1), get("c2", 1), kappa).S);
    return 0;
  }
  if (name == "random") {
    std::cout << btp::emit_document(
        btp::random_2step(static_cast<std::uint64_t>(get("seed", 1)),
                          static_cast<int>(get("n", 3)), static_cast<int>(get("r", 2)),
                          get("density", 0.75)));
    return 0;
  }
  for (const auto& entry : btp::standard_catalog())
    if (entry.name == name) {
      if (!params.empty())
        btp::fail(btp::ErrorCode::InvalidParameter,
                  "entry '" + name + "' takes no parameters");
      std::cout << btp::emit_document(entry.S);
      return 0;
    }
  btp::fail(btp::ErrorCode::InvalidParameter,
            "unknown catalog entry: " + name +
                " (parametric bases: family, twisted, random)");
}

int run_chart(const std::string& center_csv, int samples, std::uint64_t seed, const Common& c) {
  std::vector<double> vals;
  std::stringstream ss(center_csv);
  std::string piece;
  while (std::getline(ss, piece, ','))
    try {
      vals.push_back(std::stod(piece));
    } catch (const std::exception&) {
      btp::fail(btp::ErrorCode::InvalidParameter, "--center expects numbers, got: " + piece);
    }
  if (vals.size() != 4)
    btp::fail(btp::ErrorCode::InvalidParameter, "--center expects a_re,a_im,b_re,b_im");
  const std::vector<Cx> center = {Cx(vals[0], vals[1]), Cx(vals[2], vals[3])};
  const btp::ConformalChart chart = btp::log_distance_chart(center);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  double pde = 0, fd = 0;
  for (int k = 0; k < samples; ++k) {
    std::vector<Cx> z;
    double dist2 = 0;
    do {
      z = {center[0] + Cx(box(rng), box(rng)), center[1] + Cx(box(rng), box(rng))};
      dist2 = std::norm(z[0] - center[0]) + std::norm(z[1] - center[1]);
    } while (dist2 < 0.04);
    pde = std::max(pde, btp::vaisman_pde_residual(chart, z));
    if (k < 10) fd = std::max(fd, btp::ad_crosscheck(chart, z, 1e-4));
  }
  // A factor that is not a solution keeps the residual at order one.
  btp::ConformalChart quad(2, [](const std::vector<btp::CJet>& p) { return p[0].abs2(); });
  const double control =
      btp::vaisman_pde_residual(quad, {Cx(1, 0), Cx(0, 0)});
  const bool pass = pde < c.tol && fd < 1e-6 && control >= 1.0;
  std::ostringstream os;
  os << "chart: log distance factor centered at (" << cx_str(center[0]) << ", "
     << cx_str(center[1]) << ")\n"
     << "samples: " << samples << "   seed: " << seed << "\n"
     << "max PDE residual: " << residual_str(pde) << "\n"
     << "max AD vs FD relative error: " << residual_str(fd) << "\n"
     << "negative control residual at (1,0): " << residual_str(control) << "\n"
     << "pass: " << (pass ? "yes" : "no") << "\n";
  Json doc{{"center", Json::array({cx_json(center[0]), cx_json(center[1])})},
           {"samples", samples},
           {"seed", seed},
           {"max_pde_residual", pde},
           {"max_fd_relative_error", fd},
           {"negative_control", control},
           {"pass", pass}};
  print(doc, c.json, os.str());
  return pass ? 0 : 1;
}

int run_fuzz(std::uint64_t seed, int count, int n, int r, const Common& c) {
  double worst_identity = 0;
  int equivalence_violations = 0, indeterminate = 0;
  for (int m = 0; m < count; ++m) {
    const btp::StructureEquations S = btp::random_2step(seed + static_cast<std::uint64_t>(m), n, r);
    const btp::Engine e(S);
    for (const auto& [key, residual] : btp::identity_suite(e))
      worst_identity = std::max(worst_identity, residual);
    const auto direct = btp::is_btp_direct(e, c.tol);
    const auto cond = btp::theorem11_conditions(e, c.tol);
    if (direct.verdict == Verdict::Indeterminate || cond.verdict == Verdict::Indeterminate)
      ++indeterminate;
    else if (direct.verdict != cond.verdict)
      ++equivalence_violations;
  }
  const bool pass =
      worst_identity < c.tol && equivalence_violations == 0 && indeterminate == 0;
  std::ostringstream os;
  os << "structures: " << count << "   n: " << n << "   r: " << r << "   base seed: " << seed
     << "\n"
     << "worst identity residual: " << residual_str(worst_identity) << "\n"
     << "equivalence violations: " << equivalence_violations << "\n"
     << "indeterminate verdicts: " << indeterminate << "\n"
     << "pass: " << (pass ? "yes" : "no") << "\n";
  Json doc{{"count", count},
           {"n", n},
           {"r", r},
           {"seed", seed},
           {"worst_identity_residual", worst_identity},
           {"equivalence_violations", equivalence_violations},
           {"indeterminate_verdicts", indeterminate},
           {"pass", pass}};
  print(doc, c.json, os.str());
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verification and classification of invariant Hermitian structures "
               "with parallel Bismut torsion"};
  app.require_subcommand(1);

  std::string file, catalog_name, center;
  std::vector<std::string> raw_params;
  Common common[8];
  int samples = 100, count = 25, fuzz_n = 3, fuzz_r = 2;
  std::uint64_t seed = 1;

  auto* validate = app.add_subcommand("validate", "check d^2 = 0 and integrability");
  validate->add_option("file", file)->required();
  add_common(validate, common[0]);

  auto* classify = app.add_subcommand("classify", "full flag classification");
  classify->add_option("file", file)->required();
  add_common(classify, common[1]);

  auto* identities = app.add_subcommand("identities", "universal torsion and curvature identities");
  identities->add_option("file", file)->required();
  add_common(identities, common[2]);

  auto* theorem11 = app.add_subcommand(
      "theorem11", "four curvature conditions versus the direct parallel-torsion test");
  theorem11->add_option("file", file)->required();
  add_common(theorem11, common[3]);

  auto* threefold = app.add_subcommand("threefold", "case analysis for non-balanced n = 3");
  threefold->add_option("file", file)->required();
  add_common(threefold, common[4]);

  auto* catalog = app.add_subcommand("catalog", "built-in example structures");
  catalog->require_subcommand(1);
  auto* list = catalog->add_subcommand("list", "list entries and asserted flags");
  add_common(list, common[5]);
  auto* emit = catalog->add_subcommand("emit", "write one entry as a JSON document");
  emit->add_option("name", catalog_name)->required();
  emit->add_option("--param", raw_params, "override parameters as key=value");

  auto* chart = app.add_subcommand("chart", "coordinate chart checks");
  auto* vaisman = chart->add_subcommand("vaisman", "sample the conformal-factor equations");
  vaisman->add_option("--center", center, "a_re,a_im,b_re,b_im")->required();
  vaisman->add_option("--samples", samples)->capture_default_str();
  vaisman->add_option("--seed", seed)->capture_default_str();
  add_common(vaisman, common[6]);

  auto* fuzz = app.add_subcommand("fuzz", "identity and equivalence sweep over random structures");
  fuzz->add_option("--seed", seed)->capture_default_str();
  fuzz->add_option("--count", count)->capture_default_str();
  fuzz->add_option("--n", fuzz_n)->capture_default_str();
  fuzz->add_option("--r", fuzz_r)->capture_default_str();
  add_common(fuzz, common[7]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*validate) return run_validate(file, common[0]);
    if (*classify) return run_classify(file, common[1]);
    if (*identities) return run_identities(file, common[2]);
    if (*theorem11) return run_theorem11(file, common[3]);
    if (*threefold) return run_threefold(file, common[4]);
    if (*list) return run_catalog_list(common[5]);
    if (*emit) return run_catalog_emit(catalog_name, raw_params);
    if (*vaisman) return run_chart(center, samples, seed, common[6]);
    if (*fuzz) return run_fuzz(seed, count, fuzz_n, fuzz_r, common[7]);
  } catch (const btp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
