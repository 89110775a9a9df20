#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "contmodel/evaluator.hpp"
#include "contmodel/model_io.hpp"
#include "contmodel/parse.hpp"
#include "contmodel/sentences.hpp"
#include "contmodel/theory.hpp"
#include "contmodel/theory_io.hpp"
#include "json.hpp"

namespace contmodel::cli {

namespace {

using nlohmann::ordered_json;

struct Flags {
  std::string model;
  std::string sentence;
  std::string formula;
  std::string panel;
  std::optional<std::uint64_t> seed;
  int restarts = 0;
  double tol = 0.0;
  std::string n_range = "2..6";
  std::string N_range = "2..6";
  bool csv = false;
  std::string out;
  // compare
  std::string a, b;
  // ultralimit
  std::string sequence = "matrix";
  std::string proxy = "cofinite";
  double proxy_tol = 1e-3;
  int j_max = 6;
  // microstates
  std::vector<std::string> elements;
  std::string target;
  int degree = 3;
  int k = 2;
  double eps = 1e-3;
  int max_evals = 10000;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const Flags& f) {
  if (f.seed) return *f.seed;
  if (const char* env = std::getenv("CONTMODEL_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError(std::string("CONTMODEL_SEED is not an unsigned integer: ") + env);
    }
  }
  return 0;
}

EvalOptions eval_options(const Flags& f) {
  EvalOptions o;
  o.seed = resolve_seed(f);
  if (f.restarts != 0) {
    o.outer_restarts = f.restarts;
    o.inner_restarts = f.restarts / 2;
  }
  if (f.tol != 0.0) o.tolerance = f.tol;
  return o;
}

std::pair<int, int> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const int v = std::stoi(text);
      return {v, v};
    }
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
  } catch (const std::exception&) {
    throw UsageError("malformed range '" + text + "' (expected a..b)");
  }
}

Model load_model(const Flags& f) {
  if (f.model.empty()) throw UsageError("--model is required");
  return load_model_file(f.model);
}

// Library sentence or parsed formula; the name is empty for ad-hoc formulas.
std::pair<std::string, Formula> resolve_formula(const Flags& f, Signature sig, const std::string& fallback = {}) {
  if (!f.formula.empty()) return {std::string(), parse_formula(f.formula, sig)};
  const std::string name = f.sentence.empty() ? fallback : f.sentence;
  if (name.empty()) throw UsageError("one of --sentence or --formula is required");
  const auto s = library_sentence(name);
  if (!s) throw ParseError("unknown sentence '" + name + "'", 0);
  return {name, s->formula};
}

ordered_json result_json(const EvalResult& r) {
  ordered_json j;
  j["value"] = r.value;
  j["status"] = std::string(to_string(r.status));
  j["seed"] = r.seed;
  j["samples_used"] = r.samples_used;
  j["witnesses"] = ordered_json::object();
  for (const auto& [name, e] : r.witnesses) j["witnesses"][name] = ordered_json::parse(element_json(e));
  return j;
}

std::string cmd_eval(const Flags& f) {
  const Model m = load_model(f);
  const auto [name, formula] = resolve_formula(f, signature_of(m));
  const EvalResult r = evaluate(m, formula, eval_options(f));
  if (f.csv) return "sentence,value,status\n" + (name.empty() ? print_formula(formula) : name) + "," +
                    format_value(r.value) + "," + std::string(to_string(r.status)) + "\n";
  ordered_json j;
  j["model"] = ordered_json::parse(model_spec_json(m));
  j["sentence"] = name.empty() ? ordered_json() : ordered_json(name);
  j["formula"] = print_formula(formula);
  const ordered_json rj = result_json(r);
  for (auto it = rj.begin(); it != rj.end(); ++it) j[it.key()] = it.value();
  j["replay"] = witness_replay(m, formula, r);
  return j.dump(2) + "\n";
}

std::string cmd_fingerprint(const Flags& f) {
  const Model m = load_model(f);
  const Panel panel = f.panel.empty() ? default_panel(PanelKind::Universal, signature_of(m)) : panel_by_name(f.panel);
  const Fingerprint fp = fingerprint(m, panel, eval_options(f));
  if (f.csv) {
    std::string s = "sentence,value,status\n";
    for (const auto& e : fp.entries) {
      s += e.sentence + "," + format_value(e.result.value) + "," + std::string(to_string(e.result.status)) + "\n";
    }
    return s;
  }
  return fingerprint_to_json(fp) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string cmd_compare(const Flags& f) {
  if (f.a.empty() || f.b.empty()) throw UsageError("compare needs --a and --b");
  const Fingerprint a = fingerprint_from_json(read_file(f.a));
  const Fingerprint b = fingerprint_from_json(read_file(f.b));
  const OrderVerdict v = compare_universal(a, b, f.tol);
  if (f.csv) {
    std::string s = "sentence,margin\n";
    for (const auto& [name, d] : v.margins) s += name + "," + format_value(d) + "\n";
    return s;
  }
  ordered_json j;
  j["verdict"] = std::string(to_string(v.order));
  j["tolerance"] = v.tolerance;
  j["margins"] = ordered_json::object();
  for (const auto& [name, d] : v.margins) j["margins"][name] = d;
  return j.dump(2) + "\n";
}

std::string scan_payload(const ScanTable& t, bool csv) { return csv ? scan_to_csv(t) : scan_to_json(t) + "\n"; }

Panel single_panel(const std::string& id, const std::string& name, const Formula& formula, Signature sig) {
  return make_panel(id, kPanelVersion, PanelKind::Full, sig, {SentenceId{name, formula, sig, false, {}}});
}

std::string cmd_scan_sigma(const Flags& f) {
  const auto [lo, hi] = parse_range(f.n_range);
  if (lo < 1) throw UsageError("--n must start at 1 or above");
  auto [name, formula] = resolve_formula(f, Signature::TracialAlgebra, "sigma.1");
  if (name.empty()) name = "formula";
  const Panel p = single_panel("scan.sigma", name, formula, Signature::TracialAlgebra);
  return scan_payload(convergence_scan([](int n) { return Model(make_matrix_model({{n, 1.0}})); }, p, lo, hi,
                                       eval_options(f)),
                      f.csv);
}

std::string cmd_scan_psi(const Flags& f) {
  const auto [lo, hi] = parse_range(f.N_range);
  if (lo < 2) throw UsageError("--N must start at 2 or above");
  const Panel p = sub_panel(default_panel(PanelKind::Full, Signature::NormedSpace), {"psi"});
  return scan_payload(convergence_scan([](int n) { return Model(square_family(n)); }, p, lo, hi, eval_options(f)),
                      f.csv);
}

std::string cmd_scan_ultralimit(const Flags& f) {
  ModelSequence seq;
  Signature sig = Signature::TracialAlgebra;
  if (f.sequence == "matrix") {
    seq = [](int j) { return Model(make_matrix_model({{j, 1.0}})); };
  } else if (f.sequence == "alternating") {
    seq = [](int j) {
      return Model(j % 2 ? make_matrix_model({{1, 1.0}}) : make_matrix_model({{1, 1.0}, {1, 1.0}}));
    };
  } else if (f.sequence == "squares") {
    sig = Signature::NormedSpace;
    seq = [](int j) { return Model(square_family(j + 1)); };
  } else if (f.sequence == "constant") {
    const Model m = load_model(f);
    sig = signature_of(m);
    seq = [m](int) { return m; };
  } else {
    throw UsageError("unknown sequence '" + f.sequence + "' (matrix, alternating, squares, constant)");
  }
  auto [name, formula] = resolve_formula(f, sig, sig == Signature::TracialAlgebra ? "sigma.1" : "psi");
  FilterProxy proxy;
  if (f.proxy == "cofinite") {
    proxy = FilterProxy::cofinite(f.proxy_tol);
  } else if (f.proxy == "band") {
    proxy = FilterProxy::band();
  } else if (f.proxy == "even" || f.proxy == "odd") {
    const int parity = f.proxy == "even" ? 0 : 1;
    proxy = FilterProxy::subsequence([parity](int j) { return j % 2 == parity; }, f.proxy_tol);
  } else {
    throw UsageError("unknown proxy '" + f.proxy + "' (cofinite, band, even, odd)");
  }
  const LimitReport rep = ultralimit(seq, formula, proxy, f.j_max, eval_options(f));
  if (f.csv) {
    std::string s = "j,value,status\n";
    for (const auto& [j, r] : rep.values) s += std::to_string(j) + "," + format_value(r.value) + "," + std::string(to_string(r.status)) + "\n";
    return s;
  }
  ordered_json j;
  j["sequence"] = f.sequence;
  j["sentence"] = name.empty() ? print_formula(formula) : name;
  j["proxy"] = f.proxy;
  j["j_max"] = f.j_max;
  j["values"] = ordered_json::array();
  for (const auto& [idx, r] : rep.values) {
    j["values"].push_back({{"j", idx}, {"value", r.value}, {"status", std::string(to_string(r.status))}});
  }
  j["convergent"] = rep.convergent;
  j["limit"] = rep.limit ? ordered_json(*rep.limit) : ordered_json();
  j["band"] = {rep.band_lo, rep.band_hi};
  return j.dump(2) + "\n";
}

MomentTarget load_target(const Flags& f) {
  if (!f.target.empty()) {
    try {
      const auto j = ordered_json::parse(read_file(f.target));
      MomentTarget t;
      t.generators = j.at("generators").get<int>();
      t.degree = j.at("degree").get<int>();
      for (const auto& mj : j.at("moments")) {
        t.moments.push_back({mj.at("word").get<std::string>(), {mj.at("re").get<double>(), mj.value("im", 0.0)}});
      }
      return t;
    } catch (const nlohmann::json::exception& e) {
      throw ModelSpecError(std::string("malformed moment target: ") + e.what());
    }
  }
  if (f.elements.empty()) throw UsageError("microstates needs --target FILE or --model with --element");
  const Model m = load_model(f);
  const auto* mm = std::get_if<MatrixModel>(&m);
  if (!mm) throw UsageError("microstates needs a matrix model");
  std::vector<Element> tuple;
  for (const auto& e : f.elements) tuple.push_back(parse_element(m, e));
  return moment_target(*mm, tuple, f.degree);
}

std::string cmd_scan_microstates(const Flags& f) {
  const MomentTarget target = load_target(f);
  MicrostateOptions o;
  o.seed = resolve_seed(f);
  o.max_evaluations = f.max_evals;
  const MicrostateResult r = microstate_search(target, f.k, f.eps, o);
  ordered_json j;
  j["k"] = f.k;
  j["eps"] = f.eps;
  j["success"] = r.success;
  j["max_deviation"] = r.max_deviation;
  j["objective"] = r.objective;
  j["evaluations"] = r.evaluations;
  j["candidate"] = ordered_json::array();
  for (const auto& e : r.tuple) j["candidate"].push_back(ordered_json::parse(element_json(e)));
  return j.dump(2) + "\n";
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Continuous-logic sentence workbench"};
  app.require_subcommand(1);
  Flags f;
  std::string command;

  auto eval_flags = [&](CLI::App* sc) {
    sc->add_option("--seed", f.seed, "RNG seed (default: CONTMODEL_SEED or 0)");
    sc->add_option("--restarts", f.restarts, "outer restarts (inner get half)")->check(CLI::PositiveNumber);
    sc->add_option("--tol", f.tol, "evaluator tolerance")->check(CLI::PositiveNumber);
    sc->add_flag("--csv", f.csv, "emit CSV instead of JSON");
    sc->add_option("--out", f.out, "write the payload to FILE");
  };

  auto* eval = app.add_subcommand("eval", "evaluate a sentence or formula on a model");
  eval->add_option("--model", f.model, "model file (JSON)")->required();
  eval->add_option("--sentence", f.sentence, "library sentence name");
  eval->add_option("--formula", f.formula, "formula text");
  eval_flags(eval);

  auto* fp = app.add_subcommand("fingerprint", "evaluate a panel on a model");
  fp->add_option("--model", f.model, "model file (JSON)")->required();
  fp->add_option("--panel", f.panel, "panel name (default: universal panel of the signature)");
  eval_flags(fp);

  auto* cmp = app.add_subcommand("compare", "order two universal fingerprints");
  cmp->add_option("--a", f.a, "fingerprint file")->required();
  cmp->add_option("--b", f.b, "fingerprint file")->required();
  cmp->add_option("--tol", f.tol, "comparison tolerance")->check(CLI::NonNegativeNumber);
  cmp->add_flag("--csv", f.csv, "emit margins as CSV");
  cmp->add_option("--out", f.out, "write the payload to FILE");

  auto* scan = app.add_subcommand("scan", "scan experiments");
  scan->require_subcommand(1);
  auto* s_sigma = scan->add_subcommand("sigma", "sigma.1 (or --sentence) on M_n");
  s_sigma->add_option("--n", f.n_range, "range a..b");
  s_sigma->add_option("--sentence", f.sentence, "library sentence name");
  s_sigma->add_option("--formula", f.formula, "formula text");
  eval_flags(s_sigma);
  auto* s_psi = scan->add_subcommand("psi", "psi on the l2-sum of l_p^2, p = 2..N");
  s_psi->add_option("--N", f.N_range, "range a..b");
  eval_flags(s_psi);
  auto* s_ul = scan->add_subcommand("ultralimit", "limit of sentence values along a model sequence");
  s_ul->add_option("--sequence", f.sequence, "matrix | alternating | squares | constant");
  s_ul->add_option("--model", f.model, "model file for the constant sequence");
  s_ul->add_option("--sentence", f.sentence, "library sentence name");
  s_ul->add_option("--formula", f.formula, "formula text");
  s_ul->add_option("--proxy", f.proxy, "cofinite | band | even | odd");
  s_ul->add_option("--proxy-tol", f.proxy_tol, "Cauchy tolerance of the tail")->check(CLI::PositiveNumber);
  s_ul->add_option("--jmax", f.j_max, "last index")->check(CLI::PositiveNumber);
  eval_flags(s_ul);
  auto* s_ms = scan->add_subcommand("microstates", "moment-matching search in M_k");
  s_ms->add_option("--model", f.model, "model of the target tuple");
  // JSON literals must reach us whole, so CLI11's bracket splitting is disabled.
  s_ms->add_option("--element", f.elements, "target generator (JSON element), repeatable")
      ->delimiter(0)
      ->allow_extra_args(false);
  s_ms->add_option("--degree", f.degree, "moment degree")->check(CLI::PositiveNumber);
  s_ms->add_option("--target", f.target, "moment target file");
  s_ms->add_option("--k", f.k, "matrix size")->check(CLI::PositiveNumber);
  s_ms->add_option("--eps", f.eps, "success threshold")->check(CLI::PositiveNumber);
  s_ms->add_option("--max-evals", f.max_evals, "objective evaluation budget")->check(CLI::PositiveNumber);
  s_ms->add_option("--seed", f.seed, "RNG seed (default: CONTMODEL_SEED or 0)");
  s_ms->add_option("--out", f.out, "write the payload to FILE");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::string payload;
  int code = kOk;
  try {
    if (*eval) {
      command = "eval";
      payload = cmd_eval(f);
    } else if (*fp) {
      command = "fingerprint";
      payload = cmd_fingerprint(f);
    } else if (*cmp) {
      command = "compare";
      payload = cmd_compare(f);
    } else if (*s_sigma) {
      command = "scan sigma";
      payload = cmd_scan_sigma(f);
    } else if (*s_psi) {
      command = "scan psi";
      payload = cmd_scan_psi(f);
    } else if (*s_ul) {
      command = "scan ultralimit";
      payload = cmd_scan_ultralimit(f);
    } else if (*s_ms) {
      command = "scan microstates";
      payload = cmd_scan_microstates(f);
    }
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    code = kParseError;
  } catch (const ModelSpecError& e) {
    err << "parse error: " << e.what() << "\n";
    code = kParseError;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    code = kValidationError;
  } catch (const BudgetError& e) {
    err << "budget error: " << e.what() << "\n";
    code = kBudgetError;
  } catch (const PanelMismatch& e) {
    err << "panel mismatch: " << e.what() << "\n";
    code = kPanelMismatch;
  } catch (const PanelError& e) {
    err << "panel error: " << e.what() << "\n";
    code = kValidationError;
  } catch (const ShapeError& e) {
    err << "shape error: " << e.what() << "\n";
    code = kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    code = kUsage;
  }
  if (code != kOk) return code;

  if (f.out.empty()) {
    out << payload;
  } else {
    std::ofstream file(f.out);
    if (!file) {
      err << "error: cannot write " << f.out << "\n";
      return kUsage;
    }
    file << payload;
  }

  ordered_json rec;
  rec["command"] = command;
  rec["arguments"] = ordered_json::array();
  for (int i = 1; i < argc; ++i) rec["arguments"].push_back(argv[i]);
  rec["seed"] = resolve_seed(f);
  rec["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(payload)));
  rec["payload_fnv1a"] = hash;
  rec["payload_bytes"] = payload.size();
  rec["tool_version"] = CONTMODEL_VERSION;
  err << "run " << rec.dump() << "\n";
  return kOk;
}

}  // namespace contmodel::cli
