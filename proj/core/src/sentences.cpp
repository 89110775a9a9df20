#include "contmodel/sentences.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "contmodel/parse.hpp"

namespace contmodel {

namespace {

using term::var;

NodePtr norm2(TermPtr t) { return fx::atom(AtomKind::Norm2, std::move(t)); }

// Wraps `body` in a sup block over x1..xn, all in D1.
NodePtr sup_over_xs(int n, NodePtr body) {
  for (int j = n; j >= 1; --j) body = fx::sup("x" + std::to_string(j), 1, body);
  return body;
}

NodePtr commutator_terms(int n, std::vector<NodePtr> parts) {
  for (int j = 1; j <= n; ++j) parts.push_back(norm2(term::comm(var("x" + std::to_string(j)), var("y"))));
  return fx::sum(parts);
}

SentenceId tracial(std::string name, NodePtr root, bool literature = true, std::string note = {}) {
  return {std::move(name), Formula(std::move(root)), Signature::TracialAlgebra, literature, std::move(note)};
}

NodePtr psi_body() {
  const auto x = var("x"), y = var("y");
  const ComplexRational half{Rational(1, 2), Rational(0)};
  auto unit_gap = [](TermPtr t) {
    return fx::abs(fx::add(fx::atom(AtomKind::Norm, std::move(t)), fx::constant(Rational(-1))));
  };
  return fx::sum({unit_gap(x), unit_gap(y), unit_gap(term::smul(half, term::add(x, y))),
                  unit_gap(term::smul(half, term::sub(x, y)))});
}

}  // namespace

SentenceId sigma(int n) {
  if (n < 1) throw std::invalid_argument("sigma(n) needs n >= 1");
  const auto y = var("y");
  NodePtr body = commutator_terms(
      n, {norm2(term::sub(term::mul(term::adj(y), y), term::identity())), fx::atom(AtomKind::AbsTr, y)});
  return tracial("sigma." + std::to_string(n), sup_over_xs(n, fx::inf("y", 1, body)));
}

SentenceId sigma_prime(int n) {
  if (n < 1) throw std::invalid_argument("sigma_prime(n) needs n >= 1");
  const auto y = var("y");
  NodePtr body = commutator_terms(
      n, {norm2(term::sub(term::mul(term::mul(y, term::adj(y)), y), y)),
          norm2(term::sub(term::add(term::mul(term::adj(y), y), term::mul(y, term::adj(y))), term::identity()))});
  return tracial("sigmaPrime." + std::to_string(n), sup_over_xs(n, fx::inf("y", 1, body)));
}

SentenceId psi() {
  return {"psi", Formula(fx::inf("x", 1, fx::inf("y", 1, psi_body()))), Signature::NormedSpace, true, {}};
}

SentenceId psi_negated() {
  NodePtr root = fx::sup("x", 1, fx::sup("y", 1, fx::tsub(fx::constant(Rational(4)), psi_body())));
  return {"psi.neg", Formula(root), Signature::NormedSpace, true, "sup-sentence 4 -. body(psi); value 4 - psi"};
}

SentenceId comm_sup() {
  return tracial("comm.sup", fx::sup("x", 1, fx::sup("y", 1, norm2(term::comm(var("x"), var("y"))))));
}

SentenceId proj_third() {
  const auto p = var("p");
  const ComplexRational third{Rational(1, 3), Rational(0)};
  NodePtr penalty = fx::sum({norm2(term::sub(p, term::adj(p))), norm2(term::sub(term::mul(p, p), p)),
                             fx::atom(AtomKind::AbsTr, term::sub(p, term::smul(third, term::identity())))});
  return tracial("proj.third", fx::sup("p", 1, fx::tsub(fx::constant(Rational(1, 3)), penalty)), false,
                 "designed probe: detects projections of trace 1/3");
}

SentenceId traceless_unitary_inf() {
  const auto u = var("u");
  NodePtr body = fx::add(norm2(term::sub(term::mul(term::adj(u), u), term::identity())), fx::atom(AtomKind::AbsTr, u));
  return tracial("traceless-unitary.inf", fx::inf("u", 1, body), false, "zero iff a trace-zero unitary exists");
}

SentenceId moment_nilpotent() {
  const auto x = var("x");
  NodePtr body = fx::tsub(norm2(x), fx::scale(Rational(2), norm2(term::mul(x, x))));
  return tracial("moment.nil", fx::sup("x", 1, body), false, "moment probe: large ||x||_2 with small ||x^2||_2");
}

SentenceId moment_self_commutator() {
  const auto x = var("x");
  return tracial("moment.selfcomm", fx::sup("x", 1, norm2(term::comm(x, term::adj(x)))), false,
                 "moment probe: non-normality ||[x, x*]||_2");
}

std::optional<SentenceId> library_sentence(const std::string& name) {
  auto indexed = [&](const std::string& prefix) -> std::optional<int> {
    if (name.rfind(prefix, 0) != 0) return std::nullopt;
    const std::string rest = name.substr(prefix.size());
    if (rest.empty() || !std::all_of(rest.begin(), rest.end(), ::isdigit) || rest.size() > 3) return std::nullopt;
    const int n = std::stoi(rest);
    return n >= 1 ? std::optional<int>(n) : std::nullopt;
  };
  if (auto n = indexed("sigma.")) return sigma(*n);
  if (auto n = indexed("sigmaPrime.")) return sigma_prime(*n);
  if (name == "psi") return psi();
  if (name == "psi.neg") return psi_negated();
  if (name == "comm.sup") return comm_sup();
  if (name == "proj.third") return proj_third();
  if (name == "traceless-unitary.inf") return traceless_unitary_inf();
  if (name == "moment.nil") return moment_nilpotent();
  if (name == "moment.selfcomm") return moment_self_commutator();
  return std::nullopt;
}

std::vector<std::string> library_names() {
  return {"sigma.<n>",  "sigmaPrime.<n>",        "psi",        "psi.neg",        "comm.sup",
          "proj.third", "traceless-unitary.inf", "moment.nil", "moment.selfcomm"};
}

std::string_view to_string(PanelKind k) { return k == PanelKind::Full ? "full" : "universal"; }

namespace {

bool contains_inf(const Node& n) {
  if (n.kind == NodeKind::Inf) return true;
  return (n.lhs && contains_inf(*n.lhs)) || (n.rhs && contains_inf(*n.rhs));
}

}  // namespace

Panel make_panel(std::string id, std::string version, PanelKind kind, Signature sig, std::vector<SentenceId> sentences) {
  std::set<std::string> names;
  for (const auto& s : sentences) {
    if (!names.insert(s.name).second) throw PanelError("duplicate sentence " + s.name + " in panel " + id);
    if (s.signature != sig) throw PanelError("sentence " + s.name + " has a different signature than panel " + id);
    const ValidationReport r = validate(s.formula, sig);
    if (!r.ok()) throw PanelError("sentence " + s.name + " is invalid: " + r.str());
    if (!s.formula.is_sentence()) throw PanelError("panel entry " + s.name + " has free variables");
    if (kind == PanelKind::Universal && contains_inf(s.formula.root())) {
      throw PanelError("universal panel " + id + " cannot contain the inf-sentence " + s.name);
    }
  }
  return {std::move(id), std::move(version), kind, sig, std::move(sentences)};
}

Panel default_panel(PanelKind kind, Signature sig) {
  if (sig == Signature::TracialAlgebra) {
    if (kind == PanelKind::Full) {
      return make_panel("tracial.full", kPanelVersion, kind, sig,
                        {sigma(1), sigma(2), sigma_prime(1), comm_sup(), proj_third(), traceless_unitary_inf()});
    }
    return make_panel("tracial.universal", kPanelVersion, kind, sig,
                      {comm_sup(), proj_third(), moment_nilpotent(), moment_self_commutator()});
  }
  if (kind == PanelKind::Full) return make_panel("normed.full", kPanelVersion, kind, sig, {psi(), psi_negated()});
  return make_panel("normed.universal", kPanelVersion, kind, sig, {psi_negated()});
}

Panel panel_by_name(const std::string& name) {
  if (name == "tracial.full") return default_panel(PanelKind::Full, Signature::TracialAlgebra);
  if (name == "tracial.universal") return default_panel(PanelKind::Universal, Signature::TracialAlgebra);
  if (name == "normed.full") return default_panel(PanelKind::Full, Signature::NormedSpace);
  if (name == "normed.universal") return default_panel(PanelKind::Universal, Signature::NormedSpace);
  throw PanelError("unknown panel " + name);
}

Panel sub_panel(const Panel& p, const std::vector<std::string>& names) {
  std::vector<SentenceId> picked;
  for (const auto& n : names) {
    const auto it = std::find_if(p.sentences.begin(), p.sentences.end(), [&](const SentenceId& s) { return s.name == n; });
    if (it == p.sentences.end()) throw PanelError("panel " + p.id + " has no sentence " + n);
    picked.push_back(*it);
  }
  std::string id = p.id + "[";
  for (std::size_t i = 0; i < names.size(); ++i) id += (i ? "," : "") + names[i];
  id += "]";
  return make_panel(std::move(id), p.version, p.kind, p.signature, std::move(picked));
}

std::string export_panel(const Panel& p) {
  std::ostringstream os;
  os << "# panel " << p.id << ' ' << p.version << ' ' << to_string(p.kind) << ' ' << to_string(p.signature) << '\n';
  for (const auto& s : p.sentences) os << s.name << '\t' << print_formula(s.formula) << '\n';
  return os.str();
}

Panel import_panel(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::string id, version, kind_s, sig_s;
  bool have_header = false;
  std::vector<SentenceId> sentences;
  Signature sig = Signature::TracialAlgebra;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tag;
      hs >> tag;
      if (tag != "panel") continue;
      if (!(hs >> id >> version >> kind_s >> sig_s)) throw PanelError("malformed panel header");
      if (sig_s == "tracial-algebra") {
        sig = Signature::TracialAlgebra;
      } else if (sig_s == "normed-space") {
        sig = Signature::NormedSpace;
      } else {
        throw PanelError("unknown signature " + sig_s);
      }
      if (kind_s != "full" && kind_s != "universal") throw PanelError("unknown panel kind " + kind_s);
      have_header = true;
      continue;
    }
    if (!have_header) throw PanelError("panel file must start with a '# panel' header");
    const auto split = line.find_first_of(" \t");
    if (split == std::string::npos) throw PanelError("panel line without formula: " + line);
    const std::string name = line.substr(0, split);
    const std::string text_formula = line.substr(line.find_first_not_of(" \t", split));
    Formula f = parse_formula(text_formula, sig);
    SentenceId s{name, f, sig, false, {}};
    if (auto lib = library_sentence(name); lib && lib->formula == f) s = *lib;
    sentences.push_back(std::move(s));
  }
  if (!have_header) throw PanelError("panel file must start with a '# panel' header");
  return make_panel(id, version, kind_s == "full" ? PanelKind::Full : PanelKind::Universal, sig, std::move(sentences));
}

}  // namespace contmodel
