#include "contmodel/formula.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace contmodel {

std::string_view to_string(Signature sig) {
  return sig == Signature::TracialAlgebra ? "tracial-algebra" : "normed-space";
}

std::string_view atom_name(AtomKind a) {
  switch (a) {
    case AtomKind::Norm2: return "norm2";
    case AtomKind::NormInf: return "normInf";
    case AtomKind::ReTr: return "retr";
    case AtomKind::ImTr: return "imtr";
    case AtomKind::AbsTr: return "abstr";
    case AtomKind::Norm: return "norm";
  }
  return "?";
}

bool same_term(const Term& a, const Term& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case TermOp::Variable: return a.name == b.name;
    case TermOp::Identity:
    case TermOp::Zero: return true;
    case TermOp::Adjoint: return same_term(*a.lhs, *b.lhs);
    case TermOp::Scale: return a.scalar == b.scalar && same_term(*a.lhs, *b.lhs);
    case TermOp::Add:
    case TermOp::Sub:
    case TermOp::Mul: return same_term(*a.lhs, *b.lhs) && same_term(*a.rhs, *b.rhs);
  }
  return false;
}

namespace term {

namespace {
TermPtr make(TermOp op, TermPtr lhs = nullptr, TermPtr rhs = nullptr) {
  auto t = std::make_shared<Term>();
  t->op = op;
  t->lhs = std::move(lhs);
  t->rhs = std::move(rhs);
  return t;
}
}  // namespace

TermPtr var(std::string name) {
  auto t = std::make_shared<Term>();
  t->op = TermOp::Variable;
  t->name = std::move(name);
  return t;
}
TermPtr identity() { return make(TermOp::Identity); }
TermPtr zero() { return make(TermOp::Zero); }
TermPtr adj(TermPtr t) { return make(TermOp::Adjoint, std::move(t)); }
TermPtr add(TermPtr a, TermPtr b) { return make(TermOp::Add, std::move(a), std::move(b)); }
TermPtr sub(TermPtr a, TermPtr b) { return make(TermOp::Sub, std::move(a), std::move(b)); }
TermPtr mul(TermPtr a, TermPtr b) { return make(TermOp::Mul, std::move(a), std::move(b)); }
TermPtr comm(const TermPtr& a, const TermPtr& b) { return sub(mul(a, b), mul(b, a)); }
TermPtr smul(ComplexRational c, TermPtr t) {
  auto s = std::make_shared<Term>();
  s->op = TermOp::Scale;
  s->scalar = c;
  s->lhs = std::move(t);
  return s;
}

}  // namespace term

bool same_node(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Atom: return a.atom == b.atom && same_term(*a.term, *b.term);
    case NodeKind::Constant: return a.number == b.number;
    case NodeKind::Abs: return same_node(*a.lhs, *b.lhs);
    case NodeKind::Scale: return a.number == b.number && same_node(*a.lhs, *b.lhs);
    case NodeKind::Add:
    case NodeKind::TruncSub:
    case NodeKind::Max:
    case NodeKind::Min: return same_node(*a.lhs, *b.lhs) && same_node(*a.rhs, *b.rhs);
    case NodeKind::Sup:
    case NodeKind::Inf: return a.var == b.var && a.domain == b.domain && same_node(*a.lhs, *b.lhs);
  }
  return false;
}

namespace fx {

namespace {
NodePtr make(NodeKind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

NodePtr quantifier(NodeKind kind, std::string var, int domain, NodePtr body) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->var = std::move(var);
  n->domain = domain;
  n->lhs = std::move(body);
  return n;
}
}  // namespace

NodePtr atom(AtomKind a, TermPtr t) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Atom;
  n->atom = a;
  n->term = std::move(t);
  return n;
}
NodePtr constant(Rational c) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Constant;
  n->number = c;
  return n;
}
NodePtr add(NodePtr a, NodePtr b) { return make(NodeKind::Add, std::move(a), std::move(b)); }
NodePtr tsub(NodePtr a, NodePtr b) { return make(NodeKind::TruncSub, std::move(a), std::move(b)); }
NodePtr abs(NodePtr a) { return make(NodeKind::Abs, std::move(a)); }
NodePtr max(NodePtr a, NodePtr b) { return make(NodeKind::Max, std::move(a), std::move(b)); }
NodePtr min(NodePtr a, NodePtr b) { return make(NodeKind::Min, std::move(a), std::move(b)); }
NodePtr scale(Rational c, NodePtr a) {
  auto n = make(NodeKind::Scale, std::move(a));
  std::const_pointer_cast<Node>(n)->number = c;
  return n;
}
NodePtr sup(std::string var, int domain, NodePtr body) {
  return quantifier(NodeKind::Sup, std::move(var), domain, std::move(body));
}
NodePtr inf(std::string var, int domain, NodePtr body) {
  return quantifier(NodeKind::Inf, std::move(var), domain, std::move(body));
}
NodePtr sum(const std::vector<NodePtr>& parts) {
  if (parts.empty()) return constant(Rational(0));
  NodePtr acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = add(acc, parts[i]);
  return acc;
}

}  // namespace fx

Formula::Formula(NodePtr root, DomainMap free_vars) : root_(std::move(root)), free_vars_(std::move(free_vars)) {
  if (!root_) throw std::invalid_argument("formula without root");
}

DomainMap Formula::variable_domains() const {
  DomainMap out = free_vars_;
  std::function<void(const Node&)> walk = [&](const Node& n) {
    if (n.is_quantifier()) out.emplace(n.var, n.domain);
    if (n.lhs) walk(*n.lhs);
    if (n.rhs) walk(*n.rhs);
  };
  walk(*root_);
  return out;
}

bool operator==(const Formula& a, const Formula& b) {
  return a.free_vars_ == b.free_vars_ && same_node(*a.root_, *b.root_);
}

bool has_quantifier(const Node& n) {
  if (n.is_quantifier()) return true;
  return (n.lhs && has_quantifier(*n.lhs)) || (n.rhs && has_quantifier(*n.rhs));
}

namespace {

int alternations(const Node& n, NodeKind enclosing) {
  if (n.is_quantifier()) {
    const int here = n.kind == enclosing ? 0 : 1;
    return here + alternations(*n.lhs, n.kind);
  }
  int best = 0;
  // A connective breaks the block: a quantifier below it starts a new one.
  if (n.lhs) best = std::max(best, alternations(*n.lhs, NodeKind::Constant));
  if (n.rhs) best = std::max(best, alternations(*n.rhs, NodeKind::Constant));
  return best;
}

}  // namespace

int alternation_depth(const Node& n) { return alternations(n, NodeKind::Constant); }

std::string ValidationReport::str() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v;
  }
  return out.empty() ? "ok" : out;
}

ValidationError::ValidationError(ValidationReport report)
    : std::runtime_error("validation failed: " + report.str()), report_(std::move(report)) {}

namespace {

class Validator {
 public:
  Validator(Signature sig, const DomainMap& free) : sig_(sig), free_(free) {
    for (const auto& [name, k] : free) {
      if (k < 1) add("domain index of free variable " + name + " must be positive");
    }
  }

  void node(const Node& n, std::set<std::string>& bound) {
    switch (n.kind) {
      case NodeKind::Atom: {
        const bool normed_atom = n.atom == AtomKind::Norm;
        if (normed_atom != (sig_ == Signature::NormedSpace)) {
          add("atom " + std::string(atom_name(n.atom)) + " undefined in signature");
        }
        term(*n.term, bound);
        return;
      }
      case NodeKind::Constant: return;
      case NodeKind::Scale:
        if (n.number.is_negative()) add("negative scale " + n.number.str());
        node(*n.lhs, bound);
        return;
      case NodeKind::Abs: node(*n.lhs, bound); return;
      case NodeKind::Add:
      case NodeKind::TruncSub:
      case NodeKind::Max:
      case NodeKind::Min:
        node(*n.lhs, bound);
        node(*n.rhs, bound);
        return;
      case NodeKind::Sup:
      case NodeKind::Inf: {
        if (n.domain < 1) add("domain index of " + n.var + " must be positive");
        if (bound.count(n.var) || free_.count(n.var) || seen_.count(n.var)) {
          add("variable " + n.var + " bound twice");
        }
        seen_.insert(n.var);
        bound.insert(n.var);
        node(*n.lhs, bound);
        bound.erase(n.var);
        return;
      }
    }
  }

  ValidationReport take() { return std::move(report_); }

 private:
  void term(const Term& t, const std::set<std::string>& bound) {
    const bool normed = sig_ == Signature::NormedSpace;
    switch (t.op) {
      case TermOp::Variable:
        if (!bound.count(t.name) && !free_.count(t.name)) add("unbound variable " + t.name);
        return;
      case TermOp::Identity:
        if (normed) add("term I undefined in signature");
        return;
      case TermOp::Zero: return;
      case TermOp::Adjoint:
        if (normed) add("term adj undefined in signature");
        term(*t.lhs, bound);
        return;
      case TermOp::Scale:
        if (normed && !t.scalar.is_real()) add("complex scalar " + t.scalar.str() + " undefined in signature");
        term(*t.lhs, bound);
        return;
      case TermOp::Mul:
        if (normed) add("term mul undefined in signature");
        [[fallthrough]];
      case TermOp::Add:
      case TermOp::Sub:
        term(*t.lhs, bound);
        term(*t.rhs, bound);
        return;
    }
  }

  void add(std::string v) {
    if (std::find(report_.violations.begin(), report_.violations.end(), v) == report_.violations.end()) {
      report_.violations.push_back(std::move(v));
    }
  }

  Signature sig_;
  const DomainMap& free_;
  std::set<std::string> seen_;
  ValidationReport report_;
};

}  // namespace

ValidationReport validate(const Formula& f, Signature sig) {
  Validator v(sig, f.free_vars());
  std::set<std::string> bound;
  v.node(f.root(), bound);
  return v.take();
}

double term_bound(const Term& t, const DomainMap& domains) {
  switch (t.op) {
    case TermOp::Variable: {
      const auto it = domains.find(t.name);
      return it == domains.end() ? 0.0 : static_cast<double>(it->second);
    }
    case TermOp::Identity: return 1.0;
    case TermOp::Zero: return 0.0;
    case TermOp::Adjoint: return term_bound(*t.lhs, domains);
    case TermOp::Scale: return t.scalar.abs() * term_bound(*t.lhs, domains);
    case TermOp::Add:
    case TermOp::Sub: return term_bound(*t.lhs, domains) + term_bound(*t.rhs, domains);
    case TermOp::Mul: return term_bound(*t.lhs, domains) * term_bound(*t.rhs, domains);
  }
  return 0.0;
}

namespace {

RangeInterval node_range(const Node& n, const DomainMap& domains) {
  switch (n.kind) {
    case NodeKind::Atom: {
      const double b = term_bound(*n.term, domains);
      if (n.atom == AtomKind::ReTr || n.atom == AtomKind::ImTr) return {-b, b};
      return {0.0, b};
    }
    case NodeKind::Constant: {
      const double c = n.number.to_double();
      return {c, c};
    }
    case NodeKind::Scale: {
      const double s = n.number.to_double();
      const RangeInterval r = node_range(*n.lhs, domains);
      return s >= 0 ? RangeInterval{s * r.lo, s * r.hi} : RangeInterval{s * r.hi, s * r.lo};
    }
    case NodeKind::Abs: {
      const RangeInterval r = node_range(*n.lhs, domains);
      if (r.lo >= 0) return r;
      if (r.hi <= 0) return {-r.hi, -r.lo};
      return {0.0, std::max(-r.lo, r.hi)};
    }
    case NodeKind::Add: {
      const RangeInterval a = node_range(*n.lhs, domains), b = node_range(*n.rhs, domains);
      return {a.lo + b.lo, a.hi + b.hi};
    }
    case NodeKind::TruncSub: {
      const RangeInterval a = node_range(*n.lhs, domains), b = node_range(*n.rhs, domains);
      return {std::max(a.lo - b.hi, 0.0), std::max(a.hi - b.lo, 0.0)};
    }
    case NodeKind::Max: {
      const RangeInterval a = node_range(*n.lhs, domains), b = node_range(*n.rhs, domains);
      return {std::max(a.lo, b.lo), std::max(a.hi, b.hi)};
    }
    case NodeKind::Min: {
      const RangeInterval a = node_range(*n.lhs, domains), b = node_range(*n.rhs, domains);
      return {std::min(a.lo, b.lo), std::min(a.hi, b.hi)};
    }
    case NodeKind::Sup:
    case NodeKind::Inf: return node_range(*n.lhs, domains);
  }
  return {};
}

}  // namespace

RangeInterval range_of(const Formula& f) { return node_range(f.root(), f.variable_domains()); }

}  // namespace contmodel
