#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "contmodel/rational.hpp"

namespace contmodel {

enum class Signature { TracialAlgebra, NormedSpace };

std::string_view to_string(Signature sig);

// ---------------------------------------------------------------------------
// Terms

enum class TermOp { Variable, Identity, Zero, Adjoint, Add, Sub, Mul, Scale };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  TermOp op = TermOp::Zero;
  std::string name;        // Variable
  ComplexRational scalar;  // Scale
  TermPtr lhs;             // Adjoint, Add, Sub, Mul, Scale
  TermPtr rhs;             // Add, Sub, Mul
};

bool same_term(const Term& a, const Term& b);

namespace term {
TermPtr var(std::string name);
TermPtr identity();
TermPtr zero();
TermPtr adj(TermPtr t);
TermPtr add(TermPtr a, TermPtr b);
TermPtr sub(TermPtr a, TermPtr b);
TermPtr mul(TermPtr a, TermPtr b);
/// [a, b] = ab - ba; there is no commutator node, only this expansion.
TermPtr comm(const TermPtr& a, const TermPtr& b);
TermPtr smul(ComplexRational c, TermPtr t);
}  // namespace term

// ---------------------------------------------------------------------------
// Formulas

enum class AtomKind { Norm2, NormInf, ReTr, ImTr, AbsTr, Norm };

std::string_view atom_name(AtomKind a);

enum class NodeKind { Atom, Constant, Add, TruncSub, Abs, Max, Min, Scale, Sup, Inf };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind = NodeKind::Constant;
  AtomKind atom = AtomKind::Norm2;  // Atom
  TermPtr term;                     // Atom
  Rational number;                  // Constant, Scale
  NodePtr lhs;                      // unary/binary connectives, quantifier body
  NodePtr rhs;                      // binary connectives
  std::string var;                  // Sup, Inf
  int domain = 1;                   // Sup, Inf

  bool is_quantifier() const { return kind == NodeKind::Sup || kind == NodeKind::Inf; }
};

bool same_node(const Node& a, const Node& b);

namespace fx {
NodePtr atom(AtomKind a, TermPtr t);
NodePtr constant(Rational c);
NodePtr add(NodePtr a, NodePtr b);
/// a -. b = max(a - b, 0)
NodePtr tsub(NodePtr a, NodePtr b);
NodePtr abs(NodePtr a);
NodePtr max(NodePtr a, NodePtr b);
NodePtr min(NodePtr a, NodePtr b);
NodePtr scale(Rational c, NodePtr a);
NodePtr sup(std::string var, int domain, NodePtr body);
NodePtr inf(std::string var, int domain, NodePtr body);
/// Left-associated sum of one or more summands.
NodePtr sum(const std::vector<NodePtr>& parts);
}  // namespace fx

using DomainMap = std::map<std::string, int>;

/// Immutable formula: a root node plus the domain declarations of its free
/// variables.
class Formula {
 public:
  Formula() = default;
  explicit Formula(NodePtr root, DomainMap free_vars = {});

  const Node& root() const { return *root_; }
  const NodePtr& root_ptr() const { return root_; }
  const DomainMap& free_vars() const { return free_vars_; }
  bool is_sentence() const { return free_vars_.empty(); }

  /// Domain index of every variable, bound or free. Later bindings of a name
  /// shadow nothing because names are bound at most once in valid formulas.
  DomainMap variable_domains() const;

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  NodePtr root_;
  DomainMap free_vars_;
};

bool has_quantifier(const Node& n);

/// Number of maximal same-kind quantifier blocks along the deepest path.
int alternation_depth(const Node& n);

// ---------------------------------------------------------------------------
// Validation and ranges

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string str() const;
};

ValidationReport validate(const Formula& f, Signature sig);

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

struct RangeInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v, double slack = 0.0) const { return v >= lo - slack && v <= hi + slack; }
};

/// Structural upper bound on the operator norm (or space norm) of a term whose
/// variables lie in the given domains.
double term_bound(const Term& t, const DomainMap& domains);

RangeInterval range_of(const Formula& f);

}  // namespace contmodel
