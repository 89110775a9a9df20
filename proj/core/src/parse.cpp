#include "contmodel/parse.hpp"

#include <cctype>
#include <charconv>
#include <set>
#include <vector>

namespace contmodel {

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error(message + " at position " + std::to_string(position)),
      message_(message),
      position_(position) {}

namespace {

enum class Tok { Ident, Int, Slash, Star, Plus, TSub, Minus, LParen, RParen, Comma, Colon, Dot, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({Tok::Ident, std::string(s.substr(start, i - start)), start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      out.push_back({Tok::Int, std::string(s.substr(start, i - start)), start});
      continue;
    }
    if (c == '-' && i + 1 < s.size() && s[i + 1] == '.') {
      out.push_back({Tok::TSub, "-.", start});
      i += 2;
      continue;
    }
    Tok k;
    switch (c) {
      case '/': k = Tok::Slash; break;
      case '*': k = Tok::Star; break;
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case ',': k = Tok::Comma; break;
      case ':': k = Tok::Colon; break;
      case '.': k = Tok::Dot; break;
      default: throw ParseError(std::string("unexpected character '") + c + "'", start);
    }
    out.push_back({k, std::string(1, c), start});
    ++i;
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

const std::set<std::string, std::less<>> kAtomNames = {"norm2", "normInf", "retr", "imtr", "abstr", "norm"};

AtomKind atom_from_name(std::string_view name) {
  if (name == "norm2") return AtomKind::Norm2;
  if (name == "normInf") return AtomKind::NormInf;
  if (name == "retr") return AtomKind::ReTr;
  if (name == "imtr") return AtomKind::ImTr;
  if (name == "abstr") return AtomKind::AbsTr;
  return AtomKind::Norm;
}

class Parser {
 public:
  Parser(std::string_view text, const DomainMap& free) : toks_(lex(text)), free_(free) {}

  NodePtr parse() {
    NodePtr f = formula();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "' after formula");
    return f;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().pos); }
  void expect(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what);
    next();
  }
  bool is_ident(std::string_view name, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Ident && peek(ahead).text == name;
  }

  NodePtr formula() {
    if (is_ident("sup") || is_ident("inf")) return quant();
    return sum();
  }

  NodePtr quant() {
    const bool is_sup = next().text == "sup";
    if (peek().kind != Tok::Ident) fail("expected variable after quantifier");
    const Token var = next();
    if (bound_.count(var.text) || seen_.count(var.text) || free_.count(var.text)) {
      throw ParseError("variable " + var.text + " bound twice", var.pos);
    }
    expect(Tok::Colon, "':' after quantified variable");
    const Token dom = peek();
    if (dom.kind != Tok::Ident || dom.text.size() < 2 || dom.text[0] != 'D') fail("expected domain 'D<k>'");
    int k = 0;
    const auto [ptr, ec] = std::from_chars(dom.text.data() + 1, dom.text.data() + dom.text.size(), k);
    if (ec != std::errc() || ptr != dom.text.data() + dom.text.size() || k < 1) {
      fail("domain index must be a positive integer");
    }
    next();
    expect(Tok::Dot, "'.' after domain");
    const Tok after = peek().kind;
    if (after == Tok::End || after == Tok::RParen || after == Tok::Comma) fail("expected formula after '.'");
    seen_.insert(var.text);
    bound_.insert(var.text);
    NodePtr body = formula();
    bound_.erase(var.text);
    return is_sup ? fx::sup(var.text, k, body) : fx::inf(var.text, k, body);
  }

  NodePtr sum() {
    NodePtr acc = prod();
    while (peek().kind == Tok::Plus || peek().kind == Tok::TSub) {
      const bool plus = next().kind == Tok::Plus;
      NodePtr rhs = prod();
      acc = plus ? fx::add(acc, rhs) : fx::tsub(acc, rhs);
    }
    return acc;
  }

  bool at_number() const {
    return peek().kind == Tok::Int || (peek().kind == Tok::Minus && peek(1).kind == Tok::Int);
  }

  Rational rational() {
    bool neg = false;
    if (peek().kind == Tok::Minus) {
      next();
      neg = true;
    }
    if (peek().kind != Tok::Int) fail("expected number");
    const std::int64_t num = integer(next());
    std::int64_t den = 1;
    if (peek().kind == Tok::Slash) {
      next();
      if (peek().kind != Tok::Int) fail("expected denominator");
      const Token& d = next();
      den = integer(d);
      if (den == 0) throw ParseError("zero denominator", d.pos);
    }
    return Rational(neg ? -num : num, den);
  }

  std::int64_t integer(const Token& t) const {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) throw ParseError("integer out of range", t.pos);
    return v;
  }

  NodePtr prod() {
    if (at_number()) {
      const Rational r = rational();
      if (peek().kind == Tok::Star) {
        next();
        return fx::scale(r, prim());
      }
      return fx::constant(r);
    }
    return prim();
  }

  NodePtr prim() {
    const Token& t = peek();
    if (t.kind == Tok::LParen) {
      next();
      NodePtr f = formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (at_number()) return fx::constant(rational());
    if (t.kind != Tok::Ident) {
      if (t.kind == Tok::End) fail("unexpected end of input");
      fail("unexpected '" + t.text + "'");
    }
    if (t.text == "abs") {
      next();
      expect(Tok::LParen, "'(' after abs");
      NodePtr a = formula();
      close_args("abs", 1);
      return fx::abs(a);
    }
    if (t.text == "max" || t.text == "min") {
      const bool is_max = next().text == "max";
      expect(Tok::LParen, "'('");
      NodePtr a = formula();
      if (peek().kind != Tok::Comma) fail(std::string("arity mismatch: ") + (is_max ? "max" : "min") + " expects 2 arguments");
      next();
      NodePtr b = formula();
      close_args(is_max ? "max" : "min", 2);
      return is_max ? fx::max(a, b) : fx::min(a, b);
    }
    if (kAtomNames.count(t.text)) {
      const AtomKind a = atom_from_name(next().text);
      expect(Tok::LParen, "'(' after atom");
      TermPtr arg = term();
      close_args(std::string(atom_name(a)), 1);
      return fx::atom(a, arg);
    }
    if (t.text == "sup" || t.text == "inf") fail("quantifier must be parenthesized here");
    throw ParseError("unknown identifier '" + t.text + "'", t.pos);
  }

  void close_args(const std::string& name, int arity) {
    if (peek().kind == Tok::Comma) {
      fail("arity mismatch: " + name + " expects " + std::to_string(arity) + " argument" + (arity == 1 ? "" : "s"));
    }
    expect(Tok::RParen, "')'");
  }

  ComplexRational complex_rational() {
    const Rational first = rational();
    if (peek().kind == Tok::Star && is_ident("i", 1)) {
      next();
      next();
      return {Rational(0), first};
    }
    if ((peek().kind == Tok::Plus || peek().kind == Tok::Minus) && peek(1).kind == Tok::Int) {
      const bool neg = next().kind == Tok::Minus;
      const Rational im = rational();
      expect(Tok::Star, "'*i' in complex scalar");
      if (!is_ident("i")) fail("expected 'i' in complex scalar");
      next();
      return {first, neg ? -im : im};
    }
    return {first, Rational(0)};
  }

  TermPtr term() {
    const Token& t = peek();
    if (t.kind == Tok::Int) {
      if (t.text != "0") fail("only 0 is a numeric term");
      next();
      return term::zero();
    }
    if (t.kind != Tok::Ident) fail("expected term");
    const bool call = peek(1).kind == Tok::LParen;
    if (call) {
      const std::string name = t.text;
      if (name == "adj") {
        next();
        next();
        TermPtr a = term();
        close_args(name, 1);
        return term::adj(a);
      }
      if (name == "add" || name == "sub" || name == "mul" || name == "comm") {
        next();
        next();
        TermPtr a = term();
        if (peek().kind != Tok::Comma) fail("arity mismatch: " + name + " expects 2 arguments");
        next();
        TermPtr b = term();
        close_args(name, 2);
        if (name == "add") return term::add(a, b);
        if (name == "sub") return term::sub(a, b);
        if (name == "mul") return term::mul(a, b);
        return term::comm(a, b);
      }
      if (name == "smul") {
        next();
        next();
        const ComplexRational c = complex_rational();
        if (peek().kind != Tok::Comma) fail("arity mismatch: smul expects 2 arguments");
        next();
        TermPtr a = term();
        close_args(name, 2);
        return term::smul(c, a);
      }
      throw ParseError("unknown identifier '" + name + "'", t.pos);
    }
    if (t.text == "I") {
      next();
      return term::identity();
    }
    if (!bound_.count(t.text) && !free_.count(t.text)) {
      throw ParseError("free variable " + t.text + " without domain declaration", t.pos);
    }
    return term::var(next().text);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const DomainMap& free_;
  std::set<std::string> bound_;
  std::set<std::string> seen_;
};

bool is_sum(const Node& n) { return n.kind == NodeKind::Add || n.kind == NodeKind::TruncSub; }

std::string paren(const std::string& s) { return "(" + s + ")"; }

}  // namespace

Formula parse_formula(std::string_view text, Signature sig, const DomainMap& free_domains) {
  Parser p(text, free_domains);
  Formula f(p.parse(), free_domains);
  ValidationReport report = validate(f, sig);
  if (!report.ok()) throw ValidationError(std::move(report));
  return f;
}

std::string print_term(const Term& t) {
  switch (t.op) {
    case TermOp::Variable: return t.name;
    case TermOp::Identity: return "I";
    case TermOp::Zero: return "0";
    case TermOp::Adjoint: return "adj(" + print_term(*t.lhs) + ")";
    case TermOp::Add: return "add(" + print_term(*t.lhs) + "," + print_term(*t.rhs) + ")";
    case TermOp::Sub: {
      const Term& l = *t.lhs;
      const Term& r = *t.rhs;
      if (l.op == TermOp::Mul && r.op == TermOp::Mul && same_term(*l.lhs, *r.rhs) && same_term(*l.rhs, *r.lhs)) {
        return "comm(" + print_term(*l.lhs) + "," + print_term(*l.rhs) + ")";
      }
      return "sub(" + print_term(l) + "," + print_term(r) + ")";
    }
    case TermOp::Mul: return "mul(" + print_term(*t.lhs) + "," + print_term(*t.rhs) + ")";
    case TermOp::Scale: return "smul(" + t.scalar.str() + "," + print_term(*t.lhs) + ")";
  }
  return "?";
}

std::string print_node(const Node& n) {
  switch (n.kind) {
    case NodeKind::Atom: return std::string(atom_name(n.atom)) + "(" + print_term(*n.term) + ")";
    case NodeKind::Constant: return n.number.str();
    case NodeKind::Scale: {
      const Node& c = *n.lhs;
      const bool wrap = is_sum(c) || c.is_quantifier() || c.kind == NodeKind::Scale;
      return n.number.str() + "*" + (wrap ? paren(print_node(c)) : print_node(c));
    }
    case NodeKind::Add:
    case NodeKind::TruncSub: {
      const Node& l = *n.lhs;
      const Node& r = *n.rhs;
      const std::string ls = l.is_quantifier() ? paren(print_node(l)) : print_node(l);
      const std::string rs = (is_sum(r) || r.is_quantifier()) ? paren(print_node(r)) : print_node(r);
      return ls + (n.kind == NodeKind::Add ? " + " : " -. ") + rs;
    }
    case NodeKind::Abs: return "abs(" + print_node(*n.lhs) + ")";
    case NodeKind::Max: return "max(" + print_node(*n.lhs) + "," + print_node(*n.rhs) + ")";
    case NodeKind::Min: return "min(" + print_node(*n.lhs) + "," + print_node(*n.rhs) + ")";
    case NodeKind::Sup:
    case NodeKind::Inf:
      return std::string(n.kind == NodeKind::Sup ? "sup " : "inf ") + n.var + ":D" + std::to_string(n.domain) +
             " . " + print_node(*n.lhs);
  }
  return "?";
}

std::string print_formula(const Formula& f) { return print_node(f.root()); }

}  // namespace contmodel
