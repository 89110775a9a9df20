#include "contmodel/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "contmodel/random.hpp"

namespace contmodel {

std::string_view to_string(EvalStatus s) {
  switch (s) {
    case EvalStatus::Exact: return "exact";
    case EvalStatus::CertifiedLower: return "certified-lower";
    case EvalStatus::CertifiedUpper: return "certified-upper";
    case EvalStatus::Heuristic: return "heuristic";
  }
  return "?";
}

namespace {

double combine(const Node& n, double a, double b) {
  switch (n.kind) {
    case NodeKind::Add: return a + b;
    case NodeKind::TruncSub: return std::max(a - b, 0.0);
    case NodeKind::Max: return std::max(a, b);
    case NodeKind::Min: return std::min(a, b);
    case NodeKind::Abs: return std::abs(a);
    case NodeKind::Scale: return n.number.to_double() * a;
    default: return a;
  }
}

// With `transparent`, quantifier nodes evaluate their body under the current
// valuation (the witness replay semantics); otherwise they are an error.
double eval_core(const Model& m, const Node& n, const Valuation& v, bool transparent) {
  switch (n.kind) {
    case NodeKind::Atom: return eval_atom(m, n.atom, eval_term(m, *n.term, v));
    case NodeKind::Constant: return n.number.to_double();
    case NodeKind::Abs:
    case NodeKind::Scale: return combine(n, eval_core(m, *n.lhs, v, transparent), 0.0);
    case NodeKind::Add:
    case NodeKind::TruncSub:
    case NodeKind::Max:
    case NodeKind::Min: {
      const double a = eval_core(m, *n.lhs, v, transparent);
      const double b = eval_core(m, *n.rhs, v, transparent);
      return combine(n, a, b);
    }
    case NodeKind::Sup:
    case NodeKind::Inf:
      if (!transparent) throw std::invalid_argument("eval_qf: formula contains quantifiers");
      return eval_core(m, *n.lhs, v, transparent);
  }
  return 0.0;
}

// Value together with the same formula evaluated with plain subtraction in
// place of truncated subtraction. Search uses the second component to break
// exact ties, so plateaus of x -. y still have a slope.
std::pair<double, double> eval_shadowed(const Model& m, const Node& n, const Valuation& v) {
  switch (n.kind) {
    case NodeKind::Atom: {
      const double a = eval_atom(m, n.atom, eval_term(m, *n.term, v));
      return {a, a};
    }
    case NodeKind::Constant: return {n.number.to_double(), n.number.to_double()};
    case NodeKind::Abs:
    case NodeKind::Scale: {
      const auto [a, sa] = eval_shadowed(m, *n.lhs, v);
      return {combine(n, a, 0.0), combine(n, sa, 0.0)};
    }
    case NodeKind::Add:
    case NodeKind::TruncSub:
    case NodeKind::Max:
    case NodeKind::Min: {
      const auto [a, sa] = eval_shadowed(m, *n.lhs, v);
      const auto [b, sb] = eval_shadowed(m, *n.rhs, v);
      return {combine(n, a, b), n.kind == NodeKind::TruncSub ? sa - sb : combine(n, sa, sb)};
    }
    case NodeKind::Sup:
    case NodeKind::Inf: break;
  }
  throw std::invalid_argument("eval_shadowed: formula contains quantifiers");
}

Element center_of(const Model& m, int k) {
  if (const auto* mm = std::get_if<MatrixModel>(&m)) return make_element(mm->zero(), k);
  return make_element(Eigen::VectorXd::Zero(std::get<NormedModel>(m).dimension()), k);
}

struct Outcome {
  double value = 0.0;
  Valuation witnesses;
  double shadow = 0.0;
};

enum class Mode { Full, Warm };

struct Candidate {
  std::vector<Element> point;
  double value = 0.0;
  Valuation inner;
  double shadow = 0.0;
};

// Strict improvement for a block with the given sign (+1 sup, -1 inf).
bool better(double sign, double value, double shadow, const Candidate& than) {
  if (value != than.value) return sign * value > sign * than.value;
  return sign * shadow > sign * than.shadow;
}

// Maps a flat coordinate index of a quantifier block to (variable, block, slot).
struct CoordinateMap {
  struct Entry {
    int var;
    int block;  // -1 for vectors
    Eigen::Index slot;
  };
  std::vector<Entry> entries;

  CoordinateMap(const std::vector<Element>& point) {
    for (int v = 0; v < int(point.size()); ++v) {
      const Element& e = point[v];
      if (e.is_matrix()) {
        for (int b = 0; b < int(e.blocks().size()); ++b)
          for (Eigen::Index s = 0; s < 2 * e.blocks()[b].size(); ++s) entries.push_back({v, b, s});
      } else {
        for (Eigen::Index s = 0; s < e.vec().size(); ++s) entries.push_back({v, -1, s});
      }
    }
  }

  static double& at(Element& e, const Entry& c) {
    if (c.block < 0) return e.vec()[c.slot];
    // std::complex<double> is layout-compatible with double[2].
    return reinterpret_cast<double*>(e.blocks()[c.block].data())[c.slot];
  }
};

class Solver {
 public:
  Solver(const Model& m, const EvalOptions& o) : model_(m), opts_(o) {}

  std::int64_t samples() const { return samples_; }

  Outcome solve(const Node& n, Valuation& val, std::uint64_t seed, int depth, const Valuation* warm, Mode mode) {
    if (!has_quantifier(n)) {
      ++samples_;
      const auto [value, shadow] = eval_shadowed(model_, n, val);
      return {value, {}, shadow};
    }
    if (n.is_quantifier()) return solve_block(n, val, seed, depth, warm, mode);
    Outcome a = solve(*n.lhs, val, derive_seed(seed, {1}), depth, warm, mode);
    if (!n.rhs) {
      const double v = combine(n, a.value, 0.0);
      return {v, std::move(a.witnesses), v};
    }
    Outcome b = solve(*n.rhs, val, derive_seed(seed, {2}), depth, warm, mode);
    a.witnesses.merge(b.witnesses);
    const double v = combine(n, a.value, b.value);
    return {v, std::move(a.witnesses), v};
  }

 private:
  int restarts(int depth) const {
    const double r = depth == 0 ? opts_.outer_restarts
                                : std::floor(opts_.inner_restarts * std::pow(opts_.split, depth - 1) + 1e-9);
    if (r < 1) throw BudgetError("budget exhausted below minimum restarts at quantifier depth " + std::to_string(depth));
    return static_cast<int>(r);
  }

  int steps(int depth) const {
    const double s = std::floor(opts_.refinement_steps * std::pow(opts_.split, depth) + 1e-9);
    if (s < 1) throw BudgetError("budget exhausted below one refinement step at quantifier depth " + std::to_string(depth));
    return static_cast<int>(s);
  }

  Outcome objective(const std::vector<const Node*>& vars, const Node& body, const std::vector<Element>& point,
                    Valuation& val, std::uint64_t seed, int depth, const Valuation* warm, Mode mode) {
    for (std::size_t i = 0; i < vars.size(); ++i) val.insert_or_assign(vars[i]->var, point[i]);
    return solve(body, val, seed, depth + 1, warm, mode);
  }

  Outcome solve_block(const Node& head, Valuation& val, std::uint64_t seed, int depth, const Valuation* warm,
                      Mode mode) {
    std::vector<const Node*> vars;
    const Node* body = &head;
    while (body->kind == head.kind) {
      vars.push_back(body);
      body = body->lhs.get();
    }
    const double sign = head.kind == NodeKind::Sup ? 1.0 : -1.0;
    const bool nested = has_quantifier(*body);
    const int r_total = restarts(depth);
    const int s_total = steps(depth);

    std::optional<std::vector<Element>> warm_point;
    if (warm) {
      std::vector<Element> p;
      for (const Node* q : vars) {
        const auto it = warm->find(q->var);
        if (it == warm->end()) break;
        p.push_back(it->second);
        project_in_place(model_, p.back(), q->domain);
      }
      if (p.size() == vars.size()) warm_point = std::move(p);
    }
    const bool quick = warm_point && mode == Mode::Warm;

    std::vector<Candidate> cands;
    if (warm_point) {
      Outcome o = objective(vars, *body, *warm_point, val, derive_seed(seed, {0}), depth, warm, Mode::Warm);
      cands.push_back({*warm_point, o.value, std::move(o.witnesses), o.shadow});
    }
    if (!quick) {
      // The ball center is a deterministic extra start.
      std::vector<Element> point;
      for (const Node* q : vars) point.push_back(center_of(model_, q->domain));
      Outcome o = objective(vars, *body, point, val, derive_seed(seed, {5}), depth, nullptr, Mode::Full);
      cands.push_back({std::move(point), o.value, std::move(o.witnesses), o.shadow});
    }
    const int fresh = quick ? std::max(1, r_total / 4) : r_total;
    for (int r = 0; r < fresh; ++r) {
      std::vector<Element> point;
      point.reserve(vars.size());
      for (std::size_t i = 0; i < vars.size(); ++i) {
        point.push_back(sample_domain(model_, vars[i]->domain, derive_seed(seed, {1, std::uint64_t(r), i})));
      }
      Outcome o = objective(vars, *body, point, val, derive_seed(seed, {2, std::uint64_t(r)}), depth, nullptr,
                            Mode::Full);
      cands.push_back({std::move(point), o.value, std::move(o.witnesses), o.shadow});
    }

    // Stable ordering keeps the lowest index on ties.
    auto ranked = [&] {
      std::vector<int> order(cands.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return better(sign, cands[a].value, cands[a].shadow, cands[b]); });
      return order;
    };

    std::vector<int> order = ranked();
    const double share = !nested && depth == 0 ? opts_.flat_elite_fraction : opts_.elite_fraction;
    const int elites = quick ? 1 : std::max(1, int(std::ceil(r_total * share)));
    std::vector<int> to_refine(order.begin(), order.begin() + std::min<int>(elites, int(order.size())));
    if (warm_point && std::find(to_refine.begin(), to_refine.end(), 0) == to_refine.end()) to_refine.push_back(0);

    const double h0 = quick ? 0.05 : 0.25;
    const double h_min = (nested || quick) ? opts_.tolerance : opts_.tolerance * 1e-3;
    const int budget = quick ? std::max(1, s_total / 2) : s_total;
    for (const int idx : to_refine) {
      refine(cands[idx], vars, *body, val, derive_seed(seed, {3, std::uint64_t(idx)}), depth, nested, budget, h0,
             h_min, sign);
    }

    if (nested && mode == Mode::Full) {
      order = ranked();
      const int polish = std::min<int>(elites, int(order.size()));
      for (int i = 0; i < polish; ++i) {
        Candidate& c = cands[order[i]];
        Outcome o = objective(vars, *body, c.point, val, derive_seed(seed, {4, std::uint64_t(i)}), depth, &c.inner,
                              Mode::Full);
        c.value = o.value;
        c.shadow = o.shadow;
        c.inner = std::move(o.witnesses);
      }
    }

    order = ranked();
    Candidate& best = cands[order.front()];
    for (const Node* q : vars) val.erase(q->var);
    Outcome out{best.value, std::move(best.inner), best.value};
    for (std::size_t i = 0; i < vars.size(); ++i) out.witnesses.insert_or_assign(vars[i]->var, best.point[i]);
    return out;
  }

  // Coordinate perturbation with step shrinking by 0.7 after a full cycle
  // without improvement. For nested bodies each trial re-solves the inner
  // quantifiers warm-started from the incumbent's inner witnesses. Flat
  // bodies also probe random directions before each shrink, which gets the
  // search off the kinks of abs/max/norm terms, and take a pattern move
  // after every sweep.
  void refine(Candidate& c, const std::vector<const Node*>& vars, const Node& body, Valuation& val,
              std::uint64_t seed, int depth, bool nested, int budget, double h0, double h_min, double sign) {
    const CoordinateMap map(c.point);
    const int dim = static_cast<int>(map.entries.size());
    if (dim == 0) return;
    const std::int64_t trials = nested ? budget : std::int64_t(budget) * dim;
    Rng rng(derive_seed(seed, {7}));
    std::normal_distribution<double> gauss;
    double h = h0;
    int failures = 0;
    std::vector<Element> trial = c.point;
    auto try_point = [&](std::uint64_t tag) {
      Outcome o = objective(vars, body, trial, val, derive_seed(seed, {tag}), depth, nested ? &c.inner : nullptr,
                            Mode::Warm);
      if (better(sign, o.value, o.shadow, c)) {
        c.point = trial;
        c.value = o.value;
        c.shadow = o.shadow;
        c.inner = std::move(o.witnesses);
        return true;
      }
      trial = c.point;
      return false;
    };
    std::vector<Element> anchor = c.point;
    std::vector<double> delta(dim);
    for (std::int64_t t = 0; t < trials; ++t) {
      if (!nested && t > 0 && t % dim == 0) {
        // Pattern move along the displacement of the last sweep, doubled while it keeps paying.
        for (int i = 0; i < dim; ++i) {
          const auto& e = map.entries[i];
          delta[i] = CoordinateMap::at(c.point[e.var], e) - CoordinateMap::at(anchor[e.var], e);
        }
        anchor = c.point;
        for (int rep = 0; rep < 8 && std::any_of(delta.begin(), delta.end(), [](double d) { return d != 0.0; });
             ++rep) {
          for (int i = 0; i < dim; ++i) CoordinateMap::at(trial[map.entries[i].var], map.entries[i]) += delta[i];
          for (std::size_t v = 0; v < vars.size(); ++v) project_in_place(model_, trial[v], vars[v]->domain);
          if (!try_point(std::uint64_t(1) << 41 | std::uint64_t(t) << 8 | std::uint64_t(rep))) break;
          for (double& d : delta) d *= 2;
        }
      }
      const auto& e = map.entries[t % dim];
      const int k = vars[e.var]->domain;
      bool accepted = false;
      for (const double dir : {1.0, -1.0}) {
        Element& x = trial[e.var];
        CoordinateMap::at(x, e) += dir * h * k;
        project_in_place(model_, x, k, e.block);
        if (try_point(2 * std::uint64_t(t) + (dir > 0 ? 0 : 1))) {
          accepted = true;
          break;
        }
      }
      if (accepted) {
        failures = 0;
      } else if (++failures >= dim) {
        failures = 0;
        if (!nested) {
          for (int r = 0; r < dim && !accepted; ++r) {
            for (int i = 0; i < dim; ++i) CoordinateMap::at(trial[map.entries[i].var], map.entries[i]) += h * gauss(rng);
            for (std::size_t v = 0; v < vars.size(); ++v) project_in_place(model_, trial[v], vars[v]->domain);
            accepted = try_point(std::uint64_t(1) << 40 | std::uint64_t(t) << 8 | std::uint64_t(r));
          }
        }
        if (!accepted) {
          h *= 0.7;
          if (h < h_min) break;
        }
      }
    }
  }

  const Model& model_;
  const EvalOptions& opts_;
  std::int64_t samples_ = 0;
};

void check_options(const EvalOptions& o) {
  if (o.outer_restarts < 1 || o.inner_restarts < 1 || o.refinement_steps < 1) {
    throw BudgetError("budget exhausted below minimum restarts: all counts must be >= 1");
  }
  if (!(o.tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
  if (!(o.split > 0 && o.split <= 1)) throw std::invalid_argument("split factor must lie in (0, 1]");
  if (!(o.elite_fraction > 0 && o.elite_fraction <= 1)) throw std::invalid_argument("elite fraction must lie in (0, 1]");
  if (!(o.flat_elite_fraction > 0 && o.flat_elite_fraction <= 1)) {
    throw std::invalid_argument("flat elite fraction must lie in (0, 1]");
  }
}

void check_free_values(const Model& m, const Formula& f, const Valuation& v) {
  for (const auto& [name, k] : f.free_vars()) {
    const auto it = v.find(name);
    if (it == v.end()) throw ShapeError("missing value for free variable " + name);
    check_shape(m, it->second);
    if (it->second.domain != k) throw ShapeError("free variable " + name + " has wrong domain index");
  }
}

}  // namespace

double eval_qf(const Model& m, const Node& n, const Valuation& v) { return eval_core(m, n, v, false); }

double eval_qf(const Model& m, const Formula& f, const Valuation& v) {
  const ValidationReport report = validate(f, signature_of(m));
  if (!report.ok()) throw ValidationError(report);
  check_free_values(m, f, v);
  return eval_core(m, f.root(), v, false);
}

EvalResult evaluate(const Model& m, const Formula& f, const EvalOptions& opts, const Valuation& free_values) {
  ValidationReport report = validate(f, signature_of(m));
  if (!report.ok()) throw ValidationError(std::move(report));
  check_options(opts);
  check_free_values(m, f, free_values);

  Solver solver(m, opts);
  Valuation val = free_values;
  Outcome o = solver.solve(f.root(), val, opts.seed, 0, nullptr, Mode::Full);

  EvalResult r;
  r.value = o.value;
  r.witnesses = std::move(o.witnesses);
  r.samples_used = solver.samples();
  r.seed = opts.seed;
  const Node& root = f.root();
  if (!has_quantifier(root)) {
    r.status = EvalStatus::Exact;
  } else if (root.is_quantifier() && alternation_depth(root) == 1) {
    r.status = root.kind == NodeKind::Sup ? EvalStatus::CertifiedLower : EvalStatus::CertifiedUpper;
  } else {
    r.status = EvalStatus::Heuristic;
  }
  return r;
}

double witness_replay(const Model& m, const Formula& f, const EvalResult& r, const Valuation& free_values) {
  check_free_values(m, f, free_values);
  Valuation val = free_values;
  std::vector<const Node*> stack{&f.root()};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (n->is_quantifier()) {
      const auto it = r.witnesses.find(n->var);
      if (it == r.witnesses.end()) throw ShapeError("no witness for variable " + n->var);
      const Element& w = it->second;
      check_shape(m, w);
      if (w.domain != n->domain) {
        throw ShapeError("witness for " + n->var + " has domain index " + std::to_string(w.domain) + ", expected " +
                         std::to_string(n->domain));
      }
      if (element_norm(m, w) > n->domain + 1e-9) throw ShapeError("witness for " + n->var + " leaves its domain");
      val.insert_or_assign(n->var, w);
    }
    if (n->lhs) stack.push_back(n->lhs.get());
    if (n->rhs) stack.push_back(n->rhs.get());
  }
  return eval_core(m, f.root(), val, true);
}

}  // namespace contmodel
