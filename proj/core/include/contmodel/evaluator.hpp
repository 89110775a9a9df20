#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>

#include "contmodel/formula.hpp"
#include "contmodel/models.hpp"

namespace contmodel {

struct EvalOptions {
  std::uint64_t seed = 0;
  int outer_restarts = 64;
  int inner_restarts = 32;
  int refinement_steps = 200;
  double tolerance = 1e-3;
  /// Restarts and refinement steps shrink by this factor per nesting level.
  double split = 0.5;
  /// Share of the best screened starts that receive local refinement.
  double elite_fraction = 1.0 / 16.0;
  /// The same share for an outermost block with a quantifier-free body.
  double flat_elite_fraction = 1.0 / 4.0;
};

enum class EvalStatus {
  Exact,           // quantifier-free
  CertifiedLower,  // single sup block: value is attained, hence <= the true sup
  CertifiedUpper,  // single inf block
  Heuristic,       // alternating quantifiers or quantifiers under connectives
};

std::string_view to_string(EvalStatus s);

struct EvalResult {
  double value = 0.0;
  EvalStatus status = EvalStatus::Exact;
  /// Best-path point of every quantified variable.
  Valuation witnesses;
  std::int64_t samples_used = 0;
  std::uint64_t seed = 0;
};

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact value of a quantifier-free formula under a valuation of its free
/// variables.
double eval_qf(const Model& m, const Formula& f, const Valuation& v);
double eval_qf(const Model& m, const Node& n, const Valuation& v);

/// phi^M by recursive multi-start search; `free_values` supplies free variables.
EvalResult evaluate(const Model& m, const Formula& f, const EvalOptions& opts, const Valuation& free_values = {});

/// Re-evaluates the formula with every quantifier replaced by its witness.
/// Throws ShapeError when a witness is missing or does not fit its domain.
double witness_replay(const Model& m, const Formula& f, const EvalResult& r, const Valuation& free_values = {});

}  // namespace contmodel
