#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "contmodel/evaluator.hpp"
#include "contmodel/models.hpp"
#include "contmodel/sentences.hpp"

namespace contmodel {

struct FingerprintEntry {
  std::string sentence;
  EvalResult result;
};

/// Finite restriction of f_M to a panel (f'_M for universal panels).
struct Fingerprint {
  std::string panel_id;
  std::string panel_version;
  PanelKind panel_kind = PanelKind::Full;
  std::string model;  // model spec JSON
  EvalOptions options;
  std::vector<FingerprintEntry> entries;  // panel order

  const EvalResult* find(const std::string& sentence) const;
};

class PanelMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Fingerprint fingerprint(const Model& m, const Panel& panel, const EvalOptions& opts);

enum class Order { Equal, Leq, Geq, Incomparable };
std::string_view to_string(Order o);

struct OrderVerdict {
  Order order = Order::Incomparable;
  /// b - a per sentence, panel order.
  std::vector<std::pair<std::string, double>> margins;
  double tolerance = 0.0;
};

/// leq iff a <= b + tol on every sentence, geq dually, equal when both hold.
OrderVerdict compare_universal(const Fingerprint& a, const Fingerprint& b, double tol);

struct FilterProxy {
  enum class Kind { Cofinite, Subsequence, Band };
  Kind kind = Kind::Cofinite;
  /// Subsequence only: indices j that belong to the filter set.
  std::function<bool(int)> selector;
  double tolerance = 1e-3;
  /// Tail window; 0 means ceil(j_max / 4) (at least one value).
  int window = 0;

  static FilterProxy cofinite(double tol = 1e-3);
  static FilterProxy subsequence(std::function<bool(int)> selector, double tol = 1e-3);
  static FilterProxy band();
};

struct LimitReport {
  std::vector<std::pair<int, EvalResult>> values;  // j ascending, filtered indices only
  bool convergent = false;
  std::optional<double> limit;  // cofinite and subsequence when the tail is Cauchy
  double band_lo = 0.0;         // tail minimum
  double band_hi = 0.0;         // tail maximum
};

using ModelSequence = std::function<Model(int)>;

/// Evaluates f on seq(1..j_max) with the same options for every j.
LimitReport ultralimit(const ModelSequence& seq, const Formula& f, const FilterProxy& proxy, int j_max,
                       const EvalOptions& opts);

struct ScanRow {
  int n = 0;
  std::string sentence;
  double value = 0.0;
  EvalStatus status = EvalStatus::Exact;
};

struct ScanTable {
  std::vector<ScanRow> rows;  // n-major, panel order within n
  /// Successive differences over the last three n below 10x the evaluator tolerance.
  std::map<std::string, bool> cauchy;
  std::map<std::string, double> limit_estimate;

  std::vector<double> column(const std::string& sentence) const;
};

/// Evaluates every panel sentence on family(n) for n = n_lo..n_hi.
ScanTable convergence_scan(const std::function<Model(int)>& family, const Panel& panel, int n_lo, int n_hi,
                           const EvalOptions& opts);

/// Pointwise-limit estimate of a scanned column: least-squares fit of
/// a + b/n on the last three points, reported as a (clamped to >= lo).
double tail_limit(const std::vector<int>& n, const std::vector<double>& values, double lo = 0.0);

/// l2-direct sum of l_p^2 for p = 2..N.
NormedModel square_family(int N);

struct MomentTarget {
  int generators = 1;
  int degree = 1;
  std::vector<Moment> moments;  // order of moments()
};

MomentTarget moment_target(const MatrixModel& m, const std::vector<Element>& tuple, int degree);

struct MicrostateOptions {
  std::uint64_t seed = 0;
  int restarts = 16;
  int max_evaluations = 10000;  // objective evaluations across all restarts
};

struct MicrostateResult {
  bool success = false;
  std::vector<Element> tuple;  // best candidate in the D1 ball of M_k
  double objective = 0.0;      // sum of squared deviations
  double max_deviation = 0.0;
  int evaluations = 0;
};

MicrostateResult microstate_search(const MomentTarget& target, int k, double eps, const MicrostateOptions& opts);

}  // namespace contmodel
