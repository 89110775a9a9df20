#include "contmodel/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "contmodel/model_io.hpp"
#include "contmodel/random.hpp"

namespace contmodel {

const EvalResult* Fingerprint::find(const std::string& sentence) const {
  for (const auto& e : entries) {
    if (e.sentence == sentence) return &e.result;
  }
  return nullptr;
}

Fingerprint fingerprint(const Model& m, const Panel& panel, const EvalOptions& opts) {
  if (signature_of(m) != panel.signature) {
    throw PanelMismatch("panel " + panel.id + " is for " + std::string(to_string(panel.signature)) + " models");
  }
  Fingerprint fp{panel.id, panel.version, panel.kind, model_spec_json(m), opts, {}};
  for (const auto& s : panel.sentences) fp.entries.push_back({s.name, evaluate(m, s.formula, opts)});
  return fp;
}

std::string_view to_string(Order o) {
  switch (o) {
    case Order::Equal:
      return "equal";
    case Order::Leq:
      return "leq";
    case Order::Geq:
      return "geq";
    case Order::Incomparable:
      return "incomparable";
  }
  return "incomparable";
}

OrderVerdict compare_universal(const Fingerprint& a, const Fingerprint& b, double tol) {
  if (a.panel_id != b.panel_id || a.panel_version != b.panel_version) {
    throw PanelMismatch("fingerprints use different panels: " + a.panel_id + " " + a.panel_version + " vs " +
                        b.panel_id + " " + b.panel_version);
  }
  if (a.panel_kind != PanelKind::Universal || b.panel_kind != PanelKind::Universal) {
    throw PanelMismatch("compare_universal needs fingerprints over a universal panel");
  }
  if (a.entries.size() != b.entries.size()) throw PanelMismatch("fingerprints cover different sentences");
  OrderVerdict v;
  v.tolerance = tol;
  bool leq = true, geq = true;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    if (a.entries[i].sentence != b.entries[i].sentence) throw PanelMismatch("fingerprints cover different sentences");
    const double d = b.entries[i].result.value - a.entries[i].result.value;
    v.margins.emplace_back(a.entries[i].sentence, d);
    if (d < -tol) leq = false;
    if (d > tol) geq = false;
  }
  v.order = leq && geq ? Order::Equal : leq ? Order::Leq : geq ? Order::Geq : Order::Incomparable;
  return v;
}

FilterProxy FilterProxy::cofinite(double tol) {
  FilterProxy p;
  p.tolerance = tol;
  return p;
}

FilterProxy FilterProxy::subsequence(std::function<bool(int)> selector, double tol) {
  FilterProxy p;
  p.kind = Kind::Subsequence;
  p.selector = std::move(selector);
  p.tolerance = tol;
  return p;
}

FilterProxy FilterProxy::band() {
  FilterProxy p;
  p.kind = Kind::Band;
  return p;
}

LimitReport ultralimit(const ModelSequence& seq, const Formula& f, const FilterProxy& proxy, int j_max,
                       const EvalOptions& opts) {
  if (j_max < 1) throw std::invalid_argument("ultralimit needs j_max >= 1");
  LimitReport rep;
  for (int j = 1; j <= j_max; ++j) {
    if (proxy.kind == FilterProxy::Kind::Subsequence && proxy.selector && !proxy.selector(j)) continue;
    rep.values.emplace_back(j, evaluate(seq(j), f, opts));
  }
  if (rep.values.empty()) return rep;
  const int count = static_cast<int>(rep.values.size());
  const int window = std::clamp(proxy.window > 0 ? proxy.window : (j_max + 3) / 4, 1, count);
  rep.band_lo = std::numeric_limits<double>::infinity();
  rep.band_hi = -std::numeric_limits<double>::infinity();
  for (int i = count - window; i < count; ++i) {
    rep.band_lo = std::min(rep.band_lo, rep.values[i].second.value);
    rep.band_hi = std::max(rep.band_hi, rep.values[i].second.value);
  }
  rep.convergent = rep.band_hi - rep.band_lo <= proxy.tolerance;
  if (rep.convergent && proxy.kind != FilterProxy::Kind::Band) rep.limit = rep.values.back().second.value;
  return rep;
}

std::vector<double> ScanTable::column(const std::string& sentence) const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.sentence == sentence) out.push_back(r.value);
  }
  return out;
}

double tail_limit(const std::vector<int>& n, const std::vector<double>& values, double lo) {
  if (n.size() != values.size() || n.empty()) throw std::invalid_argument("tail_limit needs matching non-empty data");
  const std::size_t k = std::min<std::size_t>(3, n.size());
  if (k < 2) return std::max(lo, values.back());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = n.size() - k; i < n.size(); ++i) {
    const double x = 1.0 / n[i];
    sx += x;
    sy += values[i];
    sxx += x * x;
    sxy += x * values[i];
  }
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  return std::max(lo, (sy - slope * sx) / k);
}

ScanTable convergence_scan(const std::function<Model(int)>& family, const Panel& panel, int n_lo, int n_hi,
                           const EvalOptions& opts) {
  if (n_hi < n_lo) throw std::invalid_argument("empty scan range");
  ScanTable t;
  for (int n = n_lo; n <= n_hi; ++n) {
    const Model m = family(n);
    if (signature_of(m) != panel.signature) throw PanelMismatch("scan family does not match panel " + panel.id);
    for (const auto& s : panel.sentences) {
      const EvalResult r = evaluate(m, s.formula, opts);
      t.rows.push_back({n, s.name, r.value, r.status});
    }
  }
  std::vector<int> ns;
  for (int n = n_lo; n <= n_hi; ++n) ns.push_back(n);
  for (const auto& s : panel.sentences) {
    const auto col = t.column(s.name);
    const std::size_t c = col.size();
    t.cauchy[s.name] = c >= 3 && std::abs(col[c - 1] - col[c - 2]) < 10 * opts.tolerance &&
                       std::abs(col[c - 2] - col[c - 3]) < 10 * opts.tolerance;
    t.limit_estimate[s.name] = tail_limit(ns, col, range_of(s.formula).lo);
  }
  return t;
}

NormedModel square_family(int N) {
  if (N < 2) throw std::invalid_argument("square_family needs N >= 2");
  std::vector<NormPart> parts;
  for (int p = 2; p <= N; ++p) parts.push_back({double(p), 2});
  return make_normed_model(parts);
}

MomentTarget moment_target(const MatrixModel& m, const std::vector<Element>& tuple, int degree) {
  return {static_cast<int>(tuple.size()), degree, moments(m, tuple, degree)};
}

namespace {

class MomentFit {
 public:
  MomentFit(const MomentTarget& target, int k)
      : target_(target), model_(make_matrix_model({{k, 1.0}})), k_(k) {}

  const MatrixModel& model() const { return model_; }
  int dimension() const { return 2 * k_ * k_ * target_.generators; }
  int evaluations() const { return evaluations_; }

  std::vector<Element> unpack(const Eigen::VectorXd& c) const {
    std::vector<Element> tuple;
    const int per = 2 * k_ * k_;
    for (int g = 0; g < target_.generators; ++g) {
      Element e = make_element(Blocks{Matrix::Zero(k_, k_)});
      set_coordinates(e, c.segment(g * per, per));
      tuple.push_back(std::move(e));
    }
    return tuple;
  }

  Eigen::VectorXd pack(const std::vector<Element>& tuple) const {
    Eigen::VectorXd c(dimension());
    const int per = 2 * k_ * k_;
    for (int g = 0; g < target_.generators; ++g) c.segment(g * per, per) = coordinates(tuple[g]);
    return c;
  }

  // Keeps every generator in the operator-norm unit ball.
  Eigen::VectorXd project(const Eigen::VectorXd& c) const {
    auto tuple = unpack(c);
    for (auto& e : tuple) project_in_place(model_, e, 1);
    return pack(tuple);
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& c) {
    ++evaluations_;
    const auto mom = moments(model_, unpack(c), target_.degree);
    Eigen::VectorXd r(2 * mom.size());
    for (std::size_t i = 0; i < mom.size(); ++i) {
      const auto d = mom[i].value - target_.moments[i].value;
      r(2 * i) = d.real();
      r(2 * i + 1) = d.imag();
    }
    return r;
  }

 private:
  const MomentTarget& target_;
  MatrixModel model_;
  int k_;
  int evaluations_ = 0;
};

double max_deviation(const Eigen::VectorXd& r) {
  double m = 0.0;
  for (Eigen::Index i = 0; i + 1 < r.size(); i += 2) m = std::max(m, std::hypot(r(i), r(i + 1)));
  return m;
}

}  // namespace

MicrostateResult microstate_search(const MomentTarget& target, int k, double eps, const MicrostateOptions& opts) {
  if (k < 1) throw std::invalid_argument("microstate_search needs k >= 1");
  if (target.generators < 1 || target.degree < 1) throw std::invalid_argument("malformed moment target");
  if (moment_words(target.generators, target.degree).size() != target.moments.size()) {
    throw std::invalid_argument("moment target does not match its generator count and degree");
  }
  MomentFit fit(target, k);
  const int dim = fit.dimension();
  MicrostateResult best;
  best.objective = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_c;

  for (int restart = 0; restart < opts.restarts; ++restart) {
    if (fit.evaluations() + dim + 1 > opts.max_evaluations) break;
    Rng rng(derive_seed(opts.seed, {std::uint64_t(restart)}));
    std::vector<Element> start;
    for (int g = 0; g < target.generators; ++g) start.push_back(sample_domain(Model(fit.model()), 1, rng));
    Eigen::VectorXd c = fit.pack(start);
    Eigen::VectorXd r = fit.residual(c);
    double f = r.squaredNorm();
    double lambda = 1e-2;
    // Projected Levenberg-Marquardt with a forward-difference Jacobian.
    while (fit.evaluations() + dim + 1 <= opts.max_evaluations && max_deviation(r) > eps * 1e-2) {
      Eigen::MatrixXd J(r.size(), dim);
      for (int i = 0; i < dim; ++i) {
        Eigen::VectorXd cp = c;
        const double h = 1e-7 * std::max(1.0, std::abs(c(i)));
        cp(i) += h;
        J.col(i) = (fit.residual(cp) - r) / h;
      }
      const Eigen::MatrixXd JtJ = J.transpose() * J;
      const Eigen::VectorXd g = J.transpose() * r;
      bool improved = false;
      for (int tries = 0; tries < 8 && fit.evaluations() < opts.max_evaluations; ++tries) {
        Eigen::MatrixXd A = JtJ;
        A.diagonal().array() += lambda * (1.0 + JtJ.diagonal().array());
        const Eigen::VectorXd step = A.ldlt().solve(-g);
        const Eigen::VectorXd cn = fit.project(c + step);
        const Eigen::VectorXd rn = fit.residual(cn);
        const double fn = rn.squaredNorm();
        if (fn < f) {
          c = cn;
          r = rn;
          f = fn;
          lambda = std::max(lambda / 3.0, 1e-12);
          improved = true;
          break;
        }
        lambda *= 4.0;
      }
      if (!improved) break;
    }
    if (f < best.objective) {
      best.objective = f;
      best.max_deviation = max_deviation(r);
      best_c = c;
    }
    if (best.max_deviation <= eps) break;
  }
  best.evaluations = fit.evaluations();
  if (best_c.size() > 0) best.tuple = fit.unpack(best_c);
  best.success = best_c.size() > 0 && best.max_deviation <= eps;
  return best;
}

}  // namespace contmodel
