#include "doctest.h"

#include <cmath>

#include "contmodel/model_io.hpp"
#include "contmodel/theory.hpp"
#include "contmodel/theory_io.hpp"
#include "oracles.hpp"

using namespace contmodel;
using cd = std::complex<double>;

namespace {

Model matrix(std::vector<Summand> s) { return make_matrix_model(std::move(s)); }
Model C() { return matrix({{1, 1}}); }
Model C2() { return matrix({{1, 1}, {1, 1}}); }
Model C3() { return matrix({{1, 1}, {1, 1}, {1, 1}}); }
Model M(int n) { return matrix({{n, 1}}); }

const Panel& universal() {
  static const Panel p = default_panel(PanelKind::Universal, Signature::TracialAlgebra);
  return p;
}

// Fingerprint over the universal panel built from exact commutative values.
Fingerprint oracle_fingerprint(int k) {
  const auto v = oracle::commutative_panel(k);
  Fingerprint fp{universal().id, universal().version, PanelKind::Universal, "", {}, {}};
  for (const auto& [name, value] : std::vector<std::pair<std::string, double>>{{"comm.sup", v.comm_sup},
                                                                               {"proj.third", v.proj_third},
                                                                               {"moment.nil", v.moment_nil},
                                                                               {"moment.selfcomm", v.moment_selfcomm}}) {
    EvalResult r;
    r.value = value;
    fp.entries.push_back({name, r});
  }
  return fp;
}

}  // namespace

TEST_CASE("fingerprints record panel, model and options") {
  const Panel p = sub_panel(panel_by_name("tracial.full"), {"sigma.1", "comm.sup"});
  const Fingerprint a = fingerprint(C2(), p, {});
  CHECK(a.panel_id == p.id);
  CHECK(a.model == model_spec_json(C2()));
  REQUIRE(a.entries.size() == 2);
  CHECK(a.find("sigma.1")->value <= 5e-3);
  CHECK(a.find("comm.sup")->value <= 1e-12);
  CHECK(a.find("psi") == nullptr);
  CHECK(fingerprint_to_json(fingerprint(C2(), p, {})) == fingerprint_to_json(a));

  const Fingerprint m2 = fingerprint(M(2), universal(), {});
  CHECK(m2.find("comm.sup")->value >= 0.7);
  CHECK_THROWS_AS(fingerprint(make_normed_model({{2, 2}}), universal(), {}), PanelMismatch);
}

TEST_CASE("compare_universal verdicts") {
  const double tol = 1e-2;
  const Fingerprint m2 = fingerprint(M(2), universal(), {});
  const Fingerprint m4 = fingerprint(M(4), universal(), {});
  const Fingerprint c3 = fingerprint(C3(), universal(), {});
  for (const auto& [name, d] : compare_universal(m2, m4, tol).margins) MESSAGE(name << ": " << d);
  CHECK(compare_universal(m2, m4, tol).order == Order::Leq);
  CHECK(compare_universal(m2, m2, tol).order == Order::Equal);
  const OrderVerdict v = compare_universal(c3, m2, tol);
  CHECK(v.order == Order::Incomparable);
  REQUIRE(v.margins.size() == 4);
  CHECK(v.margins[0].first == "comm.sup");
  CHECK(v.margins[0].second > 0.5);
  CHECK(v.margins[1].second < -0.05);
  CHECK(compare_universal(m4, m2, tol).order == Order::Geq);

  const Panel full = default_panel(PanelKind::Full, Signature::TracialAlgebra);
  const Fingerprint f = fingerprint(C(), sub_panel(full, {"comm.sup"}), {});
  CHECK_THROWS_AS(compare_universal(f, f, tol), PanelMismatch);
  CHECK_THROWS_AS(compare_universal(m2, f, tol), PanelMismatch);
  Fingerprint other = m2;
  other.panel_version = "panel.v0";
  CHECK_THROWS_AS(compare_universal(m2, other, tol), PanelMismatch);
}

TEST_CASE("order on exact commutative fingerprints is reflexive and transitive") {
  std::vector<Fingerprint> fps;
  for (int k = 1; k <= 3; ++k) fps.push_back(oracle_fingerprint(k));
  // C embeds in every C^k, so its universal values are the smallest.
  CHECK(compare_universal(fps[0], fps[1], 1e-9).order != Order::Geq);
  for (const auto& a : fps) CHECK(compare_universal(a, a, 0.0).order == Order::Equal);
  auto leq = [](const Fingerprint& a, const Fingerprint& b) {
    const Order o = compare_universal(a, b, 1e-9).order;
    return o == Order::Leq || o == Order::Equal;
  };
  for (const auto& a : fps)
    for (const auto& b : fps)
      for (const auto& c : fps)
        if (leq(a, b) && leq(b, c)) CHECK(leq(a, c));
}

TEST_CASE("universal values are hereditary along embeddings") {
  // C -> C+C -> M2 (diagonal) and M2 -> M4 preserve the trace.
  const double tol = 1e-2;
  const std::vector<Model> chain{C(), C2(), M(2), M(4)};
  std::vector<Fingerprint> fps;
  for (const auto& m : chain) fps.push_back(fingerprint(m, universal(), {}));
  for (std::size_t i = 0; i + 1 < fps.size(); ++i) {
    CAPTURE(i);
    const Order o = compare_universal(fps[i], fps[i + 1], tol).order;
    CHECK((o == Order::Leq || o == Order::Equal));
  }
  // The evaluator agrees with the exact commutative values.
  for (int k = 1; k <= 2; ++k) {
    const Order o = compare_universal(fps[k - 1], oracle_fingerprint(k), 5e-3).order;
    CHECK(o == Order::Equal);
  }
}

TEST_CASE("ultralimit of a constant sequence is the model value") {
  const std::vector<SentenceId> sentences{comm_sup(), proj_third(), moment_nilpotent(), sigma(1),
                                          traceless_unitary_inf()};
  EvalOptions o;
  o.outer_restarts = 32;
  o.inner_restarts = 16;
  for (const Model& m : {C(), C2(), M(2)}) {
    for (const auto& s : sentences) {
      CAPTURE(describe(m));
      CAPTURE(s.name);
      const LimitReport rep = ultralimit([&](int) { return m; }, s.formula, FilterProxy::cofinite(), 3, o);
      REQUIRE(rep.limit);
      CHECK(rep.convergent);
      CHECK(rep.values.size() == 3);
      CHECK(std::abs(*rep.limit - evaluate(m, s.formula, o).value) <= 1e-9);
    }
  }
}

TEST_CASE("alternating sequence: cofinite fails, subsequences converge") {
  const ModelSequence seq = [](int j) { return j % 2 ? C() : M(2); };
  const Formula& f = comm_sup().formula;
  FilterProxy cof = FilterProxy::cofinite();
  cof.window = 2;
  const LimitReport a = ultralimit(seq, f, cof, 6, {});
  CHECK_FALSE(a.convergent);
  CHECK_FALSE(a.limit);
  CHECK(a.band_hi - a.band_lo > 0.5);

  const LimitReport even = ultralimit(seq, f, FilterProxy::subsequence([](int j) { return j % 2 == 0; }), 6, {});
  CHECK(even.values.size() == 3);
  CHECK(even.convergent);
  REQUIRE(even.limit);
  CHECK(std::abs(*even.limit - evaluate(M(2), f, {}).value) <= 1e-9);

  const LimitReport odd = ultralimit(seq, f, FilterProxy::subsequence([](int j) { return j % 2 == 1; }), 6, {});
  REQUIRE(odd.limit);
  CHECK(*odd.limit <= 1e-12);

  FilterProxy band = FilterProxy::band();
  band.window = 4;
  const LimitReport b = ultralimit(seq, f, band, 6, {});
  CHECK_FALSE(b.limit);
  CHECK(b.band_hi - b.band_lo > 0.5);
  CHECK_THROWS_AS(ultralimit(seq, f, cof, 0, {}), std::invalid_argument);
}

TEST_CASE("sigma.1 stays away from zero along the matrix sequence") {
  FilterProxy band = FilterProxy::band();
  band.window = 2;
  const LimitReport r = ultralimit([](int j) { return M(j + 1); }, sigma(1).formula, band, 3, {});
  CHECK(r.values.size() == 3);
  CHECK(r.band_lo > 0.05);
}

TEST_CASE("convergence_scan on a constant family") {
  EvalOptions o;
  const ScanTable t = convergence_scan([](int) { return C2(); }, universal(), 1, 4, o);
  CHECK(t.rows.size() == 16);
  CHECK(t.rows[0].n == 1);
  CHECK(t.rows[0].sentence == "comm.sup");
  for (const auto& s : universal().sentences) {
    CHECK(t.cauchy.at(s.name));
    const auto col = t.column(s.name);
    CHECK(std::abs(t.limit_estimate.at(s.name) - std::max(0.0, col.back())) <= 1e-9);
  }
  CHECK_THROWS_AS(convergence_scan([](int) { return C2(); }, universal(), 3, 2, o), std::invalid_argument);
  CHECK_THROWS_AS(convergence_scan([](int N) { return Model(square_family(N + 1)); }, universal(), 1, 2, o),
                  PanelMismatch);
}

TEST_CASE("psi along X_N: decreasing, eventually Cauchy, limit near zero") {
  const EvalOptions o;
  const Panel p = sub_panel(panel_by_name("normed.full"), {"psi"});
  const ScanTable t = convergence_scan([](int N) { return Model(square_family(N)); }, p, 2, 14, o);
  const auto col = t.column("psi");
  REQUIRE(col.size() == 13);
  for (std::size_t i = 0; i + 1 < col.size(); ++i) CHECK(col[i + 1] <= col[i] + o.tolerance);
  CHECK(t.cauchy.at("psi"));
  std::vector<int> ns;
  for (int N = 2; N <= 12; ++N) ns.push_back(N);
  const double lim = tail_limit(ns, std::vector<double>(col.begin(), col.begin() + 11));
  MESSAGE("psi(X_12) = " << col[10] << ", extrapolated limit " << lim);
  CHECK(lim <= 1e-2);
}

TEST_CASE("tail_limit fits a + b/n") {
  const std::vector<int> n{2, 3, 4, 5};
  std::vector<double> v;
  for (int k : n) v.push_back(0.25 + 1.5 / k);
  CHECK(tail_limit(n, v) == doctest::Approx(0.25).epsilon(1e-12));
  for (double& x : v) x -= 0.5;
  CHECK(tail_limit(n, v) == 0.0);
  CHECK(tail_limit(n, v, -1.0) == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK_THROWS_AS(tail_limit({}, {}), std::invalid_argument);
  CHECK(tail_limit({3}, {0.5}) == 0.5);
}

TEST_CASE("square_family") {
  const NormedModel x = square_family(4);
  REQUIRE(x.parts().size() == 3);
  CHECK(x.parts()[0].p == 2);
  CHECK(x.parts()[2].p == 4);
  CHECK(x.dimension() == 6);
  CHECK_THROWS_AS(square_family(1), std::invalid_argument);
}

TEST_CASE("microstates: the diagonal symmetry of C+C lives in M2") {
  const MatrixModel c2 = make_matrix_model({{1, 1}, {1, 1}});
  const Element x = make_element(Blocks{Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, -1.0)});
  const MomentTarget target = moment_target(c2, {x}, 3);
  const MicrostateResult r = microstate_search(target, 2, 1e-3, {});
  CHECK(r.success);
  CHECK(r.max_deviation <= 1e-3);
  REQUIRE(r.tuple.size() == 1);
  const auto got = moments(make_matrix_model({{2, 1}}), r.tuple, 3);
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i].value - target.moments[i].value) <= 1e-3);
  CHECK(element_norm(Model(make_matrix_model({{2, 1}})), r.tuple[0]) <= 1 + 1e-9);
}

TEST_CASE("microstates: a random M2 contraction is found in M2") {
  const MatrixModel m2 = make_matrix_model({{2, 1}});
  const Element x = sample_domain(Model(m2), 1, std::uint64_t(11));
  const MicrostateResult r = microstate_search(moment_target(m2, {x}, 2), 2, 1e-3, {});
  CHECK(r.success);
  CHECK(r.evaluations <= 10000);
}

TEST_CASE("microstates: a commuting pair of C+C needs actual iterations") {
  const MatrixModel c2 = make_matrix_model({{1, 1}, {1, 1}});
  const Element x = make_element(Blocks{Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, -1.0)});
  const Element y = make_element(Blocks{Matrix::Constant(1, 1, cd(0.5, 0.25)), Matrix::Constant(1, 1, 0.2)});
  const MomentTarget target = moment_target(c2, {x, y}, 3);
  const MicrostateResult r = microstate_search(target, 2, 1e-3, {});
  CHECK(r.success);
  CHECK(r.evaluations > 1);
  CHECK(r.evaluations <= 10000);
}

TEST_CASE("microstates: infeasible targets fail") {
  const MatrixModel c = make_matrix_model({{1, 1}});
  MomentTarget target = moment_target(c, {make_element(Blocks{Matrix::Constant(1, 1, 1.0)})}, 2);
  REQUIRE(target.moments[1].word == "x");
  target.moments[1].value = 2.0;  // tau(x) = 2 is impossible for a contraction
  MicrostateOptions o;
  o.restarts = 4;
  o.max_evaluations = 2000;
  const MicrostateResult r = microstate_search(target, 2, 1e-3, o);
  CHECK_FALSE(r.success);
  CHECK(r.max_deviation >= 0.9);
  CHECK(r.evaluations <= 2000);
  MomentTarget bad = target;
  bad.moments.pop_back();
  CHECK_THROWS_AS(microstate_search(bad, 2, 1e-3, o), std::invalid_argument);
  CHECK_THROWS_AS(microstate_search(target, 0, 1e-3, o), std::invalid_argument);
}

TEST_CASE("fingerprint JSON round-trip") {
  const Fingerprint a = fingerprint(C2(), universal(), {});
  const std::string text = fingerprint_to_json(a);
  const Fingerprint b = fingerprint_from_json(text);
  CHECK(b.panel_id == a.panel_id);
  CHECK(b.panel_version == a.panel_version);
  CHECK(b.panel_kind == a.panel_kind);
  CHECK(b.model == a.model);
  REQUIRE(b.entries.size() == a.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    CHECK(b.entries[i].sentence == a.entries[i].sentence);
    CHECK(b.entries[i].result.value == a.entries[i].result.value);
    CHECK(b.entries[i].result.status == a.entries[i].result.status);
  }
  CHECK(fingerprint_to_json(b) == text);
  CHECK(compare_universal(a, b, 0.0).order == Order::Equal);
  CHECK_THROWS_AS(fingerprint_from_json("{"), std::invalid_argument);
  CHECK_THROWS_AS(fingerprint_from_json("{\"panel\":1}"), std::invalid_argument);
}

TEST_CASE("scan CSV and JSON") {
  const ScanTable t = convergence_scan([](int) { return C2(); }, sub_panel(universal(), {"comm.sup"}), 2, 4, {});
  const std::string csv = scan_to_csv(t);
  CHECK(csv.rfind("n,sentence,value,status\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(csv.find("2,comm.sup,0,certified-lower\n") != std::string::npos);
  const std::string js = scan_to_json(t);
  CHECK(js.find("\"cauchy\"") != std::string::npos);
  CHECK(js.find("\"limit_estimate\"") != std::string::npos);
  CHECK(format_value(0.1) == "0.10000000000000001");
}
