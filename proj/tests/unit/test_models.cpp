#include "doctest.h"

#include <cmath>

#include "contmodel/model_io.hpp"
#include "contmodel/models.hpp"
#include "oracles.hpp"

using namespace contmodel;
using cd = std::complex<double>;

namespace {

Matrix mat2(cd a, cd b, cd c, cd d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Element m2(const Matrix& x) { return make_element(Blocks{x}); }

Valuation val(std::initializer_list<std::pair<const std::string, Element>> items) { return Valuation(items); }

TermPtr v(const char* n) { return term::var(n); }

MatrixModel random_model(Rng& rng) {
  std::uniform_int_distribution<int> count(1, 3), size(1, 3);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  std::vector<Summand> spec;
  const int k = count(rng);
  for (int i = 0; i < k; ++i) spec.push_back({size(rng), weight(rng)});
  return make_matrix_model(spec);
}

}  // namespace

TEST_CASE("matrix model construction normalizes weights") {
  const MatrixModel a = make_matrix_model({{2, 1.0}});
  CHECK(a.describe() == "M2");
  const Blocks x{mat2(2, 0, 0, 4)};
  CHECK(a.trace(x).real() == doctest::Approx(3.0));

  const MatrixModel c2 = make_matrix_model({{1, 1.0}, {1, 1.0}});
  CHECK(c2.summands()[0].w == doctest::Approx(0.5));
  CHECK(c2.summands()[1].w == doctest::Approx(0.5));

  const MatrixModel cm = make_matrix_model({{1, 0.6}, {2, 0.4}});
  Matrix one(1, 1);
  one << 5.0;
  const Blocks y{one, mat2(1, 0, 0, 3)};
  CHECK(cm.trace(y).real() == doctest::Approx(0.6 * 5 + 0.4 * 2));
  double total = 0;
  const MatrixModel mixed = make_matrix_model({{1, 3.0}, {2, 7.0}, {3, 0.1}});
  for (const auto& s : mixed.summands()) total += s.w;
  CHECK(std::abs(total - 1.0) <= 1e-12);

  CHECK_THROWS_AS(make_matrix_model({}), ModelError);
  CHECK_THROWS_AS(make_matrix_model({{0, 1.0}}), ModelError);
  CHECK_THROWS_AS(make_matrix_model({{2, -1.0}}), ModelError);
  CHECK_THROWS_AS(make_matrix_model({{2, 0.0}}), ModelError);
}

TEST_CASE("normed model construction") {
  const NormedModel l1 = make_normed_model({{1, 2}});
  Eigen::VectorXd x(2);
  x << 1, -2;
  CHECK(l1.norm(x) == doctest::Approx(3.0));
  const NormedModel linf = make_normed_model({{std::numeric_limits<double>::infinity(), 2}});
  CHECK(linf.norm(x) == doctest::Approx(2.0));
  const NormedModel x4 = make_normed_model({{2, 2}, {3, 2}, {4, 2}});
  CHECK(x4.dimension() == 6);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(6);
  z << 3, 4, 0, 0, 1, 0;
  CHECK(x4.norm(z) == doctest::Approx(std::sqrt(25.0 + 1.0)));
  CHECK_THROWS_AS(make_normed_model({{0.5, 2}}), ModelError);
  CHECK_THROWS_AS(make_normed_model({{2, 0}}), ModelError);
  CHECK_THROWS_AS(make_normed_model({}), ModelError);
}

TEST_CASE("normed norms satisfy homogeneity and the triangle inequality") {
  const NormedModel m = make_normed_model({{1, 2}, {3, 3}, {std::numeric_limits<double>::infinity(), 2}});
  Rng rng(5);
  std::normal_distribution<double> g;
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd a(m.dimension()), b(m.dimension());
    for (int j = 0; j < m.dimension(); ++j) {
      a[j] = g(rng);
      b[j] = g(rng);
    }
    const double c = g(rng);
    CHECK(m.norm(c * a) == doctest::Approx(std::abs(c) * m.norm(a)).epsilon(1e-12));
    CHECK(m.norm(a + b) <= m.norm(a) + m.norm(b) + 1e-12);
  }
}

TEST_CASE("term evaluation") {
  const Model m = make_matrix_model({{2, 1.0}});
  const Element id = eval_term(m, *term::identity(), {});
  CHECK(id.blocks()[0].isApprox(Matrix::Identity(2, 2)));

  const Element x = m2(mat2(1, 0, 0, -1)), y = m2(mat2(0.5, 0, 0, 0.25));
  const Element c = eval_term(m, *term::comm(v("x"), v("y")), val({{"x", x}, {"y", y}}));
  CHECK(c.blocks()[0].norm() == 0.0);

  const Element e12 = m2(mat2(0, 1, 0, 0));
  const Element e21 = eval_term(m, *term::adj(v("e")), val({{"e", e12}}));
  CHECK(e21.blocks()[0].isApprox(mat2(0, 0, 1, 0)));

  const Element s = eval_term(m, *term::smul({Rational(0), Rational(1)}, v("e")), val({{"e", e12}}));
  CHECK(s.blocks()[0](0, 1) == cd(0, 1));

  // Result domain is the structural bound of the term.
  Element big = m2(mat2(2, 0, 0, 0));
  big.domain = 2;
  CHECK(eval_term(m, *term::mul(v("b"), v("x")), val({{"b", big}, {"x", x}})).domain == 2);
  CHECK(eval_term(m, *term::add(v("b"), term::identity()), val({{"b", big}})).domain == 3);

  CHECK_THROWS_AS(eval_term(m, *v("missing"), {}), ShapeError);
  const Model l2 = make_normed_model({{2, 2}});
  CHECK_THROWS_AS(eval_term(l2, *term::identity(), {}), ValidationError);
}

TEST_CASE("atoms") {
  const Model m = make_matrix_model({{2, 1.0}});
  const Element e12 = m2(mat2(0, 1, 0, 0));
  CHECK(eval_atom(m, AtomKind::Norm2, e12) == doctest::Approx(std::sqrt(0.5)));
  CHECK(eval_atom(m, AtomKind::NormInf, e12) == doctest::Approx(1.0));
  const Element d = m2(mat2(cd(1, 2), 0, 0, cd(0, 1)));
  CHECK(eval_atom(m, AtomKind::ReTr, d) == doctest::Approx(0.5));
  CHECK(eval_atom(m, AtomKind::ImTr, d) == doctest::Approx(1.5));
  CHECK(eval_atom(m, AtomKind::AbsTr, d) == doctest::Approx(std::hypot(0.5, 1.5)));
  CHECK_THROWS_AS(eval_atom(m, AtomKind::Norm, d), ValidationError);
}

TEST_CASE("sampling stays in the ball and is deterministic") {
  const Model m = make_matrix_model({{2, 1.0}});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Element e = sample_domain(m, 1, seed);
    CHECK(eval_atom(m, AtomKind::NormInf, e) <= 1 + 1e-9);
    const Element e3 = sample_domain(m, 3, seed);
    CHECK(e3.domain == 3);
    CHECK(element_norm(m, e3) <= 3 + 1e-9);
  }
  CHECK(sample_domain(m, 1, 0).blocks()[0] == sample_domain(m, 1, 0).blocks()[0]);

  const Model normed = make_normed_model({{1, 2}, {std::numeric_limits<double>::infinity(), 3}});
  for (std::uint64_t seed = 0; seed < 50; ++seed) CHECK(element_norm(normed, sample_domain(normed, 2, seed)) <= 2 + 1e-9);
}

TEST_CASE("sampling in C reaches the boundary") {
  const Model c = make_matrix_model({{1, 1.0}});
  Rng rng(0);
  double max_abs = 0;
  for (int i = 0; i < 10000; ++i) max_abs = std::max(max_abs, std::abs(sample_domain(c, 1, rng).blocks()[0](0, 0)));
  CHECK(max_abs >= 0.99);
  CHECK(max_abs <= 1 + 1e-9);
}

TEST_CASE("projection") {
  const Model m = make_matrix_model({{2, 1.0}});
  const Element p = project_domain(m, m2(mat2(2, 0, 0, 0.5)), 1);
  CHECK(p.blocks()[0].isApprox(mat2(1, 0, 0, 0.5)));
  const Element inside = m2(mat2(0.3, 0.1, cd(0, 0.2), -0.4));
  CHECK(project_domain(m, inside, 1).blocks()[0] == inside.blocks()[0]);

  const Model l2 = make_normed_model({{2, 2}});
  Eigen::VectorXd v3(2);
  v3 << 3 / std::sqrt(2.0), 3 / std::sqrt(2.0);
  const Element pv = project_domain(l2, make_element(v3), 1);
  CHECK(element_norm(l2, pv) == doctest::Approx(1.0));
  CHECK(pv.vec()[0] == doctest::Approx(pv.vec()[1]));

  // Idempotent and lands in the ball, including non-normal blocks.
  Rng rng(3);
  std::normal_distribution<double> g;
  const Model mm = make_matrix_model({{3, 1.0}, {1, 1.0}});
  for (int i = 0; i < 100; ++i) {
    Blocks b{Matrix(3, 3), Matrix(1, 1)};
    for (auto& blk : b)
      for (Eigen::Index j = 0; j < blk.size(); ++j) blk.data()[j] = cd(2 * g(rng), 2 * g(rng));
    const Element once = project_domain(mm, make_element(b), 1);
    CHECK(element_norm(mm, once) <= 1 + 1e-9);
    const Element twice = project_domain(mm, once, 1);
    CHECK((twice.blocks()[0] - once.blocks()[0]).norm() <= 1e-12);
  }
}

TEST_CASE("projection clips singular values (Frobenius-nearest point)") {
  const Model m = make_matrix_model({{2, 1.0}});
  const Matrix x = mat2(cd(1, 1), 2, cd(0, -1), 0.5);
  const Matrix p = project_domain(m, m2(x), 1).blocks()[0];
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::VectorXd s = svd.singularValues().cwiseMin(1.0);
  const Matrix expected = svd.matrixU() * s.cast<cd>().asDiagonal() * svd.matrixV().adjoint();
  CHECK((p - expected).norm() <= 1e-10);
}

TEST_CASE("a_value and b_value_closed") {
  CHECK(a_value(make_matrix_model({{2, 1.0}})) == doctest::Approx(0.5));
  CHECK(a_value(make_matrix_model({{1, 1.0}})) == doctest::Approx(1.0));
  CHECK(a_value(make_matrix_model({{1, 0.6}, {2, 0.4}})) == doctest::Approx(0.6));
  CHECK(b_value_closed(make_matrix_model({{1, 1.0}})) == doctest::Approx(1.0));
  CHECK(b_value_closed(make_matrix_model({{2, 1.0}})) == doctest::Approx(0.0));
  CHECK(b_value_closed(make_matrix_model({{1, 0.6}, {2, 0.4}})) == doctest::Approx(0.2));
  CHECK(oracle::two_summand_b(0.6, 0.4) == doctest::Approx(0.2).epsilon(1e-3));
}

TEST_CASE("b_value_search") {
  CHECK(b_value_search(make_matrix_model({{2, 1.0}}), 8, 0) <= 1e-6);
  CHECK(std::abs(b_value_search(make_matrix_model({{1, 1.0}}), 8, 0) - 1.0) <= 1e-9);
  CHECK(std::abs(b_value_search(make_matrix_model({{1, 0.6}, {2, 0.4}}), 16, 0) - 0.2) <= 1e-3);
  const auto d = b_value_search_detail(make_matrix_model({{3, 1.0}}), 8, 1);
  REQUIRE(d.hamiltonian.size() == 1);
  CHECK(d.hamiltonian[0].isApprox(d.hamiltonian[0].adjoint()));
}

TEST_CASE("b_value_search agrees with the closed form on random models") {
  Rng rng(2024);
  for (int i = 0; i < 10; ++i) {
    const MatrixModel m = random_model(rng);
    CAPTURE(m.describe());
    const double s = b_value_search(m, 16, i);
    CHECK(s >= b_value_closed(m) - 1e-3);
    CHECK(s <= b_value_closed(m) + 1e-3);
  }
}

TEST_CASE("trace axioms and the commutator inequality chain on random pairs") {
  Rng rng(77);
  for (const auto& spec : std::vector<std::vector<Summand>>{{{1, 1}}, {{1, 1}, {1, 1}}, {{2, 1}}, {{3, 1}}, {{1, 1}, {2, 1}}}) {
    const MatrixModel m = make_matrix_model(spec);
    const Model model = m;
    for (int i = 0; i < 1000; ++i) {
      const Element x = sample_domain(model, 1, rng), y = sample_domain(model, 1, rng);
      const Valuation xy_val{{"x", x}, {"y", y}};
      const Blocks xy = eval_term(model, *term::mul(v("x"), v("y")), xy_val).blocks();
      const Blocks yx = eval_term(model, *term::mul(v("y"), v("x")), xy_val).blocks();
      CHECK(std::abs(m.trace(xy) - m.trace(yx)) <= 1e-10);
      CHECK(m.trace(eval_term(model, *term::mul(term::adj(v("x")), v("x")), xy_val).blocks()).real() >= -1e-12);
      CHECK(m.norm2(xy) <= m.norm_inf(x.blocks()) * m.norm2(y.blocks()) + 1e-10);
      const double a = m.norm2(eval_term(model, *term::sub(term::mul(term::adj(v("y")), v("y")), term::identity()), xy_val).blocks());
      const double b = m.norm2(eval_term(model, *term::sub(term::mul(v("y"), term::adj(v("y"))), term::identity()), xy_val).blocks());
      CHECK(std::abs(a - b) <= 1e-10);
      const double c = m.norm2(eval_term(model, *term::comm(v("y"), term::adj(v("y"))), xy_val).blocks());
      CHECK(c <= a + b + 1e-10);
    }
    CHECK(m.trace(m.identity()).real() == doctest::Approx(1.0));
  }
}

TEST_CASE("moments") {
  const MatrixModel m = make_matrix_model({{2, 1.0}});
  for (const auto& mo : moments(m, {make_element(m.identity())}, 2)) CHECK(std::abs(mo.value - cd(1)) <= 1e-12);

  const auto d = moments(m, {m2(mat2(1, 0, 0, -1))}, 1);
  REQUIRE(d.size() == 3);
  CHECK(d[0].word == "1");
  CHECK(d[1].word == "x");
  CHECK(d[2].word == "x*");
  CHECK(std::abs(d[1].value) <= 1e-12);
  CHECK(std::abs(d[2].value) <= 1e-12);

  const auto e = moments(m, {m2(mat2(0, 1, 0, 0))}, 2);
  auto value = [&](const std::string& w) {
    for (const auto& mo : e)
      if (mo.word == w) return mo.value;
    FAIL("missing word " << w);
    return cd();
  };
  CHECK(std::abs(value("x")) <= 1e-12);
  CHECK(std::abs(value("xx")) <= 1e-12);
  CHECK(std::abs(value("x*x") - 0.5) <= 1e-12);
  CHECK(std::abs(value("xx*") - 0.5) <= 1e-12);
  CHECK(e.size() == 7);  // 1 + 2 + 4 words

  const auto two = moments(m, {m2(mat2(1, 0, 0, 0)), m2(mat2(0, 1, 0, 0))}, 1);
  REQUIRE(two.size() == 5);
  CHECK(two[1].word == "x1");
  CHECK(two[4].word == "x2*");
}

TEST_CASE("model spec JSON") {
  const Model m = parse_model_spec(R"({"kind":"matrix","summands":[{"n":2,"w":1.0},{"n":1,"w":3}]})");
  CHECK(describe(m) == "M2(0.25)+C(0.75)");
  CHECK(describe(parse_model_spec(model_spec_json(m))) == describe(m));
  const Model n = parse_model_spec(R"({"kind":"normed","parts":[{"p":1,"d":2},{"p":"inf","d":2}]})");
  CHECK(std::get<NormedModel>(n).dimension() == 4);
  CHECK(model_spec_json(n) == R"({"kind":"normed","parts":[{"d":2,"p":1.0},{"d":2,"p":"inf"}]})");
  CHECK_THROWS_AS(parse_model_spec("{"), ModelSpecError);
  CHECK_THROWS_AS(parse_model_spec(R"({"kind":"banach"})"), ModelSpecError);
  CHECK_THROWS_AS(parse_model_spec(R"({"kind":"matrix","summands":[]})"), ModelSpecError);
  CHECK_THROWS_AS(parse_model_spec(R"({"kind":"normed","parts":[{"p":"two","d":2}]})"), ModelSpecError);

  const Element e = parse_element(m, "[[[1,[0,1]],[0,0]],[[0.5]]]");
  CHECK(e.blocks()[0](0, 1) == cd(0, 1));
  CHECK(parse_element(m, element_json(e)).blocks()[1] == e.blocks()[1]);
  CHECK_THROWS_AS(parse_element(m, "[[[1]]]"), ModelSpecError);
}
