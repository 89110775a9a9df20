#include "contmodel/models.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace contmodel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// MatrixModel

MatrixModel make_matrix_model(const std::vector<Summand>& spec) {
  if (spec.empty()) throw ModelError("matrix model needs at least one summand");
  double total = 0.0;
  for (const auto& s : spec) {
    if (s.n < 1) throw ModelError("summand size must be positive");
    if (!(s.w > 0.0) || !std::isfinite(s.w)) throw ModelError("summand weight must be positive");
    total += s.w;
  }
  MatrixModel m;
  m.summands_ = spec;
  for (auto& s : m.summands_) s.w /= total;
  return m;
}

std::complex<double> MatrixModel::trace(const Blocks& x) const {
  std::complex<double> t = 0.0;
  for (std::size_t i = 0; i < summands_.size(); ++i) t += summands_[i].w * x[i].trace() / double(summands_[i].n);
  return t;
}

double MatrixModel::norm2(const Blocks& x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < summands_.size(); ++i) s += summands_[i].w * x[i].squaredNorm() / double(summands_[i].n);
  return std::sqrt(s);
}

namespace {

double operator_norm(const Matrix& x) {
  if (x.size() == 1) return std::abs(x(0, 0));
  const Matrix g = x.adjoint() * x;
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
}

}  // namespace

double MatrixModel::norm_inf(const Blocks& x) const {
  double best = 0.0;
  for (const auto& b : x) best = std::max(best, operator_norm(b));
  return best;
}

Blocks MatrixModel::identity() const {
  Blocks out;
  out.reserve(summands_.size());
  for (const auto& s : summands_) out.push_back(Matrix::Identity(s.n, s.n));
  return out;
}

Blocks MatrixModel::zero() const {
  Blocks out;
  out.reserve(summands_.size());
  for (const auto& s : summands_) out.push_back(Matrix::Zero(s.n, s.n));
  return out;
}

std::string MatrixModel::describe() const {
  auto name = [](int n) { return n == 1 ? std::string("C") : "M" + std::to_string(n); };
  if (summands_.size() == 1) return name(summands_[0].n);
  std::string out;
  for (const auto& s : summands_) {
    if (!out.empty()) out += "+";
    out += name(s.n) + "(" + format_double(s.w) + ")";
  }
  return out;
}

// ---------------------------------------------------------------------------
// NormedModel

NormedModel make_normed_model(const std::vector<NormPart>& spec) {
  if (spec.empty()) throw ModelError("normed model needs at least one part");
  NormedModel m;
  for (const auto& p : spec) {
    if (std::isnan(p.p) || p.p < 1.0) throw ModelError("exponent p must lie in [1, inf]");
    if (p.d < 1) throw ModelError("part dimension must be positive");
    m.dimension_ += p.d;
  }
  m.parts_ = spec;
  return m;
}

double NormedModel::norm(const Eigen::VectorXd& v) const {
  double total = 0.0;
  int offset = 0;
  for (const auto& part : parts_) {
    const auto seg = v.segment(offset, part.d);
    double n;
    if (part.p == kInf) {
      n = seg.cwiseAbs().maxCoeff();
    } else if (part.p == 1.0) {
      n = seg.cwiseAbs().sum();
    } else if (part.p == 2.0) {
      n = seg.norm();
    } else {
      const double scale = seg.cwiseAbs().maxCoeff();
      if (scale == 0.0) {
        n = 0.0;
      } else {
        double s = 0.0;
        for (int i = 0; i < part.d; ++i) s += std::pow(std::abs(seg[i]) / scale, part.p);
        n = scale * std::pow(s, 1.0 / part.p);
      }
    }
    total += n * n;
    offset += part.d;
  }
  return std::sqrt(total);
}

std::string NormedModel::describe() const {
  std::string out;
  for (const auto& p : parts_) {
    if (!out.empty()) out += "+";
    out += "l" + (p.p == kInf ? std::string("inf") : format_double(p.p)) + "^" + std::to_string(p.d);
  }
  return out;
}

Signature signature_of(const Model& m) {
  return std::holds_alternative<MatrixModel>(m) ? Signature::TracialAlgebra : Signature::NormedSpace;
}

std::string describe(const Model& m) {
  return std::visit([](const auto& x) { return x.describe(); }, m);
}

// ---------------------------------------------------------------------------
// Elements

Element make_element(Blocks blocks, int domain) { return Element{std::move(blocks), domain}; }
Element make_element(Eigen::VectorXd v, int domain) { return Element{std::move(v), domain}; }

void check_shape(const Model& m, const Element& e) {
  if (const auto* mm = std::get_if<MatrixModel>(&m)) {
    if (!e.is_matrix()) throw ShapeError("vector element used in a matrix model");
    const auto& b = e.blocks();
    if (b.size() != mm->block_count()) throw ShapeError("element has wrong number of blocks");
    for (std::size_t i = 0; i < b.size(); ++i) {
      const int n = mm->summands()[i].n;
      if (b[i].rows() != n || b[i].cols() != n) throw ShapeError("element block has wrong size");
    }
  } else {
    const auto& nm = std::get<NormedModel>(m);
    if (e.is_matrix()) throw ShapeError("matrix element used in a normed model");
    if (e.vec().size() != nm.dimension()) throw ShapeError("element has wrong dimension");
  }
}

double element_norm(const Model& m, const Element& e) {
  if (const auto* mm = std::get_if<MatrixModel>(&m)) return mm->norm_inf(e.blocks());
  return std::get<NormedModel>(m).norm(e.vec());
}

namespace {

int domain_for_bound(double bound) { return std::max(1, static_cast<int>(std::ceil(bound - 1e-9))); }

Blocks eval_blocks(const MatrixModel& m, const Term& t, const Valuation& v, DomainMap& domains) {
  switch (t.op) {
    case TermOp::Variable: {
      const auto it = v.find(t.name);
      if (it == v.end()) throw ShapeError("valuation is missing variable " + t.name);
      if (!it->second.is_matrix()) throw ShapeError("variable " + t.name + " is not a matrix element");
      domains[t.name] = it->second.domain;
      return it->second.blocks();
    }
    case TermOp::Identity: return m.identity();
    case TermOp::Zero: return m.zero();
    case TermOp::Adjoint: {
      Blocks a = eval_blocks(m, *t.lhs, v, domains);
      for (auto& b : a) b.adjointInPlace();
      return a;
    }
    case TermOp::Scale: {
      Blocks a = eval_blocks(m, *t.lhs, v, domains);
      const std::complex<double> c = t.scalar.to_complex();
      for (auto& b : a) b *= c;
      return a;
    }
    case TermOp::Add:
    case TermOp::Sub:
    case TermOp::Mul: {
      Blocks a = eval_blocks(m, *t.lhs, v, domains);
      const Blocks b = eval_blocks(m, *t.rhs, v, domains);
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (t.op == TermOp::Add) {
          a[i] += b[i];
        } else if (t.op == TermOp::Sub) {
          a[i] -= b[i];
        } else {
          a[i] = (a[i] * b[i]).eval();
        }
      }
      return a;
    }
  }
  return {};
}

Eigen::VectorXd eval_vector(const NormedModel& m, const Term& t, const Valuation& v, DomainMap& domains) {
  switch (t.op) {
    case TermOp::Variable: {
      const auto it = v.find(t.name);
      if (it == v.end()) throw ShapeError("valuation is missing variable " + t.name);
      if (it->second.is_matrix()) throw ShapeError("variable " + t.name + " is not a vector element");
      domains[t.name] = it->second.domain;
      return it->second.vec();
    }
    case TermOp::Zero: return Eigen::VectorXd::Zero(m.dimension());
    case TermOp::Scale:
      if (!t.scalar.is_real()) throw ValidationError({{"complex scalar " + t.scalar.str() + " undefined in signature"}});
      return t.scalar.re.to_double() * eval_vector(m, *t.lhs, v, domains);
    case TermOp::Add: return eval_vector(m, *t.lhs, v, domains) + eval_vector(m, *t.rhs, v, domains);
    case TermOp::Sub: return eval_vector(m, *t.lhs, v, domains) - eval_vector(m, *t.rhs, v, domains);
    case TermOp::Identity: throw ValidationError({{"term I undefined in signature"}});
    case TermOp::Adjoint: throw ValidationError({{"term adj undefined in signature"}});
    case TermOp::Mul: throw ValidationError({{"term mul undefined in signature"}});
  }
  return {};
}

}  // namespace

Element eval_term(const Model& m, const Term& t, const Valuation& v) {
  DomainMap domains;
  Element out;
  if (const auto* mm = std::get_if<MatrixModel>(&m)) {
    out.data = eval_blocks(*mm, t, v, domains);
  } else {
    out.data = eval_vector(std::get<NormedModel>(m), t, v, domains);
  }
  out.domain = domain_for_bound(term_bound(t, domains));
  return out;
}

double eval_atom(const Model& m, AtomKind atom, const Element& e) {
  if (const auto* mm = std::get_if<MatrixModel>(&m)) {
    switch (atom) {
      case AtomKind::Norm2: return mm->norm2(e.blocks());
      case AtomKind::NormInf: return mm->norm_inf(e.blocks());
      case AtomKind::ReTr: return mm->trace(e.blocks()).real();
      case AtomKind::ImTr: return mm->trace(e.blocks()).imag();
      case AtomKind::AbsTr: return std::abs(mm->trace(e.blocks()));
      case AtomKind::Norm: break;
    }
    throw ValidationError({{"atom norm undefined in signature"}});
  }
  if (atom != AtomKind::Norm) {
    throw ValidationError({{"atom " + std::string(atom_name(atom)) + " undefined in signature"}});
  }
  return std::get<NormedModel>(m).norm(e.vec());
}

// ---------------------------------------------------------------------------
// Sampling and projection

namespace {

Matrix ginibre(int n, Rng& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5 / n));
  Matrix x(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = {g(rng), g(rng)};
  return x;
}

Matrix haar_unitary(int n, Rng& rng) {
  const Matrix z = ginibre(n, rng);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const std::complex<double> d = r(j, j);
    const double a = std::abs(d);
    if (a > 0) q.col(j) *= d / a;
  }
  return q;
}

Matrix permutation(int n, Rng& rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  Matrix out = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) out(i, p[i]) = 1.0;
  return out;
}

std::complex<double> quarter_phase(Rng& rng) {
  static constexpr std::complex<double> phases[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  return phases[std::uniform_int_distribution<int>(0, 3)(rng)];
}

// Partial isometry U diag(pattern) V: unitary times a random projection pattern.
Matrix boundary_block(int n, double k, bool structured, Rng& rng) {
  std::bernoulli_distribution keep(0.75);
  Eigen::VectorXcd d(n);
  if (structured) {
    const bool common = std::bernoulli_distribution(0.5)(rng);
    const std::complex<double> c = quarter_phase(rng);
    const bool full = std::bernoulli_distribution(0.5)(rng);
    for (int i = 0; i < n; ++i) d[i] = (full || keep(rng)) ? (common ? c : quarter_phase(rng)) : 0.0;
    return k * permutation(n, rng) * d.asDiagonal() * permutation(n, rng);
  }
  for (int i = 0; i < n; ++i) d[i] = keep(rng) ? 1.0 : 0.0;
  return k * haar_unitary(n, rng) * d.asDiagonal() * haar_unitary(n, rng);
}

// Clip singular values to <= k.
void clip_block(Matrix& x, double k) {
  if (x.size() == 1) {
    const double a = std::abs(x(0, 0));
    if (a > k) x(0, 0) *= k / a;
    return;
  }
  if (x.squaredNorm() <= k * k) return;
  const Matrix g = x.adjoint() * x;
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (ev.maxCoeff() <= k * k) return;
  Eigen::VectorXd f(ev.size());
  for (int i = 0; i < ev.size(); ++i) {
    const double s = std::sqrt(std::max(ev[i], 0.0));
    f[i] = s > k ? k / s : 1.0;
  }
  const Matrix& v = es.eigenvectors();
  x = (x * v * f.asDiagonal() * v.adjoint()).eval();
  // Guard against rounding pushing the norm a hair above k.
  const double after = operator_norm(x);
  if (after > k) x *= k / after;
}

}  // namespace

Element sample_domain(const Model& m, int k, Rng& rng) {
  const double radius = k;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double mode = unit(rng);
  if (const auto* mm = std::get_if<MatrixModel>(&m)) {
    Blocks blocks;
    blocks.reserve(mm->block_count());
    const bool structured = unit(rng) < 0.5;
    const double interior_scale = radius * 1.5 * unit(rng);
    for (const auto& s : mm->summands()) {
      if (mode < 0.5) {
        Matrix x = interior_scale * ginibre(s.n, rng);
        clip_block(x, radius);
        blocks.push_back(std::move(x));
      } else {
        blocks.push_back(boundary_block(s.n, radius, structured, rng));
      }
    }
    return make_element(std::move(blocks), k);
  }

  const auto& nm = std::get<NormedModel>(m);
  const int dim = nm.dimension();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  double target = radius;
  if (mode < 0.75) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < dim; ++i) v[i] = g(rng);
    if (mode < 0.5) target = radius * std::pow(unit(rng), 1.0 / dim);
  } else {
    std::bernoulli_distribution sign(0.5);
    const double support = unit(rng);
    if (support < 1.0 / 3.0) {
      v[std::uniform_int_distribution<int>(0, dim - 1)(rng)] = 1.0;
    } else if (support < 2.0 / 3.0) {
      const auto& parts = nm.parts();
      const int which = std::uniform_int_distribution<int>(0, int(parts.size()) - 1)(rng);
      int offset = 0;
      for (int i = 0; i < which; ++i) offset += parts[i].d;
      for (int i = 0; i < parts[which].d; ++i) v[offset + i] = 1.0;
    } else {
      for (int i = 0; i < dim; ++i) v[i] = sign(rng) ? 1.0 : 0.0;
      if (v.isZero()) v[std::uniform_int_distribution<int>(0, dim - 1)(rng)] = 1.0;
    }
    for (int i = 0; i < dim; ++i)
      if (sign(rng)) v[i] = -v[i];
  }
  const double n = nm.norm(v);
  if (n > 0) v *= target / n;
  return make_element(std::move(v), k);
}

Element sample_domain(const Model& m, int k, std::uint64_t seed) {
  Rng rng(seed);
  return sample_domain(m, k, rng);
}

Element project_domain(const Model& m, const Element& e, int k) {
  check_shape(m, e);
  Element out = e;
  project_in_place(m, out, k);
  return out;
}

void project_in_place(const Model& m, Element& e, int k, int block) {
  e.domain = k;
  if (e.is_matrix()) {
    auto& blocks = e.blocks();
    if (block >= 0) {
      clip_block(blocks[block], k);
    } else {
      for (auto& b : blocks) clip_block(b, k);
    }
    return;
  }
  const double n = std::get<NormedModel>(m).norm(e.vec());
  if (n > k) e.vec() *= k / n;
}

Eigen::VectorXd coordinates(const Element& e) {
  if (!e.is_matrix()) return e.vec();
  Eigen::Index total = 0;
  for (const auto& b : e.blocks()) total += 2 * b.size();
  Eigen::VectorXd c(total);
  Eigen::Index at = 0;
  for (const auto& b : e.blocks()) {
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      c[at++] = b.data()[i].real();
      c[at++] = b.data()[i].imag();
    }
  }
  return c;
}

void set_coordinates(Element& e, const Eigen::VectorXd& c) {
  if (!e.is_matrix()) {
    e.vec() = c;
    return;
  }
  Eigen::Index at = 0;
  for (auto& b : e.blocks()) {
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      b.data()[i] = {c[at], c[at + 1]};
      at += 2;
    }
  }
}

// ---------------------------------------------------------------------------
// a_M, b_M

double a_value(const MatrixModel& m) {
  double a = 0.0;
  for (const auto& s : m.summands()) a = std::max(a, s.w / s.n);
  return a;
}

double b_value_closed(const MatrixModel& m) { return std::max(2.0 * a_value(m) - 1.0, 0.0); }

namespace {

// Hermitian blocks from n^2 reals per block: diagonal first, then re/im of the
// strict upper triangle.
Blocks hermitian_from(const MatrixModel& m, const Eigen::VectorXd& c) {
  Blocks out;
  Eigen::Index at = 0;
  for (const auto& s : m.summands()) {
    Matrix h = Matrix::Zero(s.n, s.n);
    for (int i = 0; i < s.n; ++i) h(i, i) = c[at++];
    for (int j = 0; j < s.n; ++j) {
      for (int i = 0; i < j; ++i) {
        h(i, j) = {c[at], c[at + 1]};
        h(j, i) = std::conj(h(i, j));
        at += 2;
      }
    }
    out.push_back(std::move(h));
  }
  return out;
}

double abs_trace_of_exp(const MatrixModel& m, const Blocks& h) {
  std::complex<double> t = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const int n = m.summands()[i].n;
    std::complex<double> tr = 0.0;
    if (n == 1) {
      tr = std::polar(1.0, h[i](0, 0).real());
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix> es(h[i], Eigen::EigenvaluesOnly);
      for (int j = 0; j < n; ++j) tr += std::polar(1.0, es.eigenvalues()[j]);
    }
    t += m.summands()[i].w * tr / double(n);
  }
  return std::abs(t);
}

}  // namespace

BValueSearch b_value_search_detail(const MatrixModel& m, int budget, std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("b_value_search needs budget >= 1");
  int dim = 0;
  for (const auto& s : m.summands()) dim += s.n * s.n;
  auto objective = [&](const Eigen::VectorXd& c) { return abs_trace_of_exp(m, hermitian_from(m, c)); };

  BValueSearch best;
  best.value = kInf;
  for (int r = 0; r < budget; ++r) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    Eigen::VectorXd c(dim);
    for (int i = 0; i < dim; ++i) c[i] = u(rng);
    double f = objective(c);
    double h = 1.0;
    for (int sweep = 0; sweep < 400 && h > 1e-11 && f > 0.0; ++sweep) {
      bool improved = false;
      for (int i = 0; i < dim; ++i) {
        for (const double dir : {1.0, -1.0}) {
          const double saved = c[i];
          c[i] += dir * h;
          const double g = objective(c);
          if (g < f) {
            f = g;
            improved = true;
            break;
          }
          c[i] = saved;
        }
      }
      if (!improved) h *= 0.7;
    }
    if (f < best.value) {
      best.value = f;
      best.hamiltonian = hermitian_from(m, c);
    }
  }
  return best;
}

double b_value_search(const MatrixModel& m, int budget, std::uint64_t seed) {
  return b_value_search_detail(m, budget, seed).value;
}

// ---------------------------------------------------------------------------
// Moments

std::vector<std::vector<int>> moment_words(int generators, int degree) {
  std::vector<std::vector<int>> words{{}};
  std::vector<std::vector<int>> layer{{}};
  const int letters = 2 * generators;
  for (int len = 1; len <= degree; ++len) {
    std::vector<std::vector<int>> next;
    next.reserve(layer.size() * letters);
    for (const auto& w : layer) {
      for (int l = 0; l < letters; ++l) {
        auto e = w;
        e.push_back(l);
        next.push_back(std::move(e));
      }
    }
    words.insert(words.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return words;
}

std::vector<Moment> moments(const MatrixModel& m, const std::vector<Element>& tuple, int degree) {
  if (degree < 1) throw std::invalid_argument("moment degree must be >= 1");
  for (const auto& e : tuple) check_shape(m, e);
  const int g = static_cast<int>(tuple.size());
  auto letter_name = [g](int l) {
    std::string s = "x";
    if (g > 1) s += std::to_string(l / 2 + 1);
    if (l % 2) s += "*";
    return s;
  };
  std::vector<Moment> out;
  for (const auto& w : moment_words(g, degree)) {
    Blocks prod = m.identity();
    std::string name;
    for (const int l : w) {
      const Blocks& x = tuple[l / 2].blocks();
      for (std::size_t i = 0; i < prod.size(); ++i) {
        prod[i] = (l % 2) ? (prod[i] * x[i].adjoint()).eval() : (prod[i] * x[i]).eval();
      }
      name += letter_name(l);
    }
    out.push_back({name.empty() ? "1" : name, m.trace(prod)});
  }
  return out;
}

}  // namespace contmodel
