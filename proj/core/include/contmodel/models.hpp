#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "contmodel/formula.hpp"
#include "contmodel/random.hpp"

namespace contmodel {

using Matrix = Eigen::MatrixXcd;
using Blocks = std::vector<Matrix>;

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Element or valuation that does not fit the model it is used with.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Summand {
  int n = 1;
  double w = 1.0;
};

/// Finite-dimensional tracial algebra: the direct sum of the blocks M_{n_i},
/// with trace sum_i w_i tr(x_i) / n_i.
class MatrixModel {
 public:
  const std::vector<Summand>& summands() const { return summands_; }
  std::size_t block_count() const { return summands_.size(); }

  std::complex<double> trace(const Blocks& x) const;
  double norm2(const Blocks& x) const;
  double norm_inf(const Blocks& x) const;
  Blocks identity() const;
  Blocks zero() const;

  /// Short human-readable name, e.g. "M2", "C+C", "C(0.6)+M2(0.4)".
  std::string describe() const;

 private:
  friend MatrixModel make_matrix_model(const std::vector<Summand>& spec);
  std::vector<Summand> summands_;
};

MatrixModel make_matrix_model(const std::vector<Summand>& spec);

struct NormPart {
  double p = 2.0;  // in [1, inf]
  int d = 1;
};

/// l2-direct sum of finite-dimensional real l_p spaces.
class NormedModel {
 public:
  const std::vector<NormPart>& parts() const { return parts_; }
  int dimension() const { return dimension_; }
  double norm(const Eigen::VectorXd& v) const;
  std::string describe() const;

 private:
  friend NormedModel make_normed_model(const std::vector<NormPart>& spec);
  std::vector<NormPart> parts_;
  int dimension_ = 0;
};

NormedModel make_normed_model(const std::vector<NormPart>& spec);

using Model = std::variant<MatrixModel, NormedModel>;

Signature signature_of(const Model& m);
std::string describe(const Model& m);

/// A point of a model with the radius index of the domain it lives in.
struct Element {
  std::variant<Blocks, Eigen::VectorXd> data;
  int domain = 1;

  bool is_matrix() const { return std::holds_alternative<Blocks>(data); }
  const Blocks& blocks() const { return std::get<Blocks>(data); }
  Blocks& blocks() { return std::get<Blocks>(data); }
  const Eigen::VectorXd& vec() const { return std::get<Eigen::VectorXd>(data); }
  Eigen::VectorXd& vec() { return std::get<Eigen::VectorXd>(data); }
};

Element make_element(Blocks blocks, int domain = 1);
Element make_element(Eigen::VectorXd v, int domain = 1);

using Valuation = std::map<std::string, Element>;

void check_shape(const Model& m, const Element& e);

/// Operator norm for algebras, the space norm for normed spaces.
double element_norm(const Model& m, const Element& e);

Element eval_term(const Model& m, const Term& t, const Valuation& v);

double eval_atom(const Model& m, AtomKind atom, const Element& e);

Element sample_domain(const Model& m, int k, Rng& rng);
Element sample_domain(const Model& m, int k, std::uint64_t seed);

/// Nearest point of the radius-k ball: singular values clipped blockwise for
/// algebras, radial scaling for normed spaces.
Element project_domain(const Model& m, const Element& e, int k);
/// In-place variant; `block` >= 0 restricts the clip to one algebra summand.
void project_in_place(const Model& m, Element& e, int k, int block = -1);

/// Flattened real coordinates (re/im interleaved, column-major per block).
Eigen::VectorXd coordinates(const Element& e);
void set_coordinates(Element& e, const Eigen::VectorXd& c);

/// Largest trace of a minimal projection.
double a_value(const MatrixModel& m);
/// (2a - 1) v 0
double b_value_closed(const MatrixModel& m);

struct BValueSearch {
  double value = 0.0;
  Blocks hamiltonian;  // Hermitian H with the witness unitary exp(iH)
};

/// Multi-start local search for inf |tau(exp(iH))| over Hermitian H; an upper
/// bound on b_M.
BValueSearch b_value_search_detail(const MatrixModel& m, int budget, std::uint64_t seed);
double b_value_search(const MatrixModel& m, int budget, std::uint64_t seed);

struct Moment {
  std::string word;
  std::complex<double> value;
};

/// tau(w) for every word of length <= degree in the tuple and its adjoints,
/// shortlex order over letters x1 < x1* < x2 < ... (the empty word first).
std::vector<Moment> moments(const MatrixModel& m, const std::vector<Element>& tuple, int degree);

/// Letter sequences (2 * generator + adjoint flag) in the same order as moments().
std::vector<std::vector<int>> moment_words(int generators, int degree);

}  // namespace contmodel
