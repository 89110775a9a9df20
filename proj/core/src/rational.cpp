#include "contmodel/rational.hpp"

#include <numeric>
#include <stdexcept>

namespace contmodel {

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = g == 0 ? 0 : num / g;
  den_ = g == 0 ? 1 : den / g;
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::string ComplexRational::str() const {
  if (im.is_zero()) return re.str();
  if (re.is_zero()) return im.str() + "*i";
  if (im.is_negative()) return re.str() + "-" + (-im).str() + "*i";
  return re.str() + "+" + im.str() + "*i";
}

}  // namespace contmodel
