#pragma once

#include <complex>
#include <cstdint>
#include <string>

namespace contmodel {

/// Exact rational number with a positive denominator, always stored reduced.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_zero() const { return num_ == 0; }
  bool is_negative() const { return num_ < 0; }

  Rational operator-() const { return Rational(-num_, den_); }

  /// "3", "-1/2"
  std::string str() const;

  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Complex scalar with rational parts, printed as "a/b", "c/d*i" or "a/b+c/d*i".
struct ComplexRational {
  Rational re;
  Rational im;

  std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }
  bool is_real() const { return im.is_zero(); }
  double abs() const { return std::abs(to_complex()); }
  std::string str() const;

  friend bool operator==(const ComplexRational&, const ComplexRational&) = default;
};

}  // namespace contmodel
