#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "contmodel/formula.hpp"

namespace contmodel {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  std::size_t position_;
};

/// Parses the textual formula grammar. Free variables must be declared in
/// `free_domains`. Throws ParseError on syntax or scoping problems and
/// ValidationError when the result does not conform to `sig`.
Formula parse_formula(std::string_view text, Signature sig, const DomainMap& free_domains = {});

/// Canonical rendering; parse_formula(print_formula(f)) == f.
std::string print_formula(const Formula& f);
std::string print_node(const Node& n);
std::string print_term(const Term& t);

}  // namespace contmodel
