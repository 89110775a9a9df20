#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "contmodel/models.hpp"

namespace contmodel {

class ModelSpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// {"kind":"matrix","summands":[{"n":2,"w":1.0}]} or
/// {"kind":"normed","parts":[{"p":1,"d":2}]} with "p":"inf" for the max-norm.
Model parse_model_spec(std::string_view json_text);
Model load_model_file(const std::string& path);

/// Compact JSON in the same schema; weights are the normalized ones.
std::string model_spec_json(const Model& m);

/// Element literal: a vector of reals for normed models, or a list of blocks
/// for algebras where each block is a list of rows and each entry is a real
/// number or a [re, im] pair.
Element parse_element(const Model& m, std::string_view json_text, int domain = 1);
/// Inverse of parse_element; matrix entries are always [re, im] pairs.
std::string element_json(const Element& e);

}  // namespace contmodel
