#include "contmodel/model_io.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace contmodel {

using nlohmann::json;

Model parse_model_spec(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ModelSpecError(std::string("model spec is not valid JSON: ") + e.what());
  }
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "matrix") {
      std::vector<Summand> spec;
      for (const auto& s : j.at("summands")) spec.push_back({s.at("n").get<int>(), s.at("w").get<double>()});
      return make_matrix_model(spec);
    }
    if (kind == "normed") {
      std::vector<NormPart> spec;
      for (const auto& p : j.at("parts")) {
        const auto& pv = p.at("p");
        double pval;
        if (pv.is_string()) {
          if (pv.get<std::string>() != "inf") throw ModelSpecError("p must be a number or \"inf\"");
          pval = std::numeric_limits<double>::infinity();
        } else {
          pval = pv.get<double>();
        }
        spec.push_back({pval, p.at("d").get<int>()});
      }
      return make_normed_model(spec);
    }
    throw ModelSpecError("unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ModelSpecError(std::string("malformed model spec: ") + e.what());
  } catch (const ModelError& e) {
    throw ModelSpecError(e.what());
  }
}

Model load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelSpecError("cannot open model file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model_spec(ss.str());
}

std::string model_spec_json(const Model& m) {
  json j;
  if (const auto* mm = std::get_if<MatrixModel>(&m)) {
    j["kind"] = "matrix";
    j["summands"] = json::array();
    for (const auto& s : mm->summands()) j["summands"].push_back({{"n", s.n}, {"w", s.w}});
  } else {
    j["kind"] = "normed";
    j["parts"] = json::array();
    for (const auto& p : std::get<NormedModel>(m).parts()) {
      json pj;
      if (std::isinf(p.p)) {
        pj["p"] = "inf";
      } else {
        pj["p"] = p.p;
      }
      pj["d"] = p.d;
      j["parts"].push_back(pj);
    }
  }
  return j.dump();
}

Element parse_element(const Model& m, std::string_view json_text, int domain) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ModelSpecError(std::string("element is not valid JSON: ") + e.what());
  }
  Element e;
  try {
    if (std::holds_alternative<NormedModel>(m)) {
      const auto v = j.get<std::vector<double>>();
      e = make_element(Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size())), domain);
    } else {
      Blocks blocks;
      for (const auto& bj : j) {
        const int n = static_cast<int>(bj.size());
        Matrix b(n, n);
        for (int r = 0; r < n; ++r) {
          if (int(bj[r].size()) != n) throw ModelSpecError("element block is not square");
          for (int c = 0; c < n; ++c) {
            const auto& x = bj[r][c];
            b(r, c) = x.is_array() ? std::complex<double>(x.at(0).get<double>(), x.at(1).get<double>())
                                   : std::complex<double>(x.get<double>(), 0.0);
          }
        }
        blocks.push_back(std::move(b));
      }
      e = make_element(std::move(blocks), domain);
    }
  } catch (const json::exception& ex) {
    throw ModelSpecError(std::string("malformed element: ") + ex.what());
  }
  try {
    check_shape(m, e);
  } catch (const ShapeError& ex) {
    throw ModelSpecError(ex.what());
  }
  return e;
}

std::string element_json(const Element& e) {
  json j = json::array();
  if (e.is_matrix()) {
    for (const auto& b : e.blocks()) {
      json bj = json::array();
      for (Eigen::Index r = 0; r < b.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < b.cols(); ++c) row.push_back({b(r, c).real(), b(r, c).imag()});
        bj.push_back(std::move(row));
      }
      j.push_back(std::move(bj));
    }
  } else {
    for (Eigen::Index i = 0; i < e.vec().size(); ++i) j.push_back(e.vec()[i]);
  }
  return j.dump();
}

}  // namespace contmodel
