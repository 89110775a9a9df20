#include "contmodel/theory_io.hpp"

#include <cstdio>
#include <sstream>

#include "contmodel/model_io.hpp"
#include "json.hpp"

namespace contmodel {

using nlohmann::ordered_json;

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

EvalStatus status_from_string(const std::string& s) {
  for (auto st : {EvalStatus::Exact, EvalStatus::CertifiedLower, EvalStatus::CertifiedUpper, EvalStatus::Heuristic}) {
    if (to_string(st) == s) return st;
  }
  throw std::invalid_argument("unknown evaluation status '" + s + "'");
}

}  // namespace

std::string fingerprint_to_json(const Fingerprint& fp, int indent) {
  ordered_json j;
  j["panel"] = fp.panel_id;
  j["version"] = fp.panel_version;
  j["kind"] = std::string(to_string(fp.panel_kind));
  j["model"] = ordered_json::parse(fp.model);
  j["seed"] = fp.options.seed;
  j["options"] = {{"outer_restarts", fp.options.outer_restarts},
                  {"inner_restarts", fp.options.inner_restarts},
                  {"refinement_steps", fp.options.refinement_steps},
                  {"tolerance", fp.options.tolerance},
                  {"split", fp.options.split},
                  {"elite_fraction", fp.options.elite_fraction},
                  {"flat_elite_fraction", fp.options.flat_elite_fraction}};
  j["entries"] = ordered_json::array();
  for (const auto& e : fp.entries) {
    j["entries"].push_back(
        {{"sentence", e.sentence}, {"value", e.result.value}, {"status", std::string(to_string(e.result.status))}});
  }
  return j.dump(indent);
}

Fingerprint fingerprint_from_json(std::string_view text) {
  try {
    const auto j = ordered_json::parse(text);
    Fingerprint fp;
    fp.panel_id = j.at("panel").get<std::string>();
    fp.panel_version = j.at("version").get<std::string>();
    const std::string kind = j.value("kind", std::string("universal"));
    if (kind != "full" && kind != "universal") throw std::invalid_argument("unknown panel kind " + kind);
    fp.panel_kind = kind == "full" ? PanelKind::Full : PanelKind::Universal;
    fp.model = j.at("model").dump();
    fp.options.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("options")) {
      const auto& o = j["options"];
      fp.options.outer_restarts = o.value("outer_restarts", fp.options.outer_restarts);
      fp.options.inner_restarts = o.value("inner_restarts", fp.options.inner_restarts);
      fp.options.refinement_steps = o.value("refinement_steps", fp.options.refinement_steps);
      fp.options.tolerance = o.value("tolerance", fp.options.tolerance);
      fp.options.split = o.value("split", fp.options.split);
      fp.options.elite_fraction = o.value("elite_fraction", fp.options.elite_fraction);
      fp.options.flat_elite_fraction = o.value("flat_elite_fraction", fp.options.flat_elite_fraction);
    }
    for (const auto& e : j.at("entries")) {
      EvalResult r;
      r.value = e.at("value").get<double>();
      r.status = status_from_string(e.at("status").get<std::string>());
      r.seed = fp.options.seed;
      fp.entries.push_back({e.at("sentence").get<std::string>(), std::move(r)});
    }
    return fp;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed fingerprint: ") + e.what());
  }
}

std::string scan_to_csv(const ScanTable& t) {
  std::ostringstream os;
  os << "n,sentence,value,status\n";
  for (const auto& r : t.rows) os << r.n << ',' << r.sentence << ',' << format_value(r.value) << ',' << to_string(r.status) << '\n';
  return os.str();
}

std::string scan_to_json(const ScanTable& t, int indent) {
  ordered_json j;
  j["rows"] = ordered_json::array();
  for (const auto& r : t.rows) {
    j["rows"].push_back({{"n", r.n}, {"sentence", r.sentence}, {"value", r.value}, {"status", std::string(to_string(r.status))}});
  }
  j["cauchy"] = ordered_json::object();
  for (const auto& [s, flag] : t.cauchy) j["cauchy"][s] = flag;
  j["limit_estimate"] = ordered_json::object();
  for (const auto& [s, v] : t.limit_estimate) j["limit_estimate"][s] = v;
  return j.dump(indent);
}

}  // namespace contmodel
