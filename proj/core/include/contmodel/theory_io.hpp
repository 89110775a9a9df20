#pragma once

#include <string>
#include <string_view>

#include "contmodel/theory.hpp"

namespace contmodel {

/// {"panel", "version", "kind", "model", "seed", "options", "entries": [{"sentence", "value", "status"}]}
std::string fingerprint_to_json(const Fingerprint& fp, int indent = 2);
Fingerprint fingerprint_from_json(std::string_view text);

/// Header "n,sentence,value,status"; values printed with 17 significant digits.
std::string scan_to_csv(const ScanTable& t);
/// Structured form of a scan: rows plus per-sentence Cauchy flags and limit estimates.
std::string scan_to_json(const ScanTable& t, int indent = 2);

std::string format_value(double v);

}  // namespace contmodel
