#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "contmodel/formula.hpp"

namespace contmodel {

struct SentenceId {
  std::string name;
  Formula formula;
  Signature signature = Signature::TracialAlgebra;
  /// false for sentences designed for this library rather than taken from
  /// the literature (e.g. proj.third).
  bool from_literature = true;
  std::string note;
};

/// sup_{x_1..x_n} inf_y ||y*y - I||_2 + |tau(y)| + sum_j ||[x_j, y]||_2
SentenceId sigma(int n);
/// sup_{x_1..x_n} inf_y ||yy*y - y||_2 + ||y*y + yy* - I||_2 + sum_j ||[x_j, y]||_2
SentenceId sigma_prime(int n);
/// inf_{x,y} | ||x|| - 1 | + | ||y|| - 1 | + | ||(x+y)/2|| - 1 | + | ||(x-y)/2|| - 1 |
SentenceId psi();
/// sup_{x,y} 4 -. (body of psi); equals 4 - psi.
SentenceId psi_negated();
SentenceId comm_sup();
SentenceId proj_third();
SentenceId traceless_unitary_inf();
SentenceId moment_nilpotent();
SentenceId moment_self_commutator();

/// Library lookup: "sigma.<n>", "sigmaPrime.<n>", "psi", "psi.neg", "comm.sup",
/// "proj.third", "traceless-unitary.inf", "moment.nil", "moment.selfcomm".
std::optional<SentenceId> library_sentence(const std::string& name);
std::vector<std::string> library_names();

enum class PanelKind { Full, Universal };

struct Panel {
  std::string id;
  std::string version;
  PanelKind kind = PanelKind::Full;
  Signature signature = Signature::TracialAlgebra;
  std::vector<SentenceId> sentences;
};

inline constexpr const char* kPanelVersion = "panel.v1";

class PanelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Checks name uniqueness, validation under the panel signature, and that a
/// universal panel has no inf quantifier.
Panel make_panel(std::string id, std::string version, PanelKind kind, Signature sig, std::vector<SentenceId> sentences);

Panel default_panel(PanelKind kind, Signature sig);

/// "tracial.full", "tracial.universal", "normed.full", "normed.universal".
Panel panel_by_name(const std::string& name);

/// Restriction of a panel to the named sentences (order preserved).
Panel sub_panel(const Panel& p, const std::vector<std::string>& names);

std::string export_panel(const Panel& p);
Panel import_panel(const std::string& text);

std::string_view to_string(PanelKind k);

}  // namespace contmodel
