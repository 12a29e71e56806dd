#pragma once

// Line-oriented structured-text serialization for every model kind the CLI
// exchanges. Files start with `lpvlft <kind>`; `#` starts a comment; numbers
// are written with enough digits to round-trip bit-exactly.

#include <optional>
#include <string>
#include <vector>

#include "lpvlft/analysis.hpp"
#include "lpvlft/model.hpp"
#include "lpvlft/transform.hpp"

namespace lpvlft {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- whole-file helpers ----
std::string load_text(const std::string& path);
void save_text(const std::string& path, const std::string& text);

// Returns the kind named on the header line: "falpv", "lft",
// "psi-realization", "psi-taylor", "signals" or "trajectory".
std::string model_kind(const std::string& text);

// ---- parameter-varying state-space models ----
std::string serialize_falpv(const FalpvModel& sys,
                            const std::string& description = "");
FalpvModel parse_falpv(const std::string& text);

// ---- fractional-form models ----
// A plain block model and an assembled closed-loop model share the "lft"
// kind; the assembled flavour carries its plant dimensions and the parameter
// scaling factor.
struct LoadedLft {
  LftModel model;
  std::optional<AssembledLft> assembled;
};
std::string serialize_lft(const LftModel& model,
                          const std::string& description = "");
std::string serialize_assembled(const AssembledLft& model,
                                const std::string& description = "");
LoadedLft parse_lft(const std::string& text);

// ---- scheduling-function realizations ----
struct LoadedPsiRealization {
  PsiRealization model;
  double lambda = 1.0;
};
std::string serialize_psi_realization(const PsiRealization& psi,
                                      double lambda = 1.0,
                                      const std::string& description = "");
LoadedPsiRealization parse_psi_realization(const std::string& text);

// ---- scheduling-function series data ----
std::string serialize_psi_taylor(const TaylorPsi& taylor,
                                 const std::string& description = "");
TaylorPsi parse_psi_taylor(const std::string& text);

// ---- input/scheduling signals and simulated trajectories ----
struct Signals {
  std::vector<Vector> u;  // one entry per step
  std::vector<Vector> p;
};
std::string serialize_signals(const Signals& signals,
                              const std::string& description = "");
Signals parse_signals(const std::string& text);

std::string serialize_trajectory(const Trajectory& trajectory,
                                 const std::vector<Vector>* loop_signal = nullptr,
                                 const std::string& description = "");
Trajectory parse_trajectory(const std::string& text);

}  // namespace lpvlft
