#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "modulikit/curve.hpp"
#include "modulikit/stability.hpp"

namespace modulikit {

struct NotStable : std::runtime_error {
  explicit NotStable(const std::string& what) : std::runtime_error(what) {}
};

enum class Critical { C_9_11, C_7_10, C_2_3 };

const char* critical_name(Critical c);          // "9/11", "7/10", "2/3"
Critical critical_from_string(const std::string& s);
AlphaRegime critical_regime(Critical c);        // AT_911 / AT_710 / AT_23
AlphaRegime regime_just_above(Critical c);      // open regime above the critical value

/// Rank of the identity component of the automorphism torus, from the rosary
/// decomposition (tacnodally linked chains of 2-special-point rational
/// components; a closed rosary of even length contributes 1).
int aut_torus_rank(const CurveGraph& c);

struct AtomRef {
  std::vector<std::string> comps;           // 1 component (9/11, 2/3) or 2 (7/10)
  std::string sing_id;                      // the cusp / tacnode / ramphoid cusp
  std::vector<std::string> attach_ids;      // node or marking per slot
  std::vector<bool> attach_is_marking;
};

struct RosaryRef {
  std::array<std::string, 3> comps;     // in order along the link
  std::array<std::string, 2> tacnodes;  // tau_{.,1}, tau_{.,2}
};

struct LinkRef {
  std::vector<RosaryRef> rosaries;   // 2/3 links only
  std::vector<AtomRef> atoms;        // 7/10: the chain; 9/11 and 2/3: one atom
  std::vector<std::string> nodes;    // q_{i,0}, q_{i,1}, ... from the core outward
  bool to_core_both_ends = false;    // 7/10 r-links
  bool ends_in_marking = false;
  int length() const {
    return static_cast<int>(rosaries.size() + atoms.size());
  }
};

struct Decomposition {
  std::vector<AtomRef> atoms;
  std::vector<std::string> core;  // component ids
};

/// All nodally-attached atoms of the given critical value.
std::vector<AtomRef> find_atoms(const CurveGraph& c, Critical crit);

/// Canonical decomposition core/atoms; requires alpha_c-stability.
Decomposition canonical_decomposition(const CurveGraph& c, Critical crit);

struct ClosedClassification {
  Critical critical = Critical::C_9_11;
  bool closed = false;
  bool undetermined = false;  // outside the paper's combinatorial criteria
  std::string reason;
  char type = '-';            // 'A', 'B', 'C' when closed
  std::vector<std::string> core;            // primary core component ids
  std::vector<std::string> secondary_core;  // 2/3 only
  std::vector<AtomRef> atoms;
  std::vector<LinkRef> links;
  int genus = 0;
  int markings = 0;
  int core_t1_dim = 0;  // zero-weight block emitted by t1_weights
};

ClosedClassification classify_closed(const CurveGraph& c, Critical crit);

nlohmann::json classification_to_json(const ClosedClassification& cls);

}  // namespace modulikit
