#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "modulikit/curve.hpp"
#include "modulikit/rational.hpp"

namespace modulikit {

struct OutOfRange : std::runtime_error {
  explicit OutOfRange(const std::string& what) : std::runtime_error(what) {}
};

/// The seven stability regimes, ordered by increasing alpha.
enum class AlphaRegime {
  OPEN_23MINUS_23,  // (2/3 - eps, 2/3); reachable only via the symbolic token
  AT_23,
  OPEN_23_710,
  AT_710,
  OPEN_710_911,
  AT_911,
  OPEN_911_1,
};

const char* regime_name(AlphaRegime r);
std::array<AlphaRegime, 7> all_regimes();

/// Regime of an exact rational alpha in (2/3, 1].
AlphaRegime regime_of(const Rat& alpha);
/// Accepts "p/q" or the symbolic token "2/3-eps".
AlphaRegime regime_of_token(const std::string& token);

/// Singularity indices k admitted at a regime.
std::set<int> allowed_singularities(AlphaRegime r);

/// omega_C(sum p_i) ample: positive degree on every component.
bool omega_ample(const CurveGraph& c);

struct EllipticTail {
  std::string component;
  int attach_k = 1;
  std::string attach_id;  // singularity or marking id
};

/// An elliptic bridge candidate: genus-1 subcurve with two attachment points.
struct BridgeCand {
  std::set<int> comps;
  struct End {
    int k = 1;
    std::string id;        // singularity / marking id
    bool is_marking = false;
    bool is_inner = false; // converted inner unibranch singularity
  };
  std::array<End, 2> ends;
};

struct EllipticChain {
  std::vector<std::set<int>> links;  // bridge component sets in path order
  int k1 = 1, k2 = 1;                // end attachment labels, k1 <= k2
  std::vector<std::string> witness;  // component ids
};

struct WeierstrassChain {
  std::vector<std::set<int>> links;  // bridges then the terminal tail
  int attach_k = 1;
  std::vector<std::string> witness;
};

std::vector<EllipticTail> find_elliptic_tails(const CurveGraph& c);
std::vector<BridgeCand> find_elliptic_bridges(const CurveGraph& c);
std::vector<EllipticChain> find_elliptic_chains(const CurveGraph& c, int max_len = -1);
std::vector<WeierstrassChain> find_weierstrass_chains(const CurveGraph& c, int max_len = -1);

enum class ViolationCategory {
  DISALLOWED_SINGULARITY,
  ELLIPTIC_TAIL,
  ELLIPTIC_CHAIN,
  WEIERSTRASS_CHAIN,
  NOT_AMPLE,
};
const char* category_name(ViolationCategory);

struct Violation {
  ViolationCategory category;
  std::vector<std::string> witness;
  std::vector<int> attaching;
};

struct StabilityVerdict {
  bool stable = false;
  std::vector<Violation> violations;
};

StabilityVerdict is_alpha_stable(const CurveGraph& c, AlphaRegime r);

nlohmann::json verdict_to_json(const StabilityVerdict& v);

}  // namespace modulikit
