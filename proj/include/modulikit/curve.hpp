#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace modulikit {

struct UnknownId : std::runtime_error {
  explicit UnknownId(const std::string& id) : std::runtime_error("unknown id: " + id) {}
};
struct DuplicateId : std::runtime_error {
  explicit DuplicateId(const std::string& id) : std::runtime_error("duplicate id: " + id) {}
};
struct InvalidGraph : std::runtime_error {
  explicit InvalidGraph(const std::string& what) : std::runtime_error("invalid graph: " + what) {}
};
struct UndefinedOperation : std::runtime_error {
  explicit UndefinedOperation(const std::string& what) : std::runtime_error(what) {}
};
struct SelfGlueSamePoint : std::runtime_error {
  SelfGlueSamePoint() : std::runtime_error("self-glue of a marked point with itself") {}
};

/// delta-invariant of an A_k singularity: floor((k+1)/2).
inline int delta_invariant(int k) {
  if (k < 1) throw InvalidGraph("A_k with k < 1");
  return (k + 1) / 2;
}

/// One branch of a singularity: a named point on a named component.
struct BranchRef {
  std::string component;
  std::string point;
  friend auto operator<=>(const BranchRef&, const BranchRef&) = default;
};

struct Component {
  std::string id;
  int geometric_genus = 0;
  // Branch-point ids on this component flagged as Weierstrass points.
  // Carried input data; meaningful for arithmetic-genus-2 components.
  std::set<std::string> weierstrass;
};

struct Singularity {
  std::string id;
  int k = 1;  // A_k
  std::vector<BranchRef> branches;  // length 1 (k even) or 2 (k odd)
  bool trivial_crimping = false;    // meaningful for A_2 and A_4

  bool inner() const {
    return branches.size() == 1 ||
           (branches.size() == 2 && branches[0].component == branches[1].component);
  }
};

struct MarkedPoint {
  std::string id;
  std::string component;
  std::string point;
};

/// Decorated dual graph of a pointed curve with A-singularities.
/// Immutable by convention: operations return new graphs.
struct CurveGraph {
  std::vector<Component> components;
  std::vector<Singularity> singularities;
  std::vector<MarkedPoint> marked_points;
  // Disconnected graphs are legal only as tagged outputs of normalization.
  bool disconnected_ok = false;

  const Component& component(const std::string& id) const;
  const Singularity& singularity(const std::string& id) const;
  bool has_component(const std::string& id) const;

  int component_index(const std::string& id) const;
  size_t n_components() const { return components.size(); }

  /// Connected components of the incidence graph, as sets of component indices.
  std::vector<std::set<int>> connected_parts() const;
  bool connected() const { return connected_parts().size() <= 1; }
};

int arithmetic_genus(const CurveGraph& c);

/// Arithmetic genus of the subcurve spanned by a set of component indices
/// (internal singularities only; must be nonempty).
int subcurve_genus(const CurveGraph& c, const std::set<int>& comps);

std::vector<std::string> validate(const CurveGraph& c);
void require_valid(const CurveGraph& c);

/// Pointed normalization at one singularity: the singularity is removed and
/// each branch becomes a marked point (ids "<sing>:n1", "<sing>:n2").
CurveGraph normalize_at(const CurveGraph& c, const std::string& sing_id);

/// Contracts semistable rational tails, moving markings down; deletes isolated
/// 2-pointed smooth rational pieces when other pieces remain. Throws
/// UndefinedOperation for the degenerate collapse cases.
CurveGraph stabilize_pointed(const CurveGraph& c);

/// Replaces two markings on distinct graphs by one node; ids must be disjoint.
CurveGraph glue(const CurveGraph& c1, const std::string& marked1,
                const CurveGraph& c2, const std::string& marked2);

/// Self-glue variant: joins two markings of one graph by a node.
CurveGraph glue_self(const CurveGraph& c, const std::string& marked1,
                     const std::string& marked2);

nlohmann::json curve_to_json(const CurveGraph& c);
CurveGraph curve_from_json(const nlohmann::json& j);

// ---- shared incidence queries (used by stability / closed_points) ----

/// Number of special points of a component: markings plus singularity
/// branches lying on it, one per branch.
int special_point_count(const CurveGraph& c, int comp);

/// deg(omega_C(sum p_i) restricted to component `comp`):
///   2*(geometric genus + sum of inner deltas) - 2
///   + sum over outer branches of (k+1)/2   [node 1, tacnode 2, ...]
///   + number of markings.
int omega_degree(const CurveGraph& c, int comp);

struct Attachment {
  enum Kind { NodeBranch, OddBranch, Marking, InnerUnibranch } kind;
  int k;                  // A_k label; markings report 1
  std::string sing_or_marking_id;
  BranchRef at;           // the point on the subcurve
};

/// External attachment points of the subcurve `comps`:
/// branches of 2-branch singularities crossing the boundary, plus markings.
/// Inner unibranch singularities are NOT listed here (see stability.cpp for
/// the A_4-attachment conversion).
std::vector<Attachment> external_attachments(const CurveGraph& c, const std::set<int>& comps);

}  // namespace modulikit
