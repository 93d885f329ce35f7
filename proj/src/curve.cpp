#include "modulikit/curve.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

namespace modulikit {

const Component& CurveGraph::component(const std::string& id) const {
  for (const auto& comp : components)
    if (comp.id == id) return comp;
  throw UnknownId(id);
}

bool CurveGraph::has_component(const std::string& id) const {
  for (const auto& comp : components)
    if (comp.id == id) return true;
  return false;
}

const Singularity& CurveGraph::singularity(const std::string& id) const {
  for (const auto& s : singularities)
    if (s.id == id) return s;
  throw UnknownId(id);
}

int CurveGraph::component_index(const std::string& id) const {
  for (size_t i = 0; i < components.size(); ++i)
    if (components[i].id == id) return static_cast<int>(i);
  throw UnknownId(id);
}

std::vector<std::set<int>> CurveGraph::connected_parts() const {
  size_t n = components.size();
  std::vector<int> parent(n);
  for (size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& s : singularities) {
    if (s.branches.size() == 2) {
      int a = component_index(s.branches[0].component);
      int b = component_index(s.branches[1].component);
      parent[find(a)] = find(b);
    }
  }
  std::map<int, std::set<int>> groups;
  for (size_t i = 0; i < n; ++i) groups[find(static_cast<int>(i))].insert(static_cast<int>(i));
  std::vector<std::set<int>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

int arithmetic_genus(const CurveGraph& c) {
  require_valid(c);
  int g = 0;
  for (const auto& comp : c.components) g += comp.geometric_genus;
  for (const auto& s : c.singularities) g += delta_invariant(s.k);
  g -= static_cast<int>(c.components.size());
  g += static_cast<int>(c.connected_parts().size());
  return g;
}

int subcurve_genus(const CurveGraph& c, const std::set<int>& comps) {
  if (comps.empty()) throw InvalidGraph("empty subcurve");
  int g = 0;
  for (int i : comps) g += c.components[i].geometric_genus;
  for (const auto& s : c.singularities) {
    bool all_in = true;
    for (const auto& b : s.branches)
      if (!comps.count(c.component_index(b.component))) all_in = false;
    if (all_in) g += delta_invariant(s.k);
  }
  // connected parts within the subcurve
  std::map<int, int> parent;
  for (int i : comps) parent[i] = i;
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& s : c.singularities) {
    if (s.branches.size() == 2) {
      int a = c.component_index(s.branches[0].component);
      int b = c.component_index(s.branches[1].component);
      if (comps.count(a) && comps.count(b)) parent[find(a)] = find(b);
    }
  }
  std::set<int> roots;
  for (int i : comps) roots.insert(find(i));
  g -= static_cast<int>(comps.size());
  g += static_cast<int>(roots.size());
  return g;
}

std::vector<std::string> validate(const CurveGraph& c) {
  std::vector<std::string> out;
  std::set<std::string> comp_ids, sing_ids, mark_ids;
  for (const auto& comp : c.components) {
    if (!comp_ids.insert(comp.id).second) out.push_back("duplicate component id " + comp.id);
    if (comp.geometric_genus < 0) out.push_back("negative genus on " + comp.id);
  }
  // occupied points: each (component, point) may carry one branch or one marking
  std::map<std::pair<std::string, std::string>, std::string> occupied;
  auto occupy = [&](const BranchRef& b, const std::string& owner) {
    auto key = std::make_pair(b.component, b.point);
    auto [it, fresh] = occupied.emplace(key, owner);
    if (!fresh)
      out.push_back("point " + b.component + ":" + b.point + " used by both " + it->second +
                    " and " + owner);
  };
  for (const auto& s : c.singularities) {
    if (!sing_ids.insert(s.id).second) out.push_back("duplicate singularity id " + s.id);
    if (s.k < 1) out.push_back("singularity " + s.id + " has k < 1");
    if (s.branches.empty() || s.branches.size() > 2)
      out.push_back("singularity " + s.id + " needs 1 or 2 branches");
    if (s.k % 2 == 1 && s.branches.size() != 2)
      out.push_back("odd-k singularity " + s.id + " needs 2 branches");
    if (s.k % 2 == 0 && s.branches.size() != 1)
      out.push_back("even-k singularity " + s.id + " needs 1 branch");
    for (const auto& b : s.branches) {
      if (!comp_ids.count(b.component))
        out.push_back("singularity " + s.id + " references unknown component " + b.component);
      else
        occupy(b, s.id);
    }
    if (s.branches.size() == 2 && s.branches[0] == s.branches[1])
      out.push_back("singularity " + s.id + " repeats one branch point");
  }
  for (const auto& m : c.marked_points) {
    if (!mark_ids.insert(m.id).second) out.push_back("duplicate marked point id " + m.id);
    if (!comp_ids.count(m.component))
      out.push_back("marked point " + m.id + " on unknown component " + m.component);
    else
      occupy({m.component, m.point}, "marking " + m.id);
  }
  if (!c.components.empty() && !c.disconnected_ok && c.connected_parts().size() > 1)
    out.push_back("graph is disconnected and not tagged as a normalization output");
  return out;
}

void require_valid(const CurveGraph& c) {
  auto violations = validate(c);
  if (!violations.empty()) throw InvalidGraph(violations.front());
}

CurveGraph normalize_at(const CurveGraph& c, const std::string& sing_id) {
  const Singularity& target = c.singularity(sing_id);
  CurveGraph out = c;
  out.singularities.clear();
  for (const auto& s : c.singularities)
    if (s.id != sing_id) out.singularities.push_back(s);
  int idx = 1;
  for (const auto& b : target.branches) {
    MarkedPoint m;
    m.id = sing_id + ":n" + std::to_string(idx++);
    m.component = b.component;
    m.point = b.point;
    out.marked_points.push_back(m);
  }
  out.disconnected_ok = out.connected_parts().size() > 1;
  return out;
}

namespace {

// One pass of semistable-tail contraction; true if anything changed.
bool contract_once(CurveGraph& c) {
  for (const auto& comp : c.components) {
    if (comp.geometric_genus != 0) continue;
    // gather this component's incidences
    std::vector<const Singularity*> touching;
    bool has_inner = false;
    for (const auto& s : c.singularities) {
      int on = 0;
      for (const auto& b : s.branches)
        if (b.component == comp.id) ++on;
      if (on == 0) continue;
      if (on == static_cast<int>(s.branches.size()) && s.branches.size() >= 1 &&
          (s.branches.size() == 1 || s.branches[0].component == s.branches[1].component))
        has_inner = true;
      touching.push_back(&s);
    }
    if (has_inner) continue;
    std::vector<const MarkedPoint*> marks;
    for (const auto& m : c.marked_points)
      if (m.component == comp.id) marks.push_back(&m);
    // semistable P^1: one node to the rest plus at most one marking
    if (touching.size() != 1) continue;
    const Singularity& node = *touching.front();
    if (node.k != 1 || node.branches.size() != 2) continue;
    if (marks.size() > 1) continue;
    BranchRef other = node.branches[0].component == comp.id ? node.branches[1] : node.branches[0];
    std::string comp_id = comp.id, node_id = node.id;
    std::optional<std::string> mark_id;
    if (marks.size() == 1) mark_id = marks.front()->id;
    // contract: drop the component and node, transfer the marking
    CurveGraph next;
    next.disconnected_ok = c.disconnected_ok;
    for (const auto& k : c.components)
      if (k.id != comp_id) next.components.push_back(k);
    for (const auto& s : c.singularities)
      if (s.id != node_id) next.singularities.push_back(s);
    for (const auto& m : c.marked_points) {
      if (m.component == comp_id) {
        MarkedPoint moved = m;
        moved.component = other.component;
        moved.point = other.point;
        next.marked_points.push_back(moved);
      } else {
        next.marked_points.push_back(m);
      }
    }
    c = std::move(next);
    return true;
  }
  return false;
}

bool is_bare_rational_piece(const CurveGraph& c, const std::set<int>& part, int* marks_out) {
  if (part.size() != 1) return false;
  const Component& comp = c.components[*part.begin()];
  if (comp.geometric_genus != 0) return false;
  for (const auto& s : c.singularities)
    for (const auto& b : s.branches)
      if (b.component == comp.id) return false;
  int marks = 0;
  for (const auto& m : c.marked_points)
    if (m.component == comp.id) ++marks;
  *marks_out = marks;
  return marks < 3;
}

}  // namespace

CurveGraph stabilize_pointed(const CurveGraph& c) {
  require_valid(c);
  CurveGraph cur = c;
  while (contract_once(cur)) {
  }
  // handle isolated (semi)stable-failing rational pieces
  auto parts = cur.connected_parts();
  std::set<std::string> to_delete;
  int bare = 0;
  for (const auto& part : parts) {
    int marks = 0;
    if (is_bare_rational_piece(cur, part, &marks)) {
      ++bare;
      to_delete.insert(cur.components[*part.begin()].id);
    }
  }
  if (bare == static_cast<int>(parts.size()))
    throw UndefinedOperation("stable pointed normalization is undefined (collapse to a point)");
  if (!to_delete.empty()) {
    CurveGraph next;
    next.disconnected_ok = cur.disconnected_ok;
    for (const auto& k : cur.components)
      if (!to_delete.count(k.id)) next.components.push_back(k);
    next.singularities = cur.singularities;
    for (const auto& m : cur.marked_points)
      if (!to_delete.count(m.component)) next.marked_points.push_back(m);
    cur = std::move(next);
    while (contract_once(cur)) {
    }
  }
  cur.disconnected_ok = cur.connected_parts().size() > 1;
  return cur;
}

namespace {

const MarkedPoint& find_marking(const CurveGraph& c, const std::string& id) {
  for (const auto& m : c.marked_points)
    if (m.id == id) return m;
  throw UnknownId(id);
}

}  // namespace

CurveGraph glue(const CurveGraph& c1, const std::string& marked1, const CurveGraph& c2,
                const std::string& marked2) {
  const MarkedPoint& p = find_marking(c1, marked1);
  const MarkedPoint& q = find_marking(c2, marked2);
  for (const auto& comp : c2.components)
    if (c1.has_component(comp.id)) throw DuplicateId(comp.id);
  CurveGraph out;
  out.components = c1.components;
  out.components.insert(out.components.end(), c2.components.begin(), c2.components.end());
  out.singularities = c1.singularities;
  out.singularities.insert(out.singularities.end(), c2.singularities.begin(),
                           c2.singularities.end());
  for (const auto& m : c1.marked_points)
    if (m.id != marked1) out.marked_points.push_back(m);
  for (const auto& m : c2.marked_points)
    if (m.id != marked2) out.marked_points.push_back(m);
  Singularity node;
  node.id = "glue:" + marked1 + ":" + marked2;
  node.k = 1;
  node.branches = {{p.component, p.point}, {q.component, q.point}};
  out.singularities.push_back(node);
  require_valid(out);
  return out;
}

CurveGraph glue_self(const CurveGraph& c, const std::string& marked1, const std::string& marked2) {
  if (marked1 == marked2) throw SelfGlueSamePoint();
  const MarkedPoint& p = find_marking(c, marked1);
  const MarkedPoint& q = find_marking(c, marked2);
  CurveGraph out = c;
  out.marked_points.clear();
  for (const auto& m : c.marked_points)
    if (m.id != marked1 && m.id != marked2) out.marked_points.push_back(m);
  Singularity node;
  node.id = "glue:" + marked1 + ":" + marked2;
  node.k = 1;
  node.branches = {{p.component, p.point}, {q.component, q.point}};
  out.singularities.push_back(node);
  out.disconnected_ok = false;
  require_valid(out);
  return out;
}

nlohmann::json curve_to_json(const CurveGraph& c) {
  nlohmann::json j;
  j["components"] = nlohmann::json::array();
  for (const auto& comp : c.components) {
    nlohmann::json jc;
    jc["id"] = comp.id;
    jc["genus"] = comp.geometric_genus;
    jc["weierstrass"] = comp.weierstrass;
    j["components"].push_back(jc);
  }
  j["singularities"] = nlohmann::json::array();
  for (const auto& s : c.singularities) {
    nlohmann::json js;
    js["id"] = s.id;
    js["k"] = s.k;
    js["branches"] = nlohmann::json::array();
    for (const auto& b : s.branches) js["branches"].push_back({b.component, b.point});
    js["trivial_crimping"] = s.trivial_crimping;
    j["singularities"].push_back(js);
  }
  j["marked_points"] = nlohmann::json::array();
  for (const auto& m : c.marked_points) {
    nlohmann::json jm;
    jm["id"] = m.id;
    jm["component"] = m.component;
    jm["point"] = m.point;
    j["marked_points"].push_back(jm);
  }
  if (c.disconnected_ok) j["disconnected"] = true;
  return j;
}

CurveGraph curve_from_json(const nlohmann::json& j) {
  CurveGraph c;
  for (const auto& jc : j.at("components")) {
    Component comp;
    comp.id = jc.at("id").get<std::string>();
    comp.geometric_genus = jc.at("genus").get<int>();
    if (jc.contains("weierstrass"))
      for (const auto& w : jc.at("weierstrass")) comp.weierstrass.insert(w.get<std::string>());
    c.components.push_back(comp);
  }
  if (j.contains("singularities"))
    for (const auto& js : j.at("singularities")) {
      Singularity s;
      s.id = js.at("id").get<std::string>();
      s.k = js.at("k").get<int>();
      for (const auto& jb : js.at("branches"))
        s.branches.push_back({jb.at(0).get<std::string>(), jb.at(1).get<std::string>()});
      if (js.contains("trivial_crimping")) s.trivial_crimping = js.at("trivial_crimping").get<bool>();
      c.singularities.push_back(s);
    }
  if (j.contains("marked_points"))
    for (const auto& jm : j.at("marked_points")) {
      MarkedPoint m;
      m.id = jm.at("id").get<std::string>();
      m.component = jm.at("component").get<std::string>();
      m.point = jm.at("point").get<std::string>();
      c.marked_points.push_back(m);
    }
  if (j.contains("disconnected")) c.disconnected_ok = j.at("disconnected").get<bool>();
  return c;
}

int special_point_count(const CurveGraph& c, int comp) {
  const std::string& id = c.components[comp].id;
  int n = 0;
  for (const auto& s : c.singularities)
    for (const auto& b : s.branches)
      if (b.component == id) ++n;
  for (const auto& m : c.marked_points)
    if (m.component == id) ++n;
  return n;
}

int omega_degree(const CurveGraph& c, int comp) {
  const std::string& id = c.components[comp].id;
  int genus_term = c.components[comp].geometric_genus;
  int attach = 0;
  for (const auto& s : c.singularities) {
    int on = 0;
    for (const auto& b : s.branches)
      if (b.component == id) ++on;
    if (on == 0) continue;
    if (on == static_cast<int>(s.branches.size())) {
      genus_term += delta_invariant(s.k);  // inner
    } else {
      attach += (s.k + 1) / 2;  // branch multiplicity of an outer A_k, k odd
    }
  }
  int marks = 0;
  for (const auto& m : c.marked_points)
    if (m.component == id) ++marks;
  return 2 * genus_term - 2 + attach + marks;
}

std::vector<Attachment> external_attachments(const CurveGraph& c, const std::set<int>& comps) {
  std::vector<Attachment> out;
  for (const auto& s : c.singularities) {
    if (s.branches.size() != 2) continue;
    int a = c.component_index(s.branches[0].component);
    int b = c.component_index(s.branches[1].component);
    bool a_in = comps.count(a), b_in = comps.count(b);
    if (a_in == b_in) continue;
    Attachment att;
    att.kind = s.k == 1 ? Attachment::NodeBranch : Attachment::OddBranch;
    att.k = s.k;
    att.sing_or_marking_id = s.id;
    att.at = a_in ? s.branches[0] : s.branches[1];
    out.push_back(att);
  }
  for (const auto& m : c.marked_points) {
    if (!comps.count(c.component_index(m.component))) continue;
    Attachment att;
    att.kind = Attachment::Marking;
    att.k = 1;
    att.sing_or_marking_id = m.id;
    att.at = {m.component, m.point};
    out.push_back(att);
  }
  return out;
}

}  // namespace modulikit
