#include "modulikit/stability.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>

namespace modulikit {

const char* regime_name(AlphaRegime r) {
  switch (r) {
    case AlphaRegime::OPEN_23MINUS_23: return "OPEN_23MINUS_23";
    case AlphaRegime::AT_23: return "AT_23";
    case AlphaRegime::OPEN_23_710: return "OPEN_23_710";
    case AlphaRegime::AT_710: return "AT_710";
    case AlphaRegime::OPEN_710_911: return "OPEN_710_911";
    case AlphaRegime::AT_911: return "AT_911";
    case AlphaRegime::OPEN_911_1: return "OPEN_911_1";
  }
  return "?";
}

std::array<AlphaRegime, 7> all_regimes() {
  return {AlphaRegime::OPEN_23MINUS_23, AlphaRegime::AT_23,        AlphaRegime::OPEN_23_710,
          AlphaRegime::AT_710,          AlphaRegime::OPEN_710_911, AlphaRegime::AT_911,
          AlphaRegime::OPEN_911_1};
}

AlphaRegime regime_of(const Rat& alpha) {
  if (alpha <= rat(2, 3) || alpha > 1)
    throw OutOfRange("alpha out of range (2/3, 1]: " + rat_to_string(alpha));
  if (alpha == rat(2, 3)) return AlphaRegime::AT_23;  // unreachable; kept for clarity
  if (alpha < rat(7, 10)) return AlphaRegime::OPEN_23_710;
  if (alpha == rat(7, 10)) return AlphaRegime::AT_710;
  if (alpha < rat(9, 11)) return AlphaRegime::OPEN_710_911;
  if (alpha == rat(9, 11)) return AlphaRegime::AT_911;
  return AlphaRegime::OPEN_911_1;
}

AlphaRegime regime_of_token(const std::string& token) {
  if (token == "2/3-eps") return AlphaRegime::OPEN_23MINUS_23;
  Rat a = rat_from_string(token);
  if (a == rat(2, 3)) return AlphaRegime::AT_23;
  return regime_of(a);
}

std::set<int> allowed_singularities(AlphaRegime r) {
  switch (r) {
    case AlphaRegime::OPEN_911_1: return {1};
    case AlphaRegime::AT_911:
    case AlphaRegime::OPEN_710_911: return {1, 2};
    case AlphaRegime::AT_710:
    case AlphaRegime::OPEN_23_710: return {1, 2, 3};
    default: return {1, 2, 3, 4};
  }
}

bool omega_ample(const CurveGraph& c) {
  require_valid(c);
  for (size_t i = 0; i < c.components.size(); ++i)
    if (omega_degree(c, static_cast<int>(i)) <= 0) return false;
  return true;
}

namespace {

struct InnerSing {
  std::string id;
  int k;
  BranchRef at;
};

// Unibranch inner singularities of one component; candidates for the
// "subcurve attached at its own A_k" reading of D:Attaching.
std::vector<InnerSing> unibranch_inner(const CurveGraph& c, int comp) {
  std::vector<InnerSing> out;
  const std::string& id = c.components[comp].id;
  for (const auto& s : c.singularities)
    if (s.branches.size() == 1 && s.branches[0].component == id)
      out.push_back({s.id, s.k, s.branches[0]});
  return out;
}

bool has_loop_of_high_tangency(const CurveGraph& c, int comp) {
  const std::string& id = c.components[comp].id;
  for (const auto& s : c.singularities)
    if (s.branches.size() == 2 && s.branches[0].component == id &&
        s.branches[1].component == id && s.k >= 3)
      return true;
  return false;
}

// All single-component candidates with genus' == want_genus and the given
// number of attachment points, enumerating subsets of unibranch inner
// singularities converted into attachments.
struct SubcurveShape {
  int comp;
  std::vector<BridgeCand::End> ends;
  std::vector<BranchRef> end_points;  // attachment points on the subcurve
};

std::vector<SubcurveShape> single_component_shapes(const CurveGraph& c, int comp, int want_genus,
                                                   int want_attach) {
  std::vector<SubcurveShape> out;
  std::set<int> self = {comp};
  int g0 = subcurve_genus(c, self);
  auto ext = external_attachments(c, self);
  auto inner = unibranch_inner(c, comp);
  size_t m = inner.size();
  if (m > 10) m = 10;  // desk-scale guard
  for (size_t mask = 0; mask < (size_t{1} << m); ++mask) {
    int g = g0;
    std::vector<BridgeCand::End> ends;
    std::vector<BranchRef> pts;
    for (const auto& a : ext) {
      ends.push_back({a.k, a.sing_or_marking_id, a.kind == Attachment::Marking, false});
      pts.push_back(a.at);
    }
    for (size_t b = 0; b < m; ++b)
      if (mask & (size_t{1} << b)) {
        g -= delta_invariant(inner[b].k);
        ends.push_back({inner[b].k, inner[b].id, false, true});
        pts.push_back(inner[b].at);
      }
    if (g == want_genus && static_cast<int>(ends.size()) == want_attach)
      out.push_back({comp, ends, pts});
  }
  return out;
}

}  // namespace

std::vector<EllipticTail> find_elliptic_tails(const CurveGraph& c) {
  require_valid(c);
  std::vector<EllipticTail> out;
  for (size_t i = 0; i < c.components.size(); ++i)
    for (const auto& shape : single_component_shapes(c, static_cast<int>(i), 1, 1))
      out.push_back({c.components[i].id, shape.ends[0].k, shape.ends[0].id});
  return out;
}

std::vector<BridgeCand> find_elliptic_bridges(const CurveGraph& c) {
  require_valid(c);
  std::vector<BridgeCand> out;
  // irreducible bridges
  for (size_t i = 0; i < c.components.size(); ++i)
    for (const auto& shape : single_component_shapes(c, static_cast<int>(i), 1, 2)) {
      BridgeCand b;
      b.comps = {static_cast<int>(i)};
      b.ends = {shape.ends[0], shape.ends[1]};
      out.push_back(b);
    }
  // unions of two smooth rational curves meeting in two nodes or one tacnode
  size_t n = c.components.size();
  for (size_t i = 0; i < n; ++i) {
    if (c.components[i].geometric_genus != 0) continue;
    if (!unibranch_inner(c, static_cast<int>(i)).empty()) continue;
    for (size_t j = i + 1; j < n; ++j) {
      if (c.components[j].geometric_genus != 0) continue;
      if (!unibranch_inner(c, static_cast<int>(j)).empty()) continue;
      const std::string &ci = c.components[i].id, &cj = c.components[j].id;
      // no inner loops on either
      bool bad = false;
      std::vector<const Singularity*> joins;
      for (const auto& s : c.singularities) {
        int on_i = 0, on_j = 0;
        for (const auto& b : s.branches) {
          if (b.component == ci) ++on_i;
          if (b.component == cj) ++on_j;
        }
        if (on_i + on_j == 0) continue;
        if (on_i == 2 || on_j == 2) bad = true;  // inner loop
        if (on_i == 1 && on_j == 1) joins.push_back(&s);
      }
      if (bad) continue;
      bool two_nodes = joins.size() == 2 && joins[0]->k == 1 && joins[1]->k == 1;
      bool one_tacnode = joins.size() == 1 && joins[0]->k == 3;
      if (!two_nodes && !one_tacnode) continue;
      std::set<int> pair = {static_cast<int>(i), static_cast<int>(j)};
      auto ext = external_attachments(c, pair);
      if (ext.size() != 2) continue;
      // one attachment per component
      if (ext[0].at.component == ext[1].at.component) continue;
      BridgeCand b;
      b.comps = pair;
      for (int e = 0; e < 2; ++e)
        b.ends[e] = {ext[e].k, ext[e].sing_or_marking_id, ext[e].kind == Attachment::Marking,
                     false};
      out.push_back(b);
    }
  }
  return out;
}

namespace {

// A Weierstrass tail candidate: irreducible genus-2 subcurve attached at one
// point whose branch point is flagged Weierstrass on its component.
struct WTail {
  int comp;
  BridgeCand::End end;
};

std::vector<WTail> find_weierstrass_tails(const CurveGraph& c) {
  std::vector<WTail> out;
  for (size_t i = 0; i < c.components.size(); ++i)
    for (const auto& shape : single_component_shapes(c, static_cast<int>(i), 2, 1)) {
      const auto& pt = shape.end_points[0];
      if (pt.component != c.components[i].id) continue;
      if (!c.components[i].weierstrass.count(pt.point)) continue;
      out.push_back({static_cast<int>(i), shape.ends[0]});
    }
  return out;
}

// Chain assembly: consecutive pieces are joined when their free ends are the
// two branches of one outer tacnode of the ambient curve.
bool tacnode_joins(const CurveGraph& c, const BridgeCand::End& a, const BridgeCand::End& b,
                   const std::set<int>& comps_a, const std::set<int>& comps_b) {
  if (a.is_marking || b.is_marking || a.is_inner || b.is_inner) return false;
  if (a.k != 3 || b.k != 3 || a.id != b.id) return false;
  const Singularity& s = c.singularity(a.id);
  if (s.branches.size() != 2) return false;
  int x = c.component_index(s.branches[0].component);
  int y = c.component_index(s.branches[1].component);
  return (comps_a.count(x) && comps_b.count(y)) || (comps_a.count(y) && comps_b.count(x));
}

bool disjoint(const std::set<int>& a, const std::set<int>& b) {
  for (int x : a)
    if (b.count(x)) return false;
  return true;
}

}  // namespace

std::vector<EllipticChain> find_elliptic_chains(const CurveGraph& c, int max_len) {
  require_valid(c);
  if (max_len < 0) max_len = static_cast<int>(c.components.size());
  auto bridges = find_elliptic_bridges(c);
  std::vector<EllipticChain> out;
  std::set<std::vector<std::string>> seen;

  // path = sequence of bridge indices; ends are (free end of first, free end of last)
  struct Frame {
    std::vector<int> path;
    std::set<int> used;
    int first_free;  // end index (0/1) of path.front() that is the chain's start
    int last_free;   // end index of path.back() still open
  };
  std::vector<Frame> stack;
  for (size_t b = 0; b < bridges.size(); ++b)
    for (int start = 0; start < 2; ++start)
      stack.push_back({{static_cast<int>(b)}, bridges[b].comps, start, 1 - start});

  auto emit = [&](const Frame& f) {
    const auto& first = bridges[f.path.front()];
    const auto& last = bridges[f.path.back()];
    int k1 = first.ends[f.first_free].k;
    int k2 = last.ends[f.last_free].k;
    EllipticChain ch;
    for (int bi : f.path) ch.links.push_back(bridges[bi].comps);
    ch.k1 = std::min(k1, k2);
    ch.k2 = std::max(k1, k2);
    std::set<std::string> w;
    for (int bi : f.path)
      for (int ci : bridges[bi].comps) w.insert(c.components[ci].id);
    ch.witness.assign(w.begin(), w.end());
    // canonical key: min of forward / reversed link sequences
    std::vector<std::string> key;
    for (const auto& link : ch.links) {
      std::string s;
      for (int ci : link) s += c.components[ci].id + ",";
      key.push_back(s);
    }
    auto rkey = key;
    std::reverse(rkey.begin(), rkey.end());
    if (rkey < key) key = rkey;
    key.push_back(std::to_string(ch.k1) + "/" + std::to_string(ch.k2));
    if (seen.insert(key).second) out.push_back(ch);
  };

  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    emit(f);
    if (static_cast<int>(f.path.size()) >= max_len) continue;
    const auto& tail_bridge = bridges[f.path.back()];
    const auto& open_end = tail_bridge.ends[f.last_free];
    for (size_t nb = 0; nb < bridges.size(); ++nb) {
      if (!disjoint(bridges[nb].comps, f.used)) continue;
      for (int e = 0; e < 2; ++e) {
        if (!tacnode_joins(c, open_end, bridges[nb].ends[e], tail_bridge.comps, bridges[nb].comps))
          continue;
        Frame g = f;
        g.path.push_back(static_cast<int>(nb));
        for (int ci : bridges[nb].comps) g.used.insert(ci);
        g.last_free = 1 - e;
        stack.push_back(g);
      }
    }
  }
  return out;
}

std::vector<WeierstrassChain> find_weierstrass_chains(const CurveGraph& c, int max_len) {
  require_valid(c);
  if (max_len < 0) max_len = static_cast<int>(c.components.size());
  auto bridges = find_elliptic_bridges(c);
  auto tails = find_weierstrass_tails(c);
  std::vector<WeierstrassChain> out;
  std::set<std::vector<std::string>> seen;

  auto emit = [&](const std::vector<int>& path, const WTail& tail, int free_k) {
    WeierstrassChain ch;
    std::set<std::string> w;
    std::vector<std::string> key;
    for (int bi : path) {
      ch.links.push_back(bridges[bi].comps);
      std::string s;
      for (int ci : bridges[bi].comps) {
        s += c.components[ci].id + ",";
        w.insert(c.components[ci].id);
      }
      key.push_back(s);
    }
    ch.links.push_back({tail.comp});
    w.insert(c.components[tail.comp].id);
    key.push_back(c.components[tail.comp].id);
    ch.attach_k = free_k;
    ch.witness.assign(w.begin(), w.end());
    key.push_back(std::to_string(free_k));
    if (seen.insert(key).second) out.push_back(ch);
  };

  // length 1: bare Weierstrass tails
  for (const auto& t : tails) emit({}, t, t.end.k);

  // longer chains: grow bridge paths backwards from the tail
  struct Frame {
    std::vector<int> path;  // bridges, tail-adjacent last
    std::set<int> used;
    int open_end;  // free end of path.front() (chain attachment side)
    int tail_idx;
  };
  std::vector<Frame> stack;
  for (size_t t = 0; t < tails.size(); ++t) {
    if (tails[t].end.is_marking || tails[t].end.is_inner || tails[t].end.k != 3) continue;
    std::set<int> tail_set = {tails[t].comp};
    for (size_t b = 0; b < bridges.size(); ++b) {
      if (bridges[b].comps.count(tails[t].comp)) continue;
      for (int e = 0; e < 2; ++e)
        if (tacnode_joins(c, bridges[b].ends[e], tails[t].end, bridges[b].comps, tail_set)) {
          Frame f;
          f.path = {static_cast<int>(b)};
          f.used = bridges[b].comps;
          f.used.insert(tails[t].comp);
          f.open_end = 1 - e;
          f.tail_idx = static_cast<int>(t);
          stack.push_back(f);
        }
    }
  }
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    const auto& head = bridges[f.path.front()];
    emit(f.path, tails[f.tail_idx], head.ends[f.open_end].k);
    if (static_cast<int>(f.path.size()) + 1 >= max_len) continue;
    for (size_t nb = 0; nb < bridges.size(); ++nb) {
      if (!disjoint(bridges[nb].comps, f.used)) continue;
      for (int e = 0; e < 2; ++e) {
        if (!tacnode_joins(c, bridges[nb].ends[e], head.ends[f.open_end], bridges[nb].comps,
                           head.comps))
          continue;
        Frame g = f;
        g.path.insert(g.path.begin(), static_cast<int>(nb));
        for (int ci : bridges[nb].comps) g.used.insert(ci);
        g.open_end = 1 - e;
        stack.push_back(g);
      }
    }
  }
  return out;
}

const char* category_name(ViolationCategory v) {
  switch (v) {
    case ViolationCategory::DISALLOWED_SINGULARITY: return "DISALLOWED_SINGULARITY";
    case ViolationCategory::ELLIPTIC_TAIL: return "ELLIPTIC_TAIL";
    case ViolationCategory::ELLIPTIC_CHAIN: return "ELLIPTIC_CHAIN";
    case ViolationCategory::WEIERSTRASS_CHAIN: return "WEIERSTRASS_CHAIN";
    case ViolationCategory::NOT_AMPLE: return "NOT_AMPLE";
  }
  return "?";
}

namespace {

std::set<int> forbidden_tail_attachments(AlphaRegime r) {
  switch (r) {
    case AlphaRegime::OPEN_710_911: return {1};
    case AlphaRegime::AT_710:
    case AlphaRegime::OPEN_23_710: return {1, 3};
    case AlphaRegime::AT_23:
    case AlphaRegime::OPEN_23MINUS_23: return {1, 3, 4};
    default: return {};
  }
}

std::set<std::pair<int, int>> forbidden_chain_attachments(AlphaRegime r) {
  switch (r) {
    case AlphaRegime::OPEN_23_710: return {{1, 1}};
    case AlphaRegime::AT_23:
    case AlphaRegime::OPEN_23MINUS_23: return {{1, 1}, {1, 4}, {4, 4}};
    default: return {};
  }
}

}  // namespace

StabilityVerdict is_alpha_stable(const CurveGraph& c, AlphaRegime r) {
  require_valid(c);
  if (!c.connected()) throw InvalidGraph("stability requires a connected curve");
  StabilityVerdict v;

  for (size_t i = 0; i < c.components.size(); ++i)
    if (omega_degree(c, static_cast<int>(i)) <= 0)
      v.violations.push_back({ViolationCategory::NOT_AMPLE, {c.components[i].id}, {}});

  auto allowed = allowed_singularities(r);
  for (const auto& s : c.singularities)
    if (!allowed.count(s.k))
      v.violations.push_back({ViolationCategory::DISALLOWED_SINGULARITY, {s.id}, {s.k}});

  auto bad_tails = forbidden_tail_attachments(r);
  if (!bad_tails.empty())
    for (const auto& t : find_elliptic_tails(c))
      if (bad_tails.count(t.attach_k))
        v.violations.push_back({ViolationCategory::ELLIPTIC_TAIL, {t.component}, {t.attach_k}});

  auto bad_chains = forbidden_chain_attachments(r);
  if (!bad_chains.empty())
    for (const auto& ch : find_elliptic_chains(c))
      if (bad_chains.count({ch.k1, ch.k2}))
        v.violations.push_back({ViolationCategory::ELLIPTIC_CHAIN, ch.witness, {ch.k1, ch.k2}});

  if (r == AlphaRegime::OPEN_23MINUS_23)
    for (const auto& ch : find_weierstrass_chains(c))
      if (ch.attach_k == 1)
        v.violations.push_back(
            {ViolationCategory::WEIERSTRASS_CHAIN, ch.witness, {ch.attach_k}});

  std::sort(v.violations.begin(), v.violations.end(), [](const Violation& a, const Violation& b) {
    if (a.category != b.category) return a.category < b.category;
    if (a.witness != b.witness) return a.witness < b.witness;
    return a.attaching < b.attaching;
  });
  v.stable = v.violations.empty();
  return v;
}

nlohmann::json verdict_to_json(const StabilityVerdict& v) {
  nlohmann::json j;
  j["stable"] = v.stable;
  j["violations"] = nlohmann::json::array();
  for (const auto& viol : v.violations) {
    nlohmann::json jv;
    jv["category"] = category_name(viol.category);
    jv["witness"] = viol.witness;
    jv["attaching"] = viol.attaching;
    j["violations"].push_back(jv);
  }
  return j;
}

}  // namespace modulikit
