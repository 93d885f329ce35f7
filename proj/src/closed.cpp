#include "modulikit/closed.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>

namespace modulikit {

const char* critical_name(Critical c) {
  switch (c) {
    case Critical::C_9_11: return "9/11";
    case Critical::C_7_10: return "7/10";
    case Critical::C_2_3: return "2/3";
  }
  return "?";
}

Critical critical_from_string(const std::string& s) {
  if (s == "9/11") return Critical::C_9_11;
  if (s == "7/10") return Critical::C_7_10;
  if (s == "2/3") return Critical::C_2_3;
  throw OutOfRange("not a critical value: " + s);
}

AlphaRegime critical_regime(Critical c) {
  switch (c) {
    case Critical::C_9_11: return AlphaRegime::AT_911;
    case Critical::C_7_10: return AlphaRegime::AT_710;
    case Critical::C_2_3: return AlphaRegime::AT_23;
  }
  return AlphaRegime::AT_911;
}

AlphaRegime regime_just_above(Critical c) {
  switch (c) {
    case Critical::C_9_11: return AlphaRegime::OPEN_911_1;
    case Critical::C_7_10: return AlphaRegime::OPEN_710_911;
    case Critical::C_2_3: return AlphaRegime::OPEN_23_710;
  }
  return AlphaRegime::OPEN_911_1;
}

namespace {

struct SpecialPoint {
  enum Kind {
    Marking,
    OuterNode,      // branch of an outer A_1
    OuterTacnode,   // branch of an outer A_3
    OuterHigher,    // branch of an outer A_k, k >= 5
    InnerUnibranch, // A_2 / A_4 / ... on this component
    LoopBranch,     // branch of a 2-branch singularity with both ends here
  } kind;
  std::string id;  // marking or singularity id
  int k = 1;
};

std::vector<SpecialPoint> specials_of(const CurveGraph& c, int comp) {
  std::vector<SpecialPoint> out;
  const std::string& id = c.components[comp].id;
  for (const auto& s : c.singularities) {
    int on = 0;
    for (const auto& b : s.branches)
      if (b.component == id) ++on;
    if (on == 0) continue;
    if (s.branches.size() == 1) {
      out.push_back({SpecialPoint::InnerUnibranch, s.id, s.k});
    } else if (on == 2) {
      out.push_back({SpecialPoint::LoopBranch, s.id, s.k});
      out.push_back({SpecialPoint::LoopBranch, s.id, s.k});
    } else {
      SpecialPoint::Kind kind = s.k == 1   ? SpecialPoint::OuterNode
                                : s.k == 3 ? SpecialPoint::OuterTacnode
                                           : SpecialPoint::OuterHigher;
      out.push_back({kind, s.id, s.k});
    }
  }
  for (const auto& m : c.marked_points)
    if (m.component == id) out.push_back({SpecialPoint::Marking, m.id, 1});
  return out;
}

// Components supporting a one-parameter automorphism subgroup: rational with
// exactly two special points, all inner crimping torus-fixed.
bool torus_scalable(const CurveGraph& c, int comp) {
  if (c.components[comp].geometric_genus != 0) return false;
  auto sp = specials_of(c, comp);
  if (sp.size() != 2) return false;
  for (const auto& p : sp) {
    if (p.kind == SpecialPoint::InnerUnibranch && p.k >= 4 &&
        !c.singularity(p.id).trivial_crimping)
      return false;
    if (p.kind == SpecialPoint::LoopBranch && p.k >= 5) return false;
  }
  return true;
}

struct Run {
  std::vector<int> comps;                // path or cycle order
  std::vector<std::string> tacnodes;     // joins between consecutive comps
  bool is_cycle = false;
  // path runs only:
  bool end_free[2] = {false, false};
  bool end_a1[2] = {false, false};       // node-branch or marking end
  bool end_exotic[2] = {false, false};   // inner unibranch end (cusp-type)
  std::string end_ids[2];
};

void classify_end(const SpecialPoint& p, Run& run, int side) {
  run.end_ids[side] = p.id;
  switch (p.kind) {
    case SpecialPoint::Marking:
    case SpecialPoint::OuterNode:
      run.end_free[side] = true;
      run.end_a1[side] = true;
      break;
    case SpecialPoint::LoopBranch:
      if (p.k == 1) {
        run.end_free[side] = true;
        run.end_a1[side] = true;
      }
      break;
    case SpecialPoint::InnerUnibranch:
      run.end_free[side] = true;
      run.end_exotic[side] = true;
      break;
    case SpecialPoint::OuterTacnode:
    case SpecialPoint::OuterHigher:
      break;  // pinned by tangency against a rigid neighbor
  }
}

std::vector<Run> torus_runs(const CurveGraph& c) {
  size_t n = c.components.size();
  std::vector<bool> scalable(n);
  for (size_t i = 0; i < n; ++i) scalable[i] = torus_scalable(c, static_cast<int>(i));

  struct Edge {
    int a, b;
    std::string id;
  };
  std::vector<Edge> edges;
  for (const auto& s : c.singularities) {
    if (s.k != 3 || s.branches.size() != 2) continue;
    int a = c.component_index(s.branches[0].component);
    int b = c.component_index(s.branches[1].component);
    if (scalable[a] && scalable[b]) edges.push_back({a, b, s.id});
  }
  std::vector<std::vector<int>> incident(n);
  for (size_t e = 0; e < edges.size(); ++e) {
    incident[edges[e].a].push_back(static_cast<int>(e));
    if (edges[e].b != edges[e].a) incident[edges[e].b].push_back(static_cast<int>(e));
  }

  std::vector<Run> runs;
  std::vector<bool> comp_done(n, false);
  std::vector<bool> edge_done(edges.size(), false);

  for (size_t i = 0; i < n; ++i) {
    if (!scalable[i] || comp_done[i]) continue;
    // move to an endpoint if this is a path
    int start = static_cast<int>(i);
    {
      std::set<int> seen;
      int cur = start, prev_edge = -1;
      while (true) {
        seen.insert(cur);
        int go = -1;
        for (int e : incident[cur])
          if (e != prev_edge && !edge_done[e]) {
            go = e;
            break;
          }
        if (go < 0) break;
        int nxt = edges[go].a == cur ? edges[go].b : edges[go].a;
        if (nxt == cur || seen.count(nxt)) break;  // loop or cycle
        prev_edge = go;
        cur = nxt;
      }
      start = cur;
    }
    Run run;
    run.comps.push_back(start);
    int cur = start;
    while (true) {
      int go = -1;
      for (int e : incident[cur])
        if (!edge_done[e]) {
          go = e;
          break;
        }
      if (go < 0) break;
      edge_done[go] = true;
      run.tacnodes.push_back(edges[go].id);
      int nxt = edges[go].a == cur ? edges[go].b : edges[go].a;
      if (nxt == cur || nxt == run.comps.front()) {
        run.is_cycle = true;
        break;
      }
      run.comps.push_back(nxt);
      cur = nxt;
    }
    for (int comp : run.comps) comp_done[comp] = true;

    if (!run.is_cycle) {
      for (int side = 0; side < 2; ++side) {
        int end_comp = side == 0 ? run.comps.front() : run.comps.back();
        std::map<std::string, int> budget;
        if (!run.tacnodes.empty()) {
          if (run.comps.size() == 1) {
            for (const auto& t : run.tacnodes) ++budget[t];
          } else {
            ++budget[side == 0 ? run.tacnodes.front() : run.tacnodes.back()];
          }
        }
        std::vector<SpecialPoint> free;
        for (const auto& p : specials_of(c, end_comp)) {
          if (p.kind == SpecialPoint::OuterTacnode || p.kind == SpecialPoint::LoopBranch) {
            auto it = budget.find(p.id);
            if (it != budget.end() && it->second > 0) {
              --it->second;
              continue;
            }
          }
          free.push_back(p);
        }
        if (run.comps.size() == 1) {
          if (static_cast<int>(free.size()) > side) classify_end(free[side], run, side);
        } else if (!free.empty()) {
          classify_end(free.front(), run, side);
        }
      }
    }
    runs.push_back(run);
  }
  return runs;
}

}  // namespace

int aut_torus_rank(const CurveGraph& c) {
  require_valid(c);
  int rank = 0;
  for (const auto& run : torus_runs(c)) {
    if (run.is_cycle) {
      if (run.comps.size() % 2 == 0) ++rank;
    } else if (run.end_free[0] && run.end_free[1]) {
      ++rank;
    }
  }
  return rank;
}

std::vector<AtomRef> find_atoms(const CurveGraph& c, Critical crit) {
  require_valid(c);
  std::vector<AtomRef> out;
  size_t n = c.components.size();
  if (crit == Critical::C_9_11 || crit == Critical::C_2_3) {
    int want_k = crit == Critical::C_9_11 ? 2 : 4;
    for (size_t i = 0; i < n; ++i) {
      if (c.components[i].geometric_genus != 0) continue;
      auto sp = specials_of(c, static_cast<int>(i));
      if (sp.size() != 2) continue;
      const SpecialPoint *sing = nullptr, *attach = nullptr;
      for (const auto& p : sp) {
        if (p.kind == SpecialPoint::InnerUnibranch && p.k == want_k)
          sing = &p;
        else if (p.kind == SpecialPoint::Marking || p.kind == SpecialPoint::OuterNode)
          attach = &p;
      }
      if (!sing || !attach) continue;
      if (want_k == 4 && !c.singularity(sing->id).trivial_crimping) continue;
      AtomRef a;
      a.comps = {c.components[i].id};
      a.sing_id = sing->id;
      a.attach_ids = {attach->id};
      a.attach_is_marking = {attach->kind == SpecialPoint::Marking};
      out.push_back(a);
    }
  } else {
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        if (c.components[i].geometric_genus != 0 || c.components[j].geometric_genus != 0)
          continue;
        auto spi = specials_of(c, static_cast<int>(i));
        auto spj = specials_of(c, static_cast<int>(j));
        if (spi.size() != 2 || spj.size() != 2) continue;
        std::string join;
        const std::string &ci = c.components[i].id, &cj = c.components[j].id;
        int joins = 0;
        for (const auto& s : c.singularities) {
          int on_i = 0, on_j = 0;
          for (const auto& b : s.branches) {
            if (b.component == ci) ++on_i;
            if (b.component == cj) ++on_j;
          }
          if (on_i == 1 && on_j == 1) {
            ++joins;
            if (s.k == 3) join = s.id;
          }
        }
        if (joins != 1 || join.empty()) continue;
        auto slot = [&](const std::vector<SpecialPoint>& sp) -> const SpecialPoint* {
          const SpecialPoint* attach = nullptr;
          bool saw_join = false;
          for (const auto& p : sp) {
            if (p.kind == SpecialPoint::OuterTacnode && p.id == join)
              saw_join = true;
            else if (p.kind == SpecialPoint::Marking || p.kind == SpecialPoint::OuterNode)
              attach = &p;
          }
          return saw_join ? attach : nullptr;
        };
        const SpecialPoint* ai = slot(spi);
        const SpecialPoint* aj = slot(spj);
        if (!ai || !aj) continue;
        AtomRef a;
        a.comps = {ci, cj};
        a.sing_id = join;
        a.attach_ids = {ai->id, aj->id};
        a.attach_is_marking = {ai->kind == SpecialPoint::Marking,
                               aj->kind == SpecialPoint::Marking};
        out.push_back(a);
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const AtomRef& a, const AtomRef& b) { return a.comps < b.comps; });
  return out;
}

Decomposition canonical_decomposition(const CurveGraph& c, Critical crit) {
  auto verdict = is_alpha_stable(c, critical_regime(crit));
  if (!verdict.stable)
    throw NotStable("curve is not stable at " + std::string(critical_name(crit)));
  Decomposition d;
  d.atoms = find_atoms(c, crit);
  std::set<std::string> in_atoms;
  for (const auto& a : d.atoms)
    for (const auto& id : a.comps) in_atoms.insert(id);
  for (const auto& comp : c.components)
    if (!in_atoms.count(comp.id)) d.core.push_back(comp.id);
  return d;
}

namespace {

// Standalone core: atoms removed; crossing nodes become markings "<sing>:k".
CurveGraph core_subcurve(const CurveGraph& c, const std::set<std::string>& core_ids) {
  CurveGraph k;
  k.disconnected_ok = true;
  for (const auto& comp : c.components)
    if (core_ids.count(comp.id)) k.components.push_back(comp);
  for (const auto& s : c.singularities) {
    int inside = 0;
    for (const auto& b : s.branches)
      if (core_ids.count(b.component)) ++inside;
    if (inside == static_cast<int>(s.branches.size())) {
      k.singularities.push_back(s);
    } else if (inside == 1 && s.branches.size() == 2) {
      const BranchRef& b =
          core_ids.count(s.branches[0].component) ? s.branches[0] : s.branches[1];
      k.marked_points.push_back({s.id + ":k", b.component, b.point});
    }
  }
  for (const auto& m : c.marked_points)
    if (core_ids.count(m.component)) k.marked_points.push_back(m);
  return k;
}

std::vector<CurveGraph> split_pieces(const CurveGraph& c) {
  std::vector<CurveGraph> out;
  for (const auto& part : c.connected_parts()) {
    CurveGraph piece;
    std::set<std::string> ids;
    for (int i : part) {
      piece.components.push_back(c.components[i]);
      ids.insert(c.components[i].id);
    }
    for (const auto& s : c.singularities)
      if (ids.count(s.branches[0].component)) piece.singularities.push_back(s);
    for (const auto& m : c.marked_points)
      if (ids.count(m.component)) piece.marked_points.push_back(m);
    out.push_back(piece);
  }
  return out;
}

int piece_t1_dim(const CurveGraph& piece) {
  CurveGraph p = piece;
  p.disconnected_ok = false;
  int g = arithmetic_genus(p);
  int n = static_cast<int>(p.marked_points.size());
  return std::max(0, 3 * g - 3 + n);
}

struct CoreCheck {
  bool ok = true;
  bool undetermined = false;
  std::string reason;
};

CoreCheck check_core(const CurveGraph& core, Critical crit) {
  CoreCheck res;
  if (core.components.empty()) return res;
  auto pieces = split_pieces(core);
  for (const auto& piece : pieces) {
    auto verdict = is_alpha_stable(piece, regime_just_above(crit));
    if (!verdict.stable) {
      res.ok = false;
      res.reason = "core is not stable above the critical value";
      return res;
    }
  }
  for (const auto& piece : pieces) {
    switch (crit) {
      case Critical::C_9_11:
        for (const auto& t : find_elliptic_tails(piece))
          if (t.attach_k == 1) {
            res.ok = false;
            res.reason = "core contains a nodally-attached elliptic tail";
            return res;
          }
        break;
      case Critical::C_7_10:
        for (const auto& b : find_elliptic_bridges(piece))
          if (b.ends[0].k == 1 && b.ends[1].k == 1 && !b.ends[0].is_inner &&
              !b.ends[1].is_inner) {
            res.ok = false;
            res.reason = "core contains a nodally-attached elliptic bridge";
            return res;
          }
        break;
      case Critical::C_2_3:
        for (const auto& w : find_weierstrass_chains(piece))
          if (w.links.size() == 1 && w.attach_k == 1) {
            res.ok = false;
            res.reason = "core contains a nodally-attached Weierstrass tail";
            return res;
          }
        break;
    }
  }
  // closedness of the core in the stack just above (combinatorial criteria)
  for (const auto& run : torus_runs(core)) {
    if (run.is_cycle) {
      if (run.comps.size() % 2 == 0) {
        res.ok = false;
        res.reason = "core contains a closed rosary of even length";
        return res;
      }
      continue;
    }
    if (!(run.end_free[0] && run.end_free[1])) continue;  // pinned, rank 0
    if (run.end_exotic[0] || run.end_exotic[1]) {
      res.undetermined = true;
      res.reason = "core has a torus component outside the rosary patterns";
      return res;
    }
    if (crit == Critical::C_2_3) {
      if (run.comps.size() != 3) {
        res.ok = false;
        res.reason = "core rosary of length != 3";
        return res;
      }
    } else {
      res.undetermined = true;
      res.reason = "core has positive torus rank above the critical value";
      return res;
    }
  }
  return res;
}

}  // namespace

ClosedClassification classify_closed(const CurveGraph& c, Critical crit) {
  ClosedClassification cls;
  cls.critical = crit;
  auto verdict = is_alpha_stable(c, critical_regime(crit));
  if (!verdict.stable)
    throw NotStable("curve is not stable at " + std::string(critical_name(crit)));

  cls.genus = arithmetic_genus(c);
  cls.markings = static_cast<int>(c.marked_points.size());
  cls.atoms = find_atoms(c, crit);

  std::set<std::string> atom_comps;
  for (const auto& a : cls.atoms)
    for (const auto& id : a.comps) atom_comps.insert(id);
  std::set<std::string> core_ids;
  for (const auto& comp : c.components)
    if (!atom_comps.count(comp.id)) core_ids.insert(comp.id);
  cls.core.assign(core_ids.begin(), core_ids.end());

  CurveGraph core = core_subcurve(c, core_ids);
  CoreCheck check = check_core(core, crit);
  if (!check.ok || check.undetermined) {
    cls.closed = false;
    cls.undetermined = check.undetermined;
    cls.reason = check.reason;
    return cls;
  }

  std::set<std::string> claimed;  // core comps claimed by link rosaries (2/3)
  bool anomaly = false;
  std::string anomaly_reason;
  // terminal kind per link: 0 = core, 1 = original marking, 2 = other atom
  std::vector<int> terminal_kind;
  std::vector<std::string> terminal_other_node;
  // raw atom-ward walk data for 2/3 (used to assemble type C)
  std::vector<std::vector<RosaryRef>> raw_rosaries;
  std::vector<std::vector<std::string>> raw_nodes;

  if (crit != Critical::C_7_10) {
    auto runs = torus_runs(core);
    std::map<std::string, std::vector<std::pair<int, int>>> run_ends;
    for (size_t r = 0; r < runs.size(); ++r) {
      if (runs[r].is_cycle) continue;
      for (int side = 0; side < 2; ++side)
        if (runs[r].end_free[side])
          run_ends[runs[r].end_ids[side]].push_back({static_cast<int>(r), side});
    }
    auto rosary_run = [&](int r) {
      return !runs[r].is_cycle && runs[r].comps.size() == 3 && runs[r].end_free[0] &&
             runs[r].end_free[1] && runs[r].end_a1[0] && runs[r].end_a1[1];
    };
    std::set<int> claimed_runs;
    std::set<std::string> original_marks;
    for (const auto& m : c.marked_points) original_marks.insert(m.id);

    for (const auto& atom : cls.atoms) {
      LinkRef link;
      link.atoms = {atom};
      if (atom.attach_is_marking[0]) {
        link.ends_in_marking = true;
        cls.links.push_back(link);
        terminal_kind.push_back(1);
        terminal_other_node.push_back({});
        raw_rosaries.push_back({});
        raw_nodes.push_back({});
        continue;
      }
      std::vector<RosaryRef> rosaries_atomward;
      std::vector<std::string> nodes_atomward = {atom.attach_ids[0]};
      int terminal = 0;
      std::string other_node;

      std::set<std::string> atom_set(atom.comps.begin(), atom.comps.end());
      std::string across;
      for (const auto& b : c.singularity(atom.attach_ids[0]).branches)
        if (!atom_set.count(b.component)) across = b.component;
      if (atom_comps.count(across)) {
        terminal = 2;  // atoms joined directly by a node
        other_node = atom.attach_ids[0];
      } else if (crit == Critical::C_2_3) {
        std::string key = atom.attach_ids[0] + ":k";
        while (true) {
          int r = -1, side = -1;
          auto it = run_ends.find(key);
          if (it != run_ends.end())
            for (auto [rr, ss] : it->second)
              if (!claimed_runs.count(rr) && rosary_run(rr)) {
                r = rr;
                side = ss;
                break;
              }
          if (r < 0) break;  // terminal: core
          claimed_runs.insert(r);
          const Run& run = runs[r];
          std::vector<int> order = run.comps;
          std::vector<std::string> tacs = run.tacnodes;
          if (side != 0) {
            std::reverse(order.begin(), order.end());
            std::reverse(tacs.begin(), tacs.end());
          }
          RosaryRef ros;
          for (int x = 0; x < 3; ++x) ros.comps[x] = core.components[order[x]].id;
          ros.tacnodes = {tacs[0], tacs[1]};
          for (const auto& id : ros.comps) claimed.insert(id);
          rosaries_atomward.push_back(ros);
          std::string far = run.end_ids[side == 0 ? 1 : 0];
          if (far.size() > 2 && far.substr(far.size() - 2) == ":k") {
            terminal = 2;  // node to an atom on the far side
            other_node = far.substr(0, far.size() - 2);
            nodes_atomward.push_back(other_node);
            break;
          }
          if (original_marks.count(far)) {
            terminal = 1;
            break;
          }
          nodes_atomward.push_back(far);
          key = far;
        }
      }
      raw_rosaries.push_back(rosaries_atomward);
      raw_nodes.push_back(nodes_atomward);
      terminal_kind.push_back(terminal);
      terminal_other_node.push_back(other_node);

      // core-first orientation for types A and B
      std::vector<RosaryRef> rosaries = rosaries_atomward;
      std::reverse(rosaries.begin(), rosaries.end());
      for (auto& ros : rosaries) {
        std::reverse(ros.comps.begin(), ros.comps.end());
        std::swap(ros.tacnodes[0], ros.tacnodes[1]);
      }
      std::vector<std::string> nodes = nodes_atomward;
      std::reverse(nodes.begin(), nodes.end());
      link.rosaries = rosaries;
      link.nodes = nodes;
      link.ends_in_marking = terminal == 1;
      cls.links.push_back(link);
    }
  } else {
    // 7/10: links are nodal chains of atoms
    std::map<std::string, std::vector<std::pair<int, int>>> slot_by_node;
    for (size_t a = 0; a < cls.atoms.size(); ++a)
      for (int slot = 0; slot < 2; ++slot)
        if (!cls.atoms[a].attach_is_marking[slot])
          slot_by_node[cls.atoms[a].attach_ids[slot]].push_back({static_cast<int>(a), slot});
    std::vector<bool> atom_done(cls.atoms.size(), false);
    auto node_to_core = [&](const std::string& node_id) {
      for (const auto& b : c.singularity(node_id).branches)
        if (core_ids.count(b.component)) return true;
      return false;
    };
    for (size_t a = 0; a < cls.atoms.size(); ++a) {
      if (atom_done[a]) continue;
      int start_slot = -1;
      bool start_marking = false;
      for (int slot = 0; slot < 2; ++slot) {
        if (cls.atoms[a].attach_is_marking[slot]) {
          if (start_slot < 0) {
            start_slot = slot;
            start_marking = true;
          }
        } else if (node_to_core(cls.atoms[a].attach_ids[slot])) {
          start_slot = slot;
          start_marking = false;
          break;
        }
      }
      if (start_slot < 0) continue;  // interior of a chain or cycle
      LinkRef link;
      int cur = static_cast<int>(a), in_slot = start_slot;
      if (!start_marking) link.nodes.push_back(cls.atoms[a].attach_ids[start_slot]);
      bool tail_marking = false;
      std::string trailing_node;
      while (true) {
        atom_done[cur] = true;
        link.atoms.push_back(cls.atoms[cur]);
        int out_slot = 1 - in_slot;
        const std::string& out_id = cls.atoms[cur].attach_ids[out_slot];
        if (cls.atoms[cur].attach_is_marking[out_slot]) {
          tail_marking = true;
          break;
        }
        if (node_to_core(out_id)) {
          trailing_node = out_id;
          break;
        }
        int nxt = -1, nxt_slot = -1;
        for (auto [other, oslot] : slot_by_node[out_id])
          if (other != cur) {
            nxt = other;
            nxt_slot = oslot;
          }
        if (nxt < 0 || atom_done[nxt]) {
          anomaly = true;
          anomaly_reason = "broken atom chain";
          break;
        }
        link.nodes.push_back(out_id);
        cur = nxt;
        in_slot = nxt_slot;
      }
      if (start_marking && !tail_marking) {
        std::reverse(link.atoms.begin(), link.atoms.end());
        std::reverse(link.nodes.begin(), link.nodes.end());
        if (!trailing_node.empty()) link.nodes.insert(link.nodes.begin(), trailing_node);
        link.ends_in_marking = true;
      } else if (start_marking && tail_marking) {
        link.ends_in_marking = true;  // type B pattern
      } else if (tail_marking) {
        link.ends_in_marking = true;
      } else {
        link.to_core_both_ends = true;
        if (!trailing_node.empty()) link.nodes.push_back(trailing_node);
      }
      cls.links.push_back(link);
      terminal_kind.push_back(link.ends_in_marking ? 1 : 0);
      terminal_other_node.push_back({});
    }
  }

  if (anomaly) {
    cls.closed = false;
    cls.undetermined = true;
    cls.reason = anomaly_reason;
    return cls;
  }

  std::set<std::string> secondary = core_ids;
  if (crit == Critical::C_2_3)
    for (const auto& id : claimed) secondary.erase(id);
  cls.secondary_core.assign(secondary.begin(), secondary.end());

  bool base_empty = crit == Critical::C_2_3 ? secondary.empty() : core_ids.empty();

  if (!base_empty) {
    // Type A: every link must run from the core to its atom
    for (size_t i = 0; i < cls.links.size(); ++i) {
      bool bad = terminal_kind.size() > i && terminal_kind[i] != 0;
      if (crit == Critical::C_7_10) bad = cls.links[i].nodes.empty();
      if (bad) {
        cls.closed = false;
        cls.undetermined = true;
        cls.reason = "link does not reach the nonempty core";
        return cls;
      }
    }
    if (crit == Critical::C_7_10) {
      size_t linked = 0;
      for (const auto& link : cls.links) linked += link.atoms.size();
      if (linked != cls.atoms.size()) {
        cls.closed = false;
        cls.undetermined = true;
        cls.reason = "atom cycle coexists with a nonempty core";
        return cls;
      }
    }
    cls.closed = true;
    cls.type = 'A';
  } else {
    switch (crit) {
      case Critical::C_9_11: {
        if (cls.atoms.size() == 1 && cls.markings == 1 && c.components.size() == 1) {
          cls.closed = true;
          cls.type = 'C';
          cls.links.clear();
        } else if (cls.atoms.size() == 2 && cls.markings == 0 &&
                   cls.atoms[0].attach_ids[0] == cls.atoms[1].attach_ids[0] &&
                   !cls.atoms[0].attach_is_marking[0]) {
          cls.closed = true;
          cls.type = 'B';
          cls.links.clear();
          LinkRef both;
          both.atoms = cls.atoms;
          both.nodes = {cls.atoms[0].attach_ids[0]};
          cls.links.push_back(both);
        } else {
          cls.closed = false;
          cls.undetermined = true;
          cls.reason = "empty core outside the 9/11 type B/C patterns";
        }
        break;
      }
      case Critical::C_7_10: {
        if (cls.markings == 2 && cls.links.size() == 1 && cls.links[0].ends_in_marking &&
            cls.links[0].atoms.size() == cls.atoms.size() && cls.links[0].nodes.size() ==
                cls.atoms.size() - 1) {
          cls.closed = true;
          cls.type = 'B';
          break;
        }
        if (cls.markings == 0 && cls.links.empty() && !cls.atoms.empty()) {
          std::map<std::string, int> node_uses;
          bool all_nodes = true;
          for (const auto& atom : cls.atoms)
            for (int slot = 0; slot < 2; ++slot) {
              if (atom.attach_is_marking[slot]) all_nodes = false;
              ++node_uses[atom.attach_ids[slot]];
            }
          bool cycle = all_nodes && node_uses.size() == cls.atoms.size();
          for (auto& [id, uses] : node_uses)
            if (uses != 2) cycle = false;
          if (cycle) {
            LinkRef cyc;
            std::map<std::string, std::vector<std::pair<int, int>>> slot_by_node;
            for (size_t a = 0; a < cls.atoms.size(); ++a)
              for (int slot = 0; slot < 2; ++slot)
                slot_by_node[cls.atoms[a].attach_ids[slot]].push_back(
                    {static_cast<int>(a), slot});
            int cur = 0;
            for (size_t a = 1; a < cls.atoms.size(); ++a)
              if (cls.atoms[a].comps < cls.atoms[cur].comps) cur = static_cast<int>(a);
            int in_slot = cls.atoms[cur].attach_ids[1] < cls.atoms[cur].attach_ids[0] ? 1 : 0;
            cyc.nodes.push_back(cls.atoms[cur].attach_ids[in_slot]);  // q_0: wrap node
            std::vector<bool> used(cls.atoms.size(), false);
            for (size_t step = 0; step < cls.atoms.size(); ++step) {
              used[cur] = true;
              cyc.atoms.push_back(cls.atoms[cur]);
              int out_slot = 1 - in_slot;
              const std::string& out_id = cls.atoms[cur].attach_ids[out_slot];
              if (step + 1 < cls.atoms.size()) {
                cyc.nodes.push_back(out_id);
                int nxt = -1, nxt_slot = -1;
                for (auto [other, oslot] : slot_by_node[out_id])
                  if (!used[other]) {
                    nxt = other;
                    nxt_slot = oslot;
                  }
                if (nxt < 0) break;
                cur = nxt;
                in_slot = nxt_slot;
              }
            }
            if (cyc.atoms.size() == cls.atoms.size()) {
              cls.links.push_back(cyc);
              cls.closed = true;
              cls.type = 'C';
              break;
            }
          }
        }
        cls.closed = false;
        cls.undetermined = true;
        cls.reason = "empty core outside the 7/10 type B/C patterns";
        break;
      }
      case Critical::C_2_3: {
        if (cls.markings == 1 && cls.atoms.size() == 1 && terminal_kind.size() == 1 &&
            terminal_kind[0] == 1) {
          cls.closed = true;
          cls.type = 'B';
          break;
        }
        if (cls.markings == 0 && cls.atoms.size() == 2) {
          int walker = -1;
          for (size_t i = 0; i < cls.links.size(); ++i)
            if (terminal_kind[i] == 2) {
              walker = static_cast<int>(i);
              break;
            }
          bool all_claimed = true;
          for (const auto& id : core_ids)
            if (!claimed.count(id)) all_claimed = false;
          if (walker >= 0 && all_claimed) {
            // assemble the canonical two-link chain E_0, R_1..R_{l-1}, E_l
            const AtomRef& e0 = cls.links[walker].atoms[0];
            const AtomRef* el = nullptr;
            for (const auto& atom : cls.atoms)
              if (atom.comps != e0.comps) el = &atom;
            if (el && terminal_other_node[walker] == el->attach_ids[0]) {
              LinkRef chain;
              chain.atoms = {e0, *el};
              chain.rosaries = raw_rosaries[walker];
              chain.nodes = raw_nodes[walker];
              cls.links.clear();
              cls.links.push_back(chain);
              cls.closed = true;
              cls.type = 'C';
              break;
            }
          }
        }
        cls.closed = false;
        cls.undetermined = true;
        cls.reason = "empty secondary core outside the 2/3 type B/C patterns";
        break;
      }
    }
  }

  if (cls.closed && cls.type == 'A') {
    std::set<std::string> block = crit == Critical::C_2_3 ? secondary : core_ids;
    if (!block.empty()) {
      CurveGraph base = core_subcurve(c, block);
      for (const auto& piece : split_pieces(base)) cls.core_t1_dim += piece_t1_dim(piece);
    }
  }
  return cls;
}

nlohmann::json classification_to_json(const ClosedClassification& cls) {
  nlohmann::json j;
  j["critical"] = critical_name(cls.critical);
  j["closed"] = cls.closed;
  if (cls.undetermined) j["undetermined"] = true;
  if (!cls.reason.empty()) j["reason"] = cls.reason;
  if (cls.closed) j["type"] = std::string(1, cls.type);
  j["genus"] = cls.genus;
  j["markings"] = cls.markings;
  j["core"] = cls.core;
  j["secondary_core"] = cls.secondary_core;
  auto atom_json = [](const AtomRef& a) {
    nlohmann::json ja;
    ja["components"] = a.comps;
    ja["singularity"] = a.sing_id;
    ja["attachments"] = a.attach_ids;
    ja["attachment_is_marking"] = a.attach_is_marking;
    return ja;
  };
  j["atoms"] = nlohmann::json::array();
  for (const auto& a : cls.atoms) j["atoms"].push_back(atom_json(a));
  j["links"] = nlohmann::json::array();
  for (const auto& link : cls.links) {
    nlohmann::json jl;
    jl["length"] = link.length();
    jl["nodes"] = link.nodes;
    jl["ends_in_marking"] = link.ends_in_marking;
    jl["to_core_both_ends"] = link.to_core_both_ends;
    jl["atoms"] = nlohmann::json::array();
    for (const auto& a : link.atoms) jl["atoms"].push_back(atom_json(a));
    jl["rosaries"] = nlohmann::json::array();
    for (const auto& r : link.rosaries) {
      nlohmann::json jr;
      jr["components"] = r.comps;
      jr["tacnodes"] = r.tacnodes;
      jl["rosaries"].push_back(jr);
    }
    j["links"].push_back(jl);
  }
  j["core_t1_dim"] = cls.core_t1_dim;
  return j;
}

}  // namespace modulikit
