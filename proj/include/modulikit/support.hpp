#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

namespace modulikit {

/// A finite union of coordinate subspaces, stored as an antichain of
/// coordinate-name sets (each set names the coordinates vanishing on a piece).
/// V((0)) — the whole space — is the single piece with empty vanishing set.
struct SupportUnion {
  std::vector<std::set<std::string>> pieces;

  bool whole_space() const { return pieces.size() == 1 && pieces.front().empty(); }
  bool empty() const { return pieces.empty(); }

  void canonicalize() {
    std::sort(pieces.begin(), pieces.end());
    pieces.erase(std::unique(pieces.begin(), pieces.end()), pieces.end());
    // antichain: drop pieces whose vanishing set contains another's
    std::vector<std::set<std::string>> keep;
    for (size_t i = 0; i < pieces.size(); ++i) {
      bool dominated = false;
      for (size_t j = 0; j < pieces.size() && !dominated; ++j) {
        if (i == j) continue;
        const auto &a = pieces[i], &b = pieces[j];
        if (b.size() < a.size() || (b.size() == a.size() && j < i)) {
          dominated = std::includes(a.begin(), a.end(), b.begin(), b.end()) && a != b;
          if (a == b && j < i) dominated = true;
        }
      }
      if (!dominated) keep.push_back(pieces[i]);
    }
    pieces = std::move(keep);
    std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) {
      if (a.size() != b.size()) return a.size() < b.size();
      return a < b;
    });
  }

  friend bool operator==(const SupportUnion& x, const SupportUnion& y) {
    SupportUnion a = x, b = y;
    a.canonicalize();
    b.canonicalize();
    return a.pieces == b.pieces;
  }
};

/// Support of a point: the set of coordinates that are nonzero there.
struct Support {
  std::set<std::string> nonzero;
};

}  // namespace modulikit
