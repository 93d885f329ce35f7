#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "modulikit/closed.hpp"
#include "modulikit/rational.hpp"
#include "modulikit/support.hpp"

namespace modulikit {

struct NotClosed : std::runtime_error {
  explicit NotClosed(const std::string& what) : std::runtime_error(what) {}
};
struct UnknownSubgroup : std::runtime_error {
  explicit UnknownSubgroup(const std::string& what) : std::runtime_error(what) {}
};
struct ExternallySourced : std::runtime_error {
  explicit ExternallySourced(const std::string& what) : std::runtime_error(what) {}
};

/// Rank-k torus acting diagonally on named coordinates, plus a character.
struct TorusAction {
  int rank = 0;
  struct Coord {
    std::string name;
    std::vector<long> weight;  // length == rank
  };
  std::vector<Coord> coordinates;
  std::vector<long> character;
};

nlohmann::json action_to_json(const TorusAction& a);
TorusAction action_from_json(const nlohmann::json& j);

/// Diagonalized action on T^1 of a closed curve: one torus factor per atom and
/// per link rosary, coordinates and weights per combinatorial type. Core
/// deformation directions carry zero weight vectors. The character is chi_star.
TorusAction t1_weights(const ClosedClassification& cls);

/// chi_star: entry 1 on each atom factor, 0 elsewhere.
std::vector<long> chi_star(const ClosedClassification& cls);

/// chi_{delta-psi} = chi_star^N.
int chi_exponent(Critical c);  // 11, 10, 39

/// Character of delta - psi on the factors of t1_weights(cls).
std::vector<long> chi_delta_minus_psi(const ClosedClassification& cls);

struct PredictedIdeals {
  SupportUnion plus;
  SupportUnion minus;
};

/// The vanishing loci of the predicted VGIT ideals, as coordinate-subspace
/// antichains over the names used by t1_weights.
PredictedIdeals predicted_ideals(const ClosedClassification& cls);

enum class Subgroup { atom_1ps, rosary_1ps };
Subgroup subgroup_from_string(const std::string& s);

/// Pairing constants per critical value. The lambda pairing is printed in this
/// source only for 2/3; the other two rows are externally sourced.
struct PairingRow {
  int n_delta_minus_psi;               // <chi_{delta-psi}, atom 1-PS>
  std::optional<int> lambda_pairing;   // <chi_lambda, atom 1-PS>
};
PairingRow pairing_row(Critical c);

/// <chi of (a*lambda + b*(delta-psi)), subgroup> at the given critical value.
/// Rosary subgroups pair to zero; atom subgroups need the lambda pairing.
Rat pair_character(const Rat& coeff_lambda, const Rat& coeff_delta_minus_psi, Subgroup sg,
                   Critical c = Critical::C_2_3);

}  // namespace modulikit
