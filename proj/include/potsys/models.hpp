#pragma once

// Bounded model enumeration, the Mod and Mod^e systems built from it, and
// skeletons.

#include <potsys/formula.hpp>
#include <potsys/system.hpp>

#include <vector>

namespace potsys {

inline constexpr std::size_t default_model_size_cap = 4;

/// Every structure whose carrier is a nonempty subset of {0..max_size-1}
/// and which satisfies each theory sentence. Ordered by carrier (size, then
/// lexicographic), then relation contents, then constant values.
auto enumerate_models(const Signature & sig, const std::vector<Formula> & theory, std::size_t max_size,
    std::size_t size_cap = default_model_size_cap) -> std::vector<Structure>;

/// Worlds "M0", "M1", ...; arrows are the inclusions M -> N with
/// M = substructure(N, universe(M)).
auto build_mod_system(const std::vector<Structure> & models) -> PotentialistSystem;

/// Same worlds; arrows are all embeddings.
auto build_mode_system(const std::vector<Structure> & models) -> PotentialistSystem;

struct Skeleton
{
    PotentialistSystem system;
    /// World of the input -> world of the skeleton.
    std::vector<std::size_t> quotient;
    /// Input on the left, skeleton on the right.
    IsoBisimWitness witness;
};

/// Identifies worlds joined by a pair of mutually inverse arrows and keeps
/// the lowest-indexed world of each class with every arrow between kept
/// worlds.
auto skeleton(const PotentialistSystem & sys) -> Skeleton;

} // namespace potsys
