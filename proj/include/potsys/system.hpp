#pragma once

// Potentialist systems: finitely many worlds with an arrow set containing the
// identities and closed under composition.

#include <potsys/structure.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace potsys {

struct World
{
    std::string name;
    Structure structure;

    auto operator==(const World &) const -> bool = default;
};

/// An embedding between two worlds, referenced by index.
struct Arrow
{
    std::size_t src = 0;
    std::size_t dst = 0;
    ElementMap map;

    auto operator<=>(const Arrow &) const = default;
};

enum class ClosureMode
{
    Validate,
    Close
};

class PotentialistSystem
{
public:
    /// Checks world names, shared signature, that arrows reference known
    /// worlds and are embeddings. Validate then insists on identities and
    /// composites; Close adds them. Arrows are stored sorted and
    /// deduplicated.
    static auto validate_or_close(std::vector<World> worlds, std::vector<Arrow> arrows, ClosureMode mode)
        -> PotentialistSystem;

    /// Identity arrows only.
    static auto discrete(std::vector<World> worlds) -> PotentialistSystem;

    auto signature() const -> const Signature & { return _worlds.front().structure.signature(); }
    auto worlds() const -> const std::vector<World> & { return _worlds; }
    auto world(std::size_t i) const -> const World & { return _worlds.at(i); }
    auto structure(std::size_t i) const -> const Structure & { return _worlds.at(i).structure; }
    auto world_count() const -> std::size_t { return _worlds.size(); }
    auto world_index(std::string_view name) const -> std::optional<std::size_t>;

    auto arrows() const -> const std::vector<Arrow> & { return _arrows; }
    auto arrow(std::size_t i) const -> const Arrow & { return _arrows.at(i); }
    /// Indices into arrows(), ascending.
    auto arrows_from(std::size_t world) const -> const std::vector<std::size_t> & { return _outgoing.at(world); }
    auto find_arrow(std::size_t src, std::size_t dst, const ElementMap & map) const -> std::optional<std::size_t>;
    auto identity_arrow(std::size_t world) const -> std::size_t;

    auto operator==(const PotentialistSystem & other) const -> bool
    {
        return _worlds == other._worlds && _arrows == other._arrows;
    }

private:
    PotentialistSystem(std::vector<World> worlds, std::vector<Arrow> arrows);

    std::vector<World> _worlds;
    std::vector<Arrow> _arrows;
    std::vector<std::vector<std::size_t>> _outgoing;
};

/// No ordered world pair carries two distinct arrows.
auto is_thin(const PotentialistSystem & sys) -> bool;

struct IsoLink
{
    std::size_t left = 0;
    std::size_t right = 0;
    /// Bijective embedding from the left world onto the right world.
    ElementMap xi;

    auto operator<=>(const IsoLink &) const = default;
};

/// A world-level relation with a total isomorphism per related pair.
struct IsoBisimWitness
{
    std::vector<IsoLink> links;
};

struct Disjointified
{
    PotentialistSystem system;
    /// Original system on the left, tagged copy on the right.
    IsoBisimWitness witness;
    /// New element id -> (world index, original element).
    std::vector<std::pair<std::size_t, Elem>> tags;
};

/// Replaces every element a of world w with a fresh id standing for (a, w).
/// Ids are assigned world by world in universe order.
auto disjointify(const PotentialistSystem & sys) -> Disjointified;

/// True when no two worlds share an element id.
auto has_disjoint_universes(const PotentialistSystem & sys) -> bool;

/// A node of the unravelling: a composable chain of arrows from a root world.
class UnravelNode
{
public:
    UnravelNode(const PotentialistSystem & sys, std::size_t root, std::vector<std::size_t> chain = {});

    auto system() const -> const PotentialistSystem & { return *_sys; }
    auto root() const -> std::size_t { return _root; }
    /// Arrow indices, first to last.
    auto chain() const -> const std::vector<std::size_t> & { return _chain; }
    auto depth() const -> std::size_t { return _chain.size(); }
    auto final_world() const -> std::size_t;

    /// "M0 -[3]-> M1 -[7]-> M2"
    auto to_string() const -> std::string;

private:
    const PotentialistSystem * _sys;
    std::size_t _root;
    std::vector<std::size_t> _chain;
};

auto unravel_root(const PotentialistSystem & sys, std::size_t world) -> UnravelNode;

struct UnravelChild
{
    std::size_t arrow;
    UnravelNode node;
};

/// One child per arrow leaving the node's final world. Throws DepthExceeded
/// when node.depth() >= depth_cap.
auto unravel_children(const UnravelNode & node, std::size_t depth_cap) -> std::vector<UnravelChild>;

/// The node's outgoing edges correspond one-to-one with the system arrows
/// leaving its final world, with matching targets and maps.
auto local_zigzag_holds(const UnravelNode & node, const std::vector<UnravelChild> & children) -> bool;

struct Flattening
{
    Structure flat;
    /// Isomorphism Flat -> structure of the final world.
    ElementMap rename;
};

/// Iteratively renames along the chain so that every arrow becomes an
/// inclusion. Requires pairwise disjoint universes.
auto flatten(const UnravelNode & node) -> Flattening;

/// Flat(chain) is a substructure of Flat(chain + arrow) and
/// rename' restricted to Flat(chain) equals arrow after rename.
auto renaming_square_commutes(const UnravelNode & node, std::size_t arrow) -> bool;

} // namespace potsys
