#pragma once

// Finite relational structures and the maps between them.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace potsys {

using Elem = std::uint32_t;
using Tuple = std::vector<Elem>;

struct RelationSymbol
{
    std::string name;
    std::size_t arity = 0;

    auto operator<=>(const RelationSymbol &) const = default;
};

/// Relational signature with optional constants. Symbols are kept sorted by
/// name so that two signatures declaring the same symbols compare equal.
class Signature
{
public:
    Signature() = default;
    Signature(std::vector<RelationSymbol> relations, std::vector<std::string> constants);

    auto relations() const -> const std::vector<RelationSymbol> & { return _relations; }
    auto constants() const -> const std::vector<std::string> & { return _constants; }

    auto relation_index(std::string_view name) const -> std::optional<std::size_t>;
    auto constant_index(std::string_view name) const -> std::optional<std::size_t>;

    /// "R:2,S:3,c:0" -- arity 0 declares a constant.
    auto to_string() const -> std::string;

    auto operator==(const Signature &) const -> bool = default;

private:
    std::vector<RelationSymbol> _relations;
    std::vector<std::string> _constants;
};

/// Parses the compact "R:2,c:0" form used on the command line.
auto parse_signature(std::string_view text) -> Signature;

/// A finite partial function between element sets, stored as pairs sorted by
/// source element.
class ElementMap
{
public:
    using Pair = std::pair<Elem, Elem>;

    ElementMap() = default;
    /// Throws if two pairs share a source with different targets.
    explicit ElementMap(std::vector<Pair> pairs);

    static auto identity(std::span<const Elem> elements) -> ElementMap;

    auto pairs() const -> const std::vector<Pair> & { return _pairs; }
    auto size() const -> std::size_t { return _pairs.size(); }
    auto empty() const -> bool { return _pairs.empty(); }

    auto find(Elem x) const -> std::optional<Elem>;
    /// Throws when x is outside the domain.
    auto at(Elem x) const -> Elem;
    auto apply(std::span<const Elem> xs) const -> Tuple;

    auto domain() const -> std::vector<Elem>;
    auto image() const -> std::vector<Elem>;
    auto is_injective() const -> bool;
    auto is_total_on(std::span<const Elem> elements) const -> bool;

    /// `next` after `*this`; defined wherever both steps are.
    auto then(const ElementMap & next) const -> ElementMap;
    /// Requires injectivity.
    auto inverse() const -> ElementMap;
    auto restrict_to(std::span<const Elem> elements) const -> ElementMap;

    /// "0->1, 1->2"
    auto to_string() const -> std::string;

    auto operator<=>(const ElementMap &) const = default;

private:
    std::vector<Pair> _pairs;
};

class Structure
{
public:
    /// Validates every invariant: nonempty universe, tuples of the declared
    /// arity inside the universe, constants inside the universe. Universe
    /// and relation tables are sorted and deduplicated.
    Structure(Signature signature, std::vector<Elem> universe, std::vector<std::vector<Tuple>> relations,
        std::vector<Elem> constants = {});

    auto signature() const -> const Signature & { return _signature; }
    auto universe() const -> std::span<const Elem> { return _universe; }
    auto size() const -> std::size_t { return _universe.size(); }
    auto contains(Elem x) const -> bool;
    auto local_index(Elem x) const -> std::optional<std::size_t>;

    auto relation(std::size_t r) const -> const std::vector<Tuple> & { return _relations[r]; }
    auto holds(std::size_t r, std::span<const Elem> args) const -> bool;
    auto constants() const -> const std::vector<Elem> & { return _constants; }

    /// Isomorphic copy along a bijection defined on the whole universe.
    auto renamed(const ElementMap & bijection) const -> Structure;

    auto operator==(const Structure &) const -> bool = default;

private:
    Signature _signature;
    std::vector<Elem> _universe;
    std::vector<std::vector<Tuple>> _relations;
    std::vector<Elem> _constants;
};

/// One atomic literal over the terms of a tuple. Term indices [0, n) are the
/// variables x0..x(n-1), indices n.. are the signature's constants in order.
struct Literal
{
    enum class Kind : std::uint8_t
    {
        Equal,
        Relation
    };

    Kind kind = Kind::Equal;
    std::uint32_t relation = 0;
    std::vector<std::uint32_t> args;
    bool positive = true;

    auto operator<=>(const Literal &) const = default;
};

/// Literal-closed atomic type: for every atomic formula over the tuple's
/// variables (and the constants) exactly one of it or its negation appears.
/// Literals are listed in a fixed canonical order, so two types of the same
/// arity are equal iff their literal polarities agree position by position.
struct AtomicType
{
    std::size_t arity = 0;
    std::vector<Literal> literals;

    auto operator==(const AtomicType &) const -> bool = default;
};

auto atomic_type(const Structure & s, std::span<const Elem> tuple) -> AtomicType;

/// ā ↦ b̄ is a partial isomorphism, i.e. the atomic types agree.
auto is_partial_isomorphism(const Structure & s, std::span<const Elem> a, const Structure & t, std::span<const Elem> b)
    -> bool;

/// Injective, preserves and reflects every relation, respects constants.
/// Throws when `m` is not total on the universe of `s`.
auto is_embedding(const Structure & s, const Structure & t, const ElementMap & m) -> bool;

/// Every embedding s -> t, ordered lexicographically as image sequences.
auto enumerate_embeddings(const Structure & s, const Structure & t) -> std::vector<ElementMap>;

auto substructure(const Structure & t, std::span<const Elem> subset) -> Structure;

/// Equal labels iff isomorphic. Brute force over universe bijections.
auto canonical_form(const Structure & s) -> std::string;

} // namespace potsys
