#pragma once

// Modal Ehrenfeucht-Fraisse games: canonical positions, the rank fixpoint,
// bisimulation extraction and verification, and strategy play.

#include <potsys/system.hpp>

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace potsys {

/// -1 < 0 < 1 < ... < infinity
class RankValue
{
public:
    static auto minus_one() -> RankValue { return RankValue{-1}; }
    static auto finite(std::uint32_t n) -> RankValue { return RankValue{static_cast<std::int64_t>(n)}; }
    static auto infinity() -> RankValue { return RankValue{infinite_code}; }

    auto is_minus_one() const -> bool { return _code == -1; }
    auto is_infinite() const -> bool { return _code == infinite_code; }
    auto is_finite() const -> bool { return _code >= 0 && _code != infinite_code; }
    /// Only for finite ranks.
    auto value() const -> std::uint32_t;

    /// rank >= alpha
    auto at_least(std::uint32_t alpha) const -> bool { return _code >= static_cast<std::int64_t>(alpha); }

    /// "-1", "3", "inf"
    auto to_string() const -> std::string;

    auto operator<=>(const RankValue &) const = default;

private:
    static constexpr std::int64_t infinite_code = INT64_MAX;

    explicit RankValue(std::int64_t code) :
        _code(code)
    {
    }

    std::int64_t _code;
};

/// A board position with tuples reduced to the partial injection they
/// induce.
struct Position
{
    std::size_t left_world = 0;
    std::size_t right_world = 0;
    ElementMap match;

    auto operator<=>(const Position &) const = default;
};

/// Reduces (a, b) to its induced map; nullopt when a -> b is not a
/// partial injection.
auto canonical_position(std::size_t left_world, std::span<const Elem> a, std::size_t right_world,
    std::span<const Elem> b) -> std::optional<Position>;

/// "L:M0 R:M1 {0->1}"
auto to_string(const PotentialistSystem & left, const PotentialistSystem & right, const Position & p) -> std::string;

inline constexpr std::size_t default_position_cap = 4'000'000;

/// Ranks of every canonical position of the board on two systems.
class RankTable
{
public:
    /// Throws on signature mismatch, and CapExceeded when the position
    /// space exceeds `position_cap` or a world is too large to encode.
    static auto build(const PotentialistSystem & left, const PotentialistSystem & right,
        std::size_t position_cap = default_position_cap) -> RankTable;

    auto left() const -> const PotentialistSystem & { return *_left; }
    auto right() const -> const PotentialistSystem & { return *_right; }

    auto size() const -> std::size_t { return _ranks.size(); }
    /// Stable order: by world pair, then by an internal code order.
    auto position(std::size_t index) const -> Position;
    auto index_of(const Position & p) const -> std::optional<std::size_t>;
    auto rank_at(std::size_t index) const -> RankValue;

    /// Throws when the position is not on this board.
    auto rank(const Position & p) const -> RankValue;
    /// -1 when a -> b is not a partial injection.
    auto rank(std::size_t left_world, std::span<const Elem> a, std::size_t right_world, std::span<const Elem> b) const
        -> RankValue;

    /// Sweeps until the levels stabilized, including the final one.
    auto iterations() const -> std::size_t { return _iterations; }

    struct Block
    {
        std::size_t left_world;
        std::size_t right_world;
        std::size_t offset;
        std::vector<std::uint64_t> codes;
    };

private:
    RankTable() = default;

    const PotentialistSystem * _left = nullptr;
    const PotentialistSystem * _right = nullptr;
    std::vector<Block> _blocks;
    std::vector<std::int32_t> _ranks;
    std::size_t _iterations = 0;

    friend class RankSolver;
};

auto is_bisimilar(const RankTable & table, std::size_t left_world, std::span<const Elem> a, std::size_t right_world,
    std::span<const Elem> b) -> bool;

auto alpha_bisimilar(const RankTable & table, std::size_t left_world, std::span<const Elem> a,
    std::size_t right_world, std::span<const Elem> b, std::uint32_t alpha) -> bool;

/// A set of positions claimed to be a bisimulation. With `levels`, entry i
/// places positions[i] in the relation of that level, and the set is read
/// as an alpha-bisimulation.
struct BisimulationRelation
{
    std::vector<Position> positions;
    std::vector<std::uint32_t> levels;

    auto stratified() const -> bool { return ! levels.empty(); }
};

/// Positions of rank infinity; nullopt when there are none.
auto extract_bisimulation(const RankTable & table) -> std::optional<BisimulationRelation>;

/// Every position placed at each level beta <= min(rank, alpha).
auto alpha_bisimulation(const RankTable & table, std::uint32_t alpha) -> BisimulationRelation;

struct Move
{
    enum class Kind : std::uint8_t
    {
        LeftElement,
        RightElement,
        LeftArrow,
        RightArrow
    };

    Kind kind = Kind::LeftElement;
    /// Element id, or global arrow index in the side's system.
    std::size_t value = 0;

    auto operator<=>(const Move &) const = default;
};

/// "left elem 3", "right arrow 5"
auto to_string(Move m) -> std::string;
auto parse_move(std::string_view text) -> std::optional<Move>;

enum class Clause
{
    B1,
    B2,
    B3
};

auto to_string(Clause c) -> std::string;

struct Violation
{
    Position position;
    Clause clause = Clause::B1;
    /// The challenge that could not be answered; unset for B1.
    std::optional<Move> move;
    std::string description;
};

struct VerifyResult
{
    bool holds = false;
    std::optional<Violation> violation;
};

/// Checks B1-B3 by direct enumeration. Independent of RankTable.
auto verify_bisimulation(const BisimulationRelation & rel, const PotentialistSystem & left,
    const PotentialistSystem & right) -> VerifyResult;

struct Totality
{
    bool left_total = false;
    bool right_total = false;

    auto bitotal() const -> bool { return left_total && right_total; }
};

/// Every (world, element subset) on each side is covered by some position.
auto relation_totality(const BisimulationRelation & rel, const PotentialistSystem & left,
    const PotentialistSystem & right) -> Totality;

struct IsoVerifyResult
{
    bool holds = false;
    Totality totality;
    std::optional<std::string> counterexample;
};

auto verify_iso_bisimulation(const IsoBisimWitness & w, const PotentialistSystem & left,
    const PotentialistSystem & right) -> IsoVerifyResult;

/// All restrictions of each linked isomorphism.
auto derived_bisimulation(const IsoBisimWitness & w) -> BisimulationRelation;

/// Abelard's legal moves, ordered: left elements, right elements, left
/// arrows, right arrows.
auto abelard_moves(const RankTable & table, const Position & p) -> std::vector<Move>;

/// Eloise's legal answers to a challenge, ordered by element id or arrow
/// index.
auto eloise_options(const RankTable & table, const Position & p, Move challenge) -> std::vector<Move>;

/// The canonical successor; nullopt when the extended tuples are
/// inconsistent (rank -1).
auto play_round(const RankTable & table, const Position & p, Move challenge, Move reply) -> std::optional<Position>;

auto rank_after(const RankTable & table, const Position & p, Move challenge, Move reply) -> RankValue;

/// Least reply reaching rank >= rank(p) - 1 (infinity from infinity).
/// Throws when rank(p) <= 0.
auto eloise_reply(const RankTable & table, const Position & p, Move challenge) -> Move;

/// Least reply of maximal rank; always defined.
auto best_reply(const RankTable & table, const Position & p, Move challenge) -> Move;

/// Least challenge minimizing the rank of Eloise's best reply.
auto abelard_best_move(const RankTable & table, const Position & p) -> Move;

enum class Side
{
    Abelard,
    Eloise
};

struct Transcript
{
    std::vector<Position> positions;
    /// Challenge and reply per round.
    std::vector<std::pair<Move, Move>> rounds;
    /// Abelard wins once a position's atomic types disagree.
    std::optional<Side> winner;
};

/// Terminal dialogue: the human plays `human`, the machine the other side.
/// Ends at a losing position, after `max_rounds` rounds, or on "quit"/EOF.
auto play_interactive(const RankTable & table, const Position & start, Side human, std::istream & in,
    std::ostream & out, std::size_t max_rounds) -> Transcript;

/// Re-executes recorded rounds from `start`; throws on an illegal move.
auto replay(const RankTable & table, const Position & start, const std::vector<std::pair<Move, Move>> & rounds)
    -> Transcript;

} // namespace potsys
