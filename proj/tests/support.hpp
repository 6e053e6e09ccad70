#pragma once

// Fixtures, random generators and brute-force oracles shared by the unit
// tests and the acceptance suite. The oracles only read structure data and
// never call the library's embedding, game or model-enumeration code.

#include <potsys/system.hpp>

#include <cstdint>
#include <map>
#include <random>
#include <tuple>
#include <vector>

namespace potsys::testing {

auto sig_r() -> const Signature &;

/// ({0}, R = {})
auto struct_a() -> Structure;
/// ({0, 1}, R = {(0, 1)})
auto struct_b() -> Structure;
/// ({0}, R = {(0, 0)})
auto struct_l() -> Structure;

auto identity_system(std::vector<World> worlds) -> PotentialistSystem;

/// {A, B} with the inclusion A -> B, closed.
auto a_in_b() -> PotentialistSystem;

struct RandomSystemOptions
{
    std::size_t max_worlds = 3;
    std::size_t max_universe = 3;
    /// Element ids are drawn from {0..id_range-1}.
    Elem id_range = 4;
    double edge_probability = 0.35;
    double arrow_probability = 0.5;
};

/// One binary relation R; random worlds and random embeddings, closed.
auto random_system(std::mt19937_64 & rng, const RandomSystemOptions & options = {}) -> PotentialistSystem;

/// Same worlds, arrows resampled.
auto rewire(std::mt19937_64 & rng, const PotentialistSystem & sys, double arrow_probability = 0.5)
    -> PotentialistSystem;

struct SystemPair
{
    PotentialistSystem left;
    PotentialistSystem right;
};

/// Mix of independent pairs, rewired pairs and tagged copies.
auto random_corpus(std::uint64_t seed, std::size_t count, const RandomSystemOptions & options = {})
    -> std::vector<SystemPair>;

// --- oracles ---

/// Every total injective map s -> t preserving and reflecting R and
/// constants, by exhaustive search over all functions.
auto brute_embeddings(const Structure & s, const Structure & t) -> std::vector<ElementMap>;

auto brute_isomorphic(const Structure & s, const Structure & t) -> bool;

/// Same atomic type, checked term by term.
auto brute_same_type(const Structure & s, std::span<const Elem> a, const Structure & t, std::span<const Elem> b)
    -> bool;

/// Number of relation tables on carriers {nonempty subsets of 0..n-1}
/// satisfying `accept`; signature R:2 only.
template <typename Accept>
auto brute_count_binary_models(std::size_t n, Accept accept) -> std::size_t
{
    std::size_t count = 0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<Elem> carrier;
        for (Elem e = 0; e < n; ++e)
            if (mask & (1u << e))
                carrier.push_back(e);
        auto k = carrier.size();
        for (std::uint64_t rel = 0; rel < (std::uint64_t{1} << (k * k)); ++rel) {
            std::vector<Tuple> edges;
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j)
                    if (rel & (std::uint64_t{1} << (i * k + j)))
                        edges.push_back({carrier[i], carrier[j]});
            if (accept(carrier, edges))
                ++count;
        }
    }
    return count;
}

/// The game on explicit tuples up to `max_length`, without canonical
/// reduction. At full length Abelard may not pick elements. Ranks use the
/// library's encoding: -1, finite, and infinity as INT32_MAX.
class TupleRankOracle
{
public:
    TupleRankOracle(const PotentialistSystem & left, const PotentialistSystem & right, std::size_t max_length);

    auto rank(std::size_t left_world, const Tuple & a, std::size_t right_world, const Tuple & b) const
        -> std::int32_t;

    /// True when truncation cannot affect the rank of this position.
    auto exact(const Tuple & a) const -> bool;

    auto states() const -> std::size_t { return _ranks.size(); }

private:
    using Key = std::tuple<std::size_t, std::size_t, Tuple, Tuple>;

    const PotentialistSystem * _left;
    const PotentialistSystem * _right;
    std::size_t _max_length;
    std::size_t _largest_world = 0;
    std::map<Key, std::size_t> _index;
    std::vector<std::int32_t> _ranks;
};

} // namespace potsys::testing
