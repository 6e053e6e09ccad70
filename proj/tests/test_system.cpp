#include "support.hpp"

#include <potsys/error.hpp>
#include <potsys/games.hpp>
#include <potsys/system.hpp>

#include <doctest.h>

#include <functional>
#include <set>

using namespace potsys;
using namespace potsys::testing;

namespace {

auto b_prime() -> Structure { return Structure{sig_r(), {0, 1, 2}, {{{0, 1}}}}; }

auto has_error(const std::function<void()> & f, const std::string & needle) -> bool
{
    try {
        f();
    } catch (const Error & e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
}

auto chains(const PotentialistSystem & sys, std::size_t depth) -> std::vector<UnravelNode>
{
    std::vector<UnravelNode> out;
    for (std::size_t w = 0; w < sys.world_count(); ++w)
        out.push_back(unravel_root(sys, w));
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].depth() == depth)
            continue;
        for (auto & c : unravel_children(out[i], depth))
            out.push_back(c.node);
    }
    return out;
}

} // namespace

TEST_CASE("closing adds identities and composites")
{
    auto one = PotentialistSystem::validate_or_close({{"A", struct_a()}}, {}, ClosureMode::Close);
    REQUIRE(one.arrows().size() == 1);
    CHECK(one.arrow(0).map == ElementMap{{{0, 0}}});

    auto two = a_in_b();
    CHECK(two.arrows().size() == 3);
    CHECK(two.identity_arrow(0) != two.identity_arrow(1));
    CHECK(two.find_arrow(0, 1, ElementMap{{{0, 0}}}).has_value());
}

TEST_CASE("validation reports missing pieces")
{
    std::vector<World> worlds{{"A", struct_a()}, {"B", struct_b()}, {"B'", b_prime()}};
    std::vector<Arrow> arrows{{0, 0, ElementMap{{{0, 0}}}}, {1, 1, ElementMap{{{0, 0}, {1, 1}}}},
        {2, 2, ElementMap{{{0, 0}, {1, 1}, {2, 2}}}}, {0, 1, ElementMap{{{0, 0}}}},
        {1, 2, ElementMap{{{0, 0}, {1, 1}}}}};
    CHECK(has_error([&] { PotentialistSystem::validate_or_close(worlds, arrows, ClosureMode::Validate); },
        "missing composite"));
    auto closed = PotentialistSystem::validate_or_close(worlds, arrows, ClosureMode::Close);
    CHECK(closed.arrows().size() == 6);

    CHECK(has_error([&] { PotentialistSystem::validate_or_close(worlds, {}, ClosureMode::Validate); },
        "missing identity"));
    CHECK(has_error(
        [&] { PotentialistSystem::validate_or_close(worlds, {{0, 3, ElementMap{{{0, 0}}}}}, ClosureMode::Close); },
        "dangling"));
    CHECK(has_error(
        [&] {
            PotentialistSystem::validate_or_close(worlds, {{1, 1, ElementMap{{{0, 1}, {1, 0}}}}}, ClosureMode::Close);
        },
        "not an embedding"));
    CHECK(has_error([&] { PotentialistSystem::validate_or_close({}, {}, ClosureMode::Close); }, "at least one"));
    CHECK(has_error([&] { PotentialistSystem::discrete({{"A", struct_a()}, {"A", struct_b()}}); }, "duplicate"));
}

TEST_CASE("validated systems are closed under composition")
{
    std::mt19937_64 rng{21};
    for (int round = 0; round < 60; ++round) {
        auto sys = random_system(rng);
        std::set<std::tuple<std::size_t, std::size_t, ElementMap>> present;
        for (auto & a : sys.arrows())
            present.insert({a.src, a.dst, a.map});
        for (auto & f : sys.arrows())
            for (auto g : sys.arrows_from(f.dst)) {
                auto & ga = sys.arrow(g);
                CHECK(present.contains({f.src, ga.dst, f.map.then(ga.map)}));
            }
        for (std::size_t w = 0; w < sys.world_count(); ++w)
            CHECK(sys.arrow(sys.identity_arrow(w)).map == ElementMap::identity(sys.structure(w).universe()));
        CHECK(PotentialistSystem::validate_or_close(sys.worlds(), sys.arrows(), ClosureMode::Validate) == sys);
    }
}

TEST_CASE("thinness")
{
    CHECK(is_thin(a_in_b()));
    CHECK(is_thin(identity_system({{"A", struct_a()}})));
    auto fat = PotentialistSystem::validate_or_close({{"A", struct_a()}, {"B", struct_b()}},
        {{0, 1, ElementMap{{{0, 0}}}}, {0, 1, ElementMap{{{0, 1}}}}}, ClosureMode::Close);
    CHECK_FALSE(is_thin(fat));
}

TEST_CASE("disjointify")
{
    auto d = disjointify(identity_system({{"A", struct_a()}}));
    REQUIRE(d.system.world_count() == 1);
    CHECK(d.system.structure(0).size() == 1);
    REQUIRE(d.witness.links.size() == 1);
    auto tagged = d.system.structure(0).universe()[0];
    CHECK(d.tags.at(tagged) == std::pair<std::size_t, Elem>{0, 0});

    auto shared = identity_system({{"A", struct_a()}, {"L", struct_l()}});
    CHECK_FALSE(has_disjoint_universes(shared));
    CHECK(has_disjoint_universes(disjointify(shared).system));

    std::mt19937_64 rng{22};
    for (int round = 0; round < 40; ++round) {
        auto sys = random_system(rng);
        auto dj = disjointify(sys);
        CHECK(dj.system.world_count() == sys.world_count());
        CHECK(dj.system.arrows().size() == sys.arrows().size());
        CHECK(has_disjoint_universes(dj.system));
        auto v = verify_iso_bisimulation(dj.witness, sys, dj.system);
        CHECK(v.holds);
        CHECK(v.totality.bitotal());
    }
}

TEST_CASE("unravelling")
{
    auto id = identity_system({{"A", struct_a()}});
    auto root = unravel_root(id, 0);
    auto children = unravel_children(root, 2);
    CHECK(children.size() == 1);
    CHECK(local_zigzag_holds(root, children));
    CHECK_THROWS_AS(unravel_children(UnravelNode{id, 0, {0, 0}}, 2), DepthExceeded);

    auto sys = a_in_b();
    auto at_a = unravel_root(sys, 0);
    auto kids = unravel_children(at_a, 3);
    CHECK(kids.size() == sys.arrows_from(0).size());
    CHECK(local_zigzag_holds(at_a, kids));
    CHECK(kids.back().node.final_world() == sys.arrow(kids.back().arrow).dst);

    std::vector<UnravelChild> wrong{kids.front()};
    CHECK_FALSE(local_zigzag_holds(at_a, wrong));
}

TEST_CASE("flattening")
{
    auto dj = disjointify(a_in_b()).system;
    auto zero = flatten(unravel_root(dj, 0));
    CHECK(zero.flat == dj.structure(0));
    CHECK(zero.rename == ElementMap::identity(dj.structure(0).universe()));

    Structure b{sig_r(), {5, 6}, {{{5, 6}}}};
    auto sys = PotentialistSystem::validate_or_close({{"A", struct_a()}, {"B", b}}, {{0, 1, ElementMap{{{0, 5}}}}},
        ClosureMode::Close);
    auto arrow = *sys.find_arrow(0, 1, ElementMap{{{0, 5}}});
    auto one = flatten(UnravelNode{sys, 0, {arrow}});
    CHECK(std::vector<Elem>(one.flat.universe().begin(), one.flat.universe().end()) == std::vector<Elem>{0, 6});
    CHECK(one.rename == ElementMap{{{0, 5}, {6, 6}}});
    CHECK(one.flat.holds(0, Tuple{0, 6}));

    CHECK_THROWS_AS(flatten(unravel_root(identity_system({{"A", struct_a()}, {"L", struct_l()}}), 0)), Error);
}

TEST_CASE("renaming squares commute along every chain up to depth 3")
{
    std::mt19937_64 rng{23};
    for (int round = 0; round < 25; ++round) {
        auto sys = disjointify(random_system(rng)).system;
        for (auto & node : chains(sys, 3)) {
            auto fl = flatten(node);
            auto & final = sys.structure(node.final_world());
            CHECK(is_embedding(fl.flat, final, fl.rename));
            CHECK(is_embedding(final, fl.flat, fl.rename.inverse()));
            if (node.depth() < 3)
                for (auto a : sys.arrows_from(node.final_world()))
                    CHECK(renaming_square_commutes(node, a));
        }
    }
}

TEST_CASE("unravel node printing")
{
    auto sys = a_in_b();
    auto arrow = *sys.find_arrow(0, 1, ElementMap{{{0, 0}}});
    UnravelNode n{sys, 0, {arrow}};
    CHECK(n.to_string() == "A -[" + std::to_string(arrow) + "]-> B");
    CHECK_THROWS_AS(UnravelNode(sys, 1, {arrow}), Error);
}
