#include "support.hpp"

#include <potsys/checker.hpp>
#include <potsys/error.hpp>
#include <potsys/games.hpp>
#include <potsys/models.hpp>

#include <doctest.h>

#include <sstream>

using namespace potsys;
using namespace potsys::testing;

namespace {

auto tuple_of_domain(const Position & p) -> std::pair<Tuple, Tuple>
{
    return {p.match.domain(), p.match.apply(p.match.domain())};
}

auto code(RankValue r) -> std::int32_t
{
    if (r.is_minus_one())
        return -1;
    if (r.is_infinite())
        return INT32_MAX;
    return static_cast<std::int32_t>(r.value());
}

auto tuples_upto(std::span<const Elem> universe, std::size_t n) -> std::vector<Tuple>
{
    std::vector<Tuple> out{{}};
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].size() == n)
            continue;
        for (auto e : universe) {
            auto t = out[i];
            t.push_back(e);
            out.push_back(t);
        }
    }
    return out;
}

} // namespace

TEST_CASE("rank values")
{
    CHECK(RankValue::minus_one() < RankValue::finite(0));
    CHECK(RankValue::finite(7) < RankValue::infinity());
    CHECK(RankValue::infinity().at_least(1000));
    CHECK_FALSE(RankValue::minus_one().at_least(0));
    CHECK(RankValue::finite(3).to_string() == "3");
    CHECK(RankValue::infinity().to_string() == "inf");
    CHECK(RankValue::minus_one().to_string() == "-1");
}

TEST_CASE("canonical positions")
{
    auto p = canonical_position(0, Tuple{1, 0, 1}, 2, Tuple{5, 4, 5});
    REQUIRE(p.has_value());
    CHECK(p->match == ElementMap{{{0, 4}, {1, 5}}});
    CHECK_FALSE(canonical_position(0, Tuple{1, 1}, 0, Tuple{2, 3}).has_value());
    CHECK_FALSE(canonical_position(0, Tuple{1, 2}, 0, Tuple{3, 3}).has_value());
    CHECK_THROWS_AS(canonical_position(0, Tuple{1}, 0, Tuple{}), Error);
}

TEST_CASE("small rank examples")
{
    auto a = identity_system({{"A", struct_a()}});
    auto l = identity_system({{"L", struct_l()}});
    auto t = RankTable::build(a, l);
    CHECK(t.size() == 2);
    CHECK(t.rank(0, Tuple{}, 0, Tuple{}) == RankValue::finite(0));
    CHECK(t.rank(0, Tuple{0}, 0, Tuple{0}) == RankValue::minus_one());
    CHECK_FALSE(is_bisimilar(t, 0, {}, 0, {}));
    CHECK(alpha_bisimilar(t, 0, {}, 0, {}, 0));
    CHECK_FALSE(alpha_bisimilar(t, 0, {}, 0, {}, 1));
    CHECK_FALSE(extract_bisimulation(t).has_value());

    auto ab = a_in_b();
    auto self = RankTable::build(ab, ab);
    for (std::size_t w = 0; w < ab.world_count(); ++w)
        CHECK(self.rank(w, Tuple{}, w, Tuple{}).is_infinite());

    auto cross = RankTable::build(ab, a);
    CHECK_FALSE(is_bisimilar(cross, 0, {}, 0, {}));
    auto distinguishing = parse_formula("(dia (exists x (exists y (rel R x y))))");
    CHECK(satisfies(ab, 0, {}, distinguishing));
    CHECK_FALSE(satisfies(a, 0, {}, distinguishing));

    CHECK_THROWS_AS(t.rank(Position{0, 0, ElementMap{{{3, 3}}}}), Error);
    CHECK(t.rank(0, Tuple{0, 0}, 0, Tuple{0, 0}) == RankValue::minus_one());
    Structure big{Signature{{{"S", 1}}, {}}, {0}, {{}}};
    CHECK_THROWS_AS(RankTable::build(a, identity_system({{"S", big}})), Error);
}

TEST_CASE("position cap")
{
    auto ab = a_in_b();
    CHECK_THROWS_AS(RankTable::build(ab, ab, 3), CapExceeded);
}

TEST_CASE("systems are bisimilar to themselves and to tagged copies")
{
    std::mt19937_64 rng{41};
    for (int round = 0; round < 30; ++round) {
        auto sys = random_system(rng);
        auto dj = disjointify(sys);
        auto self = RankTable::build(sys, sys);
        auto copy = RankTable::build(sys, dj.system);
        CHECK(self.iterations() <= self.size());
        for (std::size_t w = 0; w < sys.world_count(); ++w) {
            CHECK(is_bisimilar(self, w, {}, w, {}));
            auto u = sys.structure(w).universe();
            Tuple all(u.begin(), u.end());
            CHECK(is_bisimilar(self, w, all, w, all));
            CHECK(is_bisimilar(copy, w, {}, w, {}));
        }
        for (auto & p : derived_bisimulation(dj.witness).positions)
            CHECK(copy.rank(p).is_infinite());
    }
}

TEST_CASE("the rank fixpoint agrees with the tuple-level game")
{
    std::mt19937_64 rng{42};
    RandomSystemOptions tiny;
    tiny.max_worlds = 2;
    tiny.max_universe = 2;
    tiny.id_range = 3;
    for (int round = 0; round < 8; ++round) {
        auto left = random_system(rng, tiny);
        auto right = round % 2 ? rewire(rng, left) : random_system(rng, tiny);
        auto table = RankTable::build(left, right);
        TupleRankOracle oracle{left, right, 4};
        for (std::size_t w = 0; w < left.world_count(); ++w)
            for (std::size_t v = 0; v < right.world_count(); ++v)
                for (auto & a : tuples_upto(left.structure(w).universe(), 3))
                    for (auto & b : tuples_upto(right.structure(v).universe(), 3))
                        if (a.size() == b.size() && oracle.exact(a))
                            CHECK(code(table.rank(w, a, v, b)) == oracle.rank(w, a, v, b));
    }
}

TEST_CASE("extracted bisimulations verify")
{
    auto id = identity_system({{"B", struct_b()}});
    auto t = RankTable::build(id, id);
    auto rel = extract_bisimulation(t);
    REQUIRE(rel.has_value());
    // Partial automorphisms of B: {}, {0->0}, {1->1}, {0->0, 1->1}.
    CHECK(rel->positions.size() == 4);
    CHECK(verify_bisimulation(*rel, id, id).holds);

    std::mt19937_64 rng{43};
    for (int round = 0; round < 40; ++round) {
        auto left = random_system(rng);
        auto right = round % 2 ? rewire(rng, left) : random_system(rng);
        auto table = RankTable::build(left, right);
        if (auto r = extract_bisimulation(table)) {
            auto v = verify_bisimulation(*r, left, right);
            CHECK(v.holds);
        }
        for (std::uint32_t alpha = 0; alpha <= 3; ++alpha) {
            auto strat = alpha_bisimulation(table, alpha);
            if (! strat.positions.empty())
                CHECK(verify_bisimulation(strat, left, right).holds);
        }
    }
}

TEST_CASE("verify_bisimulation reports violations")
{
    auto a = identity_system({{"A", struct_a()}});
    auto l = identity_system({{"L", struct_l()}});
    BisimulationRelation bad{{Position{0, 0, ElementMap{{{0, 0}}}}}, {}};
    auto v = verify_bisimulation(bad, a, l);
    CHECK_FALSE(v.holds);
    REQUIRE(v.violation.has_value());
    CHECK(v.violation->clause == Clause::B1);

    auto ab = a_in_b();
    BisimulationRelation only_root{{Position{0, 0, ElementMap{}}}, {}};
    auto w = verify_bisimulation(only_root, ab, ab);
    CHECK_FALSE(w.holds);
    REQUIRE(w.violation.has_value());
    CHECK(w.violation->clause != Clause::B1);

    // The self-bisimulation cut down to world A loses the successors of A -> B.
    auto t = RankTable::build(ab, ab);
    auto rel = *extract_bisimulation(t);
    std::erase_if(rel.positions, [](const Position & p) { return p.left_world != 0 || p.right_world != 0; });
    auto x = verify_bisimulation(rel, ab, ab);
    CHECK_FALSE(x.holds);
    REQUIRE(x.violation.has_value());
    CHECK(x.violation->clause == Clause::B3);
    REQUIRE(x.violation->move.has_value());
    CHECK((x.violation->move->kind == Move::Kind::LeftArrow || x.violation->move->kind == Move::Kind::RightArrow));

    CHECK_THROWS_AS(verify_bisimulation(BisimulationRelation{}, ab, ab), Error);
}

TEST_CASE("verified relations lie in the infinity region")
{
    std::mt19937_64 rng{44};
    for (int round = 0; round < 40; ++round) {
        auto left = random_system(rng);
        auto right = round % 2 ? disjointify(left).system : rewire(rng, left);
        auto table = RankTable::build(left, right);
        // Random subsets pruned until they verify.
        std::vector<Position> rel;
        for (std::size_t i = 0; i < table.size(); ++i)
            if (rng() % 4 != 0)
                rel.push_back(table.position(i));
        while (! rel.empty()) {
            auto v = verify_bisimulation({rel, {}}, left, right);
            if (v.holds)
                break;
            std::erase(rel, v.violation->position);
        }
        for (auto & p : rel)
            CHECK(table.rank(p).is_infinite());
    }
}

TEST_CASE("iso-bisimulation witnesses")
{
    auto ab = a_in_b();
    auto dj = disjointify(ab);
    auto good = verify_iso_bisimulation(dj.witness, ab, dj.system);
    CHECK(good.holds);
    CHECK(good.totality.bitotal());

    auto wrong = dj.witness;
    for (auto & link : wrong.links)
        if (link.xi.size() == 2) {
            auto p = link.xi.pairs();
            link.xi = ElementMap{{{p[0].first, p[1].second}, {p[1].first, p[0].second}}};
        }
    auto bad = verify_iso_bisimulation(wrong, ab, dj.system);
    CHECK_FALSE(bad.holds);
    CHECK(bad.counterexample.has_value());

    IsoBisimWitness id{{IsoLink{0, 0, ElementMap{{{0, 0}, {1, 1}}}}}};
    auto one = identity_system({{"B", struct_b()}});
    auto diag = derived_bisimulation(id);
    CHECK(diag.positions.size() == 4);
    for (auto & p : diag.positions)
        for (auto & [x, y] : p.match.pairs())
            CHECK(x == y);
    CHECK(verify_iso_bisimulation(id, one, one).holds);

    for (auto & p : derived_bisimulation(dj.witness).positions)
        for (auto & [x, y] : p.match.pairs())
            CHECK(dj.tags.at(y) == std::pair<std::size_t, Elem>{p.left_world, x});
}

TEST_CASE("moves")
{
    CHECK(to_string(Move{Move::Kind::LeftElement, 3}) == "left elem 3");
    CHECK(to_string(Move{Move::Kind::RightArrow, 5}) == "right arrow 5");
    CHECK(parse_move("left elem 3") == Move{Move::Kind::LeftElement, 3});
    CHECK(parse_move("r a 5") == Move{Move::Kind::RightArrow, 5});
    CHECK_FALSE(parse_move("up elem 3").has_value());
    CHECK_FALSE(parse_move("left elem").has_value());
}

TEST_CASE("strategies")
{
    auto b = identity_system({{"B", struct_b()}});
    auto t = RankTable::build(b, b);
    Position copy{0, 0, ElementMap{{{0, 0}}}};
    CHECK(eloise_reply(t, copy, Move{Move::Kind::LeftElement, 1}) == Move{Move::Kind::RightElement, 1});

    std::mt19937_64 rng{45};
    for (int round = 0; round < 30; ++round) {
        auto left = random_system(rng);
        auto right = round % 2 ? rewire(rng, left) : random_system(rng);
        auto table = RankTable::build(left, right);
        for (std::size_t i = 0; i < table.size(); ++i) {
            auto p = table.position(i);
            auto r = table.rank_at(i);
            if (r.is_minus_one())
                continue;
            if (r.is_infinite() || r.value() >= 1) {
                for (auto m : abelard_moves(table, p)) {
                    auto reply = eloise_reply(table, p, m);
                    auto after = rank_after(table, p, m, reply);
                    if (r.is_infinite())
                        CHECK(after.is_infinite());
                    else
                        CHECK(after.at_least(r.value() - 1));
                }
            } else {
                CHECK_THROWS_AS(eloise_reply(table, p, abelard_moves(table, p).front()), Error);
            }
            if (r.is_finite()) {
                auto m = abelard_best_move(table, p);
                auto reply = best_reply(table, p, m);
                auto after = rank_after(table, p, m, reply);
                CHECK(after < r);
                if (r.value() >= 1)
                    CHECK(after.at_least(r.value() - 1));
                else
                    CHECK(after.is_minus_one());
            }
        }
    }
}

TEST_CASE("interactive play")
{
    auto a = identity_system({{"A", struct_a()}});
    auto l = identity_system({{"L", struct_l()}});
    auto t = RankTable::build(a, l);
    Position start{0, 0, ElementMap{}};

    std::istringstream in("help\nleft elem 0\n");
    std::ostringstream out;
    auto tr = play_interactive(t, start, Side::Abelard, in, out, 10);
    REQUIRE(tr.winner.has_value());
    CHECK(*tr.winner == Side::Abelard);
    CHECK(out.str().find("legal moves") != std::string::npos);
    CHECK(out.str().find("winner: abelard") != std::string::npos);

    auto b = identity_system({{"B", struct_b()}});
    auto self = RankTable::build(b, b);
    std::istringstream in2("right elem 0\nright elem 1\nright elem 0\n");
    std::ostringstream out2;
    auto tr2 = play_interactive(self, start, Side::Eloise, in2, out2, 3);
    REQUIRE(tr2.winner.has_value());
    CHECK(tr2.rounds.size() <= 3);

    std::istringstream quit("bogus\nquit\n");
    std::ostringstream out3;
    auto tr3 = play_interactive(self, start, Side::Abelard, quit, out3, 5);
    CHECK_FALSE(tr3.winner.has_value());
    CHECK(out3.str().find("game abandoned") != std::string::npos);

    auto again = replay(self, start, tr2.rounds);
    CHECK(again.positions == tr2.positions);
    CHECK_THROWS_AS(replay(self, start, {{Move{Move::Kind::LeftElement, 9}, Move{Move::Kind::RightElement, 0}}}),
        Error);
}

TEST_CASE("agreement on formulas up to the rank")
{
    std::mt19937_64 rng{46};
    for (int round = 0; round < 20; ++round) {
        auto left = random_system(rng);
        auto right = rewire(rng, left);
        auto table = RankTable::build(left, right);
        ModelChecker lc{left}, rc{right};
        for (std::size_t i = 0; i < table.size(); i += 3) {
            auto p = table.position(i);
            auto r = table.rank_at(i);
            if (r.is_minus_one())
                continue;
            auto [a, b] = tuple_of_domain(p);
            for (std::uint64_t seed = 0; seed < 20; ++seed) {
                RandomFormulaOptions o;
                o.seed = seed * 101 + i;
                o.rank_bound = r.is_infinite() ? 3 : std::min(3u, r.value());
                o.free_variables = a.size();
                auto f = random_formula(sig_r(), o);
                CHECK(lc.satisfies(p.left_world, tuple_assignment(a), f)
                    == rc.satisfies(p.right_world, tuple_assignment(b), f));
            }
        }
    }
}
