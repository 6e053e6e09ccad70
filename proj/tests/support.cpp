#include "support.hpp"

#include <algorithm>
#include <climits>
#include <set>

namespace potsys::testing {

auto sig_r() -> const Signature &
{
    static const Signature sig{{{"R", 2}}, {}};
    return sig;
}

auto struct_a() -> Structure { return Structure{sig_r(), {0}, std::vector<std::vector<Tuple>>(1)}; }
auto struct_b() -> Structure { return Structure{sig_r(), {0, 1}, {{{0, 1}}}}; }
auto struct_l() -> Structure { return Structure{sig_r(), {0}, {{{0, 0}}}}; }

auto identity_system(std::vector<World> worlds) -> PotentialistSystem
{
    return PotentialistSystem::discrete(std::move(worlds));
}

auto a_in_b() -> PotentialistSystem
{
    return PotentialistSystem::validate_or_close({{"A", struct_a()}, {"B", struct_b()}},
        {{0, 1, ElementMap{{{0, 0}}}}}, ClosureMode::Close);
}

namespace {

auto random_world(std::mt19937_64 & rng, const RandomSystemOptions & o) -> Structure
{
    std::uniform_int_distribution<std::size_t> size_dist(1, o.max_universe);
    std::vector<Elem> ids(o.id_range);
    for (Elem i = 0; i < o.id_range; ++i)
        ids[i] = i;
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(std::min<std::size_t>(size_dist(rng), ids.size()));
    std::bernoulli_distribution edge(o.edge_probability);
    std::vector<Tuple> edges;
    for (auto x : ids)
        for (auto y : ids)
            if (edge(rng))
                edges.push_back({x, y});
    return Structure{sig_r(), ids, {edges}};
}

auto random_arrows(std::mt19937_64 & rng, const std::vector<World> & worlds, double p) -> std::vector<Arrow>
{
    std::bernoulli_distribution take(p);
    std::vector<Arrow> arrows;
    for (std::size_t i = 0; i < worlds.size(); ++i) {
        for (std::size_t j = 0; j < worlds.size(); ++j) {
            if (! take(rng))
                continue;
            auto embs = enumerate_embeddings(worlds[i].structure, worlds[j].structure);
            if (embs.empty())
                continue;
            std::uniform_int_distribution<std::size_t> pick(0, embs.size() - 1);
            arrows.push_back({i, j, embs[pick(rng)]});
        }
    }
    return arrows;
}

} // namespace

auto random_system(std::mt19937_64 & rng, const RandomSystemOptions & options) -> PotentialistSystem
{
    std::uniform_int_distribution<std::size_t> count(1, options.max_worlds);
    std::vector<World> worlds;
    auto n = count(rng);
    for (std::size_t i = 0; i < n; ++i)
        worlds.push_back({"W" + std::to_string(i), random_world(rng, options)});
    auto arrows = random_arrows(rng, worlds, options.arrow_probability);
    return PotentialistSystem::validate_or_close(std::move(worlds), std::move(arrows), ClosureMode::Close);
}

auto rewire(std::mt19937_64 & rng, const PotentialistSystem & sys, double arrow_probability) -> PotentialistSystem
{
    auto worlds = sys.worlds();
    auto arrows = random_arrows(rng, worlds, arrow_probability);
    return PotentialistSystem::validate_or_close(std::move(worlds), std::move(arrows), ClosureMode::Close);
}

auto random_corpus(std::uint64_t seed, std::size_t count, const RandomSystemOptions & options)
    -> std::vector<SystemPair>
{
    std::mt19937_64 rng{seed};
    std::vector<SystemPair> out;
    for (std::size_t i = 0; i < count; ++i) {
        auto left = random_system(rng, options);
        switch (i % 3) {
        case 0:
            out.push_back({left, random_system(rng, options)});
            break;
        case 1:
            out.push_back({left, rewire(rng, left, options.arrow_probability)});
            break;
        default:
            out.push_back({left, disjointify(left).system});
            break;
        }
    }
    return out;
}

auto brute_embeddings(const Structure & s, const Structure & t) -> std::vector<ElementMap>
{
    auto su = s.universe();
    auto tu = t.universe();
    std::vector<ElementMap> out;
    std::vector<std::size_t> digits(su.size(), 0);
    auto & sig = s.signature();
    while (true) {
        std::vector<ElementMap::Pair> pairs;
        for (std::size_t i = 0; i < su.size(); ++i)
            pairs.emplace_back(su[i], tu[digits[i]]);
        auto image = [&](Elem x) {
            for (auto & [k, v] : pairs)
                if (k == x)
                    return v;
            return Elem{UINT32_MAX};
        };
        bool ok = std::set<std::size_t>(digits.begin(), digits.end()).size() == digits.size();
        for (std::size_t c = 0; ok && c < sig.constants().size(); ++c)
            ok = image(s.constants()[c]) == t.constants()[c];
        for (std::size_t r = 0; ok && r < sig.relations().size(); ++r) {
            auto arity = sig.relations()[r].arity;
            std::vector<std::size_t> idx(arity, 0);
            while (ok) {
                Tuple args, mapped;
                for (auto i : idx) {
                    args.push_back(su[i]);
                    mapped.push_back(image(su[i]));
                }
                ok = s.holds(r, args) == t.holds(r, mapped);
                std::size_t k = 0;
                while (k < arity && ++idx[k] == su.size())
                    idx[k++] = 0;
                if (k == arity)
                    break;
            }
        }
        if (ok)
            out.push_back(ElementMap{pairs});
        std::size_t k = 0;
        while (k < digits.size() && ++digits[k] == tu.size())
            digits[k++] = 0;
        if (k == digits.size())
            break;
    }
    std::ranges::sort(out, [&](const ElementMap & x, const ElementMap & y) {
        std::vector<Elem> ix, iy;
        for (auto e : su) {
            ix.push_back(*x.find(e));
            iy.push_back(*y.find(e));
        }
        return ix < iy;
    });
    return out;
}

auto brute_isomorphic(const Structure & s, const Structure & t) -> bool
{
    return s.size() == t.size() && ! brute_embeddings(s, t).empty();
}

auto brute_same_type(const Structure & s, std::span<const Elem> a, const Structure & t, std::span<const Elem> b)
    -> bool
{
    if (a.size() != b.size())
        return false;
    std::vector<Elem> ta(a.begin(), a.end()), tb(b.begin(), b.end());
    for (auto c : s.constants())
        ta.push_back(c);
    for (auto c : t.constants())
        tb.push_back(c);
    auto n = ta.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if ((ta[i] == ta[j]) != (tb[i] == tb[j]))
                return false;
    auto & sig = s.signature();
    for (std::size_t r = 0; r < sig.relations().size(); ++r) {
        auto arity = sig.relations()[r].arity;
        if (n == 0)
            continue;
        std::vector<std::size_t> idx(arity, 0);
        while (true) {
            Tuple x, y;
            for (auto i : idx) {
                x.push_back(ta[i]);
                y.push_back(tb[i]);
            }
            if (s.holds(r, x) != t.holds(r, y))
                return false;
            std::size_t k = 0;
            while (k < arity && ++idx[k] == n)
                idx[k++] = 0;
            if (k == arity)
                break;
        }
    }
    return true;
}

namespace {

auto all_tuples(std::span<const Elem> universe, std::size_t max_length) -> std::vector<Tuple>
{
    std::vector<Tuple> out{{}};
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].size() == max_length)
            continue;
        for (auto e : universe) {
            auto t = out[i];
            t.push_back(e);
            out.push_back(std::move(t));
        }
    }
    return out;
}

auto image_of(const ElementMap & m, const Tuple & t) -> Tuple
{
    Tuple out;
    for (auto e : t)
        out.push_back(*m.find(e));
    return out;
}

} // namespace

TupleRankOracle::TupleRankOracle(const PotentialistSystem & left, const PotentialistSystem & right,
    std::size_t max_length) :
    _left(&left),
    _right(&right),
    _max_length(max_length)
{
    for (auto * sys : {&left, &right})
        for (auto & w : sys->worlds())
            _largest_world = std::max(_largest_world, w.structure.size());

    std::vector<Key> keys;
    for (std::size_t w = 0; w < left.world_count(); ++w) {
        auto as = all_tuples(left.structure(w).universe(), max_length);
        for (std::size_t v = 0; v < right.world_count(); ++v) {
            auto bs = all_tuples(right.structure(v).universe(), max_length);
            for (auto & a : as)
                for (auto & b : bs)
                    if (a.size() == b.size()) {
                        _index.emplace(Key{w, v, a, b}, keys.size());
                        keys.push_back({w, v, a, b});
                    }
        }
    }

    constexpr std::int32_t alive = INT32_MAX;
    _ranks.assign(keys.size(), alive);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        auto & [w, v, a, b] = keys[i];
        if (! brute_same_type(left.structure(w), a, right.structure(v), b))
            _ranks[i] = -1;
    }

    auto in_level = [&](const Key & k) { return _ranks.at(_index.at(k)) == alive; };
    for (std::int32_t level = 0;; ++level) {
        std::vector<std::size_t> dropped;
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (_ranks[i] != alive)
                continue;
            auto & [w, v, a, b] = keys[i];
            auto & lw = left.structure(w);
            auto & rv = right.structure(v);
            bool ok = true;
            if (a.size() < max_length) {
                for (auto x : lw.universe()) {
                    bool answered = false;
                    for (auto y : rv.universe()) {
                        auto a2 = a, b2 = b;
                        a2.push_back(x);
                        b2.push_back(y);
                        answered = answered || in_level({w, v, a2, b2});
                    }
                    ok = ok && answered;
                }
                for (auto y : rv.universe()) {
                    bool answered = false;
                    for (auto x : lw.universe()) {
                        auto a2 = a, b2 = b;
                        a2.push_back(x);
                        b2.push_back(y);
                        answered = answered || in_level({w, v, a2, b2});
                    }
                    ok = ok && answered;
                }
            }
            for (auto f : left.arrows_from(w)) {
                if (! ok)
                    break;
                auto & fa = left.arrow(f);
                bool answered = false;
                for (auto g : right.arrows_from(v)) {
                    auto & ga = right.arrow(g);
                    answered = answered || in_level({fa.dst, ga.dst, image_of(fa.map, a), image_of(ga.map, b)});
                }
                ok = answered;
            }
            for (auto g : right.arrows_from(v)) {
                if (! ok)
                    break;
                auto & ga = right.arrow(g);
                bool answered = false;
                for (auto f : left.arrows_from(w)) {
                    auto & fa = left.arrow(f);
                    answered = answered || in_level({fa.dst, ga.dst, image_of(fa.map, a), image_of(ga.map, b)});
                }
                ok = answered;
            }
            if (! ok)
                dropped.push_back(i);
        }
        if (dropped.empty())
            break;
        for (auto i : dropped)
            _ranks[i] = level;
    }
}

auto TupleRankOracle::rank(std::size_t left_world, const Tuple & a, std::size_t right_world, const Tuple & b) const
    -> std::int32_t
{
    return _ranks.at(_index.at(Key{left_world, right_world, a, b}));
}

auto TupleRankOracle::exact(const Tuple & a) const -> bool
{
    auto distinct = std::set<Elem>(a.begin(), a.end()).size();
    return a.size() + (_largest_world - distinct) <= _max_length;
}

} // namespace potsys::testing
