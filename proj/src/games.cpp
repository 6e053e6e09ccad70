#include <potsys/error.hpp>
#include <potsys/games.hpp>

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace potsys {

auto RankValue::value() const -> std::uint32_t
{
    if (! is_finite())
        throw std::logic_error("RankValue::value on a non-finite rank");
    return static_cast<std::uint32_t>(_code);
}

auto RankValue::to_string() const -> std::string
{
    if (is_infinite())
        return "inf";
    return std::to_string(_code);
}

auto canonical_position(std::size_t left_world, std::span<const Elem> a, std::size_t right_world,
    std::span<const Elem> b) -> std::optional<Position>
{
    if (a.size() != b.size())
        throw Error("parameter tuples differ in length (" + std::to_string(a.size()) + " vs "
            + std::to_string(b.size()) + ")");
    std::vector<ElementMap::Pair> pairs;
    for (std::size_t i = 0; i < a.size(); ++i)
        pairs.emplace_back(a[i], b[i]);
    std::ranges::sort(pairs);
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    for (std::size_t i = 1; i < pairs.size(); ++i)
        if (pairs[i].first == pairs[i - 1].first)
            return std::nullopt;
    ElementMap match{std::move(pairs)};
    if (! match.is_injective())
        return std::nullopt;
    return Position{left_world, right_world, std::move(match)};
}

auto to_string(const PotentialistSystem & left, const PotentialistSystem & right, const Position & p) -> std::string
{
    return left.world(p.left_world).name + " | " + right.world(p.right_world).name + " | {" + p.match.to_string()
        + "}";
}

namespace {

constexpr std::int32_t alive_code = INT32_MAX;
constexpr std::size_t max_left_elements = 16;
constexpr std::size_t max_right_elements = 15;
constexpr std::uint8_t unmatched = 0xFF;

auto partial_injection_count(std::size_t n, std::size_t m) -> double
{
    double total = 0;
    double term = 1;
    for (std::size_t k = 0; k <= std::min(n, m); ++k) {
        total += term;
        term *= static_cast<double>((n - k) * (m - k)) / static_cast<double>(k + 1);
    }
    return total;
}

auto collect_codes(std::size_t nl, std::size_t nr) -> std::vector<std::uint64_t>
{
    std::vector<std::uint64_t> out;
    std::vector<bool> used(nr, false);
    auto rec = [&](auto & self, std::size_t i, std::uint64_t code) -> void {
        if (i == nl) {
            out.push_back(code);
            return;
        }
        self(self, i + 1, code);
        for (std::size_t j = 0; j < nr; ++j) {
            if (used[j])
                continue;
            used[j] = true;
            self(self, i + 1, code | (std::uint64_t{j + 1} << (4 * i)));
            used[j] = false;
        }
    };
    rec(rec, 0, 0);
    std::ranges::sort(out);
    return out;
}

/// Extends the pairs with the constants and checks that the result is a
/// partial isomorphism.
auto match_is_partial_isomorphism(const Structure & s, const Structure & t, std::vector<ElementMap::Pair> pairs)
    -> bool
{
    for (std::size_t c = 0; c < s.constants().size(); ++c)
        pairs.emplace_back(s.constants()[c], t.constants()[c]);
    std::ranges::sort(pairs);
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    for (std::size_t i = 1; i < pairs.size(); ++i)
        if (pairs[i].first == pairs[i - 1].first)
            return false;
    std::vector<Elem> images;
    for (auto & [x, y] : pairs)
        images.push_back(y);
    std::ranges::sort(images);
    if (std::adjacent_find(images.begin(), images.end()) != images.end())
        return false;

    auto d = pairs.size();
    auto & rels = s.signature().relations();
    for (std::size_t r = 0; r < rels.size(); ++r) {
        auto k = rels[r].arity;
        if (d == 0)
            break;
        std::vector<std::size_t> digits(k, 0);
        Tuple xs(k), ys(k);
        while (true) {
            for (std::size_t i = 0; i < k; ++i) {
                xs[i] = pairs[digits[i]].first;
                ys[i] = pairs[digits[i]].second;
            }
            if (s.holds(r, xs) != t.holds(r, ys))
                return false;
            std::size_t i = k;
            while (i > 0 && ++digits[i - 1] == d)
                digits[--i] = 0;
            if (i == 0)
                break;
        }
    }
    return true;
}

struct SideInfo
{
    std::vector<std::vector<Elem>> universes;
    std::vector<std::vector<std::uint8_t>> arrow_local;

    explicit SideInfo(const PotentialistSystem & sys)
    {
        for (auto & w : sys.worlds())
            universes.emplace_back(w.structure.universe().begin(), w.structure.universe().end());
        for (auto & a : sys.arrows()) {
            std::vector<std::uint8_t> local;
            auto & dst = sys.structure(a.dst);
            for (auto e : sys.structure(a.src).universe())
                local.push_back(static_cast<std::uint8_t>(*dst.local_index(a.map.at(e))));
            arrow_local.push_back(std::move(local));
        }
    }
};

} // namespace

class RankSolver
{
public:
    explicit RankSolver(RankTable & table) :
        _table(table),
        _left(*table._left),
        _right(*table._right),
        _li(*table._left),
        _ri(*table._right)
    {
    }

    auto build_blocks(std::size_t cap) -> void
    {
        for (auto & u : _li.universes)
            if (u.size() > max_left_elements)
                throw CapExceeded("left world with " + std::to_string(u.size()) + " elements exceeds the game limit of "
                    + std::to_string(max_left_elements));
        for (auto & u : _ri.universes)
            if (u.size() > max_right_elements)
                throw CapExceeded("right world with " + std::to_string(u.size())
                    + " elements exceeds the game limit of " + std::to_string(max_right_elements));

        double estimate = 0;
        for (auto & u : _li.universes)
            for (auto & v : _ri.universes)
                estimate += partial_injection_count(u.size(), v.size());
        if (estimate > static_cast<double>(cap))
            throw CapExceeded("board has about " + std::to_string(static_cast<std::uint64_t>(estimate))
                + " positions, above the cap of " + std::to_string(cap));

        std::map<std::pair<std::size_t, std::size_t>, std::vector<std::uint64_t>> cache;
        std::size_t offset = 0;
        for (std::size_t l = 0; l < _left.world_count(); ++l) {
            for (std::size_t r = 0; r < _right.world_count(); ++r) {
                auto shape = std::pair{_li.universes[l].size(), _ri.universes[r].size()};
                auto it = cache.find(shape);
                if (it == cache.end())
                    it = cache.emplace(shape, collect_codes(shape.first, shape.second)).first;
                _table._blocks.push_back({l, r, offset, it->second});
                offset += it->second.size();
            }
        }
        _table._ranks.assign(offset, -1);
    }

    auto solve() -> void
    {
        auto & ranks = _table._ranks;
        for (auto & block : _table._blocks) {
            auto & s = _left.structure(block.left_world);
            auto & t = _right.structure(block.right_world);
            for (std::size_t k = 0; k < block.codes.size(); ++k)
                if (match_is_partial_isomorphism(s, t, pairs_of(block, block.codes[k])))
                    ranks[block.offset + k] = alive_code;
        }

        std::vector<std::size_t> alive;
        for (std::size_t i = 0; i < ranks.size(); ++i)
            if (ranks[i] == alive_code)
                alive.push_back(i);

        std::int32_t level = 0;
        std::vector<char> fails;
        while (! alive.empty()) {
            ++_table._iterations;
            if (_table._iterations > ranks.size())
                throw std::logic_error("rank fixpoint exceeded its iteration bound");
            sweep(alive, fails);
            std::vector<std::size_t> still;
            std::size_t dropped = 0;
            for (std::size_t k = 0; k < alive.size(); ++k) {
                if (fails[k]) {
                    ranks[alive[k]] = level;
                    ++dropped;
                } else {
                    still.push_back(alive[k]);
                }
            }
            if (dropped == 0)
                break;
            alive = std::move(still);
            ++level;
        }
    }

private:
    auto pairs_of(const RankTable::Block & block, std::uint64_t code) const -> std::vector<ElementMap::Pair>
    {
        std::vector<ElementMap::Pair> pairs;
        auto & u = _li.universes[block.left_world];
        auto & v = _ri.universes[block.right_world];
        for (std::size_t i = 0; i < u.size(); ++i)
            if (auto nib = (code >> (4 * i)) & 15)
                pairs.emplace_back(u[i], v[nib - 1]);
        return pairs;
    }

    auto block_at(std::size_t l, std::size_t r) const -> const RankTable::Block &
    {
        return _table._blocks[l * _right.world_count() + r];
    }

    auto lookup(std::size_t l, std::size_t r, std::uint64_t code) const -> std::size_t
    {
        auto & block = block_at(l, r);
        auto it = std::ranges::lower_bound(block.codes, code);
        return block.offset + static_cast<std::size_t>(it - block.codes.begin());
    }

    auto is_alive(std::size_t index) const -> bool { return _table._ranks[index] == alive_code; }

    struct Effect
    {
        std::size_t dst;
        std::uint64_t packed;

        auto operator<=>(const Effect &) const = default;
    };

    auto effects(const SideInfo & info, const PotentialistSystem & sys, std::size_t world,
        const std::vector<std::uint8_t> & locals) const -> std::vector<Effect>
    {
        std::vector<Effect> out;
        for (auto a : sys.arrows_from(world)) {
            std::uint64_t packed = 0;
            for (std::size_t k = 0; k < locals.size(); ++k)
                packed |= std::uint64_t{info.arrow_local[a][locals[k]]} << (4 * k);
            out.push_back({sys.arrow(a).dst, packed});
        }
        std::ranges::sort(out);
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    // Whether every Abelard move from the position has a reply staying
    // alive.
    auto survives(std::size_t block_index, std::uint64_t code) const -> bool
    {
        auto & block = _table._blocks[block_index];
        auto l = block.left_world, r = block.right_world;
        auto nl = _li.universes[l].size(), nr = _ri.universes[r].size();

        std::uint8_t lm[max_left_elements];
        std::uint8_t rm[max_right_elements];
        std::fill(lm, lm + nl, unmatched);
        std::fill(rm, rm + nr, unmatched);
        std::vector<std::uint8_t> dom, img;
        for (std::size_t i = 0; i < nl; ++i) {
            if (auto nib = (code >> (4 * i)) & 15) {
                lm[i] = static_cast<std::uint8_t>(nib - 1);
                rm[nib - 1] = static_cast<std::uint8_t>(i);
                dom.push_back(static_cast<std::uint8_t>(i));
                img.push_back(static_cast<std::uint8_t>(nib - 1));
            }
        }

        for (std::size_t u = 0; u < nl; ++u) {
            if (lm[u] != unmatched)
                continue;
            bool found = false;
            for (std::size_t v = 0; v < nr && ! found; ++v)
                if (rm[v] == unmatched && is_alive(block.offset + index_in(block, code | (std::uint64_t{v + 1} << (4 * u)))))
                    found = true;
            if (! found)
                return false;
        }
        for (std::size_t v = 0; v < nr; ++v) {
            if (rm[v] != unmatched)
                continue;
            bool found = false;
            for (std::size_t u = 0; u < nl && ! found; ++u)
                if (lm[u] == unmatched && is_alive(block.offset + index_in(block, code | (std::uint64_t{v + 1} << (4 * u)))))
                    found = true;
            if (! found)
                return false;
        }

        auto rows = effects(_li, _left, l, dom);
        auto cols = effects(_ri, _right, r, img);
        std::vector<char> col_ok(cols.size(), 0);
        for (auto & row : rows) {
            bool row_ok = false;
            for (std::size_t j = 0; j < cols.size(); ++j) {
                if (row_ok && col_ok[j])
                    continue;
                std::uint64_t succ = 0;
                for (std::size_t k = 0; k < dom.size(); ++k) {
                    auto li = (row.packed >> (4 * k)) & 15;
                    auto rj = (cols[j].packed >> (4 * k)) & 15;
                    succ |= (rj + 1) << (4 * li);
                }
                if (is_alive(lookup(row.dst, cols[j].dst, succ))) {
                    row_ok = true;
                    col_ok[j] = 1;
                }
            }
            if (! row_ok)
                return false;
        }
        return std::ranges::all_of(col_ok, [](char c) { return c != 0; });
    }

    static auto index_in(const RankTable::Block & block, std::uint64_t code) -> std::size_t
    {
        return static_cast<std::size_t>(std::ranges::lower_bound(block.codes, code) - block.codes.begin());
    }

    auto block_of(std::size_t index) const -> std::size_t
    {
        auto it = std::ranges::upper_bound(_table._blocks, index, {}, &RankTable::Block::offset);
        return static_cast<std::size_t>(it - _table._blocks.begin()) - 1;
    }

    // Synchronous sweep: `fails[k]` is set when alive[k] has a move all of
    // whose replies left the alive set in an earlier sweep.
    auto sweep(const std::vector<std::size_t> & alive, std::vector<char> & fails) const -> void
    {
        fails.assign(alive.size(), 0);
        auto work = [&](std::size_t begin, std::size_t end) {
            for (std::size_t k = begin; k < end; ++k) {
                auto b = block_of(alive[k]);
                auto & block = _table._blocks[b];
                fails[k] = survives(b, block.codes[alive[k] - block.offset]) ? 0 : 1;
            }
        };
        std::size_t threads = std::min<std::size_t>(std::max(1U, std::thread::hardware_concurrency()), 8);
        if (alive.size() < 4096 || threads == 1) {
            work(0, alive.size());
            return;
        }
        std::vector<std::thread> pool;
        auto chunk = (alive.size() + threads - 1) / threads;
        for (std::size_t t = 0; t < threads; ++t) {
            auto begin = t * chunk, end = std::min(alive.size(), begin + chunk);
            if (begin < end)
                pool.emplace_back(work, begin, end);
        }
        for (auto & th : pool)
            th.join();
    }

    RankTable & _table;
    const PotentialistSystem & _left;
    const PotentialistSystem & _right;
    SideInfo _li;
    SideInfo _ri;
};

auto RankTable::build(const PotentialistSystem & left, const PotentialistSystem & right, std::size_t position_cap)
    -> RankTable
{
    if (left.signature() != right.signature())
        throw Error("signature mismatch: " + left.signature().to_string() + " vs " + right.signature().to_string());
    RankTable table;
    table._left = &left;
    table._right = &right;
    RankSolver solver{table};
    solver.build_blocks(position_cap);
    solver.solve();
    return table;
}

auto RankTable::position(std::size_t index) const -> Position
{
    if (index >= _ranks.size())
        throw Error("position index out of range");
    auto it = std::ranges::upper_bound(_blocks, index, {}, &Block::offset);
    auto & block = *(it - 1);
    auto code = block.codes[index - block.offset];
    auto u = _left->structure(block.left_world).universe();
    auto v = _right->structure(block.right_world).universe();
    std::vector<ElementMap::Pair> pairs;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (auto nib = (code >> (4 * i)) & 15)
            pairs.emplace_back(u[i], v[nib - 1]);
    return {block.left_world, block.right_world, ElementMap{std::move(pairs)}};
}

auto RankTable::index_of(const Position & p) const -> std::optional<std::size_t>
{
    if (p.left_world >= _left->world_count() || p.right_world >= _right->world_count())
        return std::nullopt;
    if (! p.match.is_injective())
        return std::nullopt;
    auto & s = _left->structure(p.left_world);
    auto & t = _right->structure(p.right_world);
    std::uint64_t code = 0;
    for (auto & [x, y] : p.match.pairs()) {
        auto i = s.local_index(x);
        auto j = t.local_index(y);
        if (! i || ! j)
            return std::nullopt;
        code |= std::uint64_t{*j + 1} << (4 * *i);
    }
    auto & block = _blocks[p.left_world * _right->world_count() + p.right_world];
    auto it = std::ranges::lower_bound(block.codes, code);
    if (it == block.codes.end() || *it != code)
        return std::nullopt;
    return block.offset + static_cast<std::size_t>(it - block.codes.begin());
}

auto RankTable::rank_at(std::size_t index) const -> RankValue
{
    auto r = _ranks.at(index);
    if (r == alive_code)
        return RankValue::infinity();
    if (r < 0)
        return RankValue::minus_one();
    return RankValue::finite(static_cast<std::uint32_t>(r));
}

auto RankTable::rank(const Position & p) const -> RankValue
{
    auto index = index_of(p);
    if (! index)
        throw Error("position is not on this board");
    return rank_at(*index);
}

auto RankTable::rank(std::size_t left_world, std::span<const Elem> a, std::size_t right_world,
    std::span<const Elem> b) const -> RankValue
{
    auto p = canonical_position(left_world, a, right_world, b);
    if (! p)
        return RankValue::minus_one();
    return rank(*p);
}

auto is_bisimilar(const RankTable & table, std::size_t left_world, std::span<const Elem> a, std::size_t right_world,
    std::span<const Elem> b) -> bool
{
    return table.rank(left_world, a, right_world, b).is_infinite();
}

auto alpha_bisimilar(const RankTable & table, std::size_t left_world, std::span<const Elem> a,
    std::size_t right_world, std::span<const Elem> b, std::uint32_t alpha) -> bool
{
    return table.rank(left_world, a, right_world, b).at_least(alpha);
}

auto extract_bisimulation(const RankTable & table) -> std::optional<BisimulationRelation>
{
    BisimulationRelation rel;
    for (std::size_t i = 0; i < table.size(); ++i)
        if (table.rank_at(i).is_infinite())
            rel.positions.push_back(table.position(i));
    if (rel.positions.empty())
        return std::nullopt;
    return rel;
}

auto alpha_bisimulation(const RankTable & table, std::uint32_t alpha) -> BisimulationRelation
{
    BisimulationRelation rel;
    for (std::size_t i = 0; i < table.size(); ++i) {
        auto r = table.rank_at(i);
        if (r.is_minus_one())
            continue;
        auto top = r.is_infinite() ? alpha : std::min(alpha, r.value());
        auto p = table.position(i);
        for (std::uint32_t beta = 0; beta <= top; ++beta) {
            rel.positions.push_back(p);
            rel.levels.push_back(beta);
        }
    }
    return rel;
}

auto to_string(Move m) -> std::string
{
    switch (m.kind) {
    case Move::Kind::LeftElement:
        return "left elem " + std::to_string(m.value);
    case Move::Kind::RightElement:
        return "right elem " + std::to_string(m.value);
    case Move::Kind::LeftArrow:
        return "left arrow " + std::to_string(m.value);
    case Move::Kind::RightArrow:
        return "right arrow " + std::to_string(m.value);
    }
    return {};
}

auto parse_move(std::string_view text) -> std::optional<Move>
{
    std::istringstream in{std::string(text)};
    std::string side, kind, extra;
    long long value = -1;
    if (! (in >> side >> kind >> value) || (in >> extra) || value < 0)
        return std::nullopt;
    bool left = side == "left" || side == "l";
    if (! left && side != "right" && side != "r")
        return std::nullopt;
    Move m;
    m.value = static_cast<std::size_t>(value);
    if (kind == "elem" || kind == "element" || kind == "e")
        m.kind = left ? Move::Kind::LeftElement : Move::Kind::RightElement;
    else if (kind == "arrow" || kind == "a")
        m.kind = left ? Move::Kind::LeftArrow : Move::Kind::RightArrow;
    else
        return std::nullopt;
    return m;
}

auto to_string(Clause c) -> std::string
{
    switch (c) {
    case Clause::B1:
        return "B1";
    case Clause::B2:
        return "B2";
    case Clause::B3:
        return "B3";
    }
    return {};
}

namespace {

auto check_position(const Position & p, const PotentialistSystem & left, const PotentialistSystem & right) -> void
{
    if (p.left_world >= left.world_count() || p.right_world >= right.world_count())
        throw Error("relation mentions a world outside the systems");
    for (auto & [x, y] : p.match.pairs())
        if (! left.structure(p.left_world).contains(x) || ! right.structure(p.right_world).contains(y))
            throw Error("relation position mentions an element outside its world");
    if (! p.match.is_injective())
        throw Error("relation position is not injective");
}

auto extended(const Position & p, Elem x, Elem y) -> std::optional<Position>
{
    auto pairs = p.match.pairs();
    pairs.emplace_back(x, y);
    std::vector<Elem> a, b;
    for (auto & [u, v] : pairs) {
        a.push_back(u);
        b.push_back(v);
    }
    return canonical_position(p.left_world, a, p.right_world, b);
}

auto pushed(const Position & p, const Arrow & pi, const Arrow & rho) -> Position
{
    std::vector<ElementMap::Pair> pairs;
    for (auto & [x, y] : p.match.pairs())
        pairs.emplace_back(pi.map.at(x), rho.map.at(y));
    return {pi.dst, rho.dst, ElementMap{std::move(pairs)}};
}

} // namespace

auto verify_bisimulation(const BisimulationRelation & rel, const PotentialistSystem & left,
    const PotentialistSystem & right) -> VerifyResult
{
    if (rel.positions.empty())
        throw Error("a bisimulation relation must be nonempty");
    if (rel.stratified() && rel.levels.size() != rel.positions.size())
        throw Error("stratified relation needs one level per position");

    std::map<std::uint32_t, std::set<Position>> by_level;
    for (std::size_t i = 0; i < rel.positions.size(); ++i) {
        check_position(rel.positions[i], left, right);
        by_level[rel.stratified() ? rel.levels[i] : 0].insert(rel.positions[i]);
    }
    auto member = [&](std::uint32_t level, const std::optional<Position> & q) {
        if (! q)
            return false;
        auto it = by_level.find(level);
        return it != by_level.end() && it->second.contains(*q);
    };
    auto fail = [](const Position & p, Clause c, std::optional<Move> m, std::string what) {
        return VerifyResult{false, Violation{p, c, m, std::move(what)}};
    };

    for (std::size_t i = 0; i < rel.positions.size(); ++i) {
        auto & p = rel.positions[i];
        auto & s = left.structure(p.left_world);
        auto & t = right.structure(p.right_world);
        auto a = p.match.domain();
        auto b = p.match.apply(a);
        if (atomic_type(s, a) != atomic_type(t, b))
            return fail(p, Clause::B1, std::nullopt, "atomic types differ");

        std::vector<std::uint32_t> targets;
        if (! rel.stratified())
            targets.push_back(0);
        else
            for (std::uint32_t g = 0; g < rel.levels[i]; ++g)
                targets.push_back(g);

        for (auto g : targets) {
            for (auto c : s.universe()) {
                bool ok = std::ranges::any_of(t.universe(), [&](Elem d) { return member(g, extended(p, c, d)); });
                if (! ok)
                    return fail(p, Clause::B2, Move{Move::Kind::LeftElement, c},
                        "no answer to left element " + std::to_string(c));
            }
            for (auto d : t.universe()) {
                bool ok = std::ranges::any_of(s.universe(), [&](Elem c) { return member(g, extended(p, c, d)); });
                if (! ok)
                    return fail(p, Clause::B2, Move{Move::Kind::RightElement, d},
                        "no answer to right element " + std::to_string(d));
            }
            for (auto pa : left.arrows_from(p.left_world)) {
                bool ok = std::ranges::any_of(right.arrows_from(p.right_world),
                    [&](std::size_t ra) { return member(g, pushed(p, left.arrow(pa), right.arrow(ra))); });
                if (! ok)
                    return fail(p, Clause::B3, Move{Move::Kind::LeftArrow, pa},
                        "no answer to left arrow " + std::to_string(pa));
            }
            for (auto ra : right.arrows_from(p.right_world)) {
                bool ok = std::ranges::any_of(left.arrows_from(p.left_world),
                    [&](std::size_t pa) { return member(g, pushed(p, left.arrow(pa), right.arrow(ra))); });
                if (! ok)
                    return fail(p, Clause::B3, Move{Move::Kind::RightArrow, ra},
                        "no answer to right arrow " + std::to_string(ra));
            }
        }
    }
    return {true, std::nullopt};
}

namespace {

auto subset_masks_complete(const std::set<std::pair<std::size_t, std::vector<Elem>>> & seen,
    const PotentialistSystem & sys) -> bool
{
    for (std::size_t w = 0; w < sys.world_count(); ++w) {
        auto u = sys.structure(w).universe();
        if (u.size() > 20)
            throw CapExceeded("totality check over a world with more than 20 elements");
        for (std::uint32_t mask = 0; mask < (1U << u.size()); ++mask) {
            std::vector<Elem> subset;
            for (std::size_t i = 0; i < u.size(); ++i)
                if (mask & (1U << i))
                    subset.push_back(u[i]);
            if (! seen.contains({w, subset}))
                return false;
        }
    }
    return true;
}

} // namespace

auto relation_totality(const BisimulationRelation & rel, const PotentialistSystem & left,
    const PotentialistSystem & right) -> Totality
{
    std::set<std::pair<std::size_t, std::vector<Elem>>> lseen, rseen;
    for (auto & p : rel.positions) {
        lseen.insert({p.left_world, p.match.domain()});
        rseen.insert({p.right_world, p.match.image()});
    }
    return {subset_masks_complete(lseen, left), subset_masks_complete(rseen, right)};
}

auto verify_iso_bisimulation(const IsoBisimWitness & w, const PotentialistSystem & left,
    const PotentialistSystem & right) -> IsoVerifyResult
{
    IsoVerifyResult result;
    auto fail = [&](std::string what) {
        result.holds = false;
        result.counterexample = std::move(what);
        return result;
    };
    auto link_name = [&](const IsoLink & k) {
        return left.world(k.left).name + " ~ " + right.world(k.right).name;
    };

    std::map<std::pair<std::size_t, std::size_t>, const IsoLink *> links;
    for (auto & k : w.links) {
        if (k.left >= left.world_count() || k.right >= right.world_count())
            return fail("link mentions a world outside the systems");
        auto & s = left.structure(k.left);
        auto & t = right.structure(k.right);
        if (! k.xi.is_total_on(s.universe()) || k.xi.size() != s.size() || s.size() != t.size()
            || ! k.xi.is_injective() || ! is_embedding(s, t, k.xi)
            || ! is_embedding(t, s, k.xi.inverse()))
            return fail("isomorphism on " + link_name(k) + " is not a bijective embedding");
        links[{k.left, k.right}] = &k;
    }

    for (auto & k : w.links) {
        auto xi_inv = k.xi.inverse();
        for (auto pa : left.arrows_from(k.left)) {
            auto & pi = left.arrow(pa);
            bool ok = false;
            for (auto & [key, other] : links) {
                if (key.first != pi.dst)
                    continue;
                auto rho = xi_inv.then(pi.map).then(other->xi);
                if (right.find_arrow(k.right, other->right, rho)) {
                    ok = true;
                    break;
                }
            }
            if (! ok)
                return fail("square fails on " + link_name(k) + " for left arrow " + std::to_string(pa) + " ("
                    + left.world(pi.src).name + " -> " + left.world(pi.dst).name + " [" + pi.map.to_string() + "])");
        }
        for (auto ra : right.arrows_from(k.right)) {
            auto & rho = right.arrow(ra);
            bool ok = false;
            for (auto & [key, other] : links) {
                if (key.second != rho.dst)
                    continue;
                auto pi = k.xi.then(rho.map).then(other->xi.inverse());
                if (left.find_arrow(k.left, other->left, pi)) {
                    ok = true;
                    break;
                }
            }
            if (! ok)
                return fail("square fails on " + link_name(k) + " for right arrow " + std::to_string(ra) + " ("
                    + right.world(rho.src).name + " -> " + right.world(rho.dst).name + " [" + rho.map.to_string()
                    + "])");
        }
    }

    std::set<std::size_t> lw, rw;
    for (auto & k : w.links) {
        lw.insert(k.left);
        rw.insert(k.right);
    }
    result.holds = ! w.links.empty();
    if (! result.holds)
        result.counterexample = "witness has no links";
    result.totality = {lw.size() == left.world_count(), rw.size() == right.world_count()};
    return result;
}

auto derived_bisimulation(const IsoBisimWitness & w) -> BisimulationRelation
{
    BisimulationRelation rel;
    for (auto & k : w.links) {
        auto dom = k.xi.domain();
        if (dom.size() > 20)
            throw CapExceeded("derived bisimulation over a world with more than 20 elements");
        for (std::uint32_t mask = 0; mask < (1U << dom.size()); ++mask) {
            std::vector<Elem> subset;
            for (std::size_t i = 0; i < dom.size(); ++i)
                if (mask & (1U << i))
                    subset.push_back(dom[i]);
            rel.positions.push_back({k.left, k.right, k.xi.restrict_to(subset)});
        }
    }
    return rel;
}

auto abelard_moves(const RankTable & table, const Position & p) -> std::vector<Move>
{
    std::vector<Move> out;
    for (auto e : table.left().structure(p.left_world).universe())
        out.push_back({Move::Kind::LeftElement, e});
    for (auto e : table.right().structure(p.right_world).universe())
        out.push_back({Move::Kind::RightElement, e});
    for (auto a : table.left().arrows_from(p.left_world))
        out.push_back({Move::Kind::LeftArrow, a});
    for (auto a : table.right().arrows_from(p.right_world))
        out.push_back({Move::Kind::RightArrow, a});
    return out;
}

auto eloise_options(const RankTable & table, const Position & p, Move challenge) -> std::vector<Move>
{
    std::vector<Move> out;
    switch (challenge.kind) {
    case Move::Kind::LeftElement:
        for (auto e : table.right().structure(p.right_world).universe())
            out.push_back({Move::Kind::RightElement, e});
        break;
    case Move::Kind::RightElement:
        for (auto e : table.left().structure(p.left_world).universe())
            out.push_back({Move::Kind::LeftElement, e});
        break;
    case Move::Kind::LeftArrow:
        for (auto a : table.right().arrows_from(p.right_world))
            out.push_back({Move::Kind::RightArrow, a});
        break;
    case Move::Kind::RightArrow:
        for (auto a : table.left().arrows_from(p.left_world))
            out.push_back({Move::Kind::LeftArrow, a});
        break;
    }
    return out;
}

auto play_round(const RankTable & table, const Position & p, Move challenge, Move reply) -> std::optional<Position>
{
    auto legal = abelard_moves(table, p);
    if (std::ranges::find(legal, challenge) == legal.end())
        throw Error("illegal challenge " + to_string(challenge));
    auto options = eloise_options(table, p, challenge);
    if (std::ranges::find(options, reply) == options.end())
        throw Error("illegal reply " + to_string(reply) + " to " + to_string(challenge));

    switch (challenge.kind) {
    case Move::Kind::LeftElement:
        return extended(p, static_cast<Elem>(challenge.value), static_cast<Elem>(reply.value));
    case Move::Kind::RightElement:
        return extended(p, static_cast<Elem>(reply.value), static_cast<Elem>(challenge.value));
    case Move::Kind::LeftArrow:
        return pushed(p, table.left().arrow(challenge.value), table.right().arrow(reply.value));
    case Move::Kind::RightArrow:
        return pushed(p, table.left().arrow(reply.value), table.right().arrow(challenge.value));
    }
    return std::nullopt;
}

auto rank_after(const RankTable & table, const Position & p, Move challenge, Move reply) -> RankValue
{
    auto next = play_round(table, p, challenge, reply);
    return next ? table.rank(*next) : RankValue::minus_one();
}

auto eloise_reply(const RankTable & table, const Position & p, Move challenge) -> Move
{
    auto r = table.rank(p);
    if (! r.at_least(1))
        throw Error("no reply is guaranteed from a position of rank " + r.to_string());
    auto target = r.is_infinite() ? r : RankValue::finite(r.value() - 1);
    for (auto reply : eloise_options(table, p, challenge))
        if (rank_after(table, p, challenge, reply) >= target)
            return reply;
    throw std::logic_error("rank table inconsistent: no reply keeps the rank");
}

auto best_reply(const RankTable & table, const Position & p, Move challenge) -> Move
{
    auto options = eloise_options(table, p, challenge);
    if (options.empty())
        throw std::logic_error("no legal reply");
    auto best = options.front();
    auto best_rank = rank_after(table, p, challenge, best);
    for (auto & reply : options) {
        auto r = rank_after(table, p, challenge, reply);
        if (r > best_rank) {
            best = reply;
            best_rank = r;
        }
    }
    return best;
}

auto abelard_best_move(const RankTable & table, const Position & p) -> Move
{
    auto moves = abelard_moves(table, p);
    auto best = moves.front();
    std::optional<RankValue> best_rank;
    for (auto & m : moves) {
        auto r = rank_after(table, p, m, best_reply(table, p, m));
        if (! best_rank || r < *best_rank) {
            best = m;
            best_rank = r;
        }
    }
    return best;
}

namespace {

auto machine_reply(const RankTable & table, const Position & p, Move challenge) -> Move
{
    if (table.rank(p).at_least(1))
        return eloise_reply(table, p, challenge);
    return best_reply(table, p, challenge);
}

auto prompt_move(std::istream & in, std::ostream & out, const std::string & prompt, const std::vector<Move> & legal)
    -> std::optional<Move>
{
    while (true) {
        out << prompt << std::flush;
        std::string line;
        if (! std::getline(in, line))
            return std::nullopt;
        if (line == "quit")
            return std::nullopt;
        if (line == "help" || line == "?") {
            out << "legal moves:";
            for (auto & m : legal)
                out << " [" << to_string(m) << "]";
            out << "\n";
            continue;
        }
        auto m = parse_move(line);
        if (m && std::ranges::find(legal, *m) != legal.end())
            return m;
        out << "illegal move; type help for the legal ones\n";
    }
}

} // namespace

auto play_interactive(const RankTable & table, const Position & start, Side human, std::istream & in,
    std::ostream & out, std::size_t max_rounds) -> Transcript
{
    Transcript tr;
    auto show = [&](const Position & p) {
        out << "position: " << to_string(table.left(), table.right(), p) << "  rank " << table.rank(p).to_string()
            << "\n";
    };
    tr.positions.push_back(start);
    show(start);
    auto current = start;
    if (table.rank(current).is_minus_one()) {
        tr.winner = Side::Abelard;
        out << "winner: abelard (atomic types differ)\n";
        return tr;
    }

    for (std::size_t round = 0; round < max_rounds; ++round) {
        Move challenge, reply;
        if (human == Side::Abelard) {
            auto m = prompt_move(in, out, "abelard> ", abelard_moves(table, current));
            if (! m) {
                out << "game abandoned\n";
                return tr;
            }
            challenge = *m;
            reply = machine_reply(table, current, challenge);
            out << "eloise: " << to_string(reply) << "\n";
        } else {
            challenge = abelard_best_move(table, current);
            out << "abelard: " << to_string(challenge) << "\n";
            auto m = prompt_move(in, out, "eloise> ", eloise_options(table, current, challenge));
            if (! m) {
                out << "game abandoned\n";
                return tr;
            }
            reply = *m;
        }
        tr.rounds.emplace_back(challenge, reply);
        auto next = play_round(table, current, challenge, reply);
        if (! next) {
            tr.winner = Side::Abelard;
            out << "winner: abelard (the tuples are no longer a partial injection)\n";
            return tr;
        }
        current = *next;
        tr.positions.push_back(current);
        show(current);
        if (table.rank(current).is_minus_one()) {
            tr.winner = Side::Abelard;
            out << "winner: abelard (atomic types differ)\n";
            return tr;
        }
    }
    tr.winner = Side::Eloise;
    out << "winner: eloise (no violation in " << max_rounds << " rounds)\n";
    return tr;
}

auto replay(const RankTable & table, const Position & start, const std::vector<std::pair<Move, Move>> & rounds)
    -> Transcript
{
    Transcript tr;
    tr.positions.push_back(start);
    auto current = start;
    if (table.rank(current).is_minus_one()) {
        tr.winner = Side::Abelard;
        return tr;
    }
    for (auto & [challenge, reply] : rounds) {
        tr.rounds.emplace_back(challenge, reply);
        auto next = play_round(table, current, challenge, reply);
        if (! next) {
            tr.winner = Side::Abelard;
            return tr;
        }
        current = *next;
        tr.positions.push_back(current);
        if (table.rank(current).is_minus_one()) {
            tr.winner = Side::Abelard;
            return tr;
        }
    }
    tr.winner = Side::Eloise;
    return tr;
}

} // namespace potsys
