#include <potsys/error.hpp>
#include <potsys/system.hpp>

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

namespace potsys {

namespace {

auto describe_arrow(const std::vector<World> & worlds, const Arrow & a) -> std::string
{
    return worlds[a.src].name + " -> " + worlds[a.dst].name + " [" + a.map.to_string() + "]";
}

auto check_arrow(const std::vector<World> & worlds, const Arrow & a) -> void
{
    if (a.src >= worlds.size() || a.dst >= worlds.size())
        throw Error("dangling world reference in arrow " + std::to_string(a.src) + " -> " + std::to_string(a.dst));
    auto & s = worlds[a.src].structure;
    auto & t = worlds[a.dst].structure;
    if (a.map.domain() != std::vector<Elem>(s.universe().begin(), s.universe().end()))
        throw Error("arrow " + describe_arrow(worlds, a) + " is not defined exactly on the source universe");
    if (! is_embedding(s, t, a.map))
        throw Error("arrow " + describe_arrow(worlds, a) + " is not an embedding");
}

auto compose(const Arrow & first, const Arrow & second) -> Arrow
{
    return {first.src, second.dst, first.map.then(second.map)};
}

} // namespace

PotentialistSystem::PotentialistSystem(std::vector<World> worlds, std::vector<Arrow> arrows) :
    _worlds(std::move(worlds)),
    _arrows(std::move(arrows)),
    _outgoing(_worlds.size())
{
    for (std::size_t i = 0; i < _arrows.size(); ++i)
        _outgoing[_arrows[i].src].push_back(i);
}

auto PotentialistSystem::validate_or_close(std::vector<World> worlds, std::vector<Arrow> arrows, ClosureMode mode)
    -> PotentialistSystem
{
    if (worlds.empty())
        throw Error("a system needs at least one world");
    std::set<std::string> names;
    for (auto & w : worlds) {
        if (! names.insert(w.name).second)
            throw Error("duplicate world name '" + w.name + "'");
        if (w.structure.signature() != worlds.front().structure.signature())
            throw Error("world '" + w.name + "' has signature " + w.structure.signature().to_string()
                + ", expected " + worlds.front().structure.signature().to_string());
    }
    for (auto & a : arrows)
        check_arrow(worlds, a);

    std::set<Arrow> present(arrows.begin(), arrows.end());

    if (mode == ClosureMode::Validate) {
        for (std::size_t w = 0; w < worlds.size(); ++w) {
            Arrow id{w, w, ElementMap::identity(worlds[w].structure.universe())};
            if (! present.contains(id))
                throw Error("missing identity on world '" + worlds[w].name + "'");
        }
        std::vector<std::vector<const Arrow *>> leaving(worlds.size());
        for (auto & a : present)
            leaving[a.src].push_back(&a);
        for (auto & a : present)
            for (auto * b : leaving[a.dst])
                if (! present.contains(compose(a, *b)))
                    throw Error("missing composite of " + describe_arrow(worlds, a) + " and "
                        + describe_arrow(worlds, *b));
        return PotentialistSystem{std::move(worlds), {present.begin(), present.end()}};
    }

    for (std::size_t w = 0; w < worlds.size(); ++w)
        present.insert(Arrow{w, w, ElementMap::identity(worlds[w].structure.universe())});

    // Worklist saturation: each new arrow is composed with everything on
    // both sides until nothing new appears.
    std::vector<std::vector<Arrow>> into(worlds.size()), out_of(worlds.size());
    for (auto & a : present) {
        out_of[a.src].push_back(a);
        into[a.dst].push_back(a);
    }
    std::deque<Arrow> pending(present.begin(), present.end());
    auto add = [&](Arrow c) {
        if (present.insert(c).second) {
            out_of[c.src].push_back(c);
            into[c.dst].push_back(c);
            pending.push_back(std::move(c));
        }
    };
    while (! pending.empty()) {
        auto a = std::move(pending.front());
        pending.pop_front();
        auto after = out_of[a.dst];
        for (auto & b : after)
            add(compose(a, b));
        auto before = into[a.src];
        for (auto & b : before)
            add(compose(b, a));
    }
    return PotentialistSystem{std::move(worlds), {present.begin(), present.end()}};
}

auto PotentialistSystem::discrete(std::vector<World> worlds) -> PotentialistSystem
{
    return validate_or_close(std::move(worlds), {}, ClosureMode::Close);
}

auto PotentialistSystem::world_index(std::string_view name) const -> std::optional<std::size_t>
{
    for (std::size_t i = 0; i < _worlds.size(); ++i)
        if (_worlds[i].name == name)
            return i;
    return std::nullopt;
}

auto PotentialistSystem::find_arrow(std::size_t src, std::size_t dst, const ElementMap & map) const
    -> std::optional<std::size_t>
{
    Arrow key{src, dst, map};
    auto it = std::ranges::lower_bound(_arrows, key);
    if (it != _arrows.end() && *it == key)
        return static_cast<std::size_t>(it - _arrows.begin());
    return std::nullopt;
}

auto PotentialistSystem::identity_arrow(std::size_t world) const -> std::size_t
{
    auto found = find_arrow(world, world, ElementMap::identity(structure(world).universe()));
    if (! found)
        throw std::logic_error("validated system lacks an identity arrow");
    return *found;
}

auto is_thin(const PotentialistSystem & sys) -> bool
{
    auto & arrows = sys.arrows();
    for (std::size_t i = 1; i < arrows.size(); ++i)
        if (arrows[i].src == arrows[i - 1].src && arrows[i].dst == arrows[i - 1].dst)
            return false;
    return true;
}

auto disjointify(const PotentialistSystem & sys) -> Disjointified
{
    std::vector<World> worlds;
    std::vector<ElementMap> tagging;
    std::vector<std::pair<std::size_t, Elem>> tags;
    Elem next = 0;
    for (std::size_t w = 0; w < sys.world_count(); ++w) {
        std::vector<ElementMap::Pair> pairs;
        for (auto e : sys.structure(w).universe()) {
            pairs.emplace_back(e, next++);
            tags.emplace_back(w, e);
        }
        ElementMap xi{std::move(pairs)};
        worlds.push_back({sys.world(w).name, sys.structure(w).renamed(xi)});
        tagging.push_back(std::move(xi));
    }

    std::vector<Arrow> arrows;
    for (auto & a : sys.arrows())
        arrows.push_back({a.src, a.dst, tagging[a.src].inverse().then(a.map).then(tagging[a.dst])});

    IsoBisimWitness witness;
    for (std::size_t w = 0; w < sys.world_count(); ++w)
        witness.links.push_back({w, w, tagging[w]});

    return {PotentialistSystem::validate_or_close(std::move(worlds), std::move(arrows), ClosureMode::Validate),
        std::move(witness), std::move(tags)};
}

auto has_disjoint_universes(const PotentialistSystem & sys) -> bool
{
    std::set<Elem> seen;
    for (auto & w : sys.worlds())
        for (auto e : w.structure.universe())
            if (! seen.insert(e).second)
                return false;
    return true;
}

UnravelNode::UnravelNode(const PotentialistSystem & sys, std::size_t root, std::vector<std::size_t> chain) :
    _sys(&sys),
    _root(root),
    _chain(std::move(chain))
{
    if (root >= sys.world_count())
        throw Error("unravel root " + std::to_string(root) + " is not a world");
    auto at = root;
    for (auto a : _chain) {
        if (a >= sys.arrows().size() || sys.arrow(a).src != at)
            throw Error("arrow chain is not composable");
        at = sys.arrow(a).dst;
    }
}

auto UnravelNode::final_world() const -> std::size_t
{
    return _chain.empty() ? _root : _sys->arrow(_chain.back()).dst;
}

auto UnravelNode::to_string() const -> std::string
{
    auto out = _sys->world(_root).name;
    for (auto a : _chain)
        out += " -[" + std::to_string(a) + "]-> " + _sys->world(_sys->arrow(a).dst).name;
    return out;
}

auto unravel_root(const PotentialistSystem & sys, std::size_t world) -> UnravelNode
{
    return UnravelNode{sys, world};
}

auto unravel_children(const UnravelNode & node, std::size_t depth_cap) -> std::vector<UnravelChild>
{
    if (node.depth() >= depth_cap)
        throw DepthExceeded("unravelling node '" + node.to_string() + "' sits at the depth cap "
            + std::to_string(depth_cap));
    std::vector<UnravelChild> children;
    for (auto a : node.system().arrows_from(node.final_world())) {
        auto chain = node.chain();
        chain.push_back(a);
        children.push_back({a, UnravelNode{node.system(), node.root(), std::move(chain)}});
    }
    return children;
}

auto local_zigzag_holds(const UnravelNode & node, const std::vector<UnravelChild> & children) -> bool
{
    auto & sys = node.system();
    auto & expected = sys.arrows_from(node.final_world());
    if (children.size() != expected.size())
        return false;
    std::set<std::size_t> used;
    for (auto & c : children) {
        if (c.node.depth() != node.depth() + 1 || c.node.root() != node.root())
            return false;
        if (! std::equal(node.chain().begin(), node.chain().end(), c.node.chain().begin()))
            return false;
        if (c.node.chain().back() != c.arrow)
            return false;
        auto & a = sys.arrow(c.arrow);
        if (a.src != node.final_world() || c.node.final_world() != a.dst)
            return false;
        if (! std::ranges::binary_search(expected, c.arrow) || ! used.insert(c.arrow).second)
            return false;
    }
    return true;
}

auto flatten(const UnravelNode & node) -> Flattening
{
    auto & sys = node.system();
    if (! has_disjoint_universes(sys))
        throw Error("flatten requires a system with pairwise disjoint universes; disjointify it first");

    auto flat = sys.structure(node.root());
    auto rename = ElementMap::identity(flat.universe());

    for (auto a : node.chain()) {
        auto & arrow = sys.arrow(a);
        auto & target = sys.structure(arrow.dst);
        // Flat -> target along the arrow; its inverse names the image.
        auto into_target = rename.then(arrow.map);
        auto named = into_target.inverse();

        std::vector<ElementMap::Pair> to_flat;
        for (auto e : target.universe()) {
            if (auto old = named.find(e)) {
                to_flat.emplace_back(e, *old);
            } else {
                if (flat.contains(e))
                    throw std::logic_error("flatten: element " + std::to_string(e) + " collides with a renamed one");
                to_flat.emplace_back(e, e);
            }
        }
        ElementMap back{std::move(to_flat)};
        flat = target.renamed(back);
        rename = back.inverse();
    }
    return {std::move(flat), std::move(rename)};
}

auto renaming_square_commutes(const UnravelNode & node, std::size_t arrow) -> bool
{
    auto & sys = node.system();
    if (sys.arrow(arrow).src != node.final_world())
        throw Error("arrow does not leave the node's final world");
    auto chain = node.chain();
    chain.push_back(arrow);
    UnravelNode extended{sys, node.root(), std::move(chain)};

    auto before = flatten(node);
    auto after = flatten(extended);

    auto sub = before.flat.universe();
    if (! std::ranges::all_of(sub, [&](Elem e) { return after.flat.contains(e); }))
        return false;
    if (substructure(after.flat, sub) != before.flat)
        return false;

    auto lhs = after.rename.restrict_to(sub);
    auto rhs = before.rename.then(sys.arrow(arrow).map);
    return lhs == rhs;
}

} // namespace potsys
