#include <potsys/checker.hpp>
#include <potsys/error.hpp>
#include <potsys/models.hpp>

#include <algorithm>
#include <bit>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace potsys {

namespace {

constexpr std::size_t max_relation_bits = 24;

auto carriers(std::size_t max_size) -> std::vector<std::vector<Elem>>
{
    std::vector<std::vector<Elem>> out;
    for (std::uint32_t mask = 1; mask < (1U << max_size); ++mask) {
        std::vector<Elem> c;
        for (Elem e = 0; e < max_size; ++e)
            if (mask & (1U << e))
                c.push_back(e);
        out.push_back(std::move(c));
    }
    std::ranges::sort(out, [](const auto & a, const auto & b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    return out;
}

auto all_tuples(const std::vector<Elem> & carrier, std::size_t arity) -> std::vector<Tuple>
{
    std::vector<Tuple> out;
    std::vector<std::size_t> digits(arity, 0);
    while (true) {
        Tuple t;
        for (auto d : digits)
            t.push_back(carrier[d]);
        out.push_back(std::move(t));
        std::size_t i = arity;
        while (i > 0 && ++digits[i - 1] == carrier.size())
            digits[--i] = 0;
        if (i == 0)
            break;
    }
    return out;
}

auto world_names(std::size_t n) -> std::vector<std::string>
{
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i)
        names.push_back("M" + std::to_string(i));
    return names;
}

auto as_worlds(const std::vector<Structure> & models) -> std::vector<World>
{
    if (models.empty())
        throw Error("cannot build a system from an empty model list");
    std::vector<World> worlds;
    auto names = world_names(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (models[i].signature() != models.front().signature())
            throw Error("models do not share a signature");
        worlds.push_back({names[i], models[i]});
    }
    return worlds;
}

} // namespace

auto enumerate_models(const Signature & sig, const std::vector<Formula> & theory, std::size_t max_size,
    std::size_t size_cap) -> std::vector<Structure>
{
    if (max_size > size_cap)
        throw CapExceeded("model size " + std::to_string(max_size) + " exceeds the cap " + std::to_string(size_cap));
    for (auto & f : theory) {
        if (! f.modal_free())
            throw Error("theory formula " + to_string(f) + " contains a modal operator");
        if (! f.free_variables().empty())
            throw Error("theory formula " + to_string(f) + " is not a sentence");
    }

    std::vector<Structure> out;
    for (auto & carrier : carriers(max_size)) {
        std::vector<std::vector<Tuple>> candidates;
        std::size_t bits = 0;
        for (auto & r : sig.relations()) {
            candidates.push_back(all_tuples(carrier, r.arity));
            bits += candidates.back().size();
        }
        if (bits > max_relation_bits)
            throw CapExceeded("carrier of size " + std::to_string(carrier.size()) + " needs " + std::to_string(bits)
                + " relation bits; the enumeration cap is " + std::to_string(max_relation_bits));

        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bits); ++mask) {
            std::vector<std::vector<Tuple>> relations(sig.relations().size());
            std::size_t bit = 0;
            for (std::size_t r = 0; r < candidates.size(); ++r)
                for (auto & t : candidates[r])
                    if (mask & (std::uint64_t{1} << bit++))
                        relations[r].push_back(t);

            std::vector<std::size_t> digits(sig.constants().size(), 0);
            while (true) {
                std::vector<Elem> constants;
                for (auto d : digits)
                    constants.push_back(carrier[d]);
                Structure s{sig, carrier, relations, std::move(constants)};
                if (std::ranges::all_of(theory, [&](const Formula & f) { return satisfies_fo(s, {}, f); }))
                    out.push_back(std::move(s));

                std::size_t i = digits.size();
                while (i > 0 && ++digits[i - 1] == carrier.size())
                    digits[--i] = 0;
                if (i == 0)
                    break;
            }
        }
    }
    return out;
}

auto build_mod_system(const std::vector<Structure> & models) -> PotentialistSystem
{
    auto worlds = as_worlds(models);
    std::vector<Arrow> arrows;
    for (std::size_t m = 0; m < models.size(); ++m) {
        auto dom = models[m].universe();
        for (std::size_t n = 0; n < models.size(); ++n) {
            auto & target = models[n];
            if (! std::ranges::all_of(dom, [&](Elem e) { return target.contains(e); }))
                continue;
            if (substructure(target, dom) == models[m])
                arrows.push_back({m, n, ElementMap::identity(dom)});
        }
    }
    return PotentialistSystem::validate_or_close(std::move(worlds), std::move(arrows), ClosureMode::Validate);
}

auto build_mode_system(const std::vector<Structure> & models) -> PotentialistSystem
{
    auto worlds = as_worlds(models);
    std::vector<Arrow> arrows;
    for (std::size_t m = 0; m < models.size(); ++m)
        for (std::size_t n = 0; n < models.size(); ++n)
            for (auto & e : enumerate_embeddings(models[m], models[n]))
                arrows.push_back({m, n, std::move(e)});
    return PotentialistSystem::validate_or_close(std::move(worlds), std::move(arrows), ClosureMode::Validate);
}

auto skeleton(const PotentialistSystem & sys) -> Skeleton
{
    auto n = sys.world_count();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };

    // For each world, the least arrow into its class representative whose
    // inverse is also an arrow.
    auto inverse_exists = [&](const Arrow & a) {
        return sys.find_arrow(a.dst, a.src, a.map.inverse()).has_value();
    };
    for (auto & a : sys.arrows()) {
        if (a.src == a.dst || ! inverse_exists(a))
            continue;
        auto x = find(a.src), y = find(a.dst);
        if (x != y)
            parent[std::max(x, y)] = std::min(x, y);
    }

    std::vector<std::size_t> reps;
    std::vector<std::size_t> quotient(n);
    std::vector<std::size_t> rep_slot(n, n);
    for (std::size_t w = 0; w < n; ++w) {
        if (find(w) == w) {
            rep_slot[w] = reps.size();
            reps.push_back(w);
        }
    }
    for (std::size_t w = 0; w < n; ++w)
        quotient[w] = rep_slot[find(w)];

    std::vector<World> worlds;
    for (auto r : reps)
        worlds.push_back(sys.world(r));
    std::vector<Arrow> arrows;
    for (auto & a : sys.arrows())
        if (find(a.src) == a.src && find(a.dst) == a.dst)
            arrows.push_back({rep_slot[a.src], rep_slot[a.dst], a.map});

    IsoBisimWitness witness;
    for (std::size_t w = 0; w < n; ++w) {
        auto rep = find(w);
        std::optional<ElementMap> xi;
        if (rep == w) {
            xi = ElementMap::identity(sys.structure(w).universe());
        } else {
            for (auto a : sys.arrows_from(w)) {
                auto & arrow = sys.arrow(a);
                if (arrow.dst == rep && inverse_exists(arrow)) {
                    xi = arrow.map;
                    break;
                }
            }
        }
        if (! xi)
            throw std::logic_error("skeleton: no invertible arrow into the class representative");
        witness.links.push_back({w, quotient[w], std::move(*xi)});
    }

    return {PotentialistSystem::validate_or_close(std::move(worlds), std::move(arrows), ClosureMode::Validate),
        std::move(quotient), std::move(witness)};
}

} // namespace potsys
