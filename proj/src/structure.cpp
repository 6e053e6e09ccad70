#include <potsys/error.hpp>
#include <potsys/structure.hpp>

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>
#include <sstream>

namespace potsys {

namespace {

auto valid_symbol_name(std::string_view name) -> bool
{
    if (name.empty())
        return false;
    return std::ranges::none_of(name, [](char c) {
        return c == '(' || c == ')' || c == ':' || c == ',' || c == ';' || c == '@' || c == ' ' || c == '\t'
            || c == '\n' || c == '{' || c == '}' || c == '[' || c == ']';
    });
}

// Advances an odometer of `digits.size()` digits in base `base`. Returns
// false after the last combination.
auto next_odometer(std::vector<std::uint32_t> & digits, std::uint32_t base) -> bool
{
    for (std::size_t i = digits.size(); i-- > 0;) {
        if (++digits[i] < base)
            return true;
        digits[i] = 0;
    }
    return false;
}

auto tuple_less(std::span<const Elem> a, std::span<const Elem> b) -> bool
{
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

} // namespace

Signature::Signature(std::vector<RelationSymbol> relations, std::vector<std::string> constants) :
    _relations(std::move(relations)),
    _constants(std::move(constants))
{
    std::ranges::sort(_relations);
    std::ranges::sort(_constants);
    std::set<std::string> seen;
    for (auto & r : _relations) {
        if (! valid_symbol_name(r.name))
            throw Error("invalid relation name '" + r.name + "'");
        if (r.arity == 0)
            throw Error("relation '" + r.name + "' must have positive arity");
        if (! seen.insert(r.name).second)
            throw Error("duplicate symbol '" + r.name + "' in signature");
    }
    for (auto & c : _constants) {
        if (! valid_symbol_name(c))
            throw Error("invalid constant name '" + c + "'");
        if (! seen.insert(c).second)
            throw Error("duplicate symbol '" + c + "' in signature");
    }
}

auto Signature::relation_index(std::string_view name) const -> std::optional<std::size_t>
{
    for (std::size_t i = 0; i < _relations.size(); ++i)
        if (_relations[i].name == name)
            return i;
    return std::nullopt;
}

auto Signature::constant_index(std::string_view name) const -> std::optional<std::size_t>
{
    for (std::size_t i = 0; i < _constants.size(); ++i)
        if (_constants[i] == name)
            return i;
    return std::nullopt;
}

auto Signature::to_string() const -> std::string
{
    std::string out;
    for (auto & r : _relations) {
        if (! out.empty())
            out += ',';
        out += r.name + ":" + std::to_string(r.arity);
    }
    for (auto & c : _constants) {
        if (! out.empty())
            out += ',';
        out += c + ":0";
    }
    return out;
}

auto parse_signature(std::string_view text) -> Signature
{
    std::vector<RelationSymbol> relations;
    std::vector<std::string> constants;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string_view::npos)
            end = text.size();
        auto item = text.substr(start, end - start);
        while (! item.empty() && std::isspace(static_cast<unsigned char>(item.front())))
            item.remove_prefix(1);
        while (! item.empty() && std::isspace(static_cast<unsigned char>(item.back())))
            item.remove_suffix(1);
        if (! item.empty()) {
            auto colon = item.find(':');
            if (colon == std::string_view::npos)
                throw Error("signature item '" + std::string(item) + "' lacks ':arity'");
            auto name = std::string(item.substr(0, colon));
            auto arity_text = item.substr(colon + 1);
            std::size_t arity = 0;
            try {
                std::size_t used = 0;
                arity = std::stoul(std::string(arity_text), &used);
                if (used != arity_text.size())
                    throw std::invalid_argument("trailing");
            }
            catch (const std::exception &) {
                throw Error("bad arity in signature item '" + std::string(item) + "'");
            }
            if (arity == 0)
                constants.push_back(name);
            else
                relations.push_back({name, arity});
        }
        start = end + 1;
    }
    return Signature{std::move(relations), std::move(constants)};
}

ElementMap::ElementMap(std::vector<Pair> pairs) :
    _pairs(std::move(pairs))
{
    std::ranges::sort(_pairs);
    _pairs.erase(std::unique(_pairs.begin(), _pairs.end()), _pairs.end());
    for (std::size_t i = 1; i < _pairs.size(); ++i)
        if (_pairs[i].first == _pairs[i - 1].first)
            throw Error("element map is not functional at " + std::to_string(_pairs[i].first));
}

auto ElementMap::identity(std::span<const Elem> elements) -> ElementMap
{
    std::vector<Pair> pairs;
    pairs.reserve(elements.size());
    for (auto e : elements)
        pairs.emplace_back(e, e);
    return ElementMap{std::move(pairs)};
}

auto ElementMap::find(Elem x) const -> std::optional<Elem>
{
    auto it = std::ranges::lower_bound(_pairs, x, {}, &Pair::first);
    if (it == _pairs.end() || it->first != x)
        return std::nullopt;
    return it->second;
}

auto ElementMap::at(Elem x) const -> Elem
{
    if (auto y = find(x))
        return *y;
    throw Error("element " + std::to_string(x) + " outside the domain of the map");
}

auto ElementMap::apply(std::span<const Elem> xs) const -> Tuple
{
    Tuple out;
    out.reserve(xs.size());
    for (auto x : xs)
        out.push_back(at(x));
    return out;
}

auto ElementMap::domain() const -> std::vector<Elem>
{
    std::vector<Elem> out;
    for (auto & [x, _] : _pairs)
        out.push_back(x);
    return out;
}

auto ElementMap::image() const -> std::vector<Elem>
{
    std::vector<Elem> out;
    for (auto & [_, y] : _pairs)
        out.push_back(y);
    std::ranges::sort(out);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

auto ElementMap::is_injective() const -> bool
{
    return image().size() == _pairs.size();
}

auto ElementMap::is_total_on(std::span<const Elem> elements) const -> bool
{
    return std::ranges::all_of(elements, [&](Elem e) { return find(e).has_value(); });
}

auto ElementMap::then(const ElementMap & next) const -> ElementMap
{
    std::vector<Pair> pairs;
    for (auto & [x, y] : _pairs)
        if (auto z = next.find(y))
            pairs.emplace_back(x, *z);
    return ElementMap{std::move(pairs)};
}

auto ElementMap::inverse() const -> ElementMap
{
    if (! is_injective())
        throw Error("cannot invert a non-injective map");
    std::vector<Pair> pairs;
    for (auto & [x, y] : _pairs)
        pairs.emplace_back(y, x);
    return ElementMap{std::move(pairs)};
}

auto ElementMap::restrict_to(std::span<const Elem> elements) const -> ElementMap
{
    std::vector<Pair> pairs;
    for (auto e : elements)
        if (auto y = find(e))
            pairs.emplace_back(e, *y);
    return ElementMap{std::move(pairs)};
}

auto ElementMap::to_string() const -> std::string
{
    std::string out;
    for (auto & [x, y] : _pairs) {
        if (! out.empty())
            out += ", ";
        out += std::to_string(x) + "->" + std::to_string(y);
    }
    return out;
}

Structure::Structure(Signature signature, std::vector<Elem> universe, std::vector<std::vector<Tuple>> relations,
    std::vector<Elem> constants) :
    _signature(std::move(signature)),
    _universe(std::move(universe)),
    _relations(std::move(relations)),
    _constants(std::move(constants))
{
    std::ranges::sort(_universe);
    _universe.erase(std::unique(_universe.begin(), _universe.end()), _universe.end());
    if (_universe.empty())
        throw Error("structure universe must be nonempty");

    auto & rels = _signature.relations();
    if (_relations.size() != rels.size())
        throw Error("structure interprets " + std::to_string(_relations.size()) + " relations, signature declares "
            + std::to_string(rels.size()));
    for (std::size_t r = 0; r < rels.size(); ++r) {
        auto & table = _relations[r];
        for (auto & t : table) {
            if (t.size() != rels[r].arity)
                throw Error("tuple of length " + std::to_string(t.size()) + " in relation '" + rels[r].name
                    + "' of arity " + std::to_string(rels[r].arity));
            for (auto e : t)
                if (! contains(e))
                    throw Error("relation '" + rels[r].name + "' mentions element " + std::to_string(e)
                        + " outside the universe");
        }
        std::ranges::sort(table);
        table.erase(std::unique(table.begin(), table.end()), table.end());
    }

    if (_constants.size() != _signature.constants().size())
        throw Error("structure interprets " + std::to_string(_constants.size()) + " constants, signature declares "
            + std::to_string(_signature.constants().size()));
    for (std::size_t c = 0; c < _constants.size(); ++c)
        if (! contains(_constants[c]))
            throw Error("constant '" + _signature.constants()[c] + "' outside the universe");
}

auto Structure::contains(Elem x) const -> bool
{
    return std::ranges::binary_search(_universe, x);
}

auto Structure::local_index(Elem x) const -> std::optional<std::size_t>
{
    auto it = std::ranges::lower_bound(_universe, x);
    if (it == _universe.end() || *it != x)
        return std::nullopt;
    return static_cast<std::size_t>(it - _universe.begin());
}

auto Structure::holds(std::size_t r, std::span<const Elem> args) const -> bool
{
    auto & table = _relations[r];
    auto it = std::lower_bound(table.begin(), table.end(), args,
        [](const Tuple & a, std::span<const Elem> b) { return tuple_less(a, b); });
    return it != table.end() && std::ranges::equal(*it, args);
}

auto Structure::renamed(const ElementMap & bijection) const -> Structure
{
    if (! bijection.is_total_on(_universe) || ! bijection.is_injective())
        throw Error("renaming must be a bijection on the universe");
    std::vector<Elem> universe;
    for (auto e : _universe)
        universe.push_back(bijection.at(e));
    std::vector<std::vector<Tuple>> relations;
    for (auto & table : _relations) {
        auto & out = relations.emplace_back();
        for (auto & t : table)
            out.push_back(bijection.apply(t));
    }
    std::vector<Elem> constants;
    for (auto c : _constants)
        constants.push_back(bijection.at(c));
    return Structure{_signature, std::move(universe), std::move(relations), std::move(constants)};
}

auto atomic_type(const Structure & s, std::span<const Elem> tuple) -> AtomicType
{
    for (auto e : tuple)
        if (! s.contains(e))
            throw Error("tuple element " + std::to_string(e) + " outside the universe");

    auto & sig = s.signature();
    std::vector<Elem> values(tuple.begin(), tuple.end());
    values.insert(values.end(), s.constants().begin(), s.constants().end());
    auto terms = static_cast<std::uint32_t>(values.size());

    AtomicType type;
    type.arity = tuple.size();
    if (terms == 0)
        return type;

    for (std::uint32_t i = 0; i < terms; ++i)
        for (std::uint32_t j = 0; j < terms; ++j)
            type.literals.push_back({Literal::Kind::Equal, 0, {i, j}, values[i] == values[j]});

    Tuple args;
    for (std::uint32_t r = 0; r < sig.relations().size(); ++r) {
        std::vector<std::uint32_t> digits(sig.relations()[r].arity, 0);
        do {
            args.clear();
            for (auto d : digits)
                args.push_back(values[d]);
            type.literals.push_back({Literal::Kind::Relation, r, digits, s.holds(r, args)});
        } while (next_odometer(digits, terms));
    }
    return type;
}

auto is_partial_isomorphism(const Structure & s, std::span<const Elem> a, const Structure & t, std::span<const Elem> b)
    -> bool
{
    if (a.size() != b.size())
        throw Error("partial isomorphism check on tuples of different lengths");
    if (s.signature() != t.signature())
        throw Error("partial isomorphism check across different signatures");
    return atomic_type(s, a) == atomic_type(t, b);
}

auto is_embedding(const Structure & s, const Structure & t, const ElementMap & m) -> bool
{
    if (! m.is_total_on(s.universe()))
        throw Error("embedding candidate is not total on the source universe");
    if (s.signature() != t.signature())
        return false;

    auto restricted = m.restrict_to(s.universe());
    if (! restricted.is_injective())
        return false;
    for (auto e : s.universe())
        if (! t.contains(restricted.at(e)))
            return false;
    for (std::size_t c = 0; c < s.constants().size(); ++c)
        if (restricted.at(s.constants()[c]) != t.constants()[c])
            return false;

    auto n = static_cast<std::uint32_t>(s.size());
    auto universe = s.universe();
    Tuple source, target;
    for (std::size_t r = 0; r < s.signature().relations().size(); ++r) {
        std::vector<std::uint32_t> digits(s.signature().relations()[r].arity, 0);
        do {
            source.clear();
            target.clear();
            for (auto d : digits) {
                source.push_back(universe[d]);
                target.push_back(restricted.at(universe[d]));
            }
            if (s.holds(r, source) != t.holds(r, target))
                return false;
        } while (next_odometer(digits, n));
    }
    return true;
}

namespace {

class EmbeddingSearch
{
public:
    EmbeddingSearch(const Structure & s, const Structure & t) :
        _s(s),
        _t(t),
        _image(s.size()),
        _used(t.size(), false)
    {
    }

    auto run() -> std::vector<ElementMap>
    {
        extend(0);
        return std::move(_found);
    }

private:
    // Checks every relation instance over assigned locals [0, i] that
    // mentions local i.
    auto consistent(std::size_t i) const -> bool
    {
        auto su = _s.universe();
        auto tu = _t.universe();
        for (std::size_t c = 0; c < _s.constants().size(); ++c)
            if (_s.constants()[c] == su[i] && tu[_image[i]] != _t.constants()[c])
                return false;

        Tuple source, target;
        for (std::size_t r = 0; r < _s.signature().relations().size(); ++r) {
            std::vector<std::uint32_t> digits(_s.signature().relations()[r].arity, 0);
            do {
                if (std::ranges::find(digits, i) == digits.end())
                    continue;
                source.clear();
                target.clear();
                for (auto d : digits) {
                    source.push_back(su[d]);
                    target.push_back(tu[_image[d]]);
                }
                if (_s.holds(r, source) != _t.holds(r, target))
                    return false;
            } while (next_odometer(digits, static_cast<std::uint32_t>(i + 1)));
        }
        return true;
    }

    auto extend(std::size_t i) -> void
    {
        if (i == _s.size()) {
            std::vector<ElementMap::Pair> pairs;
            for (std::size_t k = 0; k < i; ++k)
                pairs.emplace_back(_s.universe()[k], _t.universe()[_image[k]]);
            _found.emplace_back(std::move(pairs));
            return;
        }
        for (std::size_t j = 0; j < _t.size(); ++j) {
            if (_used[j])
                continue;
            _image[i] = j;
            if (! consistent(i))
                continue;
            _used[j] = true;
            extend(i + 1);
            _used[j] = false;
        }
    }

    const Structure & _s;
    const Structure & _t;
    std::vector<std::size_t> _image;
    std::vector<bool> _used;
    std::vector<ElementMap> _found;
};

} // namespace

auto enumerate_embeddings(const Structure & s, const Structure & t) -> std::vector<ElementMap>
{
    if (s.signature() != t.signature())
        throw Error("embedding search across different signatures");
    if (s.size() > t.size())
        return {};
    return EmbeddingSearch{s, t}.run();
}

auto substructure(const Structure & t, std::span<const Elem> subset) -> Structure
{
    std::vector<Elem> universe(subset.begin(), subset.end());
    std::ranges::sort(universe);
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
    if (universe.empty())
        throw Error("substructure on an empty subset");
    for (auto e : universe)
        if (! t.contains(e))
            throw Error("substructure subset mentions element " + std::to_string(e) + " outside the universe");
    for (std::size_t c = 0; c < t.constants().size(); ++c)
        if (! std::ranges::binary_search(universe, t.constants()[c]))
            throw Error("substructure subset omits the value of constant '" + t.signature().constants()[c] + "'");

    std::vector<std::vector<Tuple>> relations;
    for (std::size_t r = 0; r < t.signature().relations().size(); ++r) {
        auto & out = relations.emplace_back();
        for (auto & tuple : t.relation(r))
            if (std::ranges::all_of(tuple, [&](Elem e) { return std::ranges::binary_search(universe, e); }))
                out.push_back(tuple);
    }
    return Structure{t.signature(), std::move(universe), std::move(relations), t.constants()};
}

auto canonical_form(const Structure & s) -> std::string
{
    constexpr std::size_t max_brute_force = 9;
    if (s.size() > max_brute_force)
        throw Error("canonical_form is brute force; universe of size " + std::to_string(s.size()) + " exceeds "
            + std::to_string(max_brute_force));

    auto n = s.size();
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0U);

    std::vector<std::uint32_t> best, code;
    std::vector<std::vector<std::uint32_t>> renamed;
    do {
        code.clear();
        code.push_back(static_cast<std::uint32_t>(n));
        for (std::size_t r = 0; r < s.signature().relations().size(); ++r) {
            renamed.clear();
            for (auto & t : s.relation(r)) {
                auto & out = renamed.emplace_back();
                for (auto e : t)
                    out.push_back(perm[*s.local_index(e)]);
            }
            std::ranges::sort(renamed);
            code.push_back(static_cast<std::uint32_t>(renamed.size()));
            for (auto & t : renamed)
                code.insert(code.end(), t.begin(), t.end());
        }
        for (auto c : s.constants())
            code.push_back(perm[*s.local_index(c)]);
        if (best.empty() || code < best)
            best = code;
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::ostringstream out;
    out << s.signature().to_string() << '|';
    for (std::size_t i = 0; i < best.size(); ++i)
        out << (i ? "." : "") << best[i];
    return out.str();
}

} // namespace potsys
