#include <potsys/checker.hpp>
#include <potsys/error.hpp>

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace potsys {

auto tuple_assignment(std::span<const Elem> tuple) -> Assignment
{
    Assignment asg;
    for (std::size_t i = 0; i < tuple.size(); ++i)
        asg[slot_variable(i)] = tuple[i];
    return asg;
}

namespace {

auto check_symbols(const Signature & sig, const Formula & f, std::unordered_set<std::uint32_t> & seen) -> void
{
    if (! seen.insert(f.id()).second)
        return;
    if (f.kind() == FormulaKind::Atomic) {
        auto r = sig.relation_index(f.relation());
        if (! r)
            throw Error("unknown relation symbol '" + f.relation() + "'");
        if (sig.relations()[*r].arity != f.terms().size())
            throw Error("arity mismatch for '" + f.relation() + "': expected "
                + std::to_string(sig.relations()[*r].arity) + ", got " + std::to_string(f.terms().size()));
    }
    for (auto & t : f.terms())
        if (! t.is_variable() && ! sig.constant_index(t.name))
            throw Error("unknown constant '" + t.name + "'");
    for (auto & c : f.children())
        check_symbols(sig, c, seen);
}

auto constant_value(const Structure & s, const std::string & name) -> Elem
{
    return s.constants()[*s.signature().constant_index(name)];
}

struct MemoKey
{
    std::size_t world;
    std::uint32_t formula;
    std::vector<Elem> values;

    auto operator==(const MemoKey &) const -> bool = default;
};

struct MemoKeyHash
{
    auto operator()(const MemoKey & k) const noexcept -> std::size_t
    {
        std::size_t h = k.world * 0x9e3779b97f4a7c15ULL ^ k.formula;
        for (auto v : k.values)
            h = h * 1099511628211ULL ^ v;
        return h;
    }
};

} // namespace

struct ModelChecker::Impl
{
    const PotentialistSystem * sys;
    std::unordered_set<std::uint32_t> validated;
    std::unordered_map<MemoKey, bool, MemoKeyHash> memo;

    // `values` holds the values of f.free_variables(), in that order.
    static auto lookup(const Formula & f, const std::vector<Elem> & values, const std::string & var) -> Elem
    {
        auto & fv = f.free_variables();
        auto it = std::ranges::lower_bound(fv, var);
        return values[static_cast<std::size_t>(it - fv.begin())];
    }

    static auto project(const Formula & parent, const std::vector<Elem> & values, const Formula & child)
        -> std::vector<Elem>
    {
        std::vector<Elem> out;
        out.reserve(child.free_variables().size());
        for (auto & v : child.free_variables())
            out.push_back(lookup(parent, values, v));
        return out;
    }

    auto term_value(std::size_t world, const Formula & f, const std::vector<Elem> & values, const Term & t) const
        -> Elem
    {
        if (t.is_variable())
            return lookup(f, values, t.name);
        return constant_value(sys->structure(world), t.name);
    }

    auto eval(std::size_t world, const Formula & f, const std::vector<Elem> & values) -> bool
    {
        auto & s = sys->structure(world);
        switch (f.kind()) {
        case FormulaKind::Atomic: {
            Tuple args;
            for (auto & t : f.terms())
                args.push_back(term_value(world, f, values, t));
            return s.holds(*s.signature().relation_index(f.relation()), args);
        }
        case FormulaKind::Equal:
            return term_value(world, f, values, f.terms()[0]) == term_value(world, f, values, f.terms()[1]);
        default:
            break;
        }

        MemoKey key{world, f.id(), values};
        if (auto it = memo.find(key); it != memo.end())
            return it->second;

        bool result = false;
        switch (f.kind()) {
        case FormulaKind::Not:
            result = ! eval(world, f.child(), project(f, values, f.child()));
            break;
        case FormulaKind::And:
            result = std::ranges::all_of(f.children(), [&](const Formula & c) { return eval(world, c, project(f, values, c)); });
            break;
        case FormulaKind::Or:
            result = std::ranges::any_of(f.children(), [&](const Formula & c) { return eval(world, c, project(f, values, c)); });
            break;
        case FormulaKind::Exists:
        case FormulaKind::Forall: {
            auto body = f.child();
            auto want = f.kind() == FormulaKind::Exists;
            result = ! want;
            for (auto e : s.universe()) {
                std::vector<Elem> inner;
                for (auto & v : body.free_variables())
                    inner.push_back(v == f.variable() ? e : lookup(f, values, v));
                if (eval(world, body, inner) == want) {
                    result = want;
                    break;
                }
            }
            break;
        }
        case FormulaKind::Dia:
        case FormulaKind::Box: {
            auto body = f.child();
            auto want = f.kind() == FormulaKind::Dia;
            result = ! want;
            for (auto a : sys->arrows_from(world)) {
                auto & arrow = sys->arrow(a);
                std::vector<Elem> moved;
                for (auto v : values)
                    moved.push_back(arrow.map.at(v));
                if (eval(arrow.dst, body, moved) == want) {
                    result = want;
                    break;
                }
            }
            break;
        }
        default:
            break;
        }
        memo.emplace(std::move(key), result);
        return result;
    }
};

ModelChecker::ModelChecker(const PotentialistSystem & sys) :
    _impl(std::make_unique<Impl>())
{
    _impl->sys = &sys;
}

ModelChecker::~ModelChecker() = default;
ModelChecker::ModelChecker(ModelChecker &&) noexcept = default;
auto ModelChecker::operator=(ModelChecker &&) noexcept -> ModelChecker & = default;

auto ModelChecker::satisfies(std::size_t world, const Assignment & asg, const Formula & f) -> bool
{
    auto & sys = *_impl->sys;
    if (world >= sys.world_count())
        throw Error("world index " + std::to_string(world) + " out of range");
    check_symbols(sys.signature(), f, _impl->validated);

    std::vector<Elem> values;
    for (auto & v : f.free_variables()) {
        auto it = asg.find(v);
        if (it == asg.end())
            throw Error("unbound variable '" + v + "'");
        if (! sys.structure(world).contains(it->second))
            throw Error("variable '" + v + "' assigned element " + std::to_string(it->second)
                + " outside world '" + sys.world(world).name + "'");
        values.push_back(it->second);
    }
    return _impl->eval(world, f, values);
}

auto ModelChecker::memo_size() const -> std::size_t
{
    return _impl->memo.size();
}

auto satisfies(const PotentialistSystem & sys, std::size_t world, const Assignment & asg, const Formula & f) -> bool
{
    return ModelChecker{sys}.satisfies(world, asg, f);
}

namespace {

auto fo_term(const Structure & s, const Assignment & asg, const Term & t) -> Elem
{
    if (! t.is_variable())
        return constant_value(s, t.name);
    auto it = asg.find(t.name);
    if (it == asg.end())
        throw Error("unbound variable '" + t.name + "'");
    return it->second;
}

auto fo_eval(const Structure & s, Assignment & asg, const Formula & f) -> bool
{
    switch (f.kind()) {
    case FormulaKind::Atomic: {
        Tuple args;
        for (auto & t : f.terms())
            args.push_back(fo_term(s, asg, t));
        return s.holds(*s.signature().relation_index(f.relation()), args);
    }
    case FormulaKind::Equal:
        return fo_term(s, asg, f.terms()[0]) == fo_term(s, asg, f.terms()[1]);
    case FormulaKind::Not:
        return ! fo_eval(s, asg, f.child());
    case FormulaKind::And:
        for (auto & c : f.children())
            if (! fo_eval(s, asg, c))
                return false;
        return true;
    case FormulaKind::Or:
        for (auto & c : f.children())
            if (fo_eval(s, asg, c))
                return true;
        return false;
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
        auto want = f.kind() == FormulaKind::Exists;
        auto saved = asg.find(f.variable()) == asg.end() ? std::optional<Elem>{} : asg[f.variable()];
        auto result = ! want;
        for (auto e : s.universe()) {
            asg[f.variable()] = e;
            if (fo_eval(s, asg, f.child()) == want) {
                result = want;
                break;
            }
        }
        if (saved)
            asg[f.variable()] = *saved;
        else
            asg.erase(f.variable());
        return result;
    }
    case FormulaKind::Dia:
    case FormulaKind::Box:
        break;
    }
    throw Error("modal operator in a first-order formula");
}

} // namespace

auto satisfies_fo(const Structure & s, const Assignment & asg, const Formula & f) -> bool
{
    if (! f.modal_free())
        throw Error("satisfies_fo: formula contains a modal operator");
    std::unordered_set<std::uint32_t> seen;
    check_symbols(s.signature(), f, seen);
    for (auto & v : f.free_variables()) {
        auto it = asg.find(v);
        if (it == asg.end())
            throw Error("unbound variable '" + v + "'");
        if (! s.contains(it->second))
            throw Error("variable '" + v + "' assigned element " + std::to_string(it->second) + " outside the universe");
    }
    auto env = asg;
    return fo_eval(s, env, f);
}

} // namespace potsys
