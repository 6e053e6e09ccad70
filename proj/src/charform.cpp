#include <potsys/charform.hpp>
#include <potsys/error.hpp>

#include <algorithm>
#include <set>

namespace potsys {

namespace {

auto check_cap(unsigned alpha, unsigned cap, const char * what) -> void
{
    if (alpha > cap)
        throw CapExceeded(std::string(what) + ": alpha " + std::to_string(alpha) + " exceeds the cap "
            + std::to_string(cap));
}

auto term_for(const Signature & sig, std::size_t arity, std::uint32_t index) -> Term
{
    if (index < arity)
        return Term::var(slot_variable(index));
    return Term::constant(sig.constants()[index - arity]);
}

auto literal_formula(const Signature & sig, std::size_t arity, const Literal & lit) -> Formula
{
    Formula atom = Formula::verum();
    if (lit.kind == Literal::Kind::Equal) {
        atom = Formula::equal(term_for(sig, arity, lit.args[0]), term_for(sig, arity, lit.args[1]));
    } else {
        std::vector<Term> args;
        for (auto a : lit.args)
            args.push_back(term_for(sig, arity, a));
        atom = Formula::atomic(sig.relations()[lit.relation].name, std::move(args));
    }
    return lit.positive ? atom : Formula::negation(atom);
}

auto push_unique(std::vector<Formula> & fs, Formula f) -> void
{
    if (std::ranges::find(fs, f) == fs.end())
        fs.push_back(f);
}

} // namespace

ThetaSynthesizer::ThetaSynthesizer(const PotentialistSystem & sys, unsigned alpha_cap) :
    _sys(&sys),
    _cap(alpha_cap)
{
}

auto ThetaSynthesizer::theta(std::size_t world, const Tuple & tuple, unsigned alpha) -> Formula
{
    check_cap(alpha, _cap, "theta");
    auto key = std::tuple{world, tuple, alpha};
    if (auto it = _memo.find(key); it != _memo.end())
        return it->second;

    auto & s = _sys->structure(world);
    auto & sig = s.signature();
    Formula result = Formula::verum();
    if (alpha == 0) {
        std::vector<Formula> literals;
        for (auto & lit : atomic_type(s, tuple).literals)
            literals.push_back(literal_formula(sig, tuple.size(), lit));
        result = Formula::conjunction(std::move(literals));
    } else {
        auto var = slot_variable(tuple.size());
        std::vector<Formula> extensions;
        for (auto u : s.universe()) {
            auto extended = tuple;
            extended.push_back(u);
            push_unique(extensions, theta(world, extended, alpha - 1));
        }
        std::vector<Formula> forth;
        for (auto & f : extensions)
            forth.push_back(Formula::exists(var, f));

        std::vector<Formula> phi;
        for (auto a : _sys->arrows_from(world)) {
            auto & arrow = _sys->arrow(a);
            push_unique(phi, theta(arrow.dst, arrow.map.apply(tuple), alpha - 1));
        }
        std::vector<Formula> possible;
        for (auto & f : phi)
            possible.push_back(Formula::diamond(f));

        result = Formula::conjunction({
            Formula::conjunction(std::move(forth)),
            Formula::forall(var, Formula::disjunction(std::move(extensions))),
            Formula::conjunction(std::move(possible)),
            Formula::box(Formula::disjunction(std::move(phi))),
        });
    }
    _memo.emplace(std::move(key), result);
    return result;
}

auto theta(const PotentialistSystem & sys, std::size_t world, const Tuple & tuple, unsigned alpha, unsigned alpha_cap)
    -> Formula
{
    return ThetaSynthesizer{sys, alpha_cap}.theta(world, tuple, alpha);
}

namespace {

auto edge(const std::string & from, const std::string & to) -> Formula
{
    return Formula::atomic("R", {Term::var(from), Term::var(to)});
}

// Uses only the variables x and y, alternating with depth.
auto xi_in(unsigned alpha, const std::string & x) -> Formula
{
    auto y = x == "x" ? std::string("y") : std::string("x");
    std::vector<Formula> below;
    std::vector<Formula> some;
    for (unsigned beta = 0; beta < alpha; ++beta) {
        auto inner = xi_in(beta, y);
        below.push_back(Formula::exists(y, Formula::conjunction({edge(y, x), inner})));
        some.push_back(inner);
    }
    return Formula::conjunction({
        Formula::conjunction(std::move(below)),
        Formula::forall(y, Formula::implies(edge(y, x), Formula::disjunction(std::move(some)))),
    });
}

} // namespace

auto xi(unsigned alpha, unsigned alpha_cap) -> Formula
{
    check_cap(alpha, alpha_cap, "xi");
    return xi_in(alpha, "x");
}

auto nu(unsigned alpha, unsigned alpha_cap) -> Formula
{
    check_cap(alpha, alpha_cap, "nu");
    auto maximal = Formula::forall("y", Formula::negation(edge("x", "y")));
    return Formula::exists("x", Formula::conjunction({maximal, xi_in(alpha, "x")}));
}

auto ordinal_graph(unsigned alpha, unsigned alpha_cap) -> Structure
{
    check_cap(alpha, alpha_cap, "ordinal_graph");
    std::vector<Elem> universe;
    std::vector<Tuple> less;
    for (Elem i = 0; i <= alpha; ++i) {
        universe.push_back(i);
        for (Elem j = i + 1; j <= alpha; ++j)
            less.push_back({i, j});
    }
    return Structure{Signature{{{"R", 2}}, {}}, std::move(universe), {std::move(less)}};
}

namespace {

struct ButtonNode
{
    std::string name;
    unsigned depth;
    std::size_t parent;
};

auto grow(std::vector<ButtonNode> & nodes, std::size_t at, unsigned height) -> void
{
    for (unsigned beta = 0; beta < height; ++beta) {
        auto child = nodes.size();
        nodes.push_back({nodes[at].name + "." + std::to_string(beta), nodes[at].depth + 1, at});
        grow(nodes, child, beta);
    }
}

} // namespace

auto button_system(unsigned alpha, unsigned buttons, unsigned base_size, unsigned alpha_cap) -> ButtonSystem
{
    check_cap(alpha, alpha_cap, "button_system");
    if (buttons < alpha)
        throw Error("button system of height " + std::to_string(alpha) + " needs at least " + std::to_string(alpha)
            + " buttons, got " + std::to_string(buttons));

    std::vector<ButtonNode> nodes{{"r", 0, 0}};
    grow(nodes, 0, alpha);

    Signature sig{{{"E", 2}}, {}};
    auto u = [&](unsigned i) { return static_cast<Elem>(base_size + i); };
    auto v = [&](unsigned i) { return static_cast<Elem>(base_size + buttons + i); };

    std::vector<World> worlds;
    for (auto & node : nodes) {
        std::vector<Elem> universe;
        for (Elem e = 0; e < base_size + buttons; ++e)
            universe.push_back(e);
        for (unsigned i = 0; i < node.depth; ++i)
            universe.push_back(v(i));
        std::vector<Tuple> eq;
        for (auto e : universe)
            eq.push_back({e, e});
        for (unsigned i = 0; i < node.depth; ++i) {
            eq.push_back({u(i), v(i)});
            eq.push_back({v(i), u(i)});
        }
        worlds.push_back({node.name, Structure{sig, universe, {std::move(eq)}}});
    }

    std::vector<Arrow> arrows;
    for (std::size_t i = 1; i < nodes.size(); ++i)
        arrows.push_back({nodes[i].parent, i, ElementMap::identity(worlds[nodes[i].parent].structure.universe())});

    return {PotentialistSystem::validate_or_close(std::move(worlds), std::move(arrows), ClosureMode::Close), 0};
}

namespace {

auto related(const std::string & a, const std::string & b) -> Formula
{
    return Formula::atomic("E", {Term::var(a), Term::var(b)});
}

auto partnered() -> Formula
{
    return Formula::exists("y",
        Formula::conjunction(
            {Formula::negation(Formula::equal(Term::var("x"), Term::var("y"))), related("x", "y")}));
}

} // namespace

auto button_theta(unsigned alpha, unsigned alpha_cap) -> Formula
{
    check_cap(alpha, alpha_cap, "button_theta");
    auto p = Formula::negation(partnered());
    auto q = partnered();

    std::vector<Formula> below;
    for (unsigned beta = 0; beta < alpha; ++beta)
        below.push_back(button_theta(beta, alpha_cap));

    std::vector<Formula> pushes;
    for (auto & t : below)
        pushes.push_back(Formula::diamond(Formula::conjunction({q, t})));

    auto some = Formula::exists("x", Formula::conjunction({p, Formula::conjunction(std::move(pushes))}));
    auto every = Formula::forall("x",
        Formula::implies(p, Formula::box(Formula::implies(q, Formula::disjunction(std::move(below))))));
    return Formula::conjunction({some, every});
}

} // namespace potsys
