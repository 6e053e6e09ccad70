#include <potsys/error.hpp>
#include <potsys/formula.hpp>

#include <algorithm>
#include <cctype>
#include <deque>
#include <mutex>
#include <random>
#include <unordered_map>

namespace potsys {

namespace detail {

struct FormulaNode
{
    FormulaKind kind = FormulaKind::Atomic;
    std::string symbol;
    std::vector<Term> terms;
    std::vector<Formula> children;

    std::uint32_t id = 0;
    unsigned rank = 0;
    std::uint64_t tree_size = 1;
    bool modal_free = true;
    std::vector<std::string> free_vars;
};

} // namespace detail

namespace {

struct NodeKey
{
    FormulaKind kind;
    std::string symbol;
    std::vector<Term> terms;
    std::vector<std::uint32_t> children;

    auto operator==(const NodeKey &) const -> bool = default;
};

struct NodeKeyHash
{
    auto operator()(const NodeKey & k) const noexcept -> std::size_t
    {
        std::size_t h = std::hash<int>{}(static_cast<int>(k.kind));
        auto mix = [&](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
        mix(std::hash<std::string>{}(k.symbol));
        for (auto & t : k.terms) {
            mix(static_cast<std::size_t>(t.kind));
            mix(std::hash<std::string>{}(t.name));
        }
        for (auto c : k.children)
            mix(c);
        return h;
    }
};

// Append-only registry; insertion is serialized so that concurrent
// construction is linearizable.
class FormulaTable
{
public:
    auto intern(detail::FormulaNode node) -> const detail::FormulaNode *
    {
        NodeKey key{node.kind, node.symbol, node.terms, {}};
        for (auto & c : node.children)
            key.children.push_back(c.id());

        std::lock_guard lock(_mutex);
        if (auto it = _index.find(key); it != _index.end())
            return it->second;
        node.id = static_cast<std::uint32_t>(_nodes.size());
        auto & stored = _nodes.emplace_back(std::move(node));
        _index.emplace(std::move(key), &stored);
        return &stored;
    }

    auto size() -> std::size_t
    {
        std::lock_guard lock(_mutex);
        return _nodes.size();
    }

private:
    std::mutex _mutex;
    std::deque<detail::FormulaNode> _nodes;
    std::unordered_map<NodeKey, const detail::FormulaNode *, NodeKeyHash> _index;
};

auto table() -> FormulaTable &
{
    static FormulaTable instance;
    return instance;
}

auto saturating_add(std::uint64_t a, std::uint64_t b) -> std::uint64_t
{
    return a > UINT64_MAX - b ? UINT64_MAX : a + b;
}

auto merge_vars(std::vector<std::string> & into, const std::vector<std::string> & from) -> void
{
    std::vector<std::string> merged;
    std::ranges::set_union(into, from, std::back_inserter(merged));
    into = std::move(merged);
}

} // namespace

auto intern(detail::FormulaNode node) -> Formula
{
    switch (node.kind) {
    case FormulaKind::Atomic:
    case FormulaKind::Equal:
        node.rank = 0;
        node.tree_size = 1;
        for (auto & t : node.terms)
            if (t.is_variable())
                node.free_vars.push_back(t.name);
        std::ranges::sort(node.free_vars);
        node.free_vars.erase(std::unique(node.free_vars.begin(), node.free_vars.end()), node.free_vars.end());
        break;
    default:
        node.rank = 0;
        node.tree_size = 1;
        for (auto & c : node.children) {
            node.rank = std::max(node.rank, c.mqrank());
            node.tree_size = saturating_add(node.tree_size, c.tree_size());
            node.modal_free = node.modal_free && c.modal_free();
            merge_vars(node.free_vars, c.free_variables());
        }
        break;
    }

    switch (node.kind) {
    case FormulaKind::Exists:
    case FormulaKind::Forall:
        node.rank += 1;
        std::erase(node.free_vars, node.symbol);
        break;
    case FormulaKind::Dia:
    case FormulaKind::Box:
        node.rank += 1;
        node.modal_free = false;
        break;
    default:
        break;
    }
    return Formula{table().intern(std::move(node))};
}

auto Formula::atomic(std::string relation, std::vector<Term> args) -> Formula
{
    detail::FormulaNode node;
    node.kind = FormulaKind::Atomic;
    node.symbol = std::move(relation);
    node.terms = std::move(args);
    return intern(std::move(node));
}

auto Formula::equal(Term lhs, Term rhs) -> Formula
{
    detail::FormulaNode node;
    node.kind = FormulaKind::Equal;
    node.terms = {std::move(lhs), std::move(rhs)};
    return intern(std::move(node));
}

namespace {

auto unary(FormulaKind kind, Formula f, std::string var = {}) -> Formula
{
    detail::FormulaNode node;
    node.kind = kind;
    node.symbol = std::move(var);
    node.children = {f};
    return intern(std::move(node));
}

auto nary(FormulaKind kind, std::vector<Formula> fs) -> Formula
{
    detail::FormulaNode node;
    node.kind = kind;
    node.children = std::move(fs);
    return intern(std::move(node));
}

} // namespace

auto Formula::negation(Formula f) -> Formula { return unary(FormulaKind::Not, f); }
auto Formula::conjunction(std::vector<Formula> fs) -> Formula { return nary(FormulaKind::And, std::move(fs)); }
auto Formula::disjunction(std::vector<Formula> fs) -> Formula { return nary(FormulaKind::Or, std::move(fs)); }
auto Formula::exists(std::string var, Formula f) -> Formula { return unary(FormulaKind::Exists, f, std::move(var)); }
auto Formula::forall(std::string var, Formula f) -> Formula { return unary(FormulaKind::Forall, f, std::move(var)); }
auto Formula::diamond(Formula f) -> Formula { return unary(FormulaKind::Dia, f); }
auto Formula::box(Formula f) -> Formula { return unary(FormulaKind::Box, f); }

auto Formula::implies(Formula a, Formula b) -> Formula
{
    return disjunction({negation(a), b});
}

auto Formula::kind() const -> FormulaKind { return _node->kind; }
auto Formula::relation() const -> const std::string & { return _node->symbol; }
auto Formula::variable() const -> const std::string & { return _node->symbol; }
auto Formula::terms() const -> const std::vector<Term> & { return _node->terms; }
auto Formula::children() const -> const std::vector<Formula> & { return _node->children; }
auto Formula::child() const -> Formula { return _node->children.at(0); }
auto Formula::id() const -> std::uint32_t { return _node->id; }
auto Formula::mqrank() const -> unsigned { return _node->rank; }
auto Formula::free_variables() const -> const std::vector<std::string> & { return _node->free_vars; }
auto Formula::tree_size() const -> std::uint64_t { return _node->tree_size; }
auto Formula::modal_free() const -> bool { return _node->modal_free; }

auto interned_formula_count() -> std::size_t
{
    return table().size();
}

auto slot_variable(std::size_t index) -> std::string
{
    return "x" + std::to_string(index);
}

namespace {

auto append_term(std::string & out, const Term & t) -> void
{
    if (! t.is_variable())
        out += '@';
    out += t.name;
}

auto append_formula(std::string & out, const Formula & f) -> void
{
    out += '(';
    switch (f.kind()) {
    case FormulaKind::Atomic:
        out += "rel ";
        out += f.relation();
        for (auto & t : f.terms()) {
            out += ' ';
            append_term(out, t);
        }
        break;
    case FormulaKind::Equal:
        out += "= ";
        append_term(out, f.terms()[0]);
        out += ' ';
        append_term(out, f.terms()[1]);
        break;
    case FormulaKind::Not:
        out += "not ";
        append_formula(out, f.child());
        break;
    case FormulaKind::And:
    case FormulaKind::Or:
        out += f.kind() == FormulaKind::And ? "and" : "or";
        for (auto & c : f.children()) {
            out += ' ';
            append_formula(out, c);
        }
        break;
    case FormulaKind::Exists:
    case FormulaKind::Forall:
        out += f.kind() == FormulaKind::Exists ? "exists " : "forall ";
        out += f.variable();
        out += ' ';
        append_formula(out, f.child());
        break;
    case FormulaKind::Dia:
    case FormulaKind::Box:
        out += f.kind() == FormulaKind::Dia ? "dia " : "box ";
        append_formula(out, f.child());
        break;
    }
    out += ')';
}

class FormulaReader
{
public:
    FormulaReader(std::string_view text, const Signature * signature) :
        _text(text),
        _signature(signature)
    {
    }

    auto at_end() -> bool
    {
        skip_space();
        return _pos >= _text.size();
    }

    auto read() -> Formula
    {
        expect_open();
        auto head_at = peek_offset();
        auto head = atom("operator");
        if (head == "rel")
            return read_atomic(head_at);
        if (head == "=") {
            auto lhs = read_term();
            auto rhs = read_term();
            expect_close();
            return Formula::equal(std::move(lhs), std::move(rhs));
        }
        if (head == "not") {
            auto f = read();
            expect_close();
            return Formula::negation(f);
        }
        if (head == "and" || head == "or") {
            std::vector<Formula> fs;
            while (! peek_close())
                fs.push_back(read());
            expect_close();
            return head == "and" ? Formula::conjunction(std::move(fs)) : Formula::disjunction(std::move(fs));
        }
        if (head == "exists" || head == "forall") {
            auto var_at = peek_offset();
            auto var = atom("variable");
            if (var.starts_with('@'))
                throw SyntaxError(error_at(var_at, "cannot bind constant '" + var + "'"), var_at);
            auto f = read();
            expect_close();
            return head == "exists" ? Formula::exists(std::move(var), f) : Formula::forall(std::move(var), f);
        }
        if (head == "dia" || head == "box") {
            auto f = read();
            expect_close();
            return head == "dia" ? Formula::diamond(f) : Formula::box(f);
        }
        throw SyntaxError(error_at(head_at, "unknown operator '" + head + "'"), head_at);
    }

private:
    auto read_atomic(std::size_t head_at) -> Formula
    {
        auto name_at = peek_offset();
        auto name = atom("relation name");
        std::vector<Term> args;
        while (! peek_close())
            args.push_back(read_term());
        expect_close();
        if (_signature) {
            auto r = _signature->relation_index(name);
            if (! r)
                throw SyntaxError(error_at(name_at, "unknown relation symbol '" + name + "'"), name_at);
            if (_signature->relations()[*r].arity != args.size())
                throw SyntaxError(error_at(head_at,
                                      "arity mismatch for '" + name + "': expected "
                                          + std::to_string(_signature->relations()[*r].arity) + ", got "
                                          + std::to_string(args.size())),
                    head_at);
        }
        if (args.empty())
            throw SyntaxError(error_at(head_at, "relation '" + name + "' applied to no arguments"), head_at);
        return Formula::atomic(std::move(name), std::move(args));
    }

    auto read_term() -> Term
    {
        auto at = peek_offset();
        auto name = atom("term");
        if (name.starts_with('@')) {
            name.erase(0, 1);
            if (name.empty())
                throw SyntaxError(error_at(at, "empty constant name"), at);
            if (_signature && ! _signature->constant_index(name))
                throw SyntaxError(error_at(at, "unknown constant '" + name + "'"), at);
            return Term::constant(std::move(name));
        }
        return Term::var(std::move(name));
    }

    auto skip_space() -> void
    {
        while (_pos < _text.size()) {
            if (std::isspace(static_cast<unsigned char>(_text[_pos])))
                ++_pos;
            else if (_text[_pos] == ';')
                while (_pos < _text.size() && _text[_pos] != '\n')
                    ++_pos;
            else
                break;
        }
    }

    auto peek_offset() -> std::size_t
    {
        skip_space();
        return _pos;
    }

    auto error_at(std::size_t offset, const std::string & message) const -> std::string
    {
        if (offset >= _text.size())
            return "syntax error at end of input: " + message;
        return "syntax error at offset " + std::to_string(offset) + ": " + message;
    }

    auto expect_open() -> void
    {
        skip_space();
        if (_pos >= _text.size())
            throw SyntaxError(error_at(_pos, "expected '('"), _pos);
        if (_text[_pos] != '(')
            throw SyntaxError(error_at(_pos, "expected '('"), _pos);
        ++_pos;
    }

    auto peek_close() -> bool
    {
        skip_space();
        if (_pos >= _text.size())
            throw SyntaxError(error_at(_pos, "expected ')'"), _pos);
        return _text[_pos] == ')';
    }

    auto expect_close() -> void
    {
        if (! peek_close())
            throw SyntaxError(error_at(_pos, "expected ')'"), _pos);
        ++_pos;
    }

    auto atom(const char * what) -> std::string
    {
        skip_space();
        if (_pos >= _text.size())
            throw SyntaxError(error_at(_pos, std::string("expected ") + what), _pos);
        auto start = _pos;
        while (_pos < _text.size()) {
            char c = _text[_pos];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ';')
                break;
            ++_pos;
        }
        if (start == _pos)
            throw SyntaxError(error_at(start, std::string("expected ") + what), start);
        return std::string(_text.substr(start, _pos - start));
    }

    std::string_view _text;
    const Signature * _signature;
    std::size_t _pos = 0;
};

} // namespace

auto to_string(const Formula & f) -> std::string
{
    std::string out;
    append_formula(out, f);
    return out;
}

auto parse_formula(std::string_view text, const Signature * signature) -> Formula
{
    FormulaReader reader{text, signature};
    auto f = reader.read();
    if (! reader.at_end())
        throw SyntaxError("syntax error: trailing input after formula", 0);
    return f;
}

auto parse_formula_list(std::string_view text, const Signature * signature) -> std::vector<Formula>
{
    FormulaReader reader{text, signature};
    std::vector<Formula> out;
    while (! reader.at_end())
        out.push_back(reader.read());
    return out;
}

namespace {

auto rebuild(const Formula & f, std::vector<Formula> children) -> Formula
{
    switch (f.kind()) {
    case FormulaKind::Atomic:
    case FormulaKind::Equal:
        return f;
    case FormulaKind::Not:
        return Formula::negation(children[0]);
    case FormulaKind::And:
        return Formula::conjunction(std::move(children));
    case FormulaKind::Or:
        return Formula::disjunction(std::move(children));
    case FormulaKind::Exists:
        return Formula::exists(f.variable(), children[0]);
    case FormulaKind::Forall:
        return Formula::forall(f.variable(), children[0]);
    case FormulaKind::Dia:
        return Formula::diamond(children[0]);
    case FormulaKind::Box:
        return Formula::box(children[0]);
    }
    return f;
}

auto box_to_dia_memo(const Formula & f, std::unordered_map<std::uint32_t, Formula> & memo) -> Formula
{
    if (auto it = memo.find(f.id()); it != memo.end())
        return it->second;
    std::vector<Formula> children;
    for (auto & c : f.children())
        children.push_back(box_to_dia_memo(c, memo));
    auto out = f.kind() == FormulaKind::Box
        ? Formula::negation(Formula::diamond(Formula::negation(children[0])))
        : rebuild(f, std::move(children));
    memo.emplace(f.id(), out);
    return out;
}

class RandomFormulaBuilder
{
public:
    RandomFormulaBuilder(const Signature & signature, const RandomFormulaOptions & options) :
        _signature(signature),
        _options(options),
        _rng(options.seed)
    {
    }

    auto build() -> Formula
    {
        return gen(_options.rank_bound, std::max<std::uint64_t>(_options.size_bound, 1), _options.free_variables);
    }

private:
    auto pick(std::uint64_t n) -> std::uint64_t { return _rng() % n; }

    auto random_term(std::size_t scope) -> Term
    {
        auto constants = _signature.constants().size();
        auto k = pick(scope + constants);
        if (k < scope)
            return Term::var(slot_variable(k));
        return Term::constant(_signature.constants()[k - scope]);
    }

    auto leaf(std::size_t scope) -> Formula
    {
        if (scope + _signature.constants().size() == 0)
            return pick(2) ? Formula::verum() : Formula::falsum();
        auto relations = _signature.relations().size();
        auto k = pick(relations + 1);
        if (k == relations)
            return Formula::equal(random_term(scope), random_term(scope));
        std::vector<Term> args;
        for (std::size_t i = 0; i < _signature.relations()[k].arity; ++i)
            args.push_back(random_term(scope));
        return Formula::atomic(_signature.relations()[k].name, std::move(args));
    }

    auto gen(unsigned rank, std::uint64_t size, std::size_t scope) -> Formula
    {
        if (size == 1 || pick(5) == 0)
            return leaf(scope);

        enum Choice
        {
            Not,
            Binary,
            Quantifier,
            Modal
        };
        std::vector<Choice> choices{Not};
        if (size >= 3)
            choices.push_back(Binary);
        if (rank > 0) {
            choices.push_back(Quantifier);
            if (_options.allow_modal)
                choices.push_back(Modal);
        }

        switch (choices[pick(choices.size())]) {
        case Not:
            return Formula::negation(gen(rank, size - 1, scope));
        case Binary: {
            auto left = 1 + pick(size - 2);
            auto a = gen(rank, left, scope);
            auto b = gen(rank, size - 1 - left, scope);
            return pick(2) ? Formula::conjunction({a, b}) : Formula::disjunction({a, b});
        }
        case Quantifier: {
            auto var = slot_variable(scope);
            auto body = gen(rank - 1, size - 1, scope + 1);
            return pick(2) ? Formula::exists(var, body) : Formula::forall(var, body);
        }
        case Modal: {
            auto body = gen(rank - 1, size - 1, scope);
            return pick(2) ? Formula::diamond(body) : Formula::box(body);
        }
        }
        return leaf(scope);
    }

    const Signature & _signature;
    const RandomFormulaOptions & _options;
    std::mt19937_64 _rng;
};

} // namespace

auto box_to_dia(const Formula & f) -> Formula
{
    std::unordered_map<std::uint32_t, Formula> memo;
    return box_to_dia_memo(f, memo);
}

auto random_formula(const Signature & signature, const RandomFormulaOptions & options) -> Formula
{
    return RandomFormulaBuilder{signature, options}.build();
}

} // namespace potsys
