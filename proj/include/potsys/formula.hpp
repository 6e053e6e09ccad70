#pragma once

// Hash-consed AST for the finitary modal language, with an s-expression
// reader and printer.
//
// Grammar:
//   f ::= (rel NAME t...) | (= t t) | (not f) | (and f...) | (or f...)
//       | (exists v f) | (forall v f) | (dia f) | (box f)
//   t ::= v | @c        -- a variable, or the constant named c
//
// (and) is verum and (or) is falsum.

#include <potsys/structure.hpp>

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace potsys {

enum class FormulaKind : std::uint8_t
{
    Atomic,
    Equal,
    Not,
    And,
    Or,
    Exists,
    Forall,
    Dia,
    Box
};

struct Term
{
    enum class Kind : std::uint8_t
    {
        Variable,
        Constant
    };

    Kind kind = Kind::Variable;
    std::string name;

    static auto var(std::string name) -> Term { return {Kind::Variable, std::move(name)}; }
    static auto constant(std::string name) -> Term { return {Kind::Constant, std::move(name)}; }

    auto is_variable() const -> bool { return kind == Kind::Variable; }
    auto operator<=>(const Term &) const = default;
};

namespace detail {
struct FormulaNode;
}

/// Handle to an interned formula. Structurally equal formulas share one node,
/// so `==` is identity comparison. Nodes live for the whole process.
class Formula
{
public:
    static auto atomic(std::string relation, std::vector<Term> args) -> Formula;
    static auto equal(Term lhs, Term rhs) -> Formula;
    static auto negation(Formula f) -> Formula;
    static auto conjunction(std::vector<Formula> fs) -> Formula;
    static auto disjunction(std::vector<Formula> fs) -> Formula;
    static auto exists(std::string var, Formula f) -> Formula;
    static auto forall(std::string var, Formula f) -> Formula;
    static auto diamond(Formula f) -> Formula;
    static auto box(Formula f) -> Formula;

    static auto verum() -> Formula { return conjunction({}); }
    static auto falsum() -> Formula { return disjunction({}); }
    /// (or (not a) b)
    static auto implies(Formula a, Formula b) -> Formula;

    auto kind() const -> FormulaKind;
    /// Relation name of an Atomic node.
    auto relation() const -> const std::string &;
    /// Bound variable of an Exists/Forall node.
    auto variable() const -> const std::string &;
    auto terms() const -> const std::vector<Term> &;
    auto children() const -> const std::vector<Formula> &;
    auto child() const -> Formula;

    /// Dense identity assigned at interning time.
    auto id() const -> std::uint32_t;
    auto mqrank() const -> unsigned;
    /// Sorted free variable names.
    auto free_variables() const -> const std::vector<std::string> &;
    /// Node count of the tree (not the DAG), saturating.
    auto tree_size() const -> std::uint64_t;
    auto modal_free() const -> bool;

    auto operator==(const Formula & other) const -> bool { return _node == other._node; }

private:
    explicit Formula(const detail::FormulaNode * node) :
        _node(node)
    {
    }

    friend auto intern(detail::FormulaNode node) -> Formula;

    const detail::FormulaNode * _node;
};

struct FormulaHash
{
    auto operator()(const Formula & f) const noexcept -> std::size_t { return f.id(); }
};

/// Canonical single-line rendering.
auto to_string(const Formula & f) -> std::string;

/// Parses one formula. With a signature, relation names, arities and
/// constants are checked.
auto parse_formula(std::string_view text, const Signature * signature = nullptr) -> Formula;

/// Parses a sequence of formulas, ignoring `;` comments to end of line.
auto parse_formula_list(std::string_view text, const Signature * signature = nullptr) -> std::vector<Formula>;

/// Replaces every (box g) with (not (dia (not g))).
auto box_to_dia(const Formula & f) -> Formula;

/// Number of interned formulas so far.
auto interned_formula_count() -> std::size_t;

struct RandomFormulaOptions
{
    unsigned rank_bound = 2;
    std::uint64_t size_bound = 12;
    std::uint64_t seed = 0;
    /// Free variables are drawn from x0..x(free_variables-1); bound
    /// variables continue the numbering.
    std::size_t free_variables = 0;
    bool allow_modal = true;
};

/// Deterministic for a given seed and signature. mqrank(result) <=
/// rank_bound and tree_size(result) <= max(size_bound, 1).
auto random_formula(const Signature & signature, const RandomFormulaOptions & options) -> Formula;

/// "x0", "x1", ... -- the variable slots used by synthesized formulas.
auto slot_variable(std::size_t index) -> std::string;

} // namespace potsys
