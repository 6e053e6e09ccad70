#pragma once

// Satisfaction of modal formulas at pointed systems.

#include <potsys/formula.hpp>
#include <potsys/system.hpp>

#include <map>
#include <memory>
#include <string>

namespace potsys {

using Assignment = std::map<std::string, Elem>;

/// x0 -> t[0], x1 -> t[1], ...
auto tuple_assignment(std::span<const Elem> tuple) -> Assignment;

/// Evaluates formulas over one system. Results are memoized on
/// (world, formula, values of the free variables), so reuse one checker for
/// many queries against the same system.
class ModelChecker
{
public:
    explicit ModelChecker(const PotentialistSystem & sys);
    ~ModelChecker();
    ModelChecker(ModelChecker &&) noexcept;
    auto operator=(ModelChecker &&) noexcept -> ModelChecker &;

    /// Throws on unbound free variables, unknown symbols and arity
    /// mismatches, and when an assigned value lies outside the world.
    auto satisfies(std::size_t world, const Assignment & asg, const Formula & f) -> bool;

    auto memo_size() const -> std::size_t;

private:
    struct Impl;
    std::unique_ptr<Impl> _impl;
};

auto satisfies(const PotentialistSystem & sys, std::size_t world, const Assignment & asg, const Formula & f) -> bool;

/// Plain first-order satisfaction in a single structure. Rejects formulas
/// containing modal operators.
auto satisfies_fo(const Structure & s, const Assignment & asg, const Formula & f) -> bool;

} // namespace potsys
