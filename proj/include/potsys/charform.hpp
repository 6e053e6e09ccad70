#pragma once

// Characteristic formulas, the ordinal-graph sentences and the button
// systems.

#include <potsys/formula.hpp>
#include <potsys/system.hpp>

#include <map>
#include <tuple>

namespace potsys {

inline constexpr unsigned default_alpha_cap = 4;

/// theta_alpha of pointed worlds of one system, memoized on
/// (world, tuple, alpha). Tuple positions become the variables x0, x1, ...
/// and constants appear as themselves.
class ThetaSynthesizer
{
public:
    explicit ThetaSynthesizer(const PotentialistSystem & sys, unsigned alpha_cap = default_alpha_cap);

    /// Satisfied at (N, b) exactly when the game position (world, tuple, N, b)
    /// has rank >= alpha. mqrank(result) == alpha.
    auto theta(std::size_t world, const Tuple & tuple, unsigned alpha) -> Formula;

    auto memo_size() const -> std::size_t { return _memo.size(); }

private:
    const PotentialistSystem * _sys;
    unsigned _cap;
    std::map<std::tuple<std::size_t, Tuple, unsigned>, Formula> _memo;
};

auto theta(const PotentialistSystem & sys, std::size_t world, const Tuple & tuple, unsigned alpha,
    unsigned alpha_cap = default_alpha_cap) -> Formula;

/// xi_alpha(x): "x has exactly the order type alpha below it" over the
/// relation R. Free variable "x".
auto xi(unsigned alpha, unsigned alpha_cap = default_alpha_cap) -> Formula;

/// Exists an R-maximal x with xi_alpha(x).
auto nu(unsigned alpha, unsigned alpha_cap = default_alpha_cap) -> Formula;

/// Universe {0..alpha}, R = {(i, j) : i < j}.
auto ordinal_graph(unsigned alpha, unsigned alpha_cap = default_alpha_cap) -> Structure;

struct ButtonSystem
{
    PotentialistSystem system;
    std::size_t root;
};

/// Worlds are the nodes of the tree whose root has one child subtree of
/// each height below alpha. A node at depth d has buttons 0..d-1 pushed.
/// Signature: one binary relation "E", an equivalence.
auto button_system(unsigned alpha, unsigned buttons, unsigned base_size, unsigned alpha_cap = default_alpha_cap)
    -> ButtonSystem;

/// The sentence holding at a button-system root exactly when its tree has
/// height alpha.
auto button_theta(unsigned alpha, unsigned alpha_cap = default_alpha_cap) -> Formula;

} // namespace potsys
