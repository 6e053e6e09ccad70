#pragma once

// Text formats for structures and systems.
//
//   signature { R: 2; c: const; }                 -- optional
//   structure A { universe: 0 1 2; R: (0 1) (1 2); c: 0 }
//   system S {
//       structures: "more.str";                   -- loaded relative to the file
//       structure B { universe: 0 1; R: (0 1) }  -- inline
//       arrows: A -> B [0->0], B -> B [0->0, 1->1];
//       close: true;                              -- default
//   }
//
// Without a signature block, arities are inferred from the tuples. A file
// without a system block describes the system of its structures with
// identity arrows only. `#` starts a comment.

#include <potsys/system.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace potsys {

struct NamedSystem
{
    std::string name;
    PotentialistSystem system;
};

/// `base_dir` resolves `structures: "file"` references.
auto parse_system(std::string_view text, const std::filesystem::path & base_dir = {}) -> NamedSystem;

auto load_system(const std::filesystem::path & path) -> NamedSystem;

/// Structures of a file in order of appearance, with their names.
auto parse_structures(std::string_view text, const std::filesystem::path & base_dir = {}) -> std::vector<World>;

auto write_structure(const std::string & name, const Structure & s) -> std::string;

/// Every arrow is written out with `close: false`, so parse_system
/// reproduces an equal system.
auto write_system(const std::string & name, const PotentialistSystem & sys) -> std::string;

/// One arrow per line: "src<TAB>dst<TAB>0->1, 1->2", in arrow order.
auto write_adjacency(const PotentialistSystem & sys) -> std::string;

} // namespace potsys
