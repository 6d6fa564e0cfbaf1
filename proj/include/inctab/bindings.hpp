#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "inctab/term.hpp"

namespace inctab {

/// A term read through a variable offset: canonical variable v denotes
/// runtime cell `off + v`. Ground terms ignore the offset.
struct Ref {
    Term term;
    std::int64_t off = 0;
};

/// Structure-sharing binding store with a trail. Cells are allocated in
/// frames; `mark`/`undo` restore both bindings and the allocation top.
class Bindings {
public:
    struct Mark {
        std::size_t trail;
        std::size_t cells;
    };

    /// Reserves `n` fresh unbound cells and returns the first cell index.
    std::int64_t alloc(std::size_t n);

    Mark mark() const { return {trail_.size(), cells_.size()}; }
    void undo(const Mark& m);

    /// Follows bindings until reaching a non-variable or an unbound cell.
    /// For an unbound result, `cell` receives its index; otherwise -1.
    Ref deref(Ref r, std::int64_t* cell = nullptr) const;

    bool unify(const Ref& a, const Ref& b);

    /// Rebuilds a plain term. Unbound cells are numbered by first occurrence
    /// via `numbering` (cell index -> canonical variable id), shared across
    /// calls so that several terms can be canonicalized jointly.
    Term resolve(const Ref& r, std::unordered_map<std::int64_t, VarId>& numbering) const;
    Term resolve(const Ref& r) const;

    /// True if the resolved term contains no unbound cell.
    bool is_ground(const Ref& r) const;

    std::size_t size() const { return cells_.size(); }

private:
    struct Cell {
        bool bound = false;
        Term term;
        std::int64_t off = 0;
    };

    void bind(std::int64_t cell, const Ref& value);
    bool occurs(std::int64_t cell, const Ref& r) const;

    std::vector<Cell> cells_;
    std::vector<std::int64_t> trail_;
};

} // namespace inctab
