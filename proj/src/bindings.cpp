#include "inctab/bindings.hpp"

namespace inctab {

std::int64_t Bindings::alloc(std::size_t n) {
    auto start = static_cast<std::int64_t>(cells_.size());
    cells_.resize(cells_.size() + n);
    return start;
}

void Bindings::undo(const Mark& m) {
    while (trail_.size() > m.trail) {
        std::int64_t c = trail_.back();
        trail_.pop_back();
        if (static_cast<std::size_t>(c) < cells_.size()) {
            cells_[c].bound = false;
            cells_[c].term = Term();
        }
    }
    if (cells_.size() > m.cells) cells_.resize(m.cells);
}

Ref Bindings::deref(Ref r, std::int64_t* cell) const {
    while (r.term.is_var()) {
        std::int64_t c = r.off + r.term.var_id();
        const Cell& cl = cells_[c];
        if (!cl.bound) {
            if (cell) *cell = c;
            return r;
        }
        r.term = cl.term;
        r.off = cl.off;
    }
    if (cell) *cell = -1;
    return r;
}

void Bindings::bind(std::int64_t cell, const Ref& value) {
    Cell& c = cells_[cell];
    c.bound = true;
    c.term = value.term;
    c.off = value.off;
    trail_.push_back(cell);
}

bool Bindings::occurs(std::int64_t cell, const Ref& r) const {
    if (r.term.ground()) return false;
    std::int64_t c;
    Ref d = deref(r, &c);
    if (c >= 0) return c == cell;
    if (!d.term.is_compound() || d.term.ground()) return false;
    for (const Term& a : d.term.args())
        if (occurs(cell, Ref{a, d.off})) return true;
    return false;
}

bool Bindings::unify(const Ref& a0, const Ref& b0) {
    std::int64_t ca, cb;
    Ref a = deref(a0, &ca);
    Ref b = deref(b0, &cb);
    if (ca >= 0 && cb >= 0) {
        if (ca == cb) return true;
        // Bind the younger cell to the older one.
        if (ca > cb) bind(ca, b);
        else bind(cb, a);
        return true;
    }
    if (ca >= 0) {
        if (occurs(ca, b)) return false;
        bind(ca, b);
        return true;
    }
    if (cb >= 0) {
        if (occurs(cb, a)) return false;
        bind(cb, a);
        return true;
    }
    const Term& x = a.term;
    const Term& y = b.term;
    if (x.kind() != y.kind()) return false;
    if (x.kind() != TermKind::Compound) return x == y;
    if (x.symbol() != y.symbol() || x.arity() != y.arity()) return false;
    if (x.ground() && y.ground()) return x == y;
    for (std::size_t i = 0; i < x.arity(); ++i)
        if (!unify(Ref{x.arg(i), a.off}, Ref{y.arg(i), b.off})) return false;
    return true;
}

Term Bindings::resolve(const Ref& r, std::unordered_map<std::int64_t, VarId>& numbering) const {
    if (r.term.ground()) return r.term;
    std::int64_t c;
    Ref d = deref(r, &c);
    if (c >= 0) {
        auto [it, fresh] = numbering.emplace(c, static_cast<VarId>(numbering.size()));
        return Term::var(it->second);
    }
    if (!d.term.is_compound() || d.term.ground()) return d.term;
    std::vector<Term> args;
    args.reserve(d.term.arity());
    for (const Term& a : d.term.args()) args.push_back(resolve(Ref{a, d.off}, numbering));
    return Term::compound(d.term.symbol(), std::move(args));
}

Term Bindings::resolve(const Ref& r) const {
    std::unordered_map<std::int64_t, VarId> numbering;
    return resolve(r, numbering);
}

bool Bindings::is_ground(const Ref& r) const {
    if (r.term.ground()) return true;
    std::int64_t c;
    Ref d = deref(r, &c);
    if (c >= 0) return false;
    if (!d.term.is_compound()) return true;
    for (const Term& a : d.term.args())
        if (!is_ground(Ref{a, d.off})) return false;
    return true;
}

} // namespace inctab
