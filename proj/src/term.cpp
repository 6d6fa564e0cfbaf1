#include "inctab/term.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <mutex>
#include <ostream>
#include <sstream>

namespace inctab {

namespace {

struct SymbolTable {
    std::mutex mu;
    std::unordered_map<std::string, Symbol> ids;
    std::deque<std::string> names;
};

SymbolTable& symbols() {
    static SymbolTable table;
    return table;
}

std::size_t mix(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return static_cast<std::size_t>(x);
}

std::size_t combine(std::size_t seed, std::size_t h) {
    return seed ^ (h + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

} // namespace

Symbol intern(std::string_view name) {
    auto& st = symbols();
    std::lock_guard lock(st.mu);
    auto it = st.ids.find(std::string(name));
    if (it != st.ids.end()) return it->second;
    Symbol id = static_cast<Symbol>(st.names.size());
    st.names.emplace_back(name);
    st.ids.emplace(std::string(name), id);
    return id;
}

const std::string& symbol_name(Symbol sym) {
    auto& st = symbols();
    std::lock_guard lock(st.mu);
    return st.names.at(sym);
}

bool is_reserved_symbol(Symbol sym) {
    const std::string& n = symbol_name(sym);
    return !n.empty() && n[0] == '$';
}

Term Term::var(VarId id) {
    Term t;
    t.kind_ = TermKind::Var;
    t.value_ = id;
    return t;
}

Term Term::integer(std::int64_t value) {
    Term t;
    t.kind_ = TermKind::Int;
    t.value_ = value;
    return t;
}

Term Term::atom(Symbol sym) {
    Term t;
    t.kind_ = TermKind::Atom;
    t.value_ = sym;
    return t;
}

Term Term::atom(std::string_view name) { return atom(intern(name)); }

Term Term::compound(Symbol functor, std::vector<Term> args) {
    assert(!args.empty());
    bool ground = true;
    std::size_t h = mix(0xC0FFEEULL ^ (std::uint64_t{functor} << 8) ^ args.size());
    for (const Term& a : args) {
        ground = ground && a.ground();
        h = combine(h, a.hash());
    }
    Term t;
    t.kind_ = TermKind::Compound;
    t.value_ = functor;
    t.node_ = std::make_shared<const Node>(Node{functor, ground, h, std::move(args)});
    return t;
}

Term Term::compound(std::string_view functor, std::vector<Term> args) {
    return compound(intern(functor), std::move(args));
}

Symbol Term::symbol() const { return static_cast<Symbol>(value_); }

std::uint32_t Term::arity() const {
    return kind_ == TermKind::Compound ? static_cast<std::uint32_t>(node_->args.size()) : 0;
}

std::span<const Term> Term::args() const {
    if (kind_ != TermKind::Compound) return {};
    return node_->args;
}

bool Term::ground() const {
    switch (kind_) {
    case TermKind::Var: return false;
    case TermKind::Compound: return node_->ground;
    default: return true;
    }
}

std::size_t Term::hash() const {
    switch (kind_) {
    case TermKind::Var: return mix(static_cast<std::uint64_t>(value_) ^ 0x1111ULL);
    case TermKind::Int: return mix(static_cast<std::uint64_t>(value_) ^ 0x2222222222ULL);
    case TermKind::Atom: return mix(static_cast<std::uint64_t>(value_) ^ 0x3333333333333ULL);
    case TermKind::Compound: return node_->hash;
    }
    return 0;
}

bool operator==(const Term& a, const Term& b) {
    if (a.kind_ != b.kind_ || a.value_ != b.value_) return false;
    if (a.kind_ != TermKind::Compound) return true;
    if (a.node_ == b.node_) return true;
    if (a.node_->hash != b.node_->hash || a.node_->args.size() != b.node_->args.size()) return false;
    return std::equal(a.node_->args.begin(), a.node_->args.end(), b.node_->args.begin());
}

std::size_t hash_terms(std::span<const Term> terms) {
    std::size_t h = mix(terms.size() + 77);
    for (const Term& t : terms) h = combine(h, t.hash());
    return h;
}

int compare(const Term& a, const Term& b) {
    if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
    switch (a.kind()) {
    case TermKind::Var:
    case TermKind::Int:
        if (a.int_value() == b.int_value()) return 0;
        return a.int_value() < b.int_value() ? -1 : 1;
    case TermKind::Atom: {
        if (a.symbol() == b.symbol()) return 0;
        int c = symbol_name(a.symbol()).compare(symbol_name(b.symbol()));
        return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case TermKind::Compound: {
        if (a.arity() != b.arity()) return a.arity() < b.arity() ? -1 : 1;
        if (a.symbol() != b.symbol()) {
            int c = symbol_name(a.symbol()).compare(symbol_name(b.symbol()));
            if (c != 0) return c < 0 ? -1 : 1;
        }
        for (std::size_t i = 0; i < a.arity(); ++i) {
            int c = compare(a.arg(i), b.arg(i));
            if (c != 0) return c;
        }
        return 0;
    }
    }
    return 0;
}

namespace {

bool needs_quotes(const std::string& name) {
    if (name.empty()) return true;
    if (name == "[]" || name == "!" || name == ";" || name == ",") return name == ",";
    if (std::islower(static_cast<unsigned char>(name[0]))) {
        return !std::all_of(name.begin(), name.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
        });
    }
    static const std::string symbol_chars = "+-*/\\^<>=~:.?@#&";
    return !std::all_of(name.begin(), name.end(),
                        [](char c) { return symbol_chars.find(c) != std::string::npos; });
}

void write_atom(std::ostream& os, Symbol sym) {
    const std::string& name = symbol_name(sym);
    if (!needs_quotes(name)) {
        os << name;
        return;
    }
    os << '\'';
    for (char c : name) {
        if (c == '\'' || c == '\\') os << '\\';
        os << c;
    }
    os << '\'';
}

void write_term(std::ostream& os, const Term& t) {
    switch (t.kind()) {
    case TermKind::Var:
        if (t.var_id() >= kRuntimeVarBase) os << "_G" << (t.var_id() - kRuntimeVarBase);
        else os << '_' << t.var_id();
        break;
    case TermKind::Int: os << t.int_value(); break;
    case TermKind::Atom: write_atom(os, t.symbol()); break;
    case TermKind::Compound: {
        const std::string& f = symbol_name(t.symbol());
        if (t.arity() == 2 && (f == "=" || f == "\\=")) {
            write_term(os, t.arg(0));
            os << ' ' << f << ' ';
            write_term(os, t.arg(1));
            break;
        }
        write_atom(os, t.symbol());
        os << '(';
        for (std::size_t i = 0; i < t.arity(); ++i) {
            if (i) os << ',';
            write_term(os, t.arg(i));
        }
        os << ')';
        break;
    }
    }
}

} // namespace

std::string to_string(const Term& t) {
    std::ostringstream os;
    write_term(os, t);
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const Term& t) {
    write_term(os, t);
    return os;
}

const Term* Substitution::lookup(VarId v) const {
    auto it = map_.find(v);
    return it == map_.end() ? nullptr : &it->second;
}

Term Substitution::apply(const Term& t) const {
    if (map_.empty() || t.ground()) return t;
    switch (t.kind()) {
    case TermKind::Var: {
        const Term* b = lookup(t.var_id());
        if (!b) return t;
        return apply(*b);
    }
    case TermKind::Compound: {
        std::vector<Term> args;
        args.reserve(t.arity());
        bool changed = false;
        for (const Term& a : t.args()) {
            args.push_back(apply(a));
            changed = changed || !(args.back() == a);
        }
        if (!changed) return t;
        return Term::compound(t.symbol(), std::move(args));
    }
    default: return t;
    }
}

std::ostream& operator<<(std::ostream& os, const Substitution& s) {
    std::vector<std::pair<VarId, Term>> items(s.bindings().begin(), s.bindings().end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    os << '{';
    bool first = true;
    for (const auto& [v, t] : items) {
        if (!first) os << ", ";
        first = false;
        os << Term::var(v) << " -> " << t;
    }
    return os << '}';
}

namespace {

Term walk(const Substitution& s, Term t) {
    while (t.is_var()) {
        const Term* b = s.lookup(t.var_id());
        if (!b) break;
        t = *b;
    }
    return t;
}

bool occurs(const Substitution& s, VarId v, const Term& t) {
    if (t.ground()) return false;
    Term w = walk(s, t);
    if (w.is_var()) return w.var_id() == v;
    if (!w.is_compound()) return false;
    for (const Term& a : w.args())
        if (occurs(s, v, a)) return true;
    return false;
}

} // namespace

std::optional<Substitution> unify(const Term& a, const Term& b) {
    Substitution s;
    std::vector<std::pair<Term, Term>> todo{{a, b}};
    while (!todo.empty()) {
        auto [x, y] = std::move(todo.back());
        todo.pop_back();
        x = walk(s, x);
        y = walk(s, y);
        if (x.is_var() && y.is_var() && x.var_id() == y.var_id()) continue;
        if (x.is_var()) {
            if (occurs(s, x.var_id(), y)) return std::nullopt;
            s.bind(x.var_id(), y);
            continue;
        }
        if (y.is_var()) {
            if (occurs(s, y.var_id(), x)) return std::nullopt;
            s.bind(y.var_id(), x);
            continue;
        }
        if (x.kind() != y.kind()) return std::nullopt;
        if (x.kind() != TermKind::Compound) {
            if (!(x == y)) return std::nullopt;
            continue;
        }
        if (x.symbol() != y.symbol() || x.arity() != y.arity()) return std::nullopt;
        for (std::size_t i = 0; i < x.arity(); ++i) todo.emplace_back(x.arg(i), y.arg(i));
    }
    Substitution out;
    for (const auto& [v, t] : s.bindings()) out.bind(v, s.apply(t));
    return out;
}

namespace {

bool variant_walk(const Term& a, const Term& b, std::unordered_map<VarId, VarId>& ab,
                  std::unordered_map<VarId, VarId>& ba) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
    case TermKind::Var: {
        auto [ia, fresh_a] = ab.emplace(a.var_id(), b.var_id());
        auto [ib, fresh_b] = ba.emplace(b.var_id(), a.var_id());
        return ia->second == b.var_id() && ib->second == a.var_id();
    }
    case TermKind::Compound:
        if (a.symbol() != b.symbol() || a.arity() != b.arity()) return false;
        if (a.ground() != b.ground()) return false;
        if (a.ground()) return a == b;
        for (std::size_t i = 0; i < a.arity(); ++i)
            if (!variant_walk(a.arg(i), b.arg(i), ab, ba)) return false;
        return true;
    default: return a == b;
    }
}

} // namespace

bool is_variant(const Term& a, const Term& b) {
    std::unordered_map<VarId, VarId> ab, ba;
    return variant_walk(a, b, ab, ba);
}

Term apply(const Substitution& s, const Term& t) { return s.apply(t); }

void collect_vars(const Term& t, std::vector<VarId>& out) {
    if (t.ground()) return;
    if (t.is_var()) {
        if (std::find(out.begin(), out.end(), t.var_id()) == out.end()) out.push_back(t.var_id());
        return;
    }
    for (const Term& a : t.args()) collect_vars(a, out);
}

std::vector<VarId> vars_of(const Term& t) {
    std::vector<VarId> out;
    collect_vars(t, out);
    return out;
}

VarId max_var_id(const Term& t) {
    if (t.ground()) return -1;
    if (t.is_var()) return t.var_id();
    VarId m = -1;
    for (const Term& a : t.args()) m = std::max(m, max_var_id(a));
    return m;
}

Term shift_vars(const Term& t, VarId by) {
    if (t.ground()) return t;
    if (t.is_var()) return Term::var(t.var_id() + by);
    std::vector<Term> args;
    args.reserve(t.arity());
    for (const Term& a : t.args()) args.push_back(shift_vars(a, by));
    return Term::compound(t.symbol(), std::move(args));
}

namespace {

Term renumber(const Term& t, std::vector<VarId>& seen) {
    if (t.ground()) return t;
    if (t.is_var()) {
        auto it = std::find(seen.begin(), seen.end(), t.var_id());
        if (it != seen.end()) return Term::var(it - seen.begin());
        seen.push_back(t.var_id());
        return Term::var(static_cast<VarId>(seen.size() - 1));
    }
    std::vector<Term> args;
    args.reserve(t.arity());
    for (const Term& a : t.args()) args.push_back(renumber(a, seen));
    return Term::compound(t.symbol(), std::move(args));
}

} // namespace

Term canonical_variant(const Term& t, std::uint32_t* num_vars) {
    std::vector<VarId> seen;
    Term out = renumber(t, seen);
    if (num_vars) *num_vars = static_cast<std::uint32_t>(seen.size());
    return out;
}

std::vector<Term> canonical_variant(std::span<const Term> ts, std::uint32_t* num_vars) {
    std::vector<VarId> seen;
    std::vector<Term> out;
    out.reserve(ts.size());
    for (const Term& t : ts) out.push_back(renumber(t, seen));
    if (num_vars) *num_vars = static_cast<std::uint32_t>(seen.size());
    return out;
}

std::uint32_t term_depth(const Term& t) {
    if (!t.is_compound()) return 0;
    std::uint32_t d = 0;
    for (const Term& a : t.args()) d = std::max(d, term_depth(a));
    return d + 1;
}

namespace {

Term abstract_rec(const Term& t, std::uint32_t depth, std::uint32_t k, VarId& next, Substitution& theta) {
    if (depth == k + 1) {
        VarId v = next++;
        theta.bind(v, t);
        return Term::var(v);
    }
    if (!t.is_compound()) return t;
    if (term_depth(t) + depth <= k) return t;
    std::vector<Term> args;
    args.reserve(t.arity());
    for (const Term& a : t.args()) args.push_back(abstract_rec(a, depth + 1, k, next, theta));
    return Term::compound(t.symbol(), std::move(args));
}

} // namespace

Abstraction abstract_depth(const Term& t, std::uint32_t k) {
    VarId next = std::max<VarId>(max_var_id(t) + 1, 0);
    if (t.is_var()) next = std::max(next, t.var_id() + 1);
    Substitution theta;
    Term out = abstract_rec(t, 0, k, next, theta);
    return {std::move(out), std::move(theta)};
}

namespace {

Term skolem_rec(const Term& t, std::vector<VarId>& seen) {
    if (t.ground()) return t;
    if (t.is_var()) {
        auto it = std::find(seen.begin(), seen.end(), t.var_id());
        std::size_t n;
        if (it == seen.end()) {
            seen.push_back(t.var_id());
            n = seen.size();
        } else {
            n = static_cast<std::size_t>(it - seen.begin()) + 1;
        }
        return Term::atom("$sk" + std::to_string(n));
    }
    std::vector<Term> args;
    args.reserve(t.arity());
    for (const Term& a : t.args()) args.push_back(skolem_rec(a, seen));
    return Term::compound(t.symbol(), std::move(args));
}

} // namespace

Term skolemize(const Term& t) {
    std::vector<VarId> seen;
    return skolem_rec(t, seen);
}

} // namespace inctab
