#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace inctab {

/// Interned symbol (atom or functor name).
using Symbol = std::uint32_t;

Symbol intern(std::string_view name);
const std::string& symbol_name(Symbol sym);

/// True for symbols in the engine-reserved namespace ('$...').
bool is_reserved_symbol(Symbol sym);

using VarId = std::int64_t;

/// Variables below this id are clause/table-local ("canonical") variables
/// that are always read through an offset; ids at or above it are runtime
/// variables owned by a Bindings store.
inline constexpr VarId kRuntimeVarBase = VarId{1} << 32;

enum class TermKind : std::uint8_t { Var, Int, Atom, Compound };

/// Immutable first-order term with cheap copies. Compound nodes are shared.
class Term {
public:
    Term() = default;

    static Term var(VarId id);
    static Term integer(std::int64_t value);
    static Term atom(Symbol sym);
    static Term atom(std::string_view name);
    static Term compound(Symbol functor, std::vector<Term> args);
    static Term compound(std::string_view functor, std::vector<Term> args);

    TermKind kind() const { return kind_; }
    bool is_var() const { return kind_ == TermKind::Var; }
    bool is_int() const { return kind_ == TermKind::Int; }
    bool is_atom() const { return kind_ == TermKind::Atom; }
    bool is_compound() const { return kind_ == TermKind::Compound; }
    bool is_atomic() const { return kind_ == TermKind::Int || kind_ == TermKind::Atom; }
    bool is_callable() const { return kind_ == TermKind::Atom || kind_ == TermKind::Compound; }

    VarId var_id() const { return value_; }
    std::int64_t int_value() const { return value_; }
    /// Atom symbol, or functor symbol of a compound.
    Symbol symbol() const;
    std::uint32_t arity() const;
    std::span<const Term> args() const;
    const Term& arg(std::size_t i) const { return args()[i]; }

    bool ground() const;
    std::size_t hash() const;

    friend bool operator==(const Term& a, const Term& b);

private:
    struct Node {
        Symbol functor;
        bool ground;
        std::size_t hash;
        std::vector<Term> args;
    };

    TermKind kind_ = TermKind::Int;
    std::int64_t value_ = 0;
    std::shared_ptr<const Node> node_;
};

struct TermHash {
    std::size_t operator()(const Term& t) const { return t.hash(); }
};

std::size_t hash_terms(std::span<const Term> terms);

/// Standard order: Var < Int < Atom < Compound; compounds by arity, name, args.
int compare(const Term& a, const Term& b);

std::string to_string(const Term& t);
std::ostream& operator<<(std::ostream& os, const Term& t);

/// Finite map from variables to terms.
class Substitution {
public:
    Substitution() = default;

    void bind(VarId v, Term t) { map_[v] = std::move(t); }
    const Term* lookup(VarId v) const;
    bool empty() const { return map_.empty(); }
    std::size_t size() const { return map_.size(); }
    const std::unordered_map<VarId, Term>& bindings() const { return map_; }

    /// Simultaneous replacement (bindings are followed to a fixpoint, so a
    /// triangular substitution applies like its idempotent form).
    Term apply(const Term& t) const;

    friend bool operator==(const Substitution& a, const Substitution& b) { return a.map_ == b.map_; }

private:
    std::unordered_map<VarId, Term> map_;
};

std::ostream& operator<<(std::ostream& os, const Substitution& s);

/// Most general unifier with occurs check, in idempotent form.
std::optional<Substitution> unify(const Term& a, const Term& b);

/// Equality up to a consistent bijective renaming of variables.
bool is_variant(const Term& a, const Term& b);

Term apply(const Substitution& s, const Term& t);

/// Distinct variables of `t` in first-occurrence (left-to-right) order.
void collect_vars(const Term& t, std::vector<VarId>& out);
std::vector<VarId> vars_of(const Term& t);
VarId max_var_id(const Term& t);

/// Adds `by` to every variable id.
Term shift_vars(const Term& t, VarId by);

/// Renumbers variables 0..n-1 by first occurrence; variants map to equal terms.
Term canonical_variant(const Term& t, std::uint32_t* num_vars = nullptr);
std::vector<Term> canonical_variant(std::span<const Term> ts, std::uint32_t* num_vars = nullptr);

/// Depth of the deepest subterm, with the term itself at depth 0.
std::uint32_t term_depth(const Term& t);

using AbstractionDepth = std::optional<std::uint32_t>;

struct Abstraction {
    Term term;
    Substitution theta;
};

/// Replaces every subterm at depth k+1 (atom arguments are depth 1) with a
/// fresh variable. Result satisfies apply(theta, term) == t. Fresh variables
/// are numbered above every variable of `t`.
Abstraction abstract_depth(const Term& t, std::uint32_t k);

/// Replaces each distinct variable by '$skN', numbered by first occurrence.
Term skolemize(const Term& t);

} // namespace inctab
