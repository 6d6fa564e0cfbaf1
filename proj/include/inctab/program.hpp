#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "inctab/term.hpp"

namespace inctab {

struct PredicateKey {
    Symbol name = 0;
    std::uint32_t arity = 0;

    static PredicateKey of(const Term& callable);
    std::string str() const;
    friend bool operator==(const PredicateKey&, const PredicateKey&) = default;
};

struct PredicateKeyHash {
    std::size_t operator()(const PredicateKey& k) const {
        return (std::size_t{k.name} << 8) ^ k.arity ^ (std::size_t{k.name} * 0x9e3779b97f4a7c15ULL);
    }
};

enum class PredKind : std::uint8_t { Static, Dynamic };
enum class Tabling : std::uint8_t { None, Incremental, NonIncremental };

struct PredicateDecl {
    PredicateKey key;
    PredKind kind = PredKind::Static;
    Tabling tabling = Tabling::None;
    /// Dynamic predicates only: updates feed the dependency graph.
    bool incremental = false;
    AbstractionDepth idg_abstraction;
    AbstractionDepth subgoal_abstraction;
    AbstractionDepth answer_abstraction;

    bool tabled() const { return tabling != Tabling::None; }
    bool incremental_tabled() const { return tabling == Tabling::Incremental; }
    bool dynamic_incremental() const { return kind == PredKind::Dynamic && incremental; }
};

enum class LitKind : std::uint8_t {
    Call,
    Tnot,
    SkNot,
    Undefined,
    Unify,
    NotUnify,
    Atomic,
    Cut,
    True,
    Fail,
    Assert,
    Retract,
};

struct Literal {
    LitKind kind = LitKind::True;
    Term a;
    Term b;
    /// Target predicate for Call/Tnot/SkNot.
    PredicateKey key;
};

struct Clause {
    Term head;
    std::vector<Literal> body;
    std::uint32_t num_vars = 0;
    std::uint64_t id = 0;
    PredicateKey key;

    Term to_term() const;
};

using ClauseRef = std::shared_ptr<const Clause>;

/// First-argument index key: constants by value, compounds by functor.
struct IndexKey {
    TermKind kind = TermKind::Int;
    std::uint32_t arity = 0;
    std::int64_t value = 0;

    static IndexKey of(const Term& nonvar);
    friend bool operator==(const IndexKey&, const IndexKey&) = default;
};

struct IndexKeyHash {
    std::size_t operator()(const IndexKey& k) const {
        std::uint64_t x = static_cast<std::uint64_t>(k.value) * 0x9e3779b97f4a7c15ULL;
        return static_cast<std::size_t>(x ^ (std::uint64_t(k.kind) << 56) ^ (std::uint64_t(k.arity) << 40));
    }
};

/// Splits a clause term (fact, `H :- B`, with `;` in bodies) into clauses
/// with canonical variables. Throws on malformed bodies.
std::vector<Clause> clauses_from_term(const Term& t);

/// Converts a goal term into body literals (used for queries).
std::vector<std::vector<Literal>> goal_alternatives(const Term& goal);

class Program {
public:
    struct Entry {
        PredicateDecl decl;
        bool declared = false;
        std::vector<ClauseRef> clauses; // nullptr marks a retracted slot
        std::size_t live = 0;

        // First-argument index over clause positions.
        std::unordered_map<IndexKey, std::vector<std::uint32_t>, IndexKeyHash> index;
        std::vector<std::uint32_t> unindexed;
    };

    /// Records or merges a declaration; throws a permission error on
    /// unsupported combinations.
    void declare(const PredicateDecl& d);

    /// Static clause from a consulted file.
    void load_clause(Clause c);

    /// Appends a clause to a dynamic predicate.
    void add_dynamic(Clause c);

    /// Removes the first stored clause that is a variant of `c`.
    bool remove_dynamic(const Clause& c);

    Entry* find(const PredicateKey& k);
    const Entry* find(const PredicateKey& k) const;
    /// Entry for `k`, implicitly creating an undeclared static predicate.
    Entry& entry(const PredicateKey& k);

    /// Positions of clauses that may match a call whose first argument is
    /// `first_arg` (a variable means all), in source order, bounded by the
    /// current number of slots.
    void candidates(const Entry& e, const Term* first_arg, std::vector<std::uint32_t>& out) const;

    /// Checks deferred tnot/sk_not targets; throws on the first violation.
    void validate() const;

    std::vector<PredicateKey> predicates() const;

private:
    void append(Entry& e, Clause c);
    void check_negation_targets(const Clause& c);

    std::unordered_map<PredicateKey, Entry, PredicateKeyHash> preds_;
    std::vector<PredicateKey> order_;
    std::vector<std::pair<PredicateKey, PredicateKey>> pending_negations_;
    std::uint64_t next_clause_id_ = 1;
};


} // namespace inctab
