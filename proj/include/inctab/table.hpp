#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "inctab/program.hpp"
#include "inctab/term.hpp"

namespace inctab {

using TableId = std::uint32_t;
inline constexpr TableId kNoTable = ~TableId{0};

enum class TableStatus : std::uint8_t { New, Incomplete, Completed };
enum class TruthValue : std::uint8_t { True, Undefined, False };

const char* truth_name(TruthValue v);
const char* status_name(TableStatus s);

/// A ground answer tuple shared between delay literals.
using TupleRef = std::shared_ptr<const std::vector<Term>>;

struct DelayLiteral {
    enum Kind : std::uint8_t { Positive, Negative, Undefined, Restraint };

    Kind kind = Undefined;
    TableId table = kNoTable;
    /// Positive: index of the answer waited on.
    std::uint32_t answer = 0;
    /// Negative: the ground answer tuple whose absence is assumed.
    TupleRef tuple;

    static DelayLiteral positive(TableId t, std::uint32_t a) { return {Positive, t, a, nullptr}; }
    static DelayLiteral negative(TableId t, TupleRef tuple) { return {Negative, t, 0, std::move(tuple)}; }
    static DelayLiteral undefined() { return {Undefined, kNoTable, 0, nullptr}; }
    static DelayLiteral restraint() { return {Restraint, kNoTable, 0, nullptr}; }
};

bool operator==(const DelayLiteral& a, const DelayLiteral& b);
bool operator<(const DelayLiteral& a, const DelayLiteral& b);

using DelayList = std::vector<DelayLiteral>;

/// Sorts and deduplicates literals.
void canonicalize(DelayList& dl);

struct AnswerRef {
    TableId table = kNoTable;
    std::uint32_t index = 0;
    friend bool operator==(const AnswerRef&, const AnswerRef&) = default;
};

struct Answer {
    /// Bindings of the subgoal's variables (joint canonical variables).
    std::vector<Term> subst;
    std::uint32_t num_vars = 0;
    /// Empty means unconditional.
    std::vector<DelayList> delay_lists;
    bool alive = true;
    bool deleted = false;
    bool was_unconditional = false;
    /// Created during the current re-evaluation.
    bool fresh = false;
    /// Answers whose delay lists mention this one positively.
    std::vector<AnswerRef> dependents;

    bool unconditional() const { return delay_lists.empty(); }
    bool visible() const { return alive && !deleted; }
};

enum class AnswerStatus : std::uint8_t {
    NewSubstitution,
    Repeated,
    Undeleted,
    ConditionalAdded,
    StrengthenedToUnconditional,
};

const char* answer_status_name(AnswerStatus s);

struct IdgNode;
struct CursorState;

struct Table {
    TableId id = kNoTable;
    Term subgoal;
    PredicateKey pred;
    std::uint32_t ans_subst_size = 0;
    TableStatus status = TableStatus::New;
    bool incremental = false;
    AbstractionDepth answer_abstraction;

    std::vector<Answer> answers;
    std::unordered_multimap<std::size_t, std::uint32_t> answer_index;
    std::size_t live_answers = 0;

    int occp_num = 0;
    std::vector<std::weak_ptr<CursorState>> cursors;
    IdgNode* node = nullptr;
    /// Answers holding a negative delay literal on this table.
    std::vector<AnswerRef> neg_dependents;
    /// Clauses run in place of the predicate's (query driver tables).
    std::vector<ClauseRef> own_clauses;

    // Evaluation bookkeeping.
    std::uint64_t dfn = 0;
    std::uint64_t low = 0;
    std::size_t stack_index = 0;
    bool on_path = false;
    std::uint64_t run_stamp = 0;
    std::uint64_t iter_start = 0;

    // Re-evaluation bookkeeping.
    bool reevaluating = false;
    std::size_t old_count = 0;

    /// Visible answer for a tuple, if any.
    std::optional<std::uint32_t> find(const std::vector<Term>& tuple) const;
    /// Any stored slot (visible or deleted-but-alive) for a tuple.
    std::optional<std::uint32_t> find_slot(const std::vector<Term>& tuple) const;

    /// Records a derived answer. `dl` must be canonical; an empty list is an
    /// unconditional derivation.
    AnswerStatus add_answer(const std::vector<Term>& tuple, std::uint32_t num_vars, DelayList dl,
                            bool* inserted_list = nullptr);

    /// Marks every answer deleted and remembers whether it was unconditional.
    void begin_reeval_marks();

    /// Tombstones an answer.
    void remove_answer(std::uint32_t idx);

    /// Instantiates the subgoal with an answer's bindings.
    Term answer_atom(std::uint32_t idx) const;

    TruthValue truth(std::uint32_t idx) const {
        const Answer& a = answers[idx];
        if (!a.visible()) return TruthValue::False;
        return a.unconditional() ? TruthValue::True : TruthValue::Undefined;
    }

    std::size_t conditional_count() const;
};

/// Instantiates `pattern` (variables 0..n-1) with `tuple` values whose own
/// variables are renumbered above n.
Term instantiate(const Term& pattern, std::uint32_t n, const std::vector<Term>& tuple);

// ---------------------------------------------------------------------------
// Residual well-founded model over a set of atoms with delay lists.

struct ResidualLiteral {
    enum Kind : std::uint8_t { Pos, Neg, Fixed };
    Kind kind = Fixed;
    std::uint32_t atom = 0;
    TruthValue value = TruthValue::Undefined;
};

struct ResidualAtom {
    /// Disjunction of conjunctions; an empty inner list is a fact.
    std::vector<std::vector<ResidualLiteral>> lists;
};

/// Well-founded model of the residual program by alternating fixpoint.
std::vector<TruthValue> residual_wfs(const std::vector<ResidualAtom>& atoms);

} // namespace inctab
