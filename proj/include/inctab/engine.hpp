#pragma once

#include <chrono>
#include <functional>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "inctab/bindings.hpp"
#include "inctab/cursor.hpp"
#include "inctab/error.hpp"
#include "inctab/idg.hpp"
#include "inctab/parser.hpp"
#include "inctab/program.hpp"
#include "inctab/table.hpp"
#include "inctab/term.hpp"

namespace inctab {

struct EngineStats {
    std::uint64_t steps = 0;
    std::uint64_t answers_derived = 0;
    std::uint64_t tables_created = 0;
    std::uint64_t lazy_calls = 0;
    std::uint64_t reevaluations = 0;
    std::uint64_t reevals_changed = 0;
    std::uint64_t reevals_unchanged = 0;
    std::uint64_t simplification_runs = 0;
    std::uint64_t simplified_answers = 0;
    std::uint64_t preserved_views = 0;
    std::uint64_t updates = 0;
    std::uint64_t invalidated_nodes = 0;
};

/// What re-evaluating one table found.
struct ReevalOutcome {
    Term subgoal;
    bool changed = false;
    bool new_answer = false;
    std::size_t old_count = 0;
    std::size_t new_count = 0;
    std::size_t weakened = 0;           // unconditional -> conditional
    std::size_t strengthened = 0;       // conditional -> unconditional
    std::size_t removed = 0;            // previously unconditional, now gone
    std::size_t removed_conditional = 0; // previously conditional, now gone
    bool simplification = false;
    bool validity_propagated = false;
};

struct UpdateResult {
    bool applied = false;
    std::size_t leaves_matched = 0;
    /// Subgoals of the table nodes newly invalidated, in traversal order.
    std::vector<Term> invalidated;
};

struct QueryAnswer {
    std::vector<std::pair<std::string, Term>> bindings;
    TruthValue truth = TruthValue::True;
};

struct TableInfo {
    TableId id = kNoTable;
    Term subgoal;
    TableStatus status = TableStatus::New;
    bool incremental = false;
    std::size_t answers = 0;
    std::size_t conditional = 0;
    int occp = 0;
    std::uint64_t falsecount = 0;
};

/// Type-erased reference to a continuation; the callee must not outlive it.
class Cont {
public:
    template <typename F>
    Cont(F& f) : obj_(&f), call_([](void* o) { return (*static_cast<F*>(o))(); }) {}
    std::uint64_t operator()() const { return call_(obj_); }

private:
    void* obj_;
    std::uint64_t (*call_)(void*);
};

class Engine {
public:
    Engine();
    ~Engine();
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    // Loading -----------------------------------------------------------
    void consult_text(std::string_view text, const std::string& source = "<text>");
    void consult_file(const std::string& path);
    void declare(const PredicateDecl& d) { program_.declare(d); }

    // Updates -----------------------------------------------------------
    UpdateResult assert_clause(const Term& clause);
    UpdateResult retract_clause(const Term& clause);
    UpdateResult assert_text(std::string_view clause) { return assert_clause(parse_term(clause).term); }
    UpdateResult retract_text(std::string_view clause) { return retract_clause(parse_term(clause).term); }

    // Queries -----------------------------------------------------------
    /// Solves `goal` (canonical variables) and returns a cursor over its
    /// answers. A single tabled call reads its table directly.
    Cursor open(const Term& goal);
    std::vector<QueryAnswer> query(const ReadTerm& goal);
    std::vector<QueryAnswer> query(std::string_view text) { return query(parse_term(text)); }
    /// Truth of a ground goal.
    TruthValue truth_of(std::string_view ground_goal);

    // Tables ------------------------------------------------------------
    void abolish_table(const Term& goal);
    void abolish_all_tables();
    /// Table for a goal after subgoal abstraction, if it exists.
    const Table* find_table(const Term& goal) const;
    const Table* table(TableId id) const { return id < tables_.size() ? tables_[id].get() : nullptr; }
    std::vector<TableInfo> tables() const;
    /// Visible answers of a table with truth values, sorted by atom.
    std::vector<std::pair<Term, TruthValue>> answers_of(const Term& goal) const;
    /// Re-evaluates every invalid table now.
    void recompute_all();

    // Dependency graph --------------------------------------------------
    const Idg& idg() const { return idg_; }
    std::vector<std::string> idg_edges() const;
    std::string node_name(const IdgNode& n) const;

    // Introspection -----------------------------------------------------
    const EngineStats& stats() const { return stats_; }
    std::uint64_t steps() const { return stats_.steps; }
    const std::vector<ReevalOutcome>& reeval_log() const { return reeval_log_; }
    void clear_reeval_log() { reeval_log_.clear(); }
    Program& program() { return program_; }
    const Program& program() const { return program_; }
    /// Rough memory held by tables and the dependency graph, in bytes.
    std::size_t store_bytes() const;

    /// Evaluation deadline relative to the start of each top-level call.
    void set_timeout(std::optional<double> seconds) { timeout_ = seconds; }

    // Used by cursors.
    Table* mutable_table(TableId id) { return id < tables_.size() ? tables_[id].get() : nullptr; }

private:
    using Status = std::uint64_t;

    friend class Cursor;

    // Evaluation.
    Status solve_body(const std::vector<Literal>& body, std::size_t i, std::int64_t off, Status barrier, Cont k);
    Status call_goal(const Ref& goal, const PredicateKey& key, Cont k);
    Status call_clauses(const Ref& goal, Program::Entry& e, Cont k);
    Status call_tabled(const Ref& goal, const Program::Entry& e, Cont k);
    Status call_negation(const Ref& goal, const PredicateKey& key, bool skolem, Cont k);
    Status consume(Table* t, const Ref& goal, Cont k);

    Term call_variant(const Term& canonical_goal, const PredicateDecl& d) const;
    Table* get_table(const Term& subgoal, const PredicateDecl& d);
    Table* new_table(const Term& subgoal, const PredicateDecl& d);
    void ensure_evaluated(Table* t);
    bool needs_rerun(const Table* t) const;
    void evaluate(Table* t);
    void run(Table* t);
    void run_clauses(Table* t);
    void derive_answer(Table* t, std::int64_t soff);
    void complete_scc(std::size_t from);
    Table* current() const { return path_.empty() ? nullptr : path_.back(); }
    void step();

    // Incremental maintenance.
    void lazy_call(Table* t);
    void incremental_reeval(IdgNode* n);
    UpdateResult on_update(const Term& head, bool check_only);
    void simplify_closure(const std::vector<AnswerRef>& origins);
    void preserve_views(Table* t);
    void delete_table(Table* t);
    void recover();

    // Residual evaluation helpers.
    TruthValue literal_truth(const DelayLiteral& l) const;

    /// Runs `f`; a failure escaping a top-level call abolishes the
    /// incomplete tables and resets evaluation state.
    void guarded(const std::function<void()>& f);
    void link(Table* callee);
    bool builtin_update(const Ref& clause, bool assert_it);
    UpdateResult apply_update(const Term& clause, bool assert_it);
    Cursor open_driver(const Term& goal, Term* pattern);
    Cursor open_goal(const Term& goal, Term* pattern);

    Cursor open_table_cursor(Table* t, std::optional<Term> filter);

    Program program_;
    Idg idg_;
    Bindings bindings_;
    std::vector<std::unique_ptr<Table>> tables_;
    std::unordered_map<Term, TableId, TermHash> by_subgoal_;

    std::vector<Table*> stack_;
    std::vector<Table*> path_;
    std::vector<DelayLiteral> delays_;
    std::uint64_t dfn_ = 0;
    std::uint64_t stamp_ = 0;
    std::uint64_t changes_ = 0;
    std::uint64_t activation_ = 0;
    int depth_ = 0;

    std::optional<double> timeout_;
    std::chrono::steady_clock::time_point deadline_;
    bool deadline_armed_ = false;

    EngineStats stats_;
    std::vector<ReevalOutcome> reeval_log_;
};

} // namespace inctab
