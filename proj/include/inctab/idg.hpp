#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "inctab/program.hpp"
#include "inctab/table.hpp"
#include "inctab/term.hpp"

namespace inctab {

enum class ReevalReady : std::uint8_t { ComputeDependenciesFirst, ComputeDirectly };

/// Dependency-graph node for an incremental table or a dynamic leaf pattern.
struct IdgNode {
    std::uint64_t id = 0;
    bool leaf = false;
    TableId table = kNoTable;
    /// Leaf pattern (canonical variables).
    Term pattern;
    PredicateKey pred;

    std::vector<IdgNode*> affected;  // nodes this one directly affects
    std::vector<IdgNode*> dependent; // nodes this one directly depends on
    std::unordered_set<IdgNode*> affected_set;

    std::size_t nbr_of_answers = 0;
    std::size_t previous_nbr_of_answers = 0;
    bool new_answer = false;
    std::uint64_t falsecount = 0;
    ReevalReady reeval_ready = ReevalReady::ComputeDependenciesFirst;

    bool invalid() const { return falsecount > 0; }
};

struct IdgStats {
    std::size_t table_nodes = 0;
    std::size_t leaf_nodes = 0;
    std::size_t edges = 0;
    std::size_t invalid_nodes = 0;
};

/// Counters for the falsecount conservation property.
struct FalsecountLedger {
    std::uint64_t increments = 0;
    std::uint64_t decrements = 0;
    std::uint64_t resets = 0;
};

class Idg {
public:
    IdgNode* create_table_node(TableId t);

    /// Leaf for a call to a dynamic incremental predicate; the pattern is the
    /// call abstracted to the declared depth. Deduplicated by variant.
    IdgNode* leaf_for(const Term& canonical_goal, const PredicateDecl& decl);

    /// Adds child -> parent; no-op for self loops and existing edges.
    void add_edge(IdgNode* child, IdgNode* parent);

    /// Removes every dependent edge of `n` (and the inverse affected edges).
    void clear_dependencies(IdgNode* n);

    /// Leaves whose pattern unifies with `head`, in creation order.
    std::vector<IdgNode*> matching_leaves(const Term& head) const;

    /// Tables reachable over affected edges from `leaves` (for the
    /// incomplete-table permission check), without mutating anything.
    std::vector<IdgNode*> reachable(const std::vector<IdgNode*>& leaves) const;

    /// Depth-first falsecount traversal from each leaf; returns the newly
    /// invalidated table nodes in traversal order.
    std::vector<IdgNode*> invalidate_from(const std::vector<IdgNode*>& leaves);

    /// Decrements directly affected nodes, recursing when one reaches zero.
    /// `skip` nodes are not decremented.
    void propagate_validity(IdgNode* n, const std::unordered_set<IdgNode*>* skip = nullptr);

    /// Dependencies of `n` needing recomputation, dependencies first, with
    /// `n` itself last. Visited nodes switch to compute_directly.
    std::vector<IdgNode*> collect_dependencies(IdgNode* n);

    /// Unlinks and frees a node.
    void remove(IdgNode* n);

    /// Records a falsecount reset performed by re-evaluation.
    void reset_falsecount(IdgNode* n);

    IdgStats stats() const;
    const FalsecountLedger& ledger() const { return ledger_; }
    std::uint64_t residual_falsecount() const;

    /// Edges as "child -> parent" lines using `name` to render nodes.
    template <typename Namer>
    std::vector<std::string> dump(Namer name) const {
        std::vector<std::string> out;
        for (const auto& n : nodes_)
            if (n)
                for (IdgNode* p : n->affected) out.push_back(name(*n) + " -> " + name(*p));
        return out;
    }

    std::vector<const IdgNode*> nodes() const;
    std::size_t leaf_count(const PredicateKey& k) const;

private:
    struct LeafSet {
        std::unordered_map<Term, IdgNode*, TermHash> by_pattern;
        std::vector<IdgNode*> unindexed;
        std::unordered_map<IndexKey, std::vector<IdgNode*>, IndexKeyHash> by_first;
        IdgNode* whole = nullptr; // the single leaf under abstract(0)
    };

    IdgNode* make_node();

    std::deque<std::unique_ptr<IdgNode>> nodes_;
    std::unordered_map<PredicateKey, LeafSet, PredicateKeyHash> leaves_;
    std::uint64_t next_id_ = 1;
    FalsecountLedger ledger_;
};

} // namespace inctab
