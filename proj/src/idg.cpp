#include "inctab/idg.hpp"

#include <algorithm>

#include "inctab/error.hpp"

namespace inctab {

namespace {

void erase_one(std::vector<IdgNode*>& v, IdgNode* n) {
    auto it = std::find(v.begin(), v.end(), n);
    if (it != v.end()) v.erase(it);
}

} // namespace

IdgNode* Idg::make_node() {
    auto n = std::make_unique<IdgNode>();
    n->id = next_id_++;
    nodes_.push_back(std::move(n));
    return nodes_.back().get();
}

IdgNode* Idg::create_table_node(TableId t) {
    IdgNode* n = make_node();
    n->table = t;
    return n;
}

IdgNode* Idg::leaf_for(const Term& goal, const PredicateDecl& decl) {
    const bool whole = decl.idg_abstraction && *decl.idg_abstraction == 0;
    if (whole) {
        auto it = leaves_.find(decl.key);
        if (it != leaves_.end() && it->second.whole) return it->second.whole;
    }
    Term pattern = goal;
    if (decl.idg_abstraction) pattern = abstract_depth(goal, *decl.idg_abstraction).term;
    pattern = canonical_variant(pattern);
    LeafSet& set = leaves_[decl.key];
    auto it = set.by_pattern.find(pattern);
    if (it != set.by_pattern.end()) return it->second;
    IdgNode* n = make_node();
    n->leaf = true;
    n->pattern = pattern;
    n->pred = decl.key;
    set.by_pattern.emplace(pattern, n);
    if (whole) set.whole = n;
    if (pattern.arity() > 0 && !pattern.arg(0).is_var()) set.by_first[IndexKey::of(pattern.arg(0))].push_back(n);
    else set.unindexed.push_back(n);
    return n;
}

void Idg::add_edge(IdgNode* child, IdgNode* parent) {
    if (child == parent) return;
    if (!child->affected_set.insert(parent).second) return;
    child->affected.push_back(parent);
    parent->dependent.push_back(child);
}

void Idg::clear_dependencies(IdgNode* n) {
    for (IdgNode* d : n->dependent) {
        erase_one(d->affected, n);
        d->affected_set.erase(n);
    }
    n->dependent.clear();
}

std::vector<IdgNode*> Idg::matching_leaves(const Term& head) const {
    std::vector<IdgNode*> out;
    auto it = leaves_.find(PredicateKey::of(head));
    if (it == leaves_.end()) return out;
    const LeafSet& set = it->second;
    std::vector<IdgNode*> cands;
    if (head.arity() == 0 || head.arg(0).is_var()) {
        for (const auto& [p, n] : set.by_pattern) cands.push_back(n);
    } else {
        cands = set.unindexed;
        auto f = set.by_first.find(IndexKey::of(head.arg(0)));
        if (f != set.by_first.end()) cands.insert(cands.end(), f->second.begin(), f->second.end());
    }
    std::sort(cands.begin(), cands.end(), [](const IdgNode* a, const IdgNode* b) { return a->id < b->id; });
    Term h = shift_vars(head, VarId{1} << 30);
    for (IdgNode* n : cands)
        if (unify(n->pattern, h)) out.push_back(n);
    return out;
}

std::vector<IdgNode*> Idg::reachable(const std::vector<IdgNode*>& leaves) const {
    std::vector<IdgNode*> out;
    std::unordered_set<IdgNode*> seen;
    std::vector<IdgNode*> stack(leaves.begin(), leaves.end());
    while (!stack.empty()) {
        IdgNode* n = stack.back();
        stack.pop_back();
        for (IdgNode* p : n->affected) {
            if (!seen.insert(p).second) continue;
            out.push_back(p);
            stack.push_back(p);
        }
    }
    return out;
}

std::vector<IdgNode*> Idg::invalidate_from(const std::vector<IdgNode*>& leaves) {
    std::vector<IdgNode*> invalid;
    struct Item {
        IdgNode* node;
        std::size_t next;
    };
    std::vector<Item> stack;
    for (IdgNode* leaf : leaves) {
        stack.push_back({leaf, 0});
        while (!stack.empty()) {
            Item& top = stack.back();
            if (top.next >= top.node->affected.size()) {
                stack.pop_back();
                continue;
            }
            IdgNode* aff = top.node->affected[top.next++];
            ++aff->falsecount;
            ++ledger_.increments;
            if (aff->falsecount == 1) {
                aff->reeval_ready = ReevalReady::ComputeDependenciesFirst;
                invalid.push_back(aff);
                stack.push_back({aff, 0});
            }
        }
    }
    return invalid;
}

void Idg::propagate_validity(IdgNode* n, const std::unordered_set<IdgNode*>* skip) {
    std::vector<IdgNode*> stack{n};
    while (!stack.empty()) {
        IdgNode* cur = stack.back();
        stack.pop_back();
        for (IdgNode* p : cur->affected) {
            if (skip && skip->count(p)) continue;
            if (p->falsecount == 0)
                raise(ErrorKind::Internal, "falsecount underflow on dependency node " + std::to_string(p->id));
            --p->falsecount;
            ++ledger_.decrements;
            if (p->falsecount == 0) {
                p->reeval_ready = ReevalReady::ComputeDependenciesFirst;
                stack.push_back(p);
            }
        }
    }
}

std::vector<IdgNode*> Idg::collect_dependencies(IdgNode* n) {
    std::vector<IdgNode*> out;
    struct Item {
        IdgNode* node;
        std::size_t next;
    };
    n->reeval_ready = ReevalReady::ComputeDirectly;
    std::vector<Item> stack{{n, 0}};
    while (!stack.empty()) {
        Item& top = stack.back();
        if (top.next >= top.node->dependent.size()) {
            out.push_back(top.node);
            stack.pop_back();
            continue;
        }
        IdgNode* d = top.node->dependent[top.next++];
        if (d->leaf || d->falsecount == 0 || d->reeval_ready != ReevalReady::ComputeDependenciesFirst) continue;
        d->reeval_ready = ReevalReady::ComputeDirectly;
        stack.push_back({d, 0});
    }
    return out;
}

void Idg::remove(IdgNode* n) {
    ledger_.resets += n->falsecount;
    for (IdgNode* p : n->affected) erase_one(p->dependent, n);
    for (IdgNode* d : n->dependent) {
        erase_one(d->affected, n);
        d->affected_set.erase(n);
    }
    if (n->leaf) {
        auto it = leaves_.find(n->pred);
        if (it != leaves_.end()) {
            LeafSet& set = it->second;
            set.by_pattern.erase(n->pattern);
            erase_one(set.unindexed, n);
            if (n->pattern.arity() > 0 && !n->pattern.arg(0).is_var()) {
                auto f = set.by_first.find(IndexKey::of(n->pattern.arg(0)));
                if (f != set.by_first.end()) erase_one(f->second, n);
            }
        }
    }
    if (n->leaf) {
        auto it = leaves_.find(n->pred);
        if (it != leaves_.end() && it->second.whole == n) it->second.whole = nullptr;
    }
    nodes_[n->id - 1].reset();
}

void Idg::reset_falsecount(IdgNode* n) {
    ledger_.resets += n->falsecount;
    n->falsecount = 0;
}

IdgStats Idg::stats() const {
    IdgStats s;
    for (const auto& n : nodes_) {
        if (!n) continue;
        if (n->leaf) ++s.leaf_nodes;
        else ++s.table_nodes;
        s.edges += n->affected.size();
        if (!n->leaf && n->falsecount > 0) ++s.invalid_nodes;
    }
    return s;
}

std::uint64_t Idg::residual_falsecount() const {
    std::uint64_t r = 0;
    for (const auto& n : nodes_)
        if (n) r += n->falsecount;
    return r;
}

std::vector<const IdgNode*> Idg::nodes() const {
    std::vector<const IdgNode*> out;
    for (const auto& n : nodes_)
        if (n) out.push_back(n.get());
    return out;
}

std::size_t Idg::leaf_count(const PredicateKey& k) const {
    auto it = leaves_.find(k);
    return it == leaves_.end() ? 0 : it->second.by_pattern.size();
}

} // namespace inctab
