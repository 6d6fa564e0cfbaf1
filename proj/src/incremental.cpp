#include <algorithm>

#include "inctab/engine.hpp"

namespace inctab {

namespace {

std::uint64_t answer_key(TableId t, std::uint32_t idx) { return (std::uint64_t{t} << 32) | idx; }

TruthValue negate(TruthValue v) {
    if (v == TruthValue::True) return TruthValue::False;
    if (v == TruthValue::False) return TruthValue::True;
    return TruthValue::Undefined;
}

} // namespace

// ---------------------------------------------------------------------------
// Updates

UpdateResult Engine::assert_clause(const Term& clause) {
    UpdateResult r;
    guarded([&] { r = apply_update(clause, true); });
    return r;
}

UpdateResult Engine::retract_clause(const Term& clause) {
    UpdateResult r;
    guarded([&] { r = apply_update(clause, false); });
    return r;
}

UpdateResult Engine::apply_update(const Term& clause, bool assert_it) {
    UpdateResult total;
    for (Clause& c : clauses_from_term(clause)) {
        if (assert_it && !program_.find(c.key)) {
            PredicateDecl d;
            d.key = c.key;
            d.kind = PredKind::Dynamic;
            program_.declare(d);
        }
        const Program::Entry* e = program_.find(c.key);
        bool incremental = e && e->decl.dynamic_incremental();
        if (incremental && !stack_.empty()) on_update(c.head, true);
        Term head = c.head;
        if (assert_it) {
            program_.add_dynamic(std::move(c));
        } else {
            if (!e || e->decl.kind != PredKind::Dynamic)
                raise(ErrorKind::Permission, "cannot modify static procedure " + c.key.str());
            if (!program_.remove_dynamic(c)) continue;
        }
        ++stats_.updates;
        total.applied = true;
        if (incremental) {
            UpdateResult r = on_update(head, false);
            total.leaves_matched += r.leaves_matched;
            total.invalidated.insert(total.invalidated.end(), r.invalidated.begin(), r.invalidated.end());
        }
    }
    return total;
}

UpdateResult Engine::on_update(const Term& head, bool check_only) {
    UpdateResult r;
    std::vector<IdgNode*> leaves = idg_.matching_leaves(head);
    r.leaves_matched = leaves.size();
    if (check_only) {
        for (IdgNode* n : idg_.reachable(leaves)) {
            const Table* t = table(n->table);
            if (t && t->status != TableStatus::Completed)
                raise(ErrorKind::Permission, "update of " + PredicateKey::of(head).str() +
                                                 " affects incomplete table " + to_string(t->subgoal));
        }
        return r;
    }
    for (IdgNode* n : idg_.invalidate_from(leaves)) {
        ++stats_.invalidated_nodes;
        const Table* t = table(n->table);
        if (t) r.invalidated.push_back(t->subgoal);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Re-evaluation

void Engine::lazy_call(Table* t) {
    ++stats_.lazy_calls;
    IdgNode* n = t->node;
    if (n->reeval_ready == ReevalReady::ComputeDependenciesFirst) {
        for (IdgNode* m : idg_.collect_dependencies(n))
            if (m->invalid()) incremental_reeval(m);
    } else {
        incremental_reeval(n);
    }
}

void Engine::incremental_reeval(IdgNode* n) {
    if (!n->invalid()) return;
    Table* t = mutable_table(n->table);
    if (!t || t->status != TableStatus::Completed) return;
    if (t->occp_num > 0) preserve_views(t);
    idg_.reset_falsecount(n);
    idg_.clear_dependencies(n);
    t->old_count = t->live_answers;
    t->begin_reeval_marks();
    t->reevaluating = true;
    n->new_answer = false;
    n->previous_nbr_of_answers = n->nbr_of_answers;
    n->nbr_of_answers = 0;
    ++stats_.reevaluations;
    t->status = TableStatus::New;
    evaluate(t);
}

void Engine::recompute_all() {
    guarded([&] {
        std::vector<TableId> ids;
        for (const IdgNode* n : idg_.nodes())
            if (!n->leaf && n->invalid()) ids.push_back(n->table);
        for (TableId id : ids) {
            Table* t = mutable_table(id);
            if (t && t->node && t->node->invalid()) ensure_evaluated(t);
        }
    });
}

// ---------------------------------------------------------------------------
// Simplification over completed tables

void Engine::simplify_closure(const std::vector<AnswerRef>& origins) {
    std::unordered_map<std::uint64_t, std::uint32_t> atom_of;
    std::vector<AnswerRef> d;
    std::vector<AnswerRef> queue;
    std::unordered_set<TableId> expanded;
    auto consider = [&](const AnswerRef& r) {
        Table* t = mutable_table(r.table);
        if (!t || t->status != TableStatus::Completed || r.index >= t->answers.size()) return;
        const Answer& a = t->answers[r.index];
        if (!a.visible() || a.unconditional()) return;
        if (!atom_of.emplace(answer_key(r.table, r.index), static_cast<std::uint32_t>(d.size())).second) return;
        d.push_back(r);
        queue.push_back(r);
    };
    auto expand = [&](const AnswerRef& r) {
        Table* t = mutable_table(r.table);
        if (!t) return;
        if (r.index < t->answers.size()) {
            std::vector<AnswerRef> deps = t->answers[r.index].dependents;
            for (const AnswerRef& x : deps) consider(x);
        }
        if (expanded.insert(r.table).second) {
            std::vector<AnswerRef> deps = t->neg_dependents;
            for (const AnswerRef& x : deps) consider(x);
        }
    };
    for (const AnswerRef& o : origins) expand(o);
    while (!queue.empty()) {
        AnswerRef r = queue.back();
        queue.pop_back();
        expand(r);
    }
    if (d.empty()) return;
    ++stats_.simplification_runs;

    auto translate = [&](const DelayLiteral& l) {
        ResidualLiteral r;
        if (l.kind == DelayLiteral::Positive) {
            auto it = atom_of.find(answer_key(l.table, l.answer));
            if (it != atom_of.end()) {
                r.kind = ResidualLiteral::Pos;
                r.atom = it->second;
                return r;
            }
        } else if (l.kind == DelayLiteral::Negative) {
            if (const Table* t = table(l.table)) {
                if (auto slot = t->find(*l.tuple)) {
                    auto it = atom_of.find(answer_key(l.table, *slot));
                    if (it != atom_of.end()) {
                        r.kind = ResidualLiteral::Neg;
                        r.atom = it->second;
                        return r;
                    }
                }
            }
        }
        r.kind = ResidualLiteral::Fixed;
        r.value = literal_truth(l);
        return r;
    };
    std::vector<ResidualAtom> atoms(d.size());
    for (std::size_t a = 0; a < d.size(); ++a)
        for (const DelayList& dl : tables_[d[a].table]->answers[d[a].index].delay_lists) {
            std::vector<ResidualLiteral> conj;
            for (const DelayLiteral& l : dl) conj.push_back(translate(l));
            atoms[a].lists.push_back(std::move(conj));
        }
    std::vector<TruthValue> val = residual_wfs(atoms);
    auto lit_value = [&](const ResidualLiteral& r) {
        if (r.kind == ResidualLiteral::Pos) return val[r.atom];
        if (r.kind == ResidualLiteral::Neg) return negate(val[r.atom]);
        return r.value;
    };

    // Decide every new list before mutating anything.
    std::vector<std::vector<DelayList>> new_lists(d.size());
    for (std::size_t a = 0; a < d.size(); ++a) {
        if (val[a] != TruthValue::Undefined) continue;
        const Answer& ans = tables_[d[a].table]->answers[d[a].index];
        for (std::size_t l = 0; l < ans.delay_lists.size(); ++l) {
            bool dead = false;
            DelayList out;
            for (std::size_t j = 0; j < ans.delay_lists[l].size(); ++j) {
                TruthValue v = lit_value(atoms[a].lists[l][j]);
                if (v == TruthValue::False) dead = true;
                else if (v == TruthValue::Undefined) out.push_back(ans.delay_lists[l][j]);
            }
            if (!dead && !out.empty() && std::find(new_lists[a].begin(), new_lists[a].end(), out) == new_lists[a].end())
                new_lists[a].push_back(std::move(out));
        }
    }
    for (std::size_t a = 0; a < d.size(); ++a) {
        Table* t = tables_[d[a].table].get();
        Answer& ans = t->answers[d[a].index];
        bool mutate = val[a] != TruthValue::Undefined || new_lists[a] != ans.delay_lists;
        if (!mutate) continue;
        if (t->occp_num > 0) preserve_views(t);
        ++stats_.simplified_answers;
        if (val[a] == TruthValue::True) ans.delay_lists.clear();
        else if (val[a] == TruthValue::False) t->remove_answer(d[a].index);
        else if (!new_lists[a].empty()) ans.delay_lists = std::move(new_lists[a]);
    }
}

// ---------------------------------------------------------------------------
// Views, abolishing, recovery

void Engine::preserve_views(Table* t) {
    for (auto& w : t->cursors) {
        auto st = w.lock();
        if (!st || st->done || !st->live) continue;
        st->snapshot.clear();
        for (std::size_t i = st->pos; i < t->answers.size(); ++i) {
            if (!t->answers[i].visible()) continue;
            CursorAnswer a = make_cursor_answer(*t, static_cast<std::uint32_t>(i));
            if (filter_accepts(st->filter, a)) st->snapshot.push_back(std::move(a));
        }
        st->live = false;
        st->snap_pos = 0;
        if (st->snapshot.empty()) st->done = true;
        ++stats_.preserved_views;
    }
    t->cursors.clear();
    t->occp_num = 0;
}

void Engine::delete_table(Table* t) {
    auto it = by_subgoal_.find(t->subgoal);
    if (it != by_subgoal_.end() && it->second == t->id) by_subgoal_.erase(it);
    if (t->node) idg_.remove(t->node);
    tables_[t->id].reset();
}

void Engine::abolish_table(const Term& goal) {
    if (depth_ > 0 || !stack_.empty()) raise(ErrorKind::Permission, "cannot abolish tables during evaluation");
    Table* t = const_cast<Table*>(find_table(goal));
    if (!t) raise(ErrorKind::Existence, "no table for " + to_string(goal));
    preserve_views(t);
    if (t->node) idg_.invalidate_from({t->node});
    delete_table(t);
}

void Engine::abolish_all_tables() {
    if (depth_ > 0 || !stack_.empty()) raise(ErrorKind::Permission, "cannot abolish tables during evaluation");
    for (auto& t : tables_)
        if (t) preserve_views(t.get());
    tables_.clear();
    by_subgoal_.clear();
    idg_ = Idg();
}

void Engine::recover() {
    std::vector<Table*> doomed;
    for (auto& t : tables_)
        if (t && t->status != TableStatus::Completed) doomed.push_back(t.get());
    for (Table* t : doomed)
        if (t->node) idg_.invalidate_from({t->node});
    for (Table* t : doomed) {
        preserve_views(t);
        delete_table(t);
    }
    stack_.clear();
    path_.clear();
    delays_.clear();
    bindings_.undo({0, 0});
}

} // namespace inctab
