#include "inctab/engine.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace inctab {

namespace {

std::uint64_t answer_key(TableId t, std::uint32_t idx) { return (std::uint64_t{t} << 32) | idx; }

TruthValue negate(TruthValue v) {
    if (v == TruthValue::True) return TruthValue::False;
    if (v == TruthValue::False) return TruthValue::True;
    return TruthValue::Undefined;
}

bool is_directive(const Term& t, const char* op) {
    return t.is_compound() && t.arity() == 1 && symbol_name(t.symbol()) == op;
}

// Values of the pattern's variables 0..n-1 when it is matched against `t`.
std::vector<Term> match_tuple(const Term& pattern, std::uint32_t n, const Term& t) {
    std::vector<Term> out(n);
    auto theta = unify(pattern, shift_vars(t, n));
    if (!theta) raise(ErrorKind::Internal, "call does not match its table");
    for (std::uint32_t i = 0; i < n; ++i) out[i] = theta->apply(Term::var(i));
    return canonical_variant(std::span<const Term>(out));
}

} // namespace

Engine::Engine() = default;

Engine::~Engine() {
    for (auto& t : tables_) {
        if (!t) continue;
        for (auto& w : t->cursors) {
            if (auto st = w.lock()) {
                st->engine = nullptr;
                if (st->live) st->done = true;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Loading

void Engine::consult_text(std::string_view text, const std::string& source) {
    Parser p(text, source);
    ReadTerm rt;
    while (p.next(rt)) {
        try {
            const Term& t = rt.term;
            if (is_directive(t, ":-")) {
                for (const PredicateDecl& d : parse_declaration(t.arg(0))) program_.declare(d);
                continue;
            }
            if (is_directive(t, "?-")) raise(ErrorKind::Syntax, "queries are not allowed in source files");
            for (Clause& c : clauses_from_term(t)) {
                const Program::Entry* e = program_.find(c.key);
                if (e && e->decl.kind == PredKind::Dynamic) apply_update(c.to_term(), true);
                else program_.load_clause(std::move(c));
            }
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Syntax && e.detail().rfind(source, 0) == 0) throw;
            throw Error(e.kind(), source + ":" + std::to_string(rt.line) + ":" + std::to_string(rt.column) + ": " +
                                      e.detail());
        }
    }
    try {
        program_.validate();
    } catch (const Error& e) {
        throw Error(e.kind(), source + ": " + e.detail());
    }
}

void Engine::consult_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::Io, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    consult_text(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Top-level control

void Engine::guarded(const std::function<void()>& f) {
    bool top = depth_ == 0;
    if (top && timeout_) {
        deadline_ = std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(*timeout_));
        deadline_armed_ = true;
    }
    ++depth_;
    try {
        f();
    } catch (...) {
        --depth_;
        if (top) {
            deadline_armed_ = false;
            recover();
        }
        throw;
    }
    --depth_;
    if (top) deadline_armed_ = false;
}

void Engine::step() {
    ++stats_.steps;
    if (deadline_armed_ && (stats_.steps & 1023) == 0 && std::chrono::steady_clock::now() > deadline_)
        raise(ErrorKind::Timeout, "evaluation exceeded the time limit");
}

Cursor Engine::open(const Term& goal) {
    Term pattern;
    return open_goal(goal, &pattern);
}

Cursor Engine::open_goal(const Term& goal, Term* pattern) {
    Cursor result;
    guarded([&] {
        auto alts = goal_alternatives(goal);
        if (alts.size() == 1 && alts[0].size() == 1 && alts[0][0].kind == LitKind::Call) {
            const Program::Entry* e = program_.find(alts[0][0].key);
            if (e && e->decl.tabled()) {
                Term s = canonical_variant(goal);
                Table* t = get_table(call_variant(s, e->decl), e->decl);
                ensure_evaluated(t);
                std::optional<Term> filter;
                if (!is_variant(t->subgoal, goal)) filter = goal;
                *pattern = goal;
                result = open_table_cursor(t, filter);
                return;
            }
        }
        result = open_driver(goal, pattern);
    });
    return result;
}

Cursor Engine::open_driver(const Term& goal, Term* pattern) {
    std::vector<VarId> vars = vars_of(goal);
    std::vector<Term> args;
    for (VarId v : vars) args.push_back(Term::var(v));
    Term head = args.empty() ? Term::atom("$query") : Term::compound("$query", args);
    *pattern = head;

    PredicateDecl d;
    d.key = PredicateKey::of(head);
    d.tabling = Tabling::NonIncremental;
    auto num_vars = static_cast<std::uint32_t>(max_var_id(goal) + 1);
    std::vector<ClauseRef> clauses;
    for (auto& body : goal_alternatives(goal)) {
        auto c = std::make_shared<Clause>();
        c->head = head;
        c->body = std::move(body);
        c->num_vars = num_vars;
        c->key = d.key;
        clauses.push_back(std::move(c));
    }
    Table* t = new_table(canonical_variant(head), d);
    t->own_clauses = std::move(clauses);
    evaluate(t);

    auto st = std::make_shared<CursorState>();
    st->live = false;
    for (std::uint32_t i = 0; i < t->answers.size(); ++i)
        if (t->answers[i].visible()) st->snapshot.push_back(make_cursor_answer(*t, i));
    st->done = st->snapshot.empty();
    delete_table(t);
    return Cursor(st);
}

Cursor Engine::open_table_cursor(Table* t, std::optional<Term> filter) {
    auto st = std::make_shared<CursorState>();
    st->engine = this;
    st->table = t->id;
    st->filter = std::move(filter);
    bool any = false;
    for (std::uint32_t i = 0; i < t->answers.size() && !any; ++i)
        if (t->answers[i].visible() && filter_accepts(st->filter, make_cursor_answer(*t, i))) any = true;
    if (!any) {
        st->done = true;
        return Cursor(st);
    }
    std::erase_if(t->cursors, [](const std::weak_ptr<CursorState>& w) {
        auto s = w.lock();
        return !s || s->done || !s->live;
    });
    ++t->occp_num;
    t->cursors.push_back(st);
    return Cursor(st);
}

std::vector<QueryAnswer> Engine::query(const ReadTerm& rt) {
    Term pattern;
    Cursor c = open_goal(rt.term, &pattern);
    std::vector<QueryAnswer> out;
    VarId shift = max_var_id(pattern) + 1;
    while (auto a = c.next()) {
        QueryAnswer qa;
        qa.truth = a->truth;
        auto theta = unify(pattern, shift_vars(a->atom, shift));
        if (!theta) raise(ErrorKind::Internal, "answer does not match its query");
        std::vector<Term> values;
        for (const auto& nv : rt.var_names) values.push_back(theta->apply(Term::var(nv.second)));
        values = canonical_variant(std::span<const Term>(values));
        for (std::size_t i = 0; i < rt.var_names.size(); ++i)
            qa.bindings.emplace_back(rt.var_names[i].first, values[i]);
        out.push_back(std::move(qa));
    }
    return out;
}

TruthValue Engine::truth_of(std::string_view ground_goal) {
    TruthValue best = TruthValue::False;
    for (const QueryAnswer& a : query(ground_goal)) {
        if (a.truth == TruthValue::True) return TruthValue::True;
        best = TruthValue::Undefined;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Tables

Term Engine::call_variant(const Term& g, const PredicateDecl& d) const {
    if (d.subgoal_abstraction && term_depth(g) > *d.subgoal_abstraction)
        return canonical_variant(abstract_depth(g, *d.subgoal_abstraction).term);
    return g;
}

Table* Engine::get_table(const Term& subgoal, const PredicateDecl& d) {
    auto it = by_subgoal_.find(subgoal);
    if (it != by_subgoal_.end()) return tables_[it->second].get();
    Table* t = new_table(subgoal, d);
    by_subgoal_.emplace(subgoal, t->id);
    return t;
}

Table* Engine::new_table(const Term& subgoal, const PredicateDecl& d) {
    auto t = std::make_unique<Table>();
    t->id = static_cast<TableId>(tables_.size());
    t->subgoal = subgoal;
    t->pred = d.key;
    t->ans_subst_size = static_cast<std::uint32_t>(vars_of(subgoal).size());
    t->incremental = d.incremental_tabled();
    t->answer_abstraction = d.answer_abstraction;
    if (t->incremental) t->node = idg_.create_table_node(t->id);
    ++stats_.tables_created;
    tables_.push_back(std::move(t));
    return tables_.back().get();
}

const Table* Engine::find_table(const Term& goal) const {
    const Program::Entry* e = program_.find(PredicateKey::of(goal));
    if (!e || !e->decl.tabled()) return nullptr;
    auto it = by_subgoal_.find(call_variant(canonical_variant(goal), e->decl));
    return it == by_subgoal_.end() ? nullptr : tables_[it->second].get();
}

std::vector<TableInfo> Engine::tables() const {
    std::vector<TableInfo> out;
    for (const auto& t : tables_) {
        if (!t) continue;
        TableInfo i;
        i.id = t->id;
        i.subgoal = t->subgoal;
        i.status = t->status;
        i.incremental = t->incremental;
        i.answers = t->live_answers;
        i.conditional = t->conditional_count();
        i.occp = t->occp_num;
        i.falsecount = t->node ? t->node->falsecount : 0;
        out.push_back(i);
    }
    return out;
}

std::vector<std::pair<Term, TruthValue>> Engine::answers_of(const Term& goal) const {
    std::vector<std::pair<Term, TruthValue>> out;
    const Table* t = find_table(goal);
    if (!t) return out;
    for (std::uint32_t i = 0; i < t->answers.size(); ++i)
        if (t->answers[i].visible()) out.emplace_back(t->answer_atom(i), t->truth(i));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return compare(a.first, b.first) < 0; });
    return out;
}

std::string Engine::node_name(const IdgNode& n) const {
    if (n.leaf) return to_string(n.pattern);
    const Table* t = table(n.table);
    return t ? to_string(t->subgoal) : "<abolished>";
}

std::vector<std::string> Engine::idg_edges() const {
    return idg_.dump([this](const IdgNode& n) { return node_name(n); });
}

std::size_t Engine::store_bytes() const {
    std::size_t b = 0;
    for (const auto& t : tables_) {
        if (!t) continue;
        b += sizeof(Table) + t->answers.capacity() * sizeof(Answer) + t->answer_index.size() * 32;
        for (const Answer& a : t->answers) {
            b += a.subst.capacity() * sizeof(Term) + a.dependents.capacity() * sizeof(AnswerRef);
            for (const Term& x : a.subst)
                if (x.is_compound()) b += 48 + 16 * x.arity();
            for (const DelayList& dl : a.delay_lists) b += sizeof(DelayList) + dl.capacity() * sizeof(DelayLiteral);
        }
    }
    for (const IdgNode* n : idg_.nodes())
        b += sizeof(IdgNode) + (n->affected.capacity() + n->dependent.capacity()) * sizeof(void*) +
             n->affected_set.size() * 24;
    return b;
}

// ---------------------------------------------------------------------------
// SLG evaluation

Engine::Status Engine::solve_body(const std::vector<Literal>& body, std::size_t i, std::int64_t off, Status barrier,
                                  Cont k) {
    if (i == body.size()) return k();
    step();
    const Literal& lit = body[i];
    auto next = [&]() -> Status { return solve_body(body, i + 1, off, barrier, k); };
    switch (lit.kind) {
    case LitKind::Call: return call_goal(Ref{lit.a, off}, lit.key, Cont(next));
    case LitKind::Tnot:
    case LitKind::SkNot: return call_negation(Ref{lit.a, off}, lit.key, lit.kind == LitKind::SkNot, Cont(next));
    case LitKind::Undefined: {
        delays_.push_back(DelayLiteral::undefined());
        Status st = next();
        delays_.pop_back();
        return st;
    }
    case LitKind::Unify: {
        auto m = bindings_.mark();
        Status st = bindings_.unify(Ref{lit.a, off}, Ref{lit.b, off}) ? next() : 0;
        bindings_.undo(m);
        return st;
    }
    case LitKind::NotUnify: {
        auto m = bindings_.mark();
        bool ok = bindings_.unify(Ref{lit.a, off}, Ref{lit.b, off});
        bindings_.undo(m);
        return ok ? 0 : next();
    }
    case LitKind::Atomic: return bindings_.deref(Ref{lit.a, off}).term.is_atomic() ? next() : 0;
    case LitKind::Cut: {
        Status st = next();
        return st == 0 ? barrier : st;
    }
    case LitKind::True: return next();
    case LitKind::Fail: return 0;
    case LitKind::Assert:
        builtin_update(Ref{lit.a, off}, true);
        return next();
    case LitKind::Retract: return builtin_update(Ref{lit.a, off}, false) ? next() : 0;
    }
    return 0;
}

bool Engine::builtin_update(const Ref& clause, bool assert_it) {
    Term t = bindings_.resolve(clause);
    return assert_it ? assert_clause(t).applied : retract_clause(t).applied;
}

Engine::Status Engine::call_goal(const Ref& goal, const PredicateKey& key, Cont k) {
    Program::Entry* e = program_.find(key);
    if (!e || (!e->declared && e->clauses.empty())) raise(ErrorKind::Existence, "unknown procedure " + key.str());
    if (e->decl.tabled()) return call_tabled(goal, *e, k);
    if (e->decl.kind == PredKind::Dynamic) {
        Table* c = current();
        if (c && c->incremental) {
            if (!e->decl.incremental)
                raise(ErrorKind::Permission, "incremental table " + to_string(c->subgoal) +
                                                 " depends on non-incremental dynamic predicate " + key.str());
            IdgNode* leaf = idg_.leaf_for(bindings_.resolve(goal), e->decl);
            idg_.add_edge(leaf, c->node);
        }
    }
    return call_clauses(goal, *e, k);
}

Engine::Status Engine::call_clauses(const Ref& goal0, Program::Entry& e, Cont k) {
    Ref goal = bindings_.deref(goal0);
    Term first;
    const Term* fp = nullptr;
    if (goal.term.arity() > 0) {
        Ref f = bindings_.deref(Ref{goal.term.arg(0), goal.off});
        if (!f.term.is_var()) {
            first = f.term;
            fp = &first;
        }
    }
    std::vector<std::uint32_t> cands;
    program_.candidates(e, fp, cands);
    Status barrier = ++activation_;
    for (std::uint32_t pos : cands) {
        if (pos >= e.clauses.size()) break;
        ClauseRef c = e.clauses[pos];
        if (!c) continue;
        step();
        auto m = bindings_.mark();
        std::int64_t coff = bindings_.alloc(c->num_vars);
        Status st = 0;
        if (bindings_.unify(Ref{c->head, coff}, goal)) st = solve_body(c->body, 0, coff, barrier, k);
        bindings_.undo(m);
        if (st == barrier) continue;
        if (st) return st;
    }
    return 0;
}

void Engine::link(Table* callee) {
    Table* c = current();
    if (!c) return;
    if (callee->status != TableStatus::Completed) c->low = std::min(c->low, callee->low);
    if (c->incremental) {
        if (!callee->incremental)
            raise(ErrorKind::Permission, "incremental table " + to_string(c->subgoal) +
                                             " depends on non-incremental table " + to_string(callee->subgoal));
        idg_.add_edge(callee->node, c->node);
    }
}

Engine::Status Engine::call_tabled(const Ref& goal, const Program::Entry& e, Cont k) {
    Term g = bindings_.resolve(goal);
    Table* t = get_table(call_variant(g, e.decl), e.decl);
    ensure_evaluated(t);
    link(t);
    return consume(t, goal, k);
}

Engine::Status Engine::consume(Table* t, const Ref& goal, Cont k) {
    const std::uint32_t n = t->ans_subst_size;
    for (std::uint32_t i = 0; i < t->answers.size(); ++i) {
        if (!t->answers[i].visible()) continue;
        step();
        auto m = bindings_.mark();
        std::int64_t soff = bindings_.alloc(n);
        std::int64_t aoff = bindings_.alloc(t->answers[i].num_vars);
        for (std::uint32_t v = 0; v < n; ++v)
            bindings_.unify(Ref{Term::var(v), soff}, Ref{t->answers[i].subst[v], aoff});
        Status st = 0;
        if (bindings_.unify(Ref{t->subgoal, soff}, goal)) {
            bool cond = !t->answers[i].unconditional();
            if (cond) delays_.push_back(DelayLiteral::positive(t->id, i));
            st = k();
            if (cond) delays_.pop_back();
        }
        bindings_.undo(m);
        if (st) return st;
    }
    return 0;
}

Engine::Status Engine::call_negation(const Ref& goal, const PredicateKey& key, bool skolem, Cont k) {
    Ref g = bindings_.deref(goal);
    Term t;
    if (!bindings_.is_ground(g)) {
        if (!skolem) raise(ErrorKind::Instantiation, "tnot/1 requires a ground goal, got " + to_string(bindings_.resolve(g)));
        t = skolemize(bindings_.resolve(g));
    } else {
        t = bindings_.resolve(g);
    }
    const Program::Entry* e = program_.find(key);
    if (!e) raise(ErrorKind::Existence, "unknown procedure " + key.str());
    if (!e->decl.tabled()) raise(ErrorKind::Permission, "negation of non-tabled predicate " + key.str());
    Table* tab = get_table(call_variant(t, e->decl), e->decl);
    ensure_evaluated(tab);
    link(tab);

    auto tuple = std::make_shared<const std::vector<Term>>(match_tuple(tab->subgoal, tab->ans_subst_size, t));
    auto slot = tab->find(*tuple);
    if (tab->status == TableStatus::Completed && !slot) return k();
    if (slot && tab->answers[*slot].unconditional()) return 0;
    delays_.push_back(DelayLiteral::negative(tab->id, std::move(tuple)));
    Status st = k();
    delays_.pop_back();
    return st;
}

void Engine::ensure_evaluated(Table* t) {
    switch (t->status) {
    case TableStatus::New: evaluate(t); break;
    case TableStatus::Incomplete:
        if (!t->on_path && needs_rerun(t)) run(t);
        break;
    case TableStatus::Completed:
        if (t->node && t->node->invalid()) lazy_call(t);
        break;
    }
}

bool Engine::needs_rerun(const Table* t) const {
    for (auto it = path_.rbegin(); it != path_.rend(); ++it)
        if ((*it)->stack_index <= t->stack_index) return t->run_stamp < (*it)->iter_start;
    return false;
}

void Engine::evaluate(Table* t) {
    t->status = TableStatus::Incomplete;
    t->dfn = t->low = ++dfn_;
    t->stack_index = stack_.size();
    stack_.push_back(t);
    while (true) {
        std::uint64_t before = changes_;
        run(t);
        if (t->low < t->dfn) break;
        if (changes_ != before) continue;
        // Members not run since this iteration began may hold stale answers.
        for (std::size_t j = t->stack_index + 1; j < stack_.size(); ++j) {
            Table* m = stack_[j];
            if (m->status == TableStatus::Incomplete && m->run_stamp < t->iter_start) {
                run(m);
                t->low = std::min(t->low, m->low);
            }
        }
        if (t->low < t->dfn || changes_ == before) break;
    }
    if (t->low == t->dfn) complete_scc(t->stack_index);
}

void Engine::run(Table* t) {
    std::vector<DelayLiteral> saved;
    saved.swap(delays_);
    t->on_path = true;
    t->iter_start = t->run_stamp = ++stamp_;
    path_.push_back(t);
    run_clauses(t);
    path_.pop_back();
    t->on_path = false;
    delays_.swap(saved);
}

void Engine::run_clauses(Table* t) {
    auto m = bindings_.mark();
    std::int64_t soff = bindings_.alloc(t->ans_subst_size);
    Ref goal{t->subgoal, soff};
    auto add = [&]() -> Status {
        derive_answer(t, soff);
        return 0;
    };
    Status barrier = ++activation_;
    auto try_clause = [&](const Clause& c) {
        step();
        auto m2 = bindings_.mark();
        std::int64_t coff = bindings_.alloc(c.num_vars);
        if (bindings_.unify(Ref{c.head, coff}, goal)) {
            Status st = solve_body(c.body, 0, coff, barrier, Cont(add));
            if (st && st != barrier) raise(ErrorKind::Internal, "cut escaped its clause");
        }
        bindings_.undo(m2);
    };
    if (!t->own_clauses.empty()) {
        for (const ClauseRef& c : t->own_clauses) try_clause(*c);
    } else {
        Program::Entry* e = program_.find(t->pred);
        if (!e) raise(ErrorKind::Existence, "unknown procedure " + t->pred.str());
        const Term* fp = nullptr;
        if (t->subgoal.arity() > 0 && !t->subgoal.arg(0).is_var()) fp = &t->subgoal.arg(0);
        std::vector<std::uint32_t> cands;
        program_.candidates(*e, fp, cands);
        for (std::uint32_t pos : cands) {
            if (pos >= e->clauses.size()) break;
            ClauseRef c = e->clauses[pos];
            if (c) try_clause(*c);
        }
    }
    bindings_.undo(m);
}

void Engine::derive_answer(Table* t, std::int64_t soff) {
    step();
    ++stats_.answers_derived;
    const std::uint32_t n = t->ans_subst_size;
    std::unordered_map<std::int64_t, VarId> numbering;
    std::vector<Term> tuple(n);
    for (std::uint32_t v = 0; v < n; ++v) tuple[v] = bindings_.resolve(Ref{Term::var(v), soff}, numbering);
    auto nv = static_cast<std::uint32_t>(numbering.size());
    DelayList dl = delays_;
    if (t->answer_abstraction) {
        Term atom = instantiate(t->subgoal, n, tuple);
        if (term_depth(atom) > *t->answer_abstraction) {
            Term abs = canonical_variant(abstract_depth(atom, *t->answer_abstraction).term);
            tuple = match_tuple(t->subgoal, n, abs);
            std::vector<VarId> vs;
            for (const Term& x : tuple) collect_vars(x, vs);
            nv = static_cast<std::uint32_t>(vs.size());
            dl.push_back(DelayLiteral::restraint());
        }
    }
    canonicalize(dl);
    bool inserted = false;
    AnswerStatus s = t->add_answer(tuple, nv, dl, &inserted);
    if (s == AnswerStatus::NewSubstitution || s == AnswerStatus::Undeleted ||
        s == AnswerStatus::StrengthenedToUnconditional)
        ++changes_;
    if (!inserted) return;
    AnswerRef self{t->id, *t->find_slot(tuple)};
    for (const DelayLiteral& l : dl) {
        Table* o = l.table < tables_.size() ? tables_[l.table].get() : nullptr;
        if (!o) continue;
        if (l.kind == DelayLiteral::Positive && l.answer < o->answers.size()) {
            auto& deps = o->answers[l.answer].dependents;
            if (deps.empty() || !(deps.back() == self)) deps.push_back(self);
        } else if (l.kind == DelayLiteral::Negative) {
            if (o->neg_dependents.empty() || !(o->neg_dependents.back() == self)) o->neg_dependents.push_back(self);
        }
    }
}

TruthValue Engine::literal_truth(const DelayLiteral& l) const {
    const Table* t = l.table < tables_.size() ? tables_[l.table].get() : nullptr;
    switch (l.kind) {
    case DelayLiteral::Positive:
        if (!t) return TruthValue::Undefined;
        if (l.answer >= t->answers.size()) return TruthValue::False;
        return t->truth(l.answer);
    case DelayLiteral::Negative: {
        if (!t) return TruthValue::Undefined;
        auto slot = t->find(*l.tuple);
        if (!slot) return TruthValue::True;
        return negate(t->truth(*slot));
    }
    default: return TruthValue::Undefined;
    }
}

void Engine::complete_scc(std::size_t from) {
    std::vector<Table*> members(stack_.begin() + static_cast<std::ptrdiff_t>(from), stack_.end());
    stack_.resize(from);

    // Residual program over the members' conditional answers.
    std::unordered_map<std::uint64_t, std::uint32_t> atom_of;
    std::vector<AnswerRef> refs;
    for (Table* m : members)
        for (std::uint32_t i = 0; i < m->answers.size(); ++i)
            if (m->answers[i].visible() && !m->answers[i].unconditional()) {
                atom_of.emplace(answer_key(m->id, i), static_cast<std::uint32_t>(refs.size()));
                refs.push_back({m->id, i});
            }
    std::vector<AnswerRef> origins;
    if (!refs.empty()) {
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
                const Table* t = l.table < tables_.size() ? tables_[l.table].get() : nullptr;
                if (t) {
                    auto slot = t->find(*l.tuple);
                    if (slot) {
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
        std::vector<ResidualAtom> atoms(refs.size());
        for (std::size_t a = 0; a < refs.size(); ++a) {
            const Answer& ans = tables_[refs[a].table]->answers[refs[a].index];
            for (const DelayList& dl : ans.delay_lists) {
                std::vector<ResidualLiteral> conj;
                for (const DelayLiteral& l : dl) conj.push_back(translate(l));
                atoms[a].lists.push_back(std::move(conj));
            }
        }
        std::vector<TruthValue> val = residual_wfs(atoms);
        auto lit_value = [&](const ResidualLiteral& r) {
            if (r.kind == ResidualLiteral::Pos) return val[r.atom];
            if (r.kind == ResidualLiteral::Neg) return negate(val[r.atom]);
            return r.value;
        };
        for (std::size_t a = 0; a < refs.size(); ++a) {
            Table* t = tables_[refs[a].table].get();
            Answer& ans = t->answers[refs[a].index];
            if (val[a] == TruthValue::True) {
                ans.delay_lists.clear();
            } else if (val[a] == TruthValue::False) {
                if (t->reevaluating && !ans.fresh && !ans.was_unconditional) origins.push_back(refs[a]);
                t->remove_answer(refs[a].index);
            } else {
                std::vector<DelayList> kept;
                for (std::size_t l = 0; l < ans.delay_lists.size(); ++l) {
                    bool dead = false;
                    DelayList out;
                    for (std::size_t j = 0; j < ans.delay_lists[l].size(); ++j) {
                        TruthValue v = lit_value(atoms[a].lists[l][j]);
                        if (v == TruthValue::False) dead = true;
                        else if (v == TruthValue::Undefined) out.push_back(ans.delay_lists[l][j]);
                    }
                    if (!dead && !out.empty() && std::find(kept.begin(), kept.end(), out) == kept.end())
                        kept.push_back(std::move(out));
                }
                if (!kept.empty()) ans.delay_lists = std::move(kept);
            }
        }
    }

    std::unordered_set<IdgNode*> skip;
    for (Table* m : members) {
        m->status = TableStatus::Completed;
        m->on_path = false;
        if (m->node) skip.insert(m->node);
    }

    std::vector<Table*> unchanged;
    for (Table* m : members) {
        if (!m->reevaluating) continue;
        ReevalOutcome out;
        out.subgoal = m->subgoal;
        out.old_count = m->old_count;
        std::size_t origins_before = origins.size();
        for (std::uint32_t i = 0; i < m->answers.size(); ++i) {
            Answer& a = m->answers[i];
            if (!a.alive) continue;
            if (a.deleted) {
                if (a.was_unconditional) {
                    ++out.removed;
                } else {
                    ++out.removed_conditional;
                    origins.push_back({m->id, i});
                }
                m->remove_answer(i);
                continue;
            }
            ++out.new_count;
            if (a.fresh) {
                out.new_answer = true;
                a.fresh = false;
                continue;
            }
            if (a.was_unconditional && !a.unconditional()) {
                ++out.weakened;
                out.new_answer = true;
            } else if (!a.was_unconditional && a.unconditional()) {
                ++out.strengthened;
                origins.push_back({m->id, i});
            }
        }
        out.simplification = origins.size() > origins_before;
        out.changed = out.new_answer || out.new_count != out.old_count;
        m->reevaluating = false;
        if (IdgNode* n = m->node) {
            n->reeval_ready = ReevalReady::ComputeDependenciesFirst;
            n->previous_nbr_of_answers = out.old_count;
            n->nbr_of_answers = out.new_count;
            n->new_answer = out.new_answer;
        }
        if (out.changed) {
            ++stats_.reevals_changed;
        } else {
            ++stats_.reevals_unchanged;
            out.validity_propagated = true;
            unchanged.push_back(m);
        }
        reeval_log_.push_back(std::move(out));
    }
    for (Table* m : unchanged)
        if (m->node) idg_.propagate_validity(m->node, &skip);
    if (!origins.empty()) simplify_closure(origins);
}

} // namespace inctab
