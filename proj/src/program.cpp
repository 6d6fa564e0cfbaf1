#include "inctab/program.hpp"

#include <algorithm>

#include "inctab/error.hpp"

namespace inctab {

PredicateKey PredicateKey::of(const Term& t) {
    if (t.is_var()) raise(ErrorKind::Instantiation, "goal is an unbound variable");
    if (!t.is_callable()) raise(ErrorKind::Type, "callable expected, got " + to_string(t));
    return {t.symbol(), t.arity()};
}

std::string PredicateKey::str() const { return symbol_name(name) + "/" + std::to_string(arity); }

IndexKey IndexKey::of(const Term& t) {
    IndexKey k;
    k.kind = t.kind();
    switch (t.kind()) {
    case TermKind::Int: k.value = t.int_value(); break;
    case TermKind::Atom: k.value = t.symbol(); break;
    case TermKind::Compound:
        k.value = t.symbol();
        k.arity = t.arity();
        break;
    case TermKind::Var: break;
    }
    return k;
}

namespace {

Symbol sym(const char* s) { return intern(s); }

bool is_functor(const Term& t, Symbol name, std::uint32_t arity) {
    return t.is_callable() && t.symbol() == name && t.arity() == arity;
}

struct Syms {
    Symbol neck = sym(":-");
    Symbol comma = sym(",");
    Symbol semi = sym(";");
    Symbol tnot = sym("tnot");
    Symbol sk_not = sym("sk_not");
    Symbol undefined = sym("undefined");
    Symbol eq = sym("=");
    Symbol neq = sym("\\=");
    Symbol atomic = sym("atomic");
    Symbol cut = sym("!");
    Symbol true_ = sym("true");
    Symbol fail = sym("fail");
    Symbol false_ = sym("false");
    Symbol assert_ = sym("assert");
    Symbol assertz = sym("assertz");
    Symbol retract = sym("retract");
};

const Syms& syms() {
    static const Syms s;
    return s;
}

void require_callable(const Term& t, const char* what) {
    if (t.is_var()) raise(ErrorKind::Instantiation, std::string(what) + " argument is an unbound variable");
    if (!t.is_callable()) raise(ErrorKind::Type, std::string(what) + " expects a callable term, got " + to_string(t));
}

Literal make_literal(const Term& g) {
    const Syms& s = syms();
    if (g.is_var()) raise(ErrorKind::Instantiation, "variable body goals are not supported");
    if (!g.is_callable()) raise(ErrorKind::Type, "callable body goal expected, got " + to_string(g));
    Literal lit;
    if (is_functor(g, s.tnot, 1) || is_functor(g, s.sk_not, 1)) {
        lit.kind = g.symbol() == s.tnot ? LitKind::Tnot : LitKind::SkNot;
        require_callable(g.arg(0), g.symbol() == s.tnot ? "tnot/1" : "sk_not/1");
        lit.a = g.arg(0);
        lit.key = PredicateKey::of(lit.a);
        if (lit.key.name == s.comma || lit.key.name == s.semi)
            raise(ErrorKind::Type, "negation of a conjunction or disjunction is not supported");
        return lit;
    }
    if (is_functor(g, s.undefined, 0)) lit.kind = LitKind::Undefined;
    else if (is_functor(g, s.cut, 0)) lit.kind = LitKind::Cut;
    else if (is_functor(g, s.true_, 0)) lit.kind = LitKind::True;
    else if (is_functor(g, s.fail, 0) || is_functor(g, s.false_, 0)) lit.kind = LitKind::Fail;
    else if (is_functor(g, s.eq, 2) || is_functor(g, s.neq, 2)) {
        lit.kind = g.symbol() == s.eq ? LitKind::Unify : LitKind::NotUnify;
        lit.a = g.arg(0);
        lit.b = g.arg(1);
    } else if (is_functor(g, s.atomic, 1)) {
        lit.kind = LitKind::Atomic;
        lit.a = g.arg(0);
    } else if (is_functor(g, s.assert_, 1) || is_functor(g, s.assertz, 1)) {
        lit.kind = LitKind::Assert;
        lit.a = g.arg(0);
    } else if (is_functor(g, s.retract, 1)) {
        lit.kind = LitKind::Retract;
        lit.a = g.arg(0);
    } else {
        lit.kind = LitKind::Call;
        lit.a = g;
        lit.key = PredicateKey::of(g);
        if (is_reserved_symbol(lit.key.name))
            raise(ErrorKind::Permission, "reserved predicate " + lit.key.str());
    }
    return lit;
}

// Disjunctive normal form of a body: each alternative is a conjunction.
void expand(const Term& g, std::vector<std::vector<Term>>& alts) {
    const Syms& s = syms();
    if (is_functor(g, s.comma, 2)) {
        expand(g.arg(0), alts);
        expand(g.arg(1), alts);
        return;
    }
    if (is_functor(g, s.semi, 2)) {
        std::vector<std::vector<Term>> left = alts, right = alts;
        expand(g.arg(0), left);
        expand(g.arg(1), right);
        alts = std::move(left);
        alts.insert(alts.end(), std::make_move_iterator(right.begin()), std::make_move_iterator(right.end()));
        return;
    }
    for (auto& a : alts) a.push_back(g);
}

std::vector<std::vector<Term>> dnf(const Term& body) {
    std::vector<std::vector<Term>> alts(1);
    expand(body, alts);
    return alts;
}

bool contains_disjunction(const Term& g) {
    const Syms& s = syms();
    if (is_functor(g, s.semi, 2)) return true;
    if (is_functor(g, s.comma, 2)) return contains_disjunction(g.arg(0)) || contains_disjunction(g.arg(1));
    return false;
}

} // namespace

Term Clause::to_term() const {
    if (body.empty()) return head;
    auto lit_term = [](const Literal& l) -> Term {
        switch (l.kind) {
        case LitKind::Call: return l.a;
        case LitKind::Tnot: return Term::compound("tnot", {l.a});
        case LitKind::SkNot: return Term::compound("sk_not", {l.a});
        case LitKind::Undefined: return Term::atom("undefined");
        case LitKind::Unify: return Term::compound("=", {l.a, l.b});
        case LitKind::NotUnify: return Term::compound("\\=", {l.a, l.b});
        case LitKind::Atomic: return Term::compound("atomic", {l.a});
        case LitKind::Cut: return Term::atom("!");
        case LitKind::True: return Term::atom("true");
        case LitKind::Fail: return Term::atom("fail");
        case LitKind::Assert: return Term::compound("assert", {l.a});
        case LitKind::Retract: return Term::compound("retract", {l.a});
        }
        return Term::atom("true");
    };
    Term b = lit_term(body.back());
    for (std::size_t i = body.size() - 1; i-- > 0;) b = Term::compound(",", {lit_term(body[i]), b});
    return Term::compound(":-", {head, b});
}

std::vector<Clause> clauses_from_term(const Term& t0) {
    const Syms& s = syms();
    if (t0.is_var()) raise(ErrorKind::Instantiation, "clause is an unbound variable");
    Term head = t0;
    Term body = Term::atom(s.true_);
    bool has_body = false;
    if (is_functor(t0, s.neck, 2)) {
        head = t0.arg(0);
        body = t0.arg(1);
        has_body = true;
    }
    require_callable(head, "clause head");
    PredicateKey key = PredicateKey::of(head);
    if (is_reserved_symbol(key.name)) raise(ErrorKind::Permission, "reserved predicate " + key.str());
    if (key.name == s.comma || key.name == s.semi || key.name == s.neck)
        raise(ErrorKind::Permission, "cannot define control construct " + key.str());

    std::vector<Clause> out;
    auto alts = has_body ? dnf(body) : std::vector<std::vector<Term>>(1);
    bool disj = has_body && contains_disjunction(body);
    for (auto& conj : alts) {
        std::vector<Term> parts{head};
        parts.insert(parts.end(), conj.begin(), conj.end());
        std::uint32_t nv = 0;
        auto canon = canonical_variant(parts, &nv);
        Clause c;
        c.head = canon[0];
        c.key = key;
        c.num_vars = nv;
        for (std::size_t i = 1; i < canon.size(); ++i) {
            Literal lit = make_literal(canon[i]);
            if (lit.kind == LitKind::True) continue;
            if (lit.kind == LitKind::Cut && disj)
                raise(ErrorKind::Permission, "cut inside a disjunctive body is not supported in " + key.str());
            c.body.push_back(std::move(lit));
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<std::vector<Literal>> goal_alternatives(const Term& goal) {
    std::vector<std::vector<Literal>> out;
    for (auto& conj : dnf(goal)) {
        std::vector<Literal> lits;
        for (const Term& g : conj) {
            Literal l = make_literal(g);
            if (l.kind == LitKind::Cut) raise(ErrorKind::Permission, "cut is not allowed at top level");
            if (l.kind != LitKind::True) lits.push_back(std::move(l));
        }
        out.push_back(std::move(lits));
    }
    return out;
}

Program::Entry* Program::find(const PredicateKey& k) {
    auto it = preds_.find(k);
    return it == preds_.end() ? nullptr : &it->second;
}

const Program::Entry* Program::find(const PredicateKey& k) const {
    auto it = preds_.find(k);
    return it == preds_.end() ? nullptr : &it->second;
}

Program::Entry& Program::entry(const PredicateKey& k) {
    auto [it, fresh] = preds_.try_emplace(k);
    if (fresh) {
        it->second.decl.key = k;
        order_.push_back(k);
    }
    return it->second;
}

void Program::declare(const PredicateDecl& d) {
    const std::string name = d.key.str();
    if (is_reserved_symbol(d.key.name)) raise(ErrorKind::Permission, "reserved predicate " + name);
    if (d.kind == PredKind::Dynamic && d.tabled())
        raise(ErrorKind::Permission, "tabled predicates must use static code: " + name);
    if (d.idg_abstraction && d.kind != PredKind::Dynamic)
        raise(ErrorKind::Permission, "abstract/1 applies only to dynamic incremental predicates: " + name);
    if (d.idg_abstraction && !d.incremental)
        raise(ErrorKind::Permission, "abstract/1 requires an incremental dynamic predicate: " + name);
    if ((d.subgoal_abstraction || d.answer_abstraction) && !d.tabled())
        raise(ErrorKind::Permission, "subgoal/answer abstraction applies only to tabled predicates: " + name);

    Entry& e = entry(d.key);
    if (!e.declared) {
        if (d.kind == PredKind::Dynamic && !e.clauses.empty())
            raise(ErrorKind::Permission, "cannot make static procedure dynamic: " + name);
        e.decl = d;
        e.declared = true;
        return;
    }

    PredicateDecl& cur = e.decl;
    bool cur_tabled = cur.tabled();
    bool new_tabled = d.tabled();
    if (cur.kind != d.kind) {
        if (cur.kind == PredKind::Dynamic && new_tabled)
            raise(ErrorKind::Permission, "tabled incremental predicates must use static code: " + name);
        if (d.kind == PredKind::Dynamic && cur_tabled)
            raise(ErrorKind::Permission, "cannot make tabled predicate dynamic: " + name);
        raise(ErrorKind::Permission, "conflicting declarations for " + name);
    }
    if (d.kind == PredKind::Dynamic && cur.incremental != d.incremental)
        raise(ErrorKind::Permission, "conflicting incremental attribute for " + name);
    if (cur_tabled && new_tabled && cur.tabling != d.tabling)
        raise(ErrorKind::Permission, "conflicting tabling attributes for " + name);
    auto merge = [&](AbstractionDepth& into, const AbstractionDepth& from) {
        if (!from) return;
        if (into && *into != *from) raise(ErrorKind::Permission, "conflicting abstraction depth for " + name);
        into = from;
    };
    if (new_tabled) cur.tabling = d.tabling;
    merge(cur.idg_abstraction, d.idg_abstraction);
    merge(cur.subgoal_abstraction, d.subgoal_abstraction);
    merge(cur.answer_abstraction, d.answer_abstraction);
}

void Program::append(Entry& e, Clause c) {
    c.id = next_clause_id_++;
    auto pos = static_cast<std::uint32_t>(e.clauses.size());
    if (c.head.arity() > 0 && !c.head.arg(0).is_var()) e.index[IndexKey::of(c.head.arg(0))].push_back(pos);
    else e.unindexed.push_back(pos);
    e.clauses.push_back(std::make_shared<const Clause>(std::move(c)));
    ++e.live;
}

void Program::check_negation_targets(const Clause& c) {
    for (const Literal& l : c.body) {
        if (l.kind != LitKind::Tnot && l.kind != LitKind::SkNot) continue;
        const Entry* t = find(l.key);
        if (t && t->declared && t->decl.kind == PredKind::Dynamic)
            raise(ErrorKind::Permission, "negation of non-tabled predicate " + l.key.str() + " in " + c.key.str());
        pending_negations_.emplace_back(l.key, c.key);
    }
}

void Program::load_clause(Clause c) {
    Entry& e = entry(c.key);
    if (e.declared && e.decl.kind == PredKind::Dynamic)
        raise(ErrorKind::Permission, "clauses for dynamic predicate " + c.key.str() + " must be asserted");
    check_negation_targets(c);
    append(e, std::move(c));
}

void Program::add_dynamic(Clause c) {
    Entry* e = find(c.key);
    if (!e || !e->declared || e->decl.kind != PredKind::Dynamic)
        raise(ErrorKind::Permission, "cannot modify static procedure " + c.key.str());
    for (const Literal& l : c.body) {
        if (l.kind != LitKind::Tnot && l.kind != LitKind::SkNot) continue;
        const Entry* t = find(l.key);
        if (!t || !t->decl.tabled())
            raise(ErrorKind::Permission, "negation of non-tabled predicate " + l.key.str() + " in " + c.key.str());
    }
    append(*e, std::move(c));
}

bool Program::remove_dynamic(const Clause& c) {
    Entry* e = find(c.key);
    if (!e || !e->declared || e->decl.kind != PredKind::Dynamic)
        raise(ErrorKind::Permission, "cannot modify static procedure " + c.key.str());
    Term target = c.to_term();
    for (auto& slot : e->clauses) {
        if (slot && is_variant(slot->to_term(), target)) {
            slot.reset();
            --e->live;
            return true;
        }
    }
    return false;
}

void Program::candidates(const Entry& e, const Term* first_arg, std::vector<std::uint32_t>& out) const {
    out.clear();
    const auto n = static_cast<std::uint32_t>(e.clauses.size());
    if (!first_arg || first_arg->is_var()) {
        for (std::uint32_t i = 0; i < n; ++i)
            if (e.clauses[i]) out.push_back(i);
        return;
    }
    auto it = e.index.find(IndexKey::of(*first_arg));
    static const std::vector<std::uint32_t> none;
    const auto& a = it == e.index.end() ? none : it->second;
    const auto& b = e.unindexed;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        std::uint32_t p;
        if (j == b.size() || (i < a.size() && a[i] < b[j])) p = a[i++];
        else p = b[j++];
        if (p < n && e.clauses[p]) out.push_back(p);
    }
}

void Program::validate() const {
    for (const auto& [target, from] : pending_negations_) {
        const Entry* t = find(target);
        if (!t || (!t->declared && t->clauses.empty()))
            raise(ErrorKind::Existence, "unknown procedure " + target.str() + " negated in " + from.str());
        if (!t->decl.tabled())
            raise(ErrorKind::Permission, "negation of non-tabled predicate " + target.str() + " in " + from.str());
    }
}

std::vector<PredicateKey> Program::predicates() const { return order_; }

} // namespace inctab
