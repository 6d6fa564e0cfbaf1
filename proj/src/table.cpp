#include "inctab/table.hpp"

#include <algorithm>
#include <tuple>

#include "inctab/error.hpp"

namespace inctab {

const char* truth_name(TruthValue v) {
    switch (v) {
    case TruthValue::True: return "true";
    case TruthValue::Undefined: return "undefined";
    case TruthValue::False: return "false";
    }
    return "?";
}

const char* status_name(TableStatus s) {
    switch (s) {
    case TableStatus::New: return "new";
    case TableStatus::Incomplete: return "incomplete";
    case TableStatus::Completed: return "completed";
    }
    return "?";
}

const char* answer_status_name(AnswerStatus s) {
    switch (s) {
    case AnswerStatus::NewSubstitution: return "new_substitution";
    case AnswerStatus::Repeated: return "repeated";
    case AnswerStatus::Undeleted: return "undeleted";
    case AnswerStatus::ConditionalAdded: return "conditional_added";
    case AnswerStatus::StrengthenedToUnconditional: return "strengthened_to_unconditional";
    }
    return "?";
}

namespace {

int compare_tuples(const TupleRef& a, const TupleRef& b) {
    if (a == b) return 0;
    if (!a) return -1;
    if (!b) return 1;
    if (a->size() != b->size()) return a->size() < b->size() ? -1 : 1;
    for (std::size_t i = 0; i < a->size(); ++i) {
        int c = compare((*a)[i], (*b)[i]);
        if (c != 0) return c;
    }
    return 0;
}

} // namespace

bool operator==(const DelayLiteral& a, const DelayLiteral& b) {
    return a.kind == b.kind && a.table == b.table && a.answer == b.answer && compare_tuples(a.tuple, b.tuple) == 0;
}

bool operator<(const DelayLiteral& a, const DelayLiteral& b) {
    if (std::tie(a.kind, a.table, a.answer) != std::tie(b.kind, b.table, b.answer))
        return std::tie(a.kind, a.table, a.answer) < std::tie(b.kind, b.table, b.answer);
    return compare_tuples(a.tuple, b.tuple) < 0;
}

void canonicalize(DelayList& dl) {
    std::sort(dl.begin(), dl.end());
    dl.erase(std::unique(dl.begin(), dl.end()), dl.end());
}

std::optional<std::uint32_t> Table::find_slot(const std::vector<Term>& tuple) const {
    auto [lo, hi] = answer_index.equal_range(hash_terms(tuple));
    for (auto it = lo; it != hi; ++it)
        if (answers[it->second].subst == tuple) return it->second;
    return std::nullopt;
}

std::optional<std::uint32_t> Table::find(const std::vector<Term>& tuple) const {
    auto idx = find_slot(tuple);
    if (idx && answers[*idx].visible()) return idx;
    return std::nullopt;
}

AnswerStatus Table::add_answer(const std::vector<Term>& tuple, std::uint32_t num_vars, DelayList dl,
                               bool* inserted_list) {
    if (inserted_list) *inserted_list = false;
    if (status == TableStatus::Completed) raise(ErrorKind::Internal, "answer added to a completed table");
    auto slot = find_slot(tuple);
    if (!slot) {
        auto idx = static_cast<std::uint32_t>(answers.size());
        Answer a;
        a.subst = tuple;
        a.num_vars = num_vars;
        a.fresh = reevaluating;
        if (!dl.empty()) {
            a.delay_lists.push_back(std::move(dl));
            if (inserted_list) *inserted_list = true;
        }
        answers.push_back(std::move(a));
        answer_index.emplace(hash_terms(tuple), idx);
        ++live_answers;
        return AnswerStatus::NewSubstitution;
    }
    Answer& a = answers[*slot];
    if (a.deleted) {
        a.deleted = false;
        a.delay_lists.clear();
        if (!dl.empty()) {
            a.delay_lists.push_back(std::move(dl));
            if (inserted_list) *inserted_list = true;
        }
        return AnswerStatus::Undeleted;
    }
    if (a.unconditional()) return AnswerStatus::Repeated;
    if (dl.empty()) {
        a.delay_lists.clear();
        return AnswerStatus::StrengthenedToUnconditional;
    }
    if (std::find(a.delay_lists.begin(), a.delay_lists.end(), dl) != a.delay_lists.end())
        return AnswerStatus::Repeated;
    a.delay_lists.push_back(std::move(dl));
    if (inserted_list) *inserted_list = true;
    return AnswerStatus::ConditionalAdded;
}

void Table::begin_reeval_marks() {
    for (Answer& a : answers) {
        if (!a.alive) continue;
        if (!a.deleted) a.was_unconditional = a.unconditional();
        a.deleted = true;
        a.fresh = false;
        a.delay_lists.clear();
    }
}

void Table::remove_answer(std::uint32_t idx) {
    Answer& a = answers[idx];
    if (!a.alive) return;
    auto [lo, hi] = answer_index.equal_range(hash_terms(a.subst));
    for (auto it = lo; it != hi; ++it) {
        if (it->second == idx) {
            answer_index.erase(it);
            break;
        }
    }
    a.alive = false;
    a.deleted = false;
    a.delay_lists.clear();
    --live_answers;
}

Term instantiate(const Term& pattern, std::uint32_t n, const std::vector<Term>& tuple) {
    if (pattern.ground()) return pattern;
    Substitution s;
    for (std::uint32_t i = 0; i < n && i < tuple.size(); ++i) {
        const Term& v = tuple[i];
        if (v.ground()) {
            s.bind(i, v);
            continue;
        }
        // Shift the answer's variables above the pattern's.
        Substitution shift;
        for (VarId x : vars_of(v)) shift.bind(x, Term::var(x + n));
        s.bind(i, shift.apply(v));
    }
    return canonical_variant(s.apply(pattern));
}

Term Table::answer_atom(std::uint32_t idx) const { return instantiate(subgoal, ans_subst_size, answers[idx].subst); }

std::size_t Table::conditional_count() const {
    std::size_t n = 0;
    for (const Answer& a : answers)
        if (a.visible() && !a.unconditional()) ++n;
    return n;
}

namespace {

// Least model of the residual program where negative and fixed literals are
// decided by `static_ok`, and positive literals by derivation.
template <typename StaticOk>
std::vector<char> least_model(const std::vector<ResidualAtom>& atoms,
                              const std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>>& occurs,
                              StaticOk static_ok) {
    const std::size_t n = atoms.size();
    std::vector<char> derived(n, 0);
    std::vector<std::vector<int>> counts(n);
    std::vector<std::uint32_t> queue;
    for (std::uint32_t a = 0; a < n; ++a) {
        counts[a].resize(atoms[a].lists.size());
        for (std::size_t l = 0; l < atoms[a].lists.size(); ++l) {
            int pos = 0;
            bool dead = false;
            for (const ResidualLiteral& lit : atoms[a].lists[l]) {
                if (lit.kind == ResidualLiteral::Pos) ++pos;
                else if (!static_ok(lit)) dead = true;
            }
            counts[a][l] = dead ? -1 : pos;
            if (!dead && pos == 0 && !derived[a]) {
                derived[a] = 1;
                queue.push_back(a);
            }
        }
    }
    while (!queue.empty()) {
        std::uint32_t j = queue.back();
        queue.pop_back();
        for (auto [a, l] : occurs[j]) {
            int& c = counts[a][l];
            if (c <= 0) continue;
            if (--c == 0 && !derived[a]) {
                derived[a] = 1;
                queue.push_back(a);
            }
        }
    }
    return derived;
}

} // namespace

std::vector<TruthValue> residual_wfs(const std::vector<ResidualAtom>& atoms) {
    const std::size_t n = atoms.size();
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> occurs(n);
    for (std::uint32_t a = 0; a < n; ++a)
        for (std::uint32_t l = 0; l < atoms[a].lists.size(); ++l)
            for (const ResidualLiteral& lit : atoms[a].lists[l])
                if (lit.kind == ResidualLiteral::Pos) occurs[lit.atom].emplace_back(a, l);

    std::vector<char> possible(n, 1);
    std::vector<char> truth;
    while (true) {
        truth = least_model(atoms, occurs, [&](const ResidualLiteral& lit) {
            if (lit.kind == ResidualLiteral::Neg) return !possible[lit.atom];
            return lit.value == TruthValue::True;
        });
        auto next = least_model(atoms, occurs, [&](const ResidualLiteral& lit) {
            if (lit.kind == ResidualLiteral::Neg) return !truth[lit.atom];
            return lit.value != TruthValue::False;
        });
        if (next == possible) break;
        possible = std::move(next);
    }
    std::vector<TruthValue> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = truth[i] ? TruthValue::True : (possible[i] ? TruthValue::Undefined : TruthValue::False);
    return out;
}

} // namespace inctab
